#pragma once

// Multiplex modularity Q* and its generalized Louvain optimizer.
//
// Vertices are (node, layer) pairs. Intra-layer edges carry the layer's
// flows with the directed null model s_out * s_in / X_x per layer; every
// node's copies are coupled all-to-all across layers with weight theta:
//
//   Q* = (1/W) sum_{ij,xy} [ (x_ij,x - g_x s_out_i,x s_in_j,x / X_x) d_xy
//                            + d_ij theta [x != y] ] d(c_ix, c_jy)
//
// with W = sum_x X_x + theta * N * L * (L - 1), the total supra-graph weight
// counting each ordered pair of copies once. With one layer Q* is the
// single-layer modularity.

#include <optional>
#include <string_view>
#include <vector>

#include "tradenet/community.hpp"
#include "tradenet/net.hpp"

namespace tradenet::multilayer {

struct MultilayerConfig {
    // Overrides the network's coupling when set.
    std::optional<double> coupling;
    // Per-layer resolutions; empty means 1 for every layer.
    std::vector<double> resolutions;
    community::DetectorConfig detector;

    double coupling_for(const MultiNetwork& net) const { return coupling.value_or(net.coupling()); }
    std::vector<double> resolutions_for(const MultiNetwork& net) const;
    void validate(const MultiNetwork& net) const;
};

// Throws UndefinedStatistic for a network without weight.
double evaluate_q_star(const MultiNetwork& net, const MultilayerPartition& partition,
                       const MultilayerConfig& config = {});

struct MultilayerResult {
    MultilayerPartition partition;
    double q_star = 0.0;
    int restarts_run = 0;
    int best_restart = 0;
    bool fell_back = false;
    std::vector<community::RestartTrace> traces;
};

// Needs at least one layer with positive volume.
MultilayerResult detect_multilayer(const MultiNetwork& net, const MultilayerConfig& config = {});

// Communities of one layer's node copies.
Partition project(const MultilayerPartition& partition, std::size_t layer);
Partition project(const MultilayerPartition& partition, const MultiNetwork& net, std::string_view commodity);

// Number of distinct communities among each node's layer copies.
std::vector<std::size_t> diversification(const MultilayerPartition& partition);

// counts[d] = number of nodes with diversification d, d in [0, L].
std::vector<std::size_t> diversification_histogram(const MultilayerPartition& partition);

}  // namespace tradenet::multilayer
