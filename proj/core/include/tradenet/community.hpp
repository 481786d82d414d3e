#pragma once

// Directed weighted modularity and its multilevel maximizer.
//
//   Q = (1/X) sum_ij (x_ij - gamma * s_out(i) * s_in(j) / X) delta(c_i, c_j)
//
// The maximizer runs seeded restarts of vertex moving with coarsening
// (Louvain phases) followed by multilevel refinement: the coarsening
// levels are revisited from the coarsest to the input graph, moving
// vertices at each level.

#include <cstdint>
#include <vector>

#include "tradenet/net.hpp"

namespace tradenet::community {

struct DetectorConfig {
    double resolution = 1.0;
    int restarts = 10;
    int max_iterations = 20;   // coarsen/refine cycles per restart
    int max_levels = 20;       // coarsening levels per cycle
    int max_repetitions = 50;  // vertex-moving sweeps per level
    double min_gain = 1e-10;
    std::uint64_t rng_seed = 42;
    int threads = 1;  // restarts run concurrently up to this bound

    // Throws InvalidInput when a count is < 1, the tolerance is not
    // positive or the resolution is not positive.
    void validate() const;
};

struct RestartTrace {
    int restart = 0;
    std::uint64_t seed = 0;
    double modularity = 0.0;
    std::vector<double> trajectory;
};

struct DetectionResult {
    Partition partition;
    double modularity = 0.0;
    int restarts_run = 0;
    int best_restart = 0;
    // True when every restart ended below the trivial baseline and the
    // trivial partition was returned instead.
    bool fell_back = false;
    std::vector<RestartTrace> traces;
};

// Throws UndefinedStatistic for a layer without weight and InvalidInput when
// the partition does not cover the layer. Self-loops (coarse graphs) count
// as intra-community weight.
double evaluate_modularity(const Layer& layer, const Partition& partition, double resolution = 1.0);

// Modularity change from moving `node` to `target`; target ==
// partition.n_communities() means a new singleton community.
double local_move_gain(const Layer& layer, const Partition& partition, NodeIndex node, CommunityId target,
                       double resolution = 1.0);

// One node per community, edge weights summed, intra-community weight as
// self-loops.
Layer coarsen(const Layer& layer, const Partition& partition);

// Best partition over `restarts` independent seeded runs; deterministic for
// a fixed config. Never returns a partition with lower modularity than the
// trivial one (all linked nodes together, edgeless nodes alone).
DetectionResult detect(const Layer& layer, const DetectorConfig& config = {});

}  // namespace tradenet::community
