#pragma once

// Per-layer network statistics.
//
// Every function treats layer.n_nodes() as the node count N; restrict a
// layer with induced_sublayer() to compute statistics over a smaller node
// set. Functions throw UndefinedStatistic where a statistic has no value.

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "tradenet/net.hpp"
#include "tradenet/numeric.hpp"

namespace tradenet::stats {

enum class Mode { Binary, Weighted };

// Edges over N(N-1) ordered pairs; needs N >= 2.
double density(const Layer& layer);

// Share of edges whose reverse edge also exists; 0 without edges.
double bilateral_density(const Layer& layer);

// sum_{i<j} (x_ij - x_ji)^2 / sum_{i<j} (x_ij^2 + x_ji^2); 0 without edges.
double weighted_asymmetry(const Layer& layer);
// 2 sum_{i<j} x_ij x_ji / sum_{i<j} (x_ij^2 + x_ji^2); the complement of
// weighted_asymmetry.
double weighted_reciprocity(const Layer& layer);

// Nodes in the largest weakly connected component (isolated nodes are
// components of size one).
std::size_t lcc_size(const Layer& layer);

// Freeman-style centralization of total degree, normalized by the value of
// a directed in-out star, (N-1)(2N-4). 0 for N < 3.
double centralization(const Layer& layer);

// Pearson correlation between a node's total degree (strength) and the
// average total degree (strength) of its neighbours:
//   ANND_i = sum_j (a_ij + a_ji) k_j / k_i,  ANNS_i = sum_j (a_ij + a_ji) s_j / k_i.
// Nodes without links are excluded.
double assortativity(const Layer& layer, Mode mode);

// Directed total clustering per node,
//   C_i = [(M + M^T)^3]_ii / (2 [d_i (d_i - 1) - 2 d_i^bil]),
// with M = A (binary) or M_ij = (x_ij / max x)^(1/3) (weighted). Nodes with a
// nonpositive denominator get nullopt.
std::vector<std::optional<double>> node_clustering(const Layer& layer, Mode mode);
// Mean of the defined node coefficients.
double clustering(const Layer& layer, Mode mode);

// Population mean and standard deviation of the edge weights of a log layer.
Moments weight_moments(const Layer& log_layer);

// Mean import intensity (s_in / k_in over importers) divided by mean export
// intensity (s_out / k_out over exporters).
double intensity_ratio(const Layer& layer);

// Pearson correlation between every pair of log layers over the dyads
// present in both; nullopt where fewer than two common dyads exist or a
// side has zero variance. Diagonal is 1.
using CorrelationMatrix = std::vector<std::vector<std::optional<double>>>;
CorrelationMatrix layer_weight_correlation(std::span<const Layer> log_layers);

inline constexpr std::array<std::string_view, 11> kStatNames = {
    "density",           "bilateral_density", "weighted_asymmetry", "lcc_size",
    "centralization",    "bin_assortativity", "wei_assortativity",  "bin_clustering",
    "wei_clustering",    "mean_log_weight",   "std_log_weight",
};

// The statistic vector of one layer. Undefined statistics are nullopt.
struct StatsRecord {
    std::optional<double> density;
    std::optional<double> bilateral_density;
    std::optional<double> weighted_asymmetry;
    std::size_t lcc_size = 0;
    std::optional<double> centralization;
    std::optional<double> bin_assortativity;
    std::optional<double> wei_assortativity;
    std::optional<double> bin_clustering;
    std::optional<double> wei_clustering;
    std::optional<double> mean_log_weight;
    std::optional<double> std_log_weight;
    std::optional<double> intensity_ratio;

    // In kStatNames order.
    std::array<std::optional<double>, 11> values() const;
};

// Binary statistics use the adjacency of `layer`; weighted ones use its
// log-transformed weights, with nonpositive logs (flows <= 1) entering as
// zero intensity. The intensity ratio uses raw weights.
StatsRecord compute_stats(const Layer& layer);

}  // namespace tradenet::stats
