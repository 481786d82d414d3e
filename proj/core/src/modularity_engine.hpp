#pragma once

// Shared machinery behind single-layer modularity and multilayer Q*.
//
// Both objectives have the form
//
//   Q = (1/W) sum_c [ I_c - sum_x scale_x * Out_{c,x} * In_{c,x} ]
//
// over a directed graph (possibly with self-loops), where I_c is the edge
// weight inside community c, Out_{c,x}/In_{c,x} are the out/in strengths of
// c's members in null-model stratum x, and scale_x = gamma_x / X_x. A single
// layer is one stratum with W = X; a multiplex has one stratum per layer and
// coupling edges that carry no null-model term.

#include <cstdint>
#include <span>
#include <vector>

#include "tradenet/net.hpp"

namespace tradenet::detail {

struct StratumStrength {
    std::uint32_t stratum = 0;
    double out = 0.0;
    double in = 0.0;
};

struct NullModelGraph {
    Layer graph;
    // Per vertex, sorted by stratum, only strata with nonzero strength.
    std::vector<std::vector<StratumStrength>> strata;
    std::vector<double> scale;
    double total_weight = 0.0;

    std::size_t n_vertices() const { return graph.n_nodes(); }
    std::size_t n_strata() const { return scale.size(); }
};

NullModelGraph single_layer_problem(const Layer& layer, double resolution);
// Vertex (i, x) has index x * N + i. Coupling joins every pair of copies of
// a node in both directions with weight `coupling`.
NullModelGraph multilayer_problem(std::span<const Layer> layers, std::size_t n_nodes, double coupling,
                                  std::span<const double> resolutions);

// Throws UndefinedStatistic when the total weight is zero.
double quality(const NullModelGraph& g, std::span<const CommunityId> assignment);

// Change in quality from moving vertex v into `target`. A target equal to
// the number of communities of `assignment` denotes a new, empty community.
double move_gain(const NullModelGraph& g, const Partition& assignment, NodeIndex v, CommunityId target);

// One vertex per community; member edges summed, internal weight becoming
// self-loops; strata strengths summed per stratum.
NullModelGraph coarsen(const NullModelGraph& g, const Partition& partition);

struct SearchSettings {
    int max_iterations = 20;
    int max_levels = 20;
    int max_repetitions = 50;
    double min_gain = 1e-10;
};

struct RestartOutcome {
    std::vector<CommunityId> assignment;
    double quality = 0.0;
    // Quality after each coarsening level and after each refinement pass.
    std::vector<double> trajectory;
};

// One seeded multilevel run: vertex moving and coarsening down to a level
// without merges, then refinement by vertex moving from the coarsest level
// back to the input graph, iterated while quality improves.
RestartOutcome multilevel_search(const NullModelGraph& g, const SearchSettings& settings, std::uint64_t seed);

// Runs `restarts` seeded searches (concurrently up to `threads`) and returns
// them in restart order.
std::vector<RestartOutcome> run_restarts(const NullModelGraph& g, const SearchSettings& settings, std::uint64_t seed,
                                         int restarts, int threads);

// Index of the highest-quality outcome; ties go to the lowest index.
std::size_t best_outcome(const std::vector<RestartOutcome>& outcomes);

// Partition putting every vertex with at least one edge in one community and
// every edgeless vertex in its own.
std::vector<CommunityId> connected_baseline(const NullModelGraph& g);

// Seed for restart `index` derived from a base seed.
std::uint64_t restart_seed(std::uint64_t base, std::uint64_t index);

}  // namespace tradenet::detail
