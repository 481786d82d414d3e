#pragma once

// Independent reference implementations used as test oracles. They work
// on dense matrices straight from the definitions and share no code with
// the library beyond its data types.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "tradenet/net.hpp"

namespace oracle {

using Dense = std::vector<std::vector<double>>;

Dense dense(const tradenet::Layer& layer);

// Q = (1/X) sum_ij (x_ij - g s_out_i s_in_j / X) [c_i == c_j], self-loops included.
double modularity(const Dense& x, const std::vector<std::uint32_t>& c, double gamma = 1.0);

// Calls fn on every set partition of {0..n-1} as a restricted growth string.
void for_each_partition(std::size_t n, const std::function<void(const std::vector<std::uint32_t>&)>& fn);

struct Best {
    double value;
    std::vector<std::uint32_t> assignment;
};
Best max_modularity(const Dense& x, double gamma = 1.0);

// Q* by the double sum over all (node, layer) pairs, vertex (i, x) at x * n + i.
double q_star(const std::vector<Dense>& layers, double theta, const std::vector<std::uint32_t>& c,
              const std::vector<double>& gammas = {});

// Total clustering from the cube of S = M + M^T, per node; nullopt where the
// denominator vanishes.
std::vector<std::optional<double>> clustering(const Dense& m);

// Cube-rooted weights normalized by the largest weight.
Dense cube_root_normalized(const Dense& w);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

// Pearson correlation of each linked node's total degree (strength) with the
// mean total degree (strength) of its neighbours, multiplicity a_ij + a_ji.
double assortativity(const Dense& x, bool weighted);

// Erdos-Renyi directed layer with weights uniform in [lo, hi).
tradenet::Layer random_layer(std::mt19937_64& rng, std::size_t n, double p, double lo = 1.0, double hi = 2.0);

struct Planted {
    tradenet::Layer layer;
    std::vector<std::uint32_t> labels;
};
// Directed weighted stochastic block model with equal-size blocks.
Planted planted_blocks(std::mt19937_64& rng, std::size_t n, std::size_t blocks, double p_in, double p_out,
                       double lo = 1.0, double hi = 2.0);

}  // namespace oracle
