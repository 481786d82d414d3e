#pragma once

// Partition similarity and community-size concentration.

#include <cstddef>
#include <utility>
#include <vector>

#include "tradenet/net.hpp"

namespace tradenet::compare {

// f[i][j] = number of nodes in community i of `a` and community j of `b`.
using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

ConfusionMatrix confusion_matrix(const Partition& a, const Partition& b);

// Normalized mutual information, natural logs, in [0, 1]. Partitions that
// group the nodes identically (up to relabeling) give exactly 1, including
// the 0/0 case of two single-community partitions. Throws InvalidInput for
// partitions of different sizes or of no nodes.
double nmi(const Partition& a, const Partition& b);

struct Herfindahl {
    double h = 0.0;
    double normalized = 0.0;
    std::size_t k = 0;
};

Herfindahl herfindahl(const Partition& partition);

// Community sizes, largest first.
std::vector<std::size_t> size_distribution(const Partition& partition);
std::size_t community_count(const Partition& partition);

enum class InactiveNodes { Exclude, Singletons };

// Prepares two layer partitions over one universe for comparison. With
// Exclude only nodes active in both layers are kept; with Singletons every
// node inactive in a layer gets its own community in that layer's partition.
std::pair<Partition, Partition> align(const Partition& a, const std::vector<bool>& active_a, const Partition& b,
                                      const std::vector<bool>& active_b, InactiveNodes mode = InactiveNodes::Exclude);

}  // namespace tradenet::compare
