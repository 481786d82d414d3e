#include "tradenet/compare.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <utility>

#include "tradenet/errors.hpp"

namespace tradenet::compare {

ConfusionMatrix confusion_matrix(const Partition& a, const Partition& b) {
    if (a.size() != b.size()) throw InvalidInput("partitions cover different node sets");
    ConfusionMatrix f(a.n_communities(), std::vector<std::size_t>(b.n_communities(), 0));
    for (NodeIndex i = 0; i < a.size(); ++i) ++f[a[i]][b[i]];
    return f;
}

namespace {

// Each row and column of f has exactly one nonzero cell.
bool is_relabeling(const ConfusionMatrix& f, std::size_t kb) {
    if (f.size() != kb) return false;
    std::vector<int> col_hits(kb, 0);
    for (const auto& row : f) {
        int hits = 0;
        for (std::size_t j = 0; j < kb; ++j)
            if (row[j] > 0) {
                ++hits;
                ++col_hits[j];
            }
        if (hits != 1) return false;
    }
    return std::all_of(col_hits.begin(), col_hits.end(), [](int h) { return h == 1; });
}

double sorted_sum(std::vector<double> terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

}  // namespace

double nmi(const Partition& a, const Partition& b) {
    if (a.size() != b.size()) throw InvalidInput("partitions cover different node sets");
    if (a.size() == 0) throw InvalidInput("NMI of empty partitions");
    const ConfusionMatrix f = confusion_matrix(a, b);
    if (is_relabeling(f, b.n_communities())) return 1.0;

    const double n = static_cast<double>(a.size());
    std::vector<double> row(a.n_communities(), 0.0), col(b.n_communities(), 0.0);
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = 0; j < col.size(); ++j) {
            row[i] += static_cast<double>(f[i][j]);
            col[j] += static_cast<double>(f[i][j]);
        }

    std::vector<double> mutual;
    for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = 0; j < col.size(); ++j) {
            if (f[i][j] == 0) continue;
            const double fij = static_cast<double>(f[i][j]);
            mutual.push_back(fij * std::log(fij * n / (row[i] * col[j])));
        }
    auto entropy_terms = [n](const std::vector<double>& marg) {
        std::vector<double> t;
        for (double m : marg) t.push_back(m * std::log(m / n));
        return sorted_sum(std::move(t));
    };
    const double denom = entropy_terms(row) + entropy_terms(col);
    if (denom == 0.0) throw UndefinedStatistic("NMI of two different single-community partitions");
    const double value = -2.0 * sorted_sum(std::move(mutual)) / denom;
    return std::clamp(value, 0.0, 1.0);
}

Herfindahl herfindahl(const Partition& partition) {
    if (partition.size() == 0 || partition.n_communities() == 0)
        throw InvalidInput("Herfindahl index of an empty partition");
    const double n = static_cast<double>(partition.size());
    Herfindahl out;
    out.k = partition.n_communities();
    for (std::size_t s : partition.community_sizes()) {
        const double p = static_cast<double>(s) / n;
        out.h += p * p;
    }
    if (out.k == 1) {
        out.normalized = 1.0;
    } else {
        const double inv_k = 1.0 / static_cast<double>(out.k);
        out.normalized = std::max(0.0, (out.h - inv_k) / (1.0 - inv_k));
    }
    return out;
}

std::vector<std::size_t> size_distribution(const Partition& partition) {
    auto sizes = partition.community_sizes();
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    return sizes;
}

std::size_t community_count(const Partition& partition) { return partition.n_communities(); }

std::pair<Partition, Partition> align(const Partition& a, const std::vector<bool>& active_a, const Partition& b,
                                      const std::vector<bool>& active_b, InactiveNodes mode) {
    const std::size_t n = a.size();
    if (b.size() != n || active_a.size() != n || active_b.size() != n)
        throw InvalidInput("partitions and activity masks cover different node sets");
    if (mode == InactiveNodes::Exclude) {
        std::vector<bool> keep(n);
        for (std::size_t i = 0; i < n; ++i) keep[i] = active_a[i] && active_b[i];
        return {a.restricted(keep), b.restricted(keep)};
    }
    auto singletonize = [n](const Partition& p, const std::vector<bool>& active) {
        std::vector<CommunityId> ids(n);
        auto next = static_cast<CommunityId>(p.n_communities());
        for (NodeIndex i = 0; i < n; ++i) ids[i] = active[i] ? p[i] : next++;
        return Partition(ids);
    };
    return {singletonize(a, active_a), singletonize(b, active_b)};
}

}  // namespace tradenet::compare
