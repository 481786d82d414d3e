#include "tradenet/netstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tradenet/errors.hpp"

namespace tradenet::stats {

namespace {

struct PairSums {
    double squared_diff = 0.0;
    double squared_sum = 0.0;
    double cross = 0.0;
};

PairSums pair_sums(const Layer& layer) {
    PairSums s;
    for (const Edge& e : layer.edges()) {
        if (e.src == e.dst) continue;
        const bool reciprocated = layer.has_edge(e.dst, e.src);
        // Visit each unordered pair once: from its lower endpoint when both
        // directions exist, otherwise from the single edge.
        if (reciprocated && e.src > e.dst) continue;
        const double x = e.weight;
        const double y = reciprocated ? layer.weight(e.dst, e.src) : 0.0;
        s.squared_diff += (x - y) * (x - y);
        s.squared_sum += x * x + y * y;
        s.cross += 2.0 * x * y;
    }
    return s;
}

template <class F>
std::optional<double> defined(F&& f) {
    try {
        return f();
    } catch (const UndefinedStatistic&) {
        return std::nullopt;
    }
}

}  // namespace

double density(const Layer& layer) {
    const double n = static_cast<double>(layer.n_nodes());
    if (layer.n_nodes() < 2) throw UndefinedStatistic("density needs at least two nodes");
    std::size_t edges = 0;
    for (const Edge& e : layer.edges())
        if (e.src != e.dst) ++edges;
    return static_cast<double>(edges) / (n * (n - 1.0));
}

double bilateral_density(const Layer& layer) {
    std::size_t edges = 0, reciprocated = 0;
    for (const Edge& e : layer.edges()) {
        if (e.src == e.dst) continue;
        ++edges;
        if (layer.has_edge(e.dst, e.src)) ++reciprocated;
    }
    return edges == 0 ? 0.0 : static_cast<double>(reciprocated) / static_cast<double>(edges);
}

double weighted_asymmetry(const Layer& layer) {
    const PairSums s = pair_sums(layer);
    return s.squared_sum > 0.0 ? s.squared_diff / s.squared_sum : 0.0;
}

double weighted_reciprocity(const Layer& layer) {
    const PairSums s = pair_sums(layer);
    return s.squared_sum > 0.0 ? s.cross / s.squared_sum : 0.0;
}

std::size_t lcc_size(const Layer& layer) {
    const std::size_t n = layer.n_nodes();
    if (n == 0) return 0;
    std::vector<NodeIndex> parent(n);
    std::iota(parent.begin(), parent.end(), NodeIndex{0});
    auto find = [&](NodeIndex x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (const Edge& e : layer.edges()) {
        const NodeIndex a = find(e.src), b = find(e.dst);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<std::size_t> size(n, 0);
    for (NodeIndex i = 0; i < n; ++i) ++size[find(i)];
    return *std::max_element(size.begin(), size.end());
}

double centralization(const Layer& layer) {
    const std::size_t n = layer.n_nodes();
    if (n < 3) return 0.0;
    const auto deg = degrees(layer);
    std::size_t kmax = 0;
    for (const auto& d : deg) kmax = std::max(kmax, d.total());
    double spread = 0.0;
    for (const auto& d : deg) spread += static_cast<double>(kmax - d.total());
    const double nd = static_cast<double>(n);
    return spread / ((nd - 1.0) * (2.0 * nd - 4.0));
}

double assortativity(const Layer& layer, Mode mode) {
    const auto deg = degrees(layer);
    const auto str = strengths(layer);
    const std::size_t n = layer.n_nodes();

    auto node_value = [&](NodeIndex i) {
        return mode == Mode::Binary ? static_cast<double>(deg[i].total()) : str[i].total();
    };

    std::vector<double> own, neighbour;
    for (NodeIndex i = 0; i < n; ++i) {
        const double k = static_cast<double>(deg[i].total());
        if (k == 0.0) continue;
        // (a_ij + a_ji) counts a reciprocated partner twice.
        double acc = 0.0;
        for (const Edge& e : layer.out_edges(i))
            if (e.dst != i) acc += node_value(e.dst);
        for (const Edge& e : layer.in_edges(i))
            if (e.src != i) acc += node_value(e.src);
        own.push_back(node_value(i));
        neighbour.push_back(acc / k);
    }
    if (own.size() < 3) throw UndefinedStatistic("assortativity needs at least three linked nodes");
    auto r = pearson(own, neighbour);
    if (!r) throw UndefinedStatistic("assortativity undefined: zero variance");
    return *r;
}

std::vector<std::optional<double>> node_clustering(const Layer& layer, Mode mode) {
    const std::size_t n = layer.n_nodes();
    const auto deg = degrees(layer);

    double max_weight = 0.0;
    if (mode == Mode::Weighted) {
        for (const Edge& e : layer.edges())
            if (e.src != e.dst) max_weight = std::max(max_weight, e.weight);
    }
    auto entry = [&](double w) {
        if (mode == Mode::Binary) return 1.0;
        if (max_weight <= 0.0 || w <= 0.0) return 0.0;
        return std::cbrt(w / max_weight);
    };

    // Symmetric S = M + M^T as sorted adjacency lists.
    std::vector<std::vector<std::pair<NodeIndex, double>>> sym(n);
    for (const Edge& e : layer.edges()) {
        if (e.src == e.dst) continue;
        const double m = entry(e.weight);
        sym[e.src].push_back({e.dst, m});
        sym[e.dst].push_back({e.src, m});
    }
    for (auto& row : sym) {
        std::sort(row.begin(), row.end());
        std::vector<std::pair<NodeIndex, double>> merged;
        for (const auto& p : row) {
            if (!merged.empty() && merged.back().first == p.first)
                merged.back().second += p.second;
            else
                merged.push_back(p);
        }
        row = std::move(merged);
    }

    std::vector<std::optional<double>> out(n);
    std::vector<double> row_i(n, 0.0);
    for (NodeIndex i = 0; i < n; ++i) {
        const double d = static_cast<double>(deg[i].total());
        const double denom = 2.0 * (d * (d - 1.0) - 2.0 * static_cast<double>(deg[i].bilateral));
        if (denom <= 0.0) continue;
        for (const auto& [k, v] : sym[i]) row_i[k] = v;
        // [S^3]_ii = sum_j S_ij sum_k S_jk S_ki
        double closed = 0.0;
        for (const auto& [j, sij] : sym[i]) {
            double inner = 0.0;
            for (const auto& [k, sjk] : sym[j]) inner += sjk * row_i[k];
            closed += sij * inner;
        }
        for (const auto& [k, v] : sym[i]) row_i[k] = 0.0;
        out[i] = closed / denom;
    }
    return out;
}

double clustering(const Layer& layer, Mode mode) {
    const auto c = node_clustering(layer, mode);
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& v : c) {
        if (!v) continue;
        sum += *v;
        ++count;
    }
    if (count == 0) throw UndefinedStatistic("clustering undefined: no node has a defined coefficient");
    return sum / static_cast<double>(count);
}

Moments weight_moments(const Layer& log_layer) {
    std::vector<double> w;
    w.reserve(log_layer.n_edges());
    for (const Edge& e : log_layer.edges()) w.push_back(e.weight);
    return population_moments(w);
}

double intensity_ratio(const Layer& layer) {
    const auto deg = degrees(layer);
    const auto str = strengths(layer);
    double import_sum = 0.0, export_sum = 0.0;
    std::size_t importers = 0, exporters = 0;
    for (std::size_t i = 0; i < layer.n_nodes(); ++i) {
        if (deg[i].in > 0) {
            import_sum += str[i].in / static_cast<double>(deg[i].in);
            ++importers;
        }
        if (deg[i].out > 0) {
            export_sum += str[i].out / static_cast<double>(deg[i].out);
            ++exporters;
        }
    }
    if (importers == 0 || exporters == 0) throw UndefinedStatistic("intensity ratio of an empty layer");
    const double export_mean = export_sum / static_cast<double>(exporters);
    if (export_mean == 0.0) throw UndefinedStatistic("intensity ratio undefined: zero export intensity");
    return (import_sum / static_cast<double>(importers)) / export_mean;
}

CorrelationMatrix layer_weight_correlation(std::span<const Layer> log_layers) {
    const std::size_t L = log_layers.size();
    CorrelationMatrix m(L, std::vector<std::optional<double>>(L));
    for (std::size_t a = 0; a < L; ++a) {
        m[a][a] = 1.0;
        for (std::size_t b = a + 1; b < L; ++b) {
            if (log_layers[a].n_nodes() != log_layers[b].n_nodes())
                throw InvalidInput("layer_weight_correlation: layers over different node sets");
            std::vector<double> x, y;
            // Both edge lists are sorted by (src, dst): merge them.
            auto ea = log_layers[a].edges();
            auto eb = log_layers[b].edges();
            std::size_t i = 0, j = 0;
            while (i < ea.size() && j < eb.size()) {
                const auto ka = std::pair(ea[i].src, ea[i].dst);
                const auto kb = std::pair(eb[j].src, eb[j].dst);
                if (ka < kb) {
                    ++i;
                } else if (kb < ka) {
                    ++j;
                } else {
                    x.push_back(ea[i].weight);
                    y.push_back(eb[j].weight);
                    ++i;
                    ++j;
                }
            }
            m[a][b] = m[b][a] = pearson(x, y);
        }
    }
    return m;
}

std::array<std::optional<double>, 11> StatsRecord::values() const {
    return {density,
            bilateral_density,
            weighted_asymmetry,
            static_cast<double>(lcc_size),
            centralization,
            bin_assortativity,
            wei_assortativity,
            bin_clustering,
            wei_clustering,
            mean_log_weight,
            std_log_weight};
}

StatsRecord compute_stats(const Layer& layer) {
    const Layer log_layer = log_weights(layer);
    std::vector<Edge> clamped(log_layer.edges().begin(), log_layer.edges().end());
    for (Edge& e : clamped) e.weight = std::max(e.weight, 0.0);
    const Layer intensity = Layer::from_edges(layer.key(), layer.n_nodes(), std::move(clamped));

    StatsRecord r;
    r.density = defined([&] { return density(layer); });
    r.bilateral_density = bilateral_density(layer);
    r.weighted_asymmetry = weighted_asymmetry(intensity);
    r.lcc_size = lcc_size(layer);
    r.centralization = centralization(layer);
    r.bin_assortativity = defined([&] { return assortativity(layer, Mode::Binary); });
    r.wei_assortativity = defined([&] { return assortativity(intensity, Mode::Weighted); });
    r.bin_clustering = defined([&] { return clustering(layer, Mode::Binary); });
    r.wei_clustering = defined([&] { return clustering(intensity, Mode::Weighted); });
    if (!log_layer.empty()) {
        const Moments mo = weight_moments(log_layer);
        r.mean_log_weight = mo.mean;
        r.std_log_weight = mo.std;
    }
    r.intensity_ratio = defined([&] { return intensity_ratio(layer); });
    return r;
}

}  // namespace tradenet::stats
