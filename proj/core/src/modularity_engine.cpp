#include "modularity_engine.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <random>
#include <tuple>

#include "tradenet/errors.hpp"
#include "tradenet/parallel.hpp"

namespace tradenet::detail {

namespace {

// Running community aggregates for vertex moving. Community ids live in
// [0, n); ids of emptied communities are recycled through a free list.
class CommunityState {
public:
    CommunityState(const NullModelGraph& g, std::span<const CommunityId> init)
        : g_(g),
          n_(g.n_vertices()),
          strata_(g.n_strata()),
          comm_(init.begin(), init.end()),
          out_tot_(n_ * strata_, 0.0),
          in_tot_(n_ * strata_, 0.0),
          size_(n_, 0),
          in_free_(n_, 0) {
        for (NodeIndex v = 0; v < n_; ++v) add_strengths(v, comm_[v], +1.0);
        for (CommunityId c : comm_) ++size_[c];
        for (CommunityId c = static_cast<CommunityId>(n_); c-- > 0;)
            if (size_[c] == 0) {
                free_.push_back(c);
                in_free_[c] = 1;
            }
    }

    CommunityId community(NodeIndex v) const { return comm_[v]; }
    std::size_t size(CommunityId c) const { return size_[c]; }
    bool has_free() const { return !free_.empty(); }
    CommunityId free_id() const { return free_.back(); }

    void remove(NodeIndex v) {
        const CommunityId c = comm_[v];
        add_strengths(v, c, -1.0);
        --size_[c];
    }

    // `from` is the community v was removed from.
    void insert(NodeIndex v, CommunityId c, CommunityId from) {
        if (in_free_[c]) {
            if (free_.back() == c)
                free_.pop_back();
            else
                free_.erase(std::find(free_.begin(), free_.end(), c));
            in_free_[c] = 0;
        }
        comm_[v] = c;
        add_strengths(v, c, +1.0);
        ++size_[c];
        if (from != c && size_[from] == 0) {
            free_.push_back(from);
            in_free_[from] = 1;
        }
    }

    // W times the quality change of inserting an isolated v into c, given
    // the edge weight w between v and c's members.
    double insertion_gain(NodeIndex v, CommunityId c, double w) const {
        double penalty = 0.0;
        for (const StratumStrength& s : g_.strata[v]) {
            const std::size_t k = static_cast<std::size_t>(c) * strata_ + s.stratum;
            penalty += g_.scale[s.stratum] * (s.out * in_tot_[k] + s.in * out_tot_[k]);
        }
        return w - penalty;
    }

    const std::vector<CommunityId>& assignment() const { return comm_; }

private:
    void add_strengths(NodeIndex v, CommunityId c, double sign) {
        for (const StratumStrength& s : g_.strata[v]) {
            const std::size_t k = static_cast<std::size_t>(c) * strata_ + s.stratum;
            out_tot_[k] += sign * s.out;
            in_tot_[k] += sign * s.in;
        }
    }

    const NullModelGraph& g_;
    std::size_t n_;
    std::size_t strata_;
    std::vector<CommunityId> comm_;
    std::vector<double> out_tot_;
    std::vector<double> in_tot_;
    std::vector<std::size_t> size_;
    std::vector<CommunityId> free_;
    std::vector<char> in_free_;
};

std::vector<CommunityId> dense(std::span<const CommunityId> labels) {
    const Partition p(labels);
    return {p.assignment().begin(), p.assignment().end()};
}

std::vector<CommunityId> singleton_ids(std::size_t n) {
    std::vector<CommunityId> ids(n);
    std::iota(ids.begin(), ids.end(), CommunityId{0});
    return ids;
}

void shuffle(std::vector<NodeIndex>& order, std::mt19937_64& rng) {
    for (std::size_t i = order.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(order[i - 1], order[pick(rng)]);
    }
}

// Vertex-moving sweeps in random order until a sweep moves nothing.
// Returns true if any vertex moved.
bool local_moving(const NullModelGraph& g, std::vector<CommunityId>& assignment, const SearchSettings& settings,
                  std::mt19937_64& rng) {
    const std::size_t n = g.n_vertices();
    if (n == 0 || g.total_weight <= 0.0) return false;
    CommunityState state(g, assignment);

    std::vector<NodeIndex> order = singleton_ids(n);
    std::vector<double> neighbour_weight(n, 0.0);
    std::vector<char> touched_flag(n, 0);
    std::vector<CommunityId> touched;
    const double threshold = settings.min_gain * g.total_weight;
    bool moved_any = false;

    for (int rep = 0; rep < settings.max_repetitions; ++rep) {
        shuffle(order, rng);
        std::size_t moves = 0;
        for (NodeIndex v : order) {
            touched.clear();
            auto touch = [&](CommunityId c, double w) {
                if (!touched_flag[c]) {
                    touched_flag[c] = 1;
                    touched.push_back(c);
                }
                neighbour_weight[c] += w;
            };
            const CommunityId own = state.community(v);
            touch(own, 0.0);
            for (const Edge& e : g.graph.out_edges(v))
                if (e.dst != v) touch(state.community(e.dst), e.weight);
            for (const Edge& e : g.graph.in_edges(v))
                if (e.src != v) touch(state.community(e.src), e.weight);
            std::sort(touched.begin(), touched.end());

            state.remove(v);
            const double stay_gain = state.insertion_gain(v, own, neighbour_weight[own]);
            CommunityId best = own;
            double best_gain = -std::numeric_limits<double>::infinity();
            for (CommunityId c : touched) {
                if (c == own) continue;
                const double gain = state.insertion_gain(v, c, neighbour_weight[c]);
                if (gain > best_gain) {
                    best_gain = gain;
                    best = c;
                }
            }
            // Splitting v off into an empty community has gain 0.
            if (state.size(own) > 0 && state.has_free()) {
                const CommunityId empty = state.free_id();
                if (0.0 > best_gain || (0.0 == best_gain && empty < best)) {
                    best_gain = 0.0;
                    best = empty;
                }
            }
            if (best != own && best_gain - stay_gain > threshold) {
                state.insert(v, best, own);
                ++moves;
            } else {
                state.insert(v, own, own);
            }
            for (CommunityId c : touched) {
                neighbour_weight[c] = 0.0;
                touched_flag[c] = 0;
            }
        }
        if (moves == 0) break;
        moved_any = true;
    }
    assignment = dense(state.assignment());
    return moved_any;
}

std::vector<std::vector<StratumStrength>> merge_strata(std::vector<std::tuple<NodeIndex, std::uint32_t, double, double>> items,
                                                       std::size_t n) {
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) < std::tie(std::get<0>(b), std::get<1>(b));
    });
    std::vector<std::vector<StratumStrength>> strata(n);
    for (const auto& [v, x, o, i] : items) {
        auto& list = strata[v];
        if (!list.empty() && list.back().stratum == x) {
            list.back().out += o;
            list.back().in += i;
        } else {
            list.push_back({x, o, i});
        }
    }
    return strata;
}

}  // namespace

NullModelGraph single_layer_problem(const Layer& layer, double resolution) {
    NullModelGraph g;
    g.graph = layer;
    g.total_weight = layer.volume();
    g.scale = {g.total_weight > 0.0 ? resolution / g.total_weight : 0.0};
    const auto s = strengths(layer);
    g.strata.resize(layer.n_nodes());
    for (std::size_t v = 0; v < s.size(); ++v)
        if (s[v].out != 0.0 || s[v].in != 0.0) g.strata[v].push_back({0, s[v].out, s[v].in});
    return g;
}

NullModelGraph multilayer_problem(std::span<const Layer> layers, std::size_t n_nodes, double coupling,
                                  std::span<const double> resolutions) {
    const std::size_t L = layers.size();
    if (resolutions.size() != L) throw InvalidInput("one resolution per layer required");
    NullModelGraph g;
    g.scale.assign(L, 0.0);
    g.strata.resize(n_nodes * L);

    std::vector<Edge> edges;
    for (std::size_t x = 0; x < L; ++x) {
        const Layer& layer = layers[x];
        if (layer.n_nodes() != n_nodes) throw InvalidInput("layer " + layer.key().to_string() + " has the wrong size");
        const double volume = layer.volume();
        if (volume > 0.0) g.scale[x] = resolutions[x] / volume;
        const auto offset = static_cast<NodeIndex>(x * n_nodes);
        for (const Edge& e : layer.edges()) edges.push_back({offset + e.src, offset + e.dst, e.weight});
        const auto s = strengths(layer);
        for (std::size_t i = 0; i < n_nodes; ++i)
            if (s[i].out != 0.0 || s[i].in != 0.0)
                g.strata[offset + i].push_back({static_cast<std::uint32_t>(x), s[i].out, s[i].in});
    }
    if (coupling > 0.0 && L > 1) {
        for (std::size_t i = 0; i < n_nodes; ++i)
            for (std::size_t x = 0; x < L; ++x)
                for (std::size_t y = 0; y < L; ++y)
                    if (x != y)
                        edges.push_back({static_cast<NodeIndex>(x * n_nodes + i), static_cast<NodeIndex>(y * n_nodes + i),
                                         coupling});
    }
    g.graph = Layer::from_edges({"supra", 0}, n_nodes * L, std::move(edges));
    g.total_weight = g.graph.volume();
    return g;
}

double quality(const NullModelGraph& g, std::span<const CommunityId> assignment) {
    const std::size_t n = g.n_vertices();
    if (assignment.size() != n) throw InvalidInput("partition does not cover every node");
    if (!(g.total_weight > 0.0)) throw UndefinedStatistic("modularity of a graph without weight");
    CommunityId max_id = 0;
    for (CommunityId c : assignment) max_id = std::max(max_id, c);
    const std::size_t K = n == 0 ? 0 : static_cast<std::size_t>(max_id) + 1;
    const std::size_t S = g.n_strata();

    std::vector<double> inside(K, 0.0), out_tot(K * S, 0.0), in_tot(K * S, 0.0);
    for (const Edge& e : g.graph.edges())
        if (assignment[e.src] == assignment[e.dst]) inside[assignment[e.src]] += e.weight;
    for (NodeIndex v = 0; v < n; ++v) {
        for (const StratumStrength& s : g.strata[v]) {
            const std::size_t k = static_cast<std::size_t>(assignment[v]) * S + s.stratum;
            out_tot[k] += s.out;
            in_tot[k] += s.in;
        }
    }
    double q = 0.0;
    for (std::size_t c = 0; c < K; ++c) {
        double expected = 0.0;
        for (std::size_t x = 0; x < S; ++x) expected += g.scale[x] * out_tot[c * S + x] * in_tot[c * S + x];
        q += inside[c] - expected;
    }
    return q / g.total_weight;
}

double move_gain(const NullModelGraph& g, const Partition& assignment, NodeIndex v, CommunityId target) {
    const std::size_t n = g.n_vertices();
    if (assignment.size() != n) throw InvalidInput("partition does not cover every node");
    if (v >= n) throw InvalidInput("node index out of range");
    if (target > assignment.n_communities()) throw InvalidInput("target community does not exist");
    if (!(g.total_weight > 0.0)) throw UndefinedStatistic("modularity of a graph without weight");
    const CommunityId own = assignment[v];
    if (target == own) return 0.0;

    const std::size_t S = g.n_strata();
    std::vector<double> own_out(S, 0.0), own_in(S, 0.0), tgt_out(S, 0.0), tgt_in(S, 0.0);
    for (NodeIndex u = 0; u < n; ++u) {
        if (u == v) continue;
        const CommunityId c = assignment[u];
        if (c != own && c != target) continue;
        for (const StratumStrength& s : g.strata[u]) {
            (c == own ? own_out : tgt_out)[s.stratum] += s.out;
            (c == own ? own_in : tgt_in)[s.stratum] += s.in;
        }
    }
    double w_own = 0.0, w_tgt = 0.0;
    auto credit = [&](NodeIndex u, double w) {
        if (u == v) return;
        if (assignment[u] == own) w_own += w;
        else if (assignment[u] == target) w_tgt += w;
    };
    for (const Edge& e : g.graph.out_edges(v)) credit(e.dst, e.weight);
    for (const Edge& e : g.graph.in_edges(v)) credit(e.src, e.weight);

    double penalty_own = 0.0, penalty_tgt = 0.0;
    for (const StratumStrength& s : g.strata[v]) {
        penalty_own += g.scale[s.stratum] * (s.out * own_in[s.stratum] + s.in * own_out[s.stratum]);
        penalty_tgt += g.scale[s.stratum] * (s.out * tgt_in[s.stratum] + s.in * tgt_out[s.stratum]);
    }
    return ((w_tgt - penalty_tgt) - (w_own - penalty_own)) / g.total_weight;
}

NullModelGraph coarsen(const NullModelGraph& g, const Partition& partition) {
    if (partition.size() != g.n_vertices()) throw InvalidInput("partition does not cover every node");
    const std::size_t K = partition.n_communities();
    std::vector<Edge> edges;
    edges.reserve(g.graph.n_edges());
    for (const Edge& e : g.graph.edges()) edges.push_back({partition[e.src], partition[e.dst], e.weight});

    std::vector<std::tuple<NodeIndex, std::uint32_t, double, double>> items;
    for (NodeIndex v = 0; v < g.n_vertices(); ++v)
        for (const StratumStrength& s : g.strata[v]) items.emplace_back(partition[v], s.stratum, s.out, s.in);

    NullModelGraph coarse;
    coarse.graph = Layer::from_edges(g.graph.key(), K, std::move(edges));
    coarse.strata = merge_strata(std::move(items), K);
    coarse.scale = g.scale;
    coarse.total_weight = g.total_weight;
    return coarse;
}

RestartOutcome multilevel_search(const NullModelGraph& g, const SearchSettings& settings, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    RestartOutcome out;
    const std::size_t n = g.n_vertices();
    std::vector<CommunityId> current = singleton_ids(n);
    double best_quality = -std::numeric_limits<double>::infinity();

    for (int iteration = 0; iteration < std::max(settings.max_iterations, 1); ++iteration) {
        std::deque<NullModelGraph> coarse;  // coarse[l - 1] is level l
        std::vector<std::vector<CommunityId>> levels;
        auto graph_at = [&](std::size_t l) -> const NullModelGraph& { return l == 0 ? g : coarse[l - 1]; };

        std::vector<CommunityId> assignment = current;
        for (int level = 0; level < std::max(settings.max_levels, 1); ++level) {
            const NullModelGraph& lg = graph_at(levels.size());
            local_moving(lg, assignment, settings, rng);
            const Partition p(assignment);
            levels.push_back(assignment);
            out.trajectory.push_back(quality(lg, assignment));
            if (p.n_communities() == lg.n_vertices() || level + 1 == settings.max_levels) break;
            coarse.push_back(coarsen(lg, p));
            assignment = singleton_ids(p.n_communities());
        }

        // Refinement from the coarsest level back to the input graph.
        for (std::size_t l = levels.size() - 1; l-- > 0;) {
            for (CommunityId& c : levels[l]) c = levels[l + 1][c];
            local_moving(graph_at(l), levels[l], settings, rng);
            out.trajectory.push_back(quality(graph_at(l), levels[l]));
        }

        const double q = quality(g, levels[0]);
        const bool improved = q > best_quality + settings.min_gain;
        if (q > best_quality) {
            best_quality = q;
            out.assignment = levels[0];
        }
        if (!improved) break;
        current = out.assignment;
    }
    out.assignment = dense(out.assignment);
    out.quality = quality(g, out.assignment);
    return out;
}

std::vector<RestartOutcome> run_restarts(const NullModelGraph& g, const SearchSettings& settings, std::uint64_t seed,
                                         int restarts, int threads) {
    std::vector<RestartOutcome> outcomes(static_cast<std::size_t>(restarts));
    parallel_for(outcomes.size(), threads, [&](std::size_t r) {
        outcomes[r] = multilevel_search(g, settings, restart_seed(seed, r));
    });
    return outcomes;
}

std::size_t best_outcome(const std::vector<RestartOutcome>& outcomes) {
    std::size_t best = 0;
    for (std::size_t r = 1; r < outcomes.size(); ++r)
        if (outcomes[r].quality > outcomes[best].quality) best = r;
    return best;
}

std::vector<CommunityId> connected_baseline(const NullModelGraph& g) {
    const std::size_t n = g.n_vertices();
    std::vector<CommunityId> ids(n);
    CommunityId next = 1;
    for (NodeIndex v = 0; v < n; ++v) {
        const bool linked = !g.graph.out_edges(v).empty() || !g.graph.in_edges(v).empty();
        ids[v] = linked ? 0 : next++;
    }
    return dense(ids);
}

std::uint64_t restart_seed(std::uint64_t base, std::uint64_t index) {
    // splitmix64 finalizer over the base seed offset by the restart index.
    std::uint64_t z = base + 0x9E3779B97F4A7C15ull * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

}  // namespace tradenet::detail
