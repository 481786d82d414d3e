#include "tradenet/net.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include "tradenet/errors.hpp"

namespace tradenet {

NodeUniverse::NodeUniverse(std::vector<std::string> labels) : labels_(std::move(labels)) {
    std::sort(labels_.begin(), labels_.end());
    labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());
}

std::optional<NodeIndex> NodeUniverse::find(std::string_view label) const {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label,
                               [](const std::string& a, std::string_view b) { return a < b; });
    if (it == labels_.end() || *it != label) return std::nullopt;
    return static_cast<NodeIndex>(it - labels_.begin());
}

NodeIndex NodeUniverse::index(std::string_view label) const {
    if (auto i = find(label)) return *i;
    throw InvalidInput("unknown node label '" + std::string(label) + "'");
}

bool NodeUniverse::add(std::string label) {
    auto it = std::lower_bound(labels_.begin(), labels_.end(), label);
    if (it != labels_.end() && *it == label) return false;
    labels_.insert(it, std::move(label));
    return true;
}

std::string LayerKey::to_string() const {
    return commodity + "/" + std::to_string(year);
}

Layer Layer::from_edges(LayerKey key, std::size_t n_nodes, std::vector<Edge> edges) {
    Layer layer;
    layer.key_ = std::move(key);
    layer.n_nodes_ = n_nodes;

    for (const Edge& e : edges) {
        if (e.src >= n_nodes || e.dst >= n_nodes)
            throw InvalidInput("edge endpoint out of range in layer " + layer.key_.to_string());
        if (!std::isfinite(e.weight))
            throw InvalidInput("non-finite edge weight in layer " + layer.key_.to_string());
    }

    std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
        return a.src != b.src ? a.src < b.src : a.dst < b.dst;
    });
    // Merge duplicates.
    std::vector<Edge> merged;
    merged.reserve(edges.size());
    for (const Edge& e : edges) {
        if (!merged.empty() && merged.back().src == e.src && merged.back().dst == e.dst)
            merged.back().weight += e.weight;
        else
            merged.push_back(e);
    }
    layer.out_ = std::move(merged);

    layer.in_ = layer.out_;
    std::sort(layer.in_.begin(), layer.in_.end(), [](const Edge& a, const Edge& b) {
        return a.dst != b.dst ? a.dst < b.dst : a.src < b.src;
    });

    layer.out_offsets_.assign(n_nodes + 1, 0);
    layer.in_offsets_.assign(n_nodes + 1, 0);
    for (const Edge& e : layer.out_) {
        ++layer.out_offsets_[e.src + 1];
        ++layer.in_offsets_[e.dst + 1];
        layer.volume_ += e.weight;
        if (e.src == e.dst) layer.has_self_loops_ = true;
    }
    for (std::size_t i = 0; i < n_nodes; ++i) {
        layer.out_offsets_[i + 1] += layer.out_offsets_[i];
        layer.in_offsets_[i + 1] += layer.in_offsets_[i];
    }
    return layer;
}

std::span<const Edge> Layer::out_edges(NodeIndex i) const {
    return std::span<const Edge>(out_).subspan(out_offsets_[i], out_offsets_[i + 1] - out_offsets_[i]);
}

std::span<const Edge> Layer::in_edges(NodeIndex j) const {
    return std::span<const Edge>(in_).subspan(in_offsets_[j], in_offsets_[j + 1] - in_offsets_[j]);
}

double Layer::weight(NodeIndex src, NodeIndex dst) const {
    auto out = out_edges(src);
    auto it = std::lower_bound(out.begin(), out.end(), dst,
                               [](const Edge& e, NodeIndex d) { return e.dst < d; });
    return (it != out.end() && it->dst == dst) ? it->weight : 0.0;
}

bool Layer::has_edge(NodeIndex src, NodeIndex dst) const {
    auto out = out_edges(src);
    auto it = std::lower_bound(out.begin(), out.end(), dst,
                               [](const Edge& e, NodeIndex d) { return e.dst < d; });
    return it != out.end() && it->dst == dst;
}

Layer Layer::with_key(LayerKey key) const {
    Layer copy = *this;
    copy.key_ = std::move(key);
    return copy;
}

LayerBuild build_layer(std::span<const LabeledEdge> edges, NodeUniverse& universe, LayerKey key) {
    LayerBuild result;
    std::vector<std::size_t> accepted;
    accepted.reserve(edges.size());
    for (std::size_t r = 0; r < edges.size(); ++r) {
        const LabeledEdge& e = edges[r];
        if (std::isnan(e.weight)) {
            result.rejected.push_back({r, "NaN weight"});
        } else if (!std::isfinite(e.weight)) {
            result.rejected.push_back({r, "infinite weight"});
        } else if (e.weight <= 0.0) {
            result.rejected.push_back({r, "nonpositive weight"});
        } else if (e.src == e.dst) {
            result.rejected.push_back({r, "self-loop"});
        } else if (e.src.empty() || e.dst.empty()) {
            result.rejected.push_back({r, "empty node label"});
        } else {
            accepted.push_back(r);
        }
    }
    // Grow the universe first so indices are final before edges are placed.
    for (std::size_t r : accepted) {
        universe.add(edges[r].src);
        universe.add(edges[r].dst);
    }
    std::vector<Edge> indexed;
    indexed.reserve(accepted.size());
    for (std::size_t r : accepted)
        indexed.push_back({universe.index(edges[r].src), universe.index(edges[r].dst), edges[r].weight});
    result.layer = Layer::from_edges(std::move(key), universe.size(), std::move(indexed));
    return result;
}

std::vector<LabeledEdge> dump_edges(const Layer& layer, const NodeUniverse& universe) {
    if (layer.n_nodes() != universe.size())
        throw InvalidInput("layer " + layer.key().to_string() + " does not match the node universe");
    std::vector<LabeledEdge> out;
    out.reserve(layer.n_edges());
    for (const Edge& e : layer.edges()) out.push_back({universe.label(e.src), universe.label(e.dst), e.weight});
    return out;
}

Layer log_weights(const Layer& layer) {
    std::vector<Edge> edges(layer.edges().begin(), layer.edges().end());
    for (Edge& e : edges) {
        if (!(e.weight > 0.0))
            throw InvalidInput("log transform needs positive weights (layer " + layer.key().to_string() + ")");
        e.weight = std::log(e.weight);
    }
    return Layer::from_edges(layer.key(), layer.n_nodes(), std::move(edges));
}

std::vector<Strength> strengths(const Layer& layer) {
    std::vector<Strength> s(layer.n_nodes());
    for (const Edge& e : layer.edges()) {
        s[e.src].out += e.weight;
        s[e.dst].in += e.weight;
    }
    return s;
}

std::vector<Degree> degrees(const Layer& layer) {
    std::vector<Degree> d(layer.n_nodes());
    for (const Edge& e : layer.edges()) {
        if (e.src == e.dst) continue;
        ++d[e.src].out;
        ++d[e.dst].in;
        if (layer.has_edge(e.dst, e.src)) ++d[e.src].bilateral;
    }
    return d;
}

std::vector<bool> active_nodes(const Layer& layer) {
    std::vector<bool> active(layer.n_nodes(), false);
    for (const Edge& e : layer.edges()) {
        active[e.src] = true;
        active[e.dst] = true;
    }
    return active;
}

Layer induced_sublayer(const Layer& layer, std::span<const NodeIndex> nodes) {
    constexpr NodeIndex absent = std::numeric_limits<NodeIndex>::max();
    std::vector<NodeIndex> remap(layer.n_nodes(), absent);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (nodes[k] >= layer.n_nodes() || remap[nodes[k]] != absent)
            throw InvalidInput("induced_sublayer: invalid or repeated node index");
        remap[nodes[k]] = static_cast<NodeIndex>(k);
    }
    std::vector<Edge> edges;
    for (const Edge& e : layer.edges())
        if (remap[e.src] != absent && remap[e.dst] != absent) edges.push_back({remap[e.src], remap[e.dst], e.weight});
    return Layer::from_edges(layer.key(), nodes.size(), std::move(edges));
}

MultiNetwork::MultiNetwork(NodeUniverse universe, std::vector<Layer> layers, double coupling)
    : universe_(std::move(universe)), layers_(std::move(layers)), coupling_(coupling) {
    if (!(coupling_ >= 0.0) || !std::isfinite(coupling_))
        throw InvalidInput("interlayer coupling must be finite and nonnegative");
    for (const Layer& l : layers_)
        if (l.n_nodes() != universe_.size())
            throw InvalidInput("layer " + l.key().to_string() + " does not match the node universe");
}

std::optional<std::size_t> MultiNetwork::find_layer(std::string_view commodity) const {
    for (std::size_t x = 0; x < layers_.size(); ++x)
        if (layers_[x].commodity() == commodity) return x;
    return std::nullopt;
}

Partition::Partition(std::span<const CommunityId> labels) : assignment_(labels.size()) {
    std::unordered_map<CommunityId, CommunityId> dense;
    dense.reserve(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        auto [it, inserted] = dense.try_emplace(labels[i], static_cast<CommunityId>(dense.size()));
        assignment_[i] = it->second;
    }
    n_communities_ = dense.size();
}

Partition Partition::singletons(std::size_t n) {
    std::vector<CommunityId> ids(n);
    for (std::size_t i = 0; i < n; ++i) ids[i] = static_cast<CommunityId>(i);
    return Partition(ids);
}

Partition Partition::all_in_one(std::size_t n) {
    return Partition(std::vector<CommunityId>(n, 0));
}

std::vector<std::size_t> Partition::community_sizes() const {
    std::vector<std::size_t> sizes(n_communities_, 0);
    for (CommunityId c : assignment_) ++sizes[c];
    return sizes;
}

Partition Partition::restricted(const std::vector<bool>& keep) const {
    if (keep.size() != assignment_.size()) throw InvalidInput("restriction mask does not match partition size");
    std::vector<CommunityId> kept;
    for (std::size_t i = 0; i < assignment_.size(); ++i)
        if (keep[i]) kept.push_back(assignment_[i]);
    return Partition(kept);
}

MultilayerPartition::MultilayerPartition(std::size_t n_nodes, std::size_t n_layers,
                                         std::span<const CommunityId> labels)
    : n_nodes_(n_nodes), n_layers_(n_layers), flat_(labels) {
    if (labels.size() != n_nodes * n_layers)
        throw InvalidInput("multilayer partition must assign every (node, layer) pair exactly once");
}

}  // namespace tradenet
