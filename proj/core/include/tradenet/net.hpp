#pragma once

// Data model for layered directed weighted networks: the node universe,
// a single commodity-year layer, the multiplex stack, and community
// partitions over them.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tradenet {

using NodeIndex = std::uint32_t;
using CommunityId = std::uint32_t;

// Sorted set of node labels (ISO3 codes for country data) with a dense
// index 0..N-1. The index of a label is its rank in sorted order.
class NodeUniverse {
public:
    NodeUniverse() = default;
    explicit NodeUniverse(std::vector<std::string> labels);

    std::size_t size() const { return labels_.size(); }
    bool empty() const { return labels_.empty(); }

    const std::string& label(NodeIndex i) const { return labels_.at(i); }
    std::span<const std::string> labels() const { return labels_; }

    std::optional<NodeIndex> find(std::string_view label) const;
    // Throws InvalidInput for unknown labels.
    NodeIndex index(std::string_view label) const;

    // Inserts a label if absent; returns true when the universe grew.
    // Growing re-sorts the universe, so indices of labels sorting after
    // the new one shift by one.
    bool add(std::string label);

    bool operator==(const NodeUniverse&) const = default;

private:
    std::vector<std::string> labels_;
};

struct Edge {
    NodeIndex src = 0;
    NodeIndex dst = 0;
    double weight = 0.0;

    bool operator==(const Edge&) const = default;
};

struct LayerKey {
    std::string commodity;
    int year = 0;

    auto operator<=>(const LayerKey&) const = default;
    std::string to_string() const;
};

// Immutable directed weighted graph with both out- and in-adjacency.
//
// Layers produced by build_layer never carry self-loops and have strictly
// positive weights. Layers produced internally (coarse graphs, log
// layers) may carry self-loops or arbitrary finite weights.
class Layer {
public:
    Layer() = default;

    // Duplicate (src, dst) pairs are summed. Zero-weight entries are kept
    // as edges: the topology is decided by the caller.
    static Layer from_edges(LayerKey key, std::size_t n_nodes, std::vector<Edge> edges);

    const LayerKey& key() const { return key_; }
    const std::string& commodity() const { return key_.commodity; }
    int year() const { return key_.year; }

    std::size_t n_nodes() const { return n_nodes_; }
    std::size_t n_edges() const { return out_.size(); }
    bool empty() const { return out_.empty(); }

    // All edges, sorted by (src, dst).
    std::span<const Edge> edges() const { return out_; }
    // Edges leaving `i`, sorted by dst.
    std::span<const Edge> out_edges(NodeIndex i) const;
    // Edges entering `j`, sorted by src.
    std::span<const Edge> in_edges(NodeIndex j) const;

    double weight(NodeIndex src, NodeIndex dst) const;
    bool has_edge(NodeIndex src, NodeIndex dst) const;

    double volume() const { return volume_; }
    bool has_self_loops() const { return has_self_loops_; }

    // Same graph with another key (used when deriving layers).
    Layer with_key(LayerKey key) const;

private:
    LayerKey key_;
    std::size_t n_nodes_ = 0;
    std::vector<Edge> out_;
    std::vector<Edge> in_;
    std::vector<std::size_t> out_offsets_;
    std::vector<std::size_t> in_offsets_;
    double volume_ = 0.0;
    bool has_self_loops_ = false;
};

struct LabeledEdge {
    std::string src;
    std::string dst;
    double weight = 0.0;
};

struct RejectedRow {
    std::size_t row = 0;  // 0-based position in the input sequence (or file line)
    std::string reason;
};

struct LayerBuild {
    Layer layer;
    std::vector<RejectedRow> rejected;
};

// Builds a layer from labeled edges. Unknown labels are added to
// `universe`. Rows with a nonpositive, NaN or infinite weight and
// self-loops are rejected with a diagnostic; duplicates are summed.
LayerBuild build_layer(std::span<const LabeledEdge> edges, NodeUniverse& universe, LayerKey key = {});

// Inverse of build_layer for a layer over `universe`.
std::vector<LabeledEdge> dump_edges(const Layer& layer, const NodeUniverse& universe);

// Same topology with each weight w replaced by ln(w).
Layer log_weights(const Layer& layer);

struct Strength {
    double in = 0.0;
    double out = 0.0;
    double total() const { return in + out; }
};

struct Degree {
    std::size_t in = 0;
    std::size_t out = 0;
    std::size_t bilateral = 0;  // partners linked in both directions
    std::size_t total() const { return in + out; }
};

// Self-loops (coarse graphs) count toward both the in- and out-strength.
std::vector<Strength> strengths(const Layer& layer);
// Self-loops are ignored.
std::vector<Degree> degrees(const Layer& layer);

// Nodes with at least one incident edge.
std::vector<bool> active_nodes(const Layer& layer);

// Subgraph on `nodes`; node nodes[k] becomes k in the result.
Layer induced_sublayer(const Layer& layer, std::span<const NodeIndex> nodes);

// Ordered stack of layers over one node universe plus a uniform coupling
// weight joining each node's copies across layers.
class MultiNetwork {
public:
    MultiNetwork() = default;
    MultiNetwork(NodeUniverse universe, std::vector<Layer> layers, double coupling = 1.0);

    const NodeUniverse& universe() const { return universe_; }
    std::span<const Layer> layers() const { return layers_; }
    const Layer& layer(std::size_t x) const { return layers_.at(x); }
    std::size_t n_nodes() const { return universe_.size(); }
    std::size_t n_layers() const { return layers_.size(); }
    double coupling() const { return coupling_; }

    std::optional<std::size_t> find_layer(std::string_view commodity) const;

private:
    NodeUniverse universe_;
    std::vector<Layer> layers_;
    double coupling_ = 1.0;
};

// Non-overlapping assignment of nodes to communities. Ids are dense and
// numbered in order of first appearance, so two partitions compare equal
// exactly when they group the nodes identically.
class Partition {
public:
    Partition() = default;
    explicit Partition(std::span<const CommunityId> labels);
    explicit Partition(const std::vector<CommunityId>& labels)
        : Partition(std::span<const CommunityId>(labels)) {}

    static Partition singletons(std::size_t n);
    static Partition all_in_one(std::size_t n);

    std::size_t size() const { return assignment_.size(); }
    std::size_t n_communities() const { return n_communities_; }
    CommunityId operator[](NodeIndex i) const { return assignment_[i]; }
    std::span<const CommunityId> assignment() const { return assignment_; }

    std::vector<std::size_t> community_sizes() const;

    // Keeps the nodes with keep[i] set, renumbering nodes and communities.
    Partition restricted(const std::vector<bool>& keep) const;

    bool operator==(const Partition&) const = default;

private:
    std::vector<CommunityId> assignment_;
    std::size_t n_communities_ = 0;
};

// Assignment of every (node, layer) pair, stored layer-major.
class MultilayerPartition {
public:
    MultilayerPartition() = default;
    MultilayerPartition(std::size_t n_nodes, std::size_t n_layers, std::span<const CommunityId> labels);

    std::size_t n_nodes() const { return n_nodes_; }
    std::size_t n_layers() const { return n_layers_; }
    std::size_t n_communities() const { return flat_.n_communities(); }
    CommunityId community(NodeIndex node, std::size_t layer) const {
        return flat_[static_cast<NodeIndex>(layer * n_nodes_ + node)];
    }
    // The supra-node view: index layer * n_nodes + node.
    const Partition& flat() const { return flat_; }

    bool operator==(const MultilayerPartition&) const = default;

private:
    std::size_t n_nodes_ = 0;
    std::size_t n_layers_ = 0;
    Partition flat_;
};

}  // namespace tradenet
