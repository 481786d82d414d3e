#include "tradenet/community.hpp"

#include "modularity_engine.hpp"
#include "tradenet/errors.hpp"

namespace tradenet::community {

void DetectorConfig::validate() const {
    if (restarts < 1 || max_iterations < 1 || max_levels < 1 || max_repetitions < 1)
        throw InvalidInput("detector counts (restarts, iterations, levels, repetitions) must be >= 1");
    if (!(min_gain > 0.0)) throw InvalidInput("detector tolerance min_gain must be positive");
    if (!(resolution > 0.0)) throw InvalidInput("resolution must be positive");
    if (threads < 1) throw InvalidInput("threads must be >= 1");
}

double evaluate_modularity(const Layer& layer, const Partition& partition, double resolution) {
    if (partition.size() != layer.n_nodes()) throw InvalidInput("partition does not cover every node of the layer");
    if (!(layer.volume() > 0.0)) throw UndefinedStatistic("modularity of an empty layer");
    return detail::quality(detail::single_layer_problem(layer, resolution), partition.assignment());
}

double local_move_gain(const Layer& layer, const Partition& partition, NodeIndex node, CommunityId target,
                       double resolution) {
    if (partition.size() != layer.n_nodes()) throw InvalidInput("partition does not cover every node of the layer");
    if (!(layer.volume() > 0.0)) throw UndefinedStatistic("modularity of an empty layer");
    return detail::move_gain(detail::single_layer_problem(layer, resolution), partition, node, target);
}

Layer coarsen(const Layer& layer, const Partition& partition) {
    if (partition.size() != layer.n_nodes()) throw InvalidInput("partition does not cover every node of the layer");
    std::vector<Edge> edges;
    edges.reserve(layer.n_edges());
    for (const Edge& e : layer.edges()) edges.push_back({partition[e.src], partition[e.dst], e.weight});
    return Layer::from_edges(layer.key(), partition.n_communities(), std::move(edges));
}

DetectionResult detect(const Layer& layer, const DetectorConfig& config) {
    config.validate();
    if (!(layer.volume() > 0.0))
        throw InvalidInput("community detection needs a layer with positive volume (" + layer.key().to_string() + ")");

    const detail::NullModelGraph g = detail::single_layer_problem(layer, config.resolution);
    const detail::SearchSettings settings{config.max_iterations, config.max_levels, config.max_repetitions,
                                          config.min_gain};
    const auto outcomes = detail::run_restarts(g, settings, config.rng_seed, config.restarts, config.threads);
    const std::size_t best = detail::best_outcome(outcomes);

    DetectionResult result;
    result.restarts_run = config.restarts;
    result.best_restart = static_cast<int>(best);
    for (std::size_t r = 0; r < outcomes.size(); ++r)
        result.traces.push_back({static_cast<int>(r), detail::restart_seed(config.rng_seed, r), outcomes[r].quality,
                                 outcomes[r].trajectory});

    const auto baseline = detail::connected_baseline(g);
    if (outcomes[best].quality < detail::quality(g, baseline)) {
        result.partition = Partition(baseline);
        result.fell_back = true;
    } else {
        result.partition = Partition(outcomes[best].assignment);
    }
    result.modularity = evaluate_modularity(layer, result.partition, config.resolution);
    return result;
}

}  // namespace tradenet::community
