#include "tradenet/multilayer.hpp"

#include <algorithm>
#include <cmath>

#include "modularity_engine.hpp"
#include "tradenet/errors.hpp"

namespace tradenet::multilayer {

namespace {

detail::NullModelGraph supra_problem(const MultiNetwork& net, const MultilayerConfig& config) {
    const auto resolutions = config.resolutions_for(net);
    return detail::multilayer_problem(net.layers(), net.n_nodes(), config.coupling_for(net), resolutions);
}

}  // namespace

std::vector<double> MultilayerConfig::resolutions_for(const MultiNetwork& net) const {
    if (resolutions.empty()) return std::vector<double>(net.n_layers(), 1.0);
    return resolutions;
}

void MultilayerConfig::validate(const MultiNetwork& net) const {
    detector.validate();
    const double theta = coupling_for(net);
    if (!(theta >= 0.0) || !std::isfinite(theta)) throw InvalidInput("coupling must be finite and nonnegative");
    if (!resolutions.empty() && resolutions.size() != net.n_layers())
        throw InvalidInput("need one resolution per layer");
    for (double g : resolutions)
        if (!(g > 0.0)) throw InvalidInput("layer resolutions must be positive");
}

double evaluate_q_star(const MultiNetwork& net, const MultilayerPartition& partition, const MultilayerConfig& config) {
    config.validate(net);
    if (partition.n_nodes() != net.n_nodes() || partition.n_layers() != net.n_layers())
        throw InvalidInput("multilayer partition does not cover every (node, layer) pair");
    if (net.n_layers() == 0 || net.n_nodes() == 0) throw UndefinedStatistic("Q* of an empty multinetwork");
    return detail::quality(supra_problem(net, config), partition.flat().assignment());
}

MultilayerResult detect_multilayer(const MultiNetwork& net, const MultilayerConfig& config) {
    config.validate(net);
    const bool has_weight =
        std::any_of(net.layers().begin(), net.layers().end(), [](const Layer& l) { return l.volume() > 0.0; });
    if (!has_weight) throw InvalidInput("multilayer detection needs a layer with positive volume");

    const detail::NullModelGraph g = supra_problem(net, config);
    const community::DetectorConfig& d = config.detector;
    const detail::SearchSettings settings{d.max_iterations, d.max_levels, d.max_repetitions, d.min_gain};
    const auto outcomes = detail::run_restarts(g, settings, d.rng_seed, d.restarts, d.threads);
    const std::size_t best = detail::best_outcome(outcomes);

    MultilayerResult result;
    result.restarts_run = d.restarts;
    result.best_restart = static_cast<int>(best);
    for (std::size_t r = 0; r < outcomes.size(); ++r)
        result.traces.push_back({static_cast<int>(r), detail::restart_seed(d.rng_seed, r), outcomes[r].quality,
                                 outcomes[r].trajectory});

    std::vector<CommunityId> chosen = outcomes[best].assignment;
    const auto baseline = detail::connected_baseline(g);
    if (outcomes[best].quality < detail::quality(g, baseline)) {
        chosen = baseline;
        result.fell_back = true;
    }
    result.partition = MultilayerPartition(net.n_nodes(), net.n_layers(), chosen);
    result.q_star = evaluate_q_star(net, result.partition, config);
    return result;
}

Partition project(const MultilayerPartition& partition, std::size_t layer) {
    if (layer >= partition.n_layers()) throw InvalidInput("layer index out of range");
    std::vector<CommunityId> ids(partition.n_nodes());
    for (NodeIndex i = 0; i < partition.n_nodes(); ++i) ids[i] = partition.community(i, layer);
    return Partition(ids);
}

Partition project(const MultilayerPartition& partition, const MultiNetwork& net, std::string_view commodity) {
    auto x = net.find_layer(commodity);
    if (!x) throw InvalidInput("no layer for commodity '" + std::string(commodity) + "'");
    return project(partition, *x);
}

std::vector<std::size_t> diversification(const MultilayerPartition& partition) {
    std::vector<std::size_t> out(partition.n_nodes());
    std::vector<CommunityId> seen;
    for (NodeIndex i = 0; i < partition.n_nodes(); ++i) {
        seen.clear();
        for (std::size_t x = 0; x < partition.n_layers(); ++x) seen.push_back(partition.community(i, x));
        std::sort(seen.begin(), seen.end());
        out[i] = static_cast<std::size_t>(std::unique(seen.begin(), seen.end()) - seen.begin());
    }
    return out;
}

std::vector<std::size_t> diversification_histogram(const MultilayerPartition& partition) {
    std::vector<std::size_t> counts(partition.n_layers() + 1, 0);
    for (std::size_t d : diversification(partition)) ++counts[d];
    return counts;
}

}  // namespace tradenet::multilayer
