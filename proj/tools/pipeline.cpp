#include "pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include <nlohmann/json.hpp>

#include "tradenet/csv.hpp"
#include "tradenet/errors.hpp"
#include "tradenet/parallel.hpp"

namespace tradenet::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string meta_line(std::uint64_t seed) {
    return std::string("tradenet ") + kVersion + " seed=" + std::to_string(seed);
}

// Numbers in JSON carry the same 12 significant digits as the CSVs.
json number(double v) {
    if (!std::isfinite(v)) return nullptr;
    return std::strtod(csv::format_number(v).c_str(), nullptr);
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidInput("cannot write " + path.string());
    return out;
}

std::ifstream open_input(const fs::path& path, std::string_view what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InvalidInput("cannot open " + std::string(what) + " '" + path.string() + "'");
    return in;
}

std::string fmt(double v) { return csv::format_number(v); }
std::string fmt(const std::optional<double>& v) { return csv::format_optional(v); }

std::vector<CommunityId> with_singletons(std::span<const NodeIndex> nodes, const Partition& sub, std::size_t n) {
    std::vector<CommunityId> ids(n, 0);
    std::vector<bool> set(n, false);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        ids[nodes[k]] = sub[k];
        set[nodes[k]] = true;
    }
    CommunityId next = static_cast<CommunityId>(sub.n_communities());
    for (std::size_t i = 0; i < n; ++i)
        if (!set[i]) ids[i] = next++;
    return ids;
}

std::vector<NodeIndex> indices_of(const std::vector<bool>& mask) {
    std::vector<NodeIndex> out;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) out.push_back(i);
    return out;
}

json trace_json(const community::RestartTrace& t) {
    json traj = json::array();
    for (double q : t.trajectory) traj.push_back(number(q));
    return {{"restart", t.restart}, {"seed", t.seed}, {"quality", number(t.modularity)}, {"trajectory", traj}};
}

}  // namespace

// ---------------------------------------------------------------- ingestion

IngestResult ingest(std::istream& raw, std::istream* factors) {
    IngestResult result;
    IngestReport& rep = result.report;

    struct Factor {
        std::string group;
        double kcal;
    };
    std::map<std::string, Factor> table;
    if (factors) {
        csv::Reader f(*factors);
        const auto c_item = f.require("item_code");
        const auto c_group = f.require("group");
        const auto c_kcal = f.require("kcal_per_unit");
        while (f.next()) {
            const auto& row = f.row();
            auto note = [&](const std::string& m) { rep.diagnostics.push_back({f.line(), "factor table: " + m}); };
            if (row.size() != f.header().size()) {
                note("wrong field count");
                continue;
            }
            const auto kcal = csv::parse_double(row[c_kcal]);
            if (!kcal || !(*kcal > 0.0) || !std::isfinite(*kcal)) {
                note("kcal_per_unit must be a positive number");
                continue;
            }
            if (row[c_item].empty() || row[c_group].empty()) {
                note("empty item code or group");
                continue;
            }
            if (!table.emplace(row[c_item], Factor{row[c_group], *kcal}).second) note("duplicate item code " + row[c_item]);
        }
    }

    csv::Reader r(raw);
    const auto c_year = r.require("year");
    const auto c_item = r.require("item_code");
    const auto c_src = r.require("src");
    const auto c_dst = r.require("dst");
    const auto c_qty = r.require("quantity");
    std::map<std::tuple<int, std::string, std::string, std::string>, double> flows;
    while (r.next()) {
        ++rep.rows;
        const auto& row = r.row();
        auto malformed = [&](const std::string& m) {
            ++rep.malformed;
            rep.diagnostics.push_back({r.line(), m});
        };
        if (row.size() != r.header().size()) {
            malformed("expected " + std::to_string(r.header().size()) + " fields, got " + std::to_string(row.size()));
            continue;
        }
        const auto year = csv::parse_int(row[c_year]);
        if (!year) {
            malformed("malformed year '" + row[c_year] + "'");
            continue;
        }
        const auto qty = csv::parse_double(row[c_qty]);
        if (!qty || !std::isfinite(*qty) || *qty < 0.0) {
            malformed("malformed quantity '" + row[c_qty] + "'");
            continue;
        }
        if (row[c_src].empty() || row[c_dst].empty() || row[c_item].empty()) {
            malformed("empty country or item code");
            continue;
        }
        if (row[c_src] == row[c_dst]) {
            malformed("self-loop");
            continue;
        }
        if (*qty == 0.0) {
            ++rep.zero_quantity;
            continue;
        }
        std::string commodity = row[c_item];
        double weight = *qty;
        if (factors) {
            auto it = table.find(row[c_item]);
            if (it == table.end()) {
                ++rep.unmapped;
                rep.diagnostics.push_back({r.line(), "no conversion factor for item " + row[c_item]});
                continue;
            }
            commodity = it->second.group;
            weight *= it->second.kcal;
        }
        flows[{static_cast<int>(*year), commodity, row[c_src], row[c_dst]}] += weight;
    }
    std::stable_sort(rep.diagnostics.begin(), rep.diagnostics.end(),
                     [](const RowDiagnostic& a, const RowDiagnostic& b) { return a.line < b.line; });

    result.header = {"year", "commodity", "src", "dst", "weight"};
    for (const auto& [key, w] : flows) {
        const auto& [year, commodity, src, dst] = key;
        result.rows.push_back({std::to_string(year), commodity, src, dst, fmt(w)});
    }
    rep.aggregated_edges = result.rows.size();
    return result;
}

void write_ingested(std::ostream& out, const IngestResult& result, std::uint64_t seed) {
    csv::Writer w(out);
    w.comment(meta_line(seed));
    w.row(result.header);
    for (const auto& row : result.rows) w.row(row);
}

// ---------------------------------------------------------------- config

void RunConfig::validate() const {
    if (edges.empty()) throw InvalidInput("no edge list given");
    if (!fs::exists(edges)) throw InvalidInput("edge list '" + edges.string() + "' does not exist");
    if (!factors.empty() && !fs::exists(factors))
        throw InvalidInput("factor table '" + factors.string() + "' does not exist");
    if (years.empty()) throw InvalidInput("no years selected");
    if (commodities && commodities->empty()) throw InvalidInput("the commodity filter is empty");
    detector_config().validate();
    if (!(coupling >= 0.0) || !std::isfinite(coupling)) throw InvalidInput("coupling must be finite and nonnegative");
    if (!(prune_threshold > 0.0 && prune_threshold <= 1.0)) throw InvalidInput("prune threshold must be in (0, 1]");
    if (threads < 1) throw InvalidInput("threads must be at least 1");
    if (fit.max_iterations < 1 || !(fit.score_tolerance > 0.0) || !(fit.loglik_tolerance > 0.0) ||
        !(fit.separation_bound > 0.0))
        throw InvalidInput("fit tolerances must be positive");
}

community::DetectorConfig RunConfig::detector_config() const {
    community::DetectorConfig d = detector;
    d.rng_seed = seed;
    return d;
}

// ---------------------------------------------------------------- stages

Dataset load(const RunConfig& config) {
    Dataset ds;
    if (config.factors.empty()) {
        ds.data = read_edge_list(config.edges);
    } else {
        auto raw = open_input(config.edges, "raw flows");
        auto factors = open_input(config.factors, "factor table");
        IngestResult ing = ingest(raw, &factors);
        std::stringstream text;
        write_ingested(text, ing, config.seed);
        ds.data = read_edge_list(text);
        ds.ingest = std::move(ing.report);
    }
    const std::set<int> years(config.years.begin(), config.years.end());
    for (std::size_t l = 0; l < ds.data.layers.size(); ++l) {
        const Layer& layer = ds.data.layers[l];
        if (!years.count(layer.year())) continue;
        if (config.commodities &&
            std::find(config.commodities->begin(), config.commodities->end(), layer.commodity()) ==
                config.commodities->end())
            continue;
        ds.selected.push_back(l);
    }
    if (ds.selected.empty()) throw InvalidInput("no layer matches the selected years and commodities");
    return ds;
}

std::vector<NodeIndex> year_nodes(const Dataset& data, int year) {
    std::vector<bool> any(data.data.universe.size(), false);
    for (std::size_t l : data.selected) {
        const Layer& layer = data.data.layers[l];
        if (layer.year() != year) continue;
        const auto a = active_nodes(layer);
        for (std::size_t i = 0; i < a.size(); ++i)
            if (a[i]) any[i] = true;
    }
    return indices_of(any);
}

namespace {

std::vector<int> selected_years(const Dataset& data) {
    std::set<int> ys;
    for (std::size_t l : data.selected) ys.insert(data.data.layers[l].year());
    return {ys.begin(), ys.end()};
}

}  // namespace

StatsOutput run_stats(const Dataset& data, const RunConfig& config) {
    StatsOutput out;
    out.rows.resize(data.selected.size());
    std::map<int, std::vector<NodeIndex>> base;
    for (int y : selected_years(data)) base[y] = year_nodes(data, y);
    parallel_for(data.selected.size(), config.threads, [&](std::size_t k) {
        const Layer& layer = data.data.layers[data.selected[k]];
        const std::vector<NodeIndex> nodes =
            config.active_only ? indices_of(active_nodes(layer)) : base.at(layer.year());
        const Layer sub = induced_sublayer(layer, nodes);
        out.rows[k] = {layer.key(), sub.n_nodes(), sub.n_edges(), sub.volume(), stats::compute_stats(sub)};
    });
    for (int y : selected_years(data)) {
        YearCorrelation c;
        c.year = y;
        std::vector<Layer> logs;
        for (std::size_t l : data.selected) {
            const Layer& layer = data.data.layers[l];
            if (layer.year() != y) continue;
            c.commodities.push_back(layer.commodity());
            logs.push_back(log_weights(layer));
        }
        c.r = stats::layer_weight_correlation(logs);
        out.correlations.push_back(std::move(c));
    }
    return out;
}

std::vector<LayerPartition> run_detect(const Dataset& data, const RunConfig& config) {
    std::vector<std::size_t> layers;
    for (std::size_t l : data.selected)
        if (data.data.layers[l].volume() > 0.0) layers.push_back(l);
    std::vector<LayerPartition> out(layers.size());
    community::DetectorConfig d = config.detector_config();
    d.threads = 1;  // layers run in parallel instead
    const std::size_t n = data.data.universe.size();
    parallel_for(layers.size(), config.threads, [&](std::size_t k) {
        const Layer& layer = data.data.layers[layers[k]];
        LayerPartition& lp = out[k];
        lp.key = layer.key();
        lp.active = active_nodes(layer);
        const auto nodes = indices_of(lp.active);
        lp.detection = community::detect(induced_sublayer(layer, nodes), d);
        lp.modularity = lp.detection.modularity;
        lp.partition = Partition(with_singletons(nodes, lp.detection.partition, n));
    });
    return out;
}

std::vector<YearMultilayer> run_multilayer(const Dataset& data, const RunConfig& config) {
    std::vector<YearMultilayer> out;
    for (int y : selected_years(data)) {
        YearMultilayer ym;
        ym.year = y;
        ym.nodes = year_nodes(data, y);
        std::vector<std::string> labels;
        for (NodeIndex i : ym.nodes) labels.push_back(data.data.universe.label(i));
        std::vector<Layer> layers;
        for (std::size_t l : data.selected) {
            const Layer& layer = data.data.layers[l];
            if (layer.year() != y || !(layer.volume() > 0.0)) continue;
            ym.commodities.push_back(layer.commodity());
            layers.push_back(induced_sublayer(layer, ym.nodes).with_key(layer.key()));
            ym.active.push_back(active_nodes(layers.back()));
        }
        if (layers.empty()) continue;
        const MultiNetwork net(NodeUniverse(std::move(labels)), std::move(layers), config.coupling);
        multilayer::MultilayerConfig mc;
        mc.detector = config.detector_config();
        mc.detector.threads = config.threads;
        ym.result = multilayer::detect_multilayer(net, mc);
        out.push_back(std::move(ym));
    }
    return out;
}

CompareOutput run_compare(std::span<const LayerPartition> layers, std::span<const YearMultilayer> multi,
                          const RunConfig& config) {
    CompareOutput out;
    auto nmi_row = [&](std::string kind, const LayerPartition& a, const LayerPartition& b) {
        NmiRow row{std::move(kind), a.key, b.key, std::nullopt, 0};
        const auto [pa, pb] = compare::align(a.partition, a.active, b.partition, b.active, config.compare_inactive);
        row.n_nodes = pa.size();
        if (row.n_nodes > 0) {
            try {
                row.nmi = compare::nmi(pa, pb);
            } catch (const UndefinedStatistic&) {
            }
        }
        out.nmi.push_back(std::move(row));
    };
    // Same year across commodities, then same commodity across years.
    std::vector<const LayerPartition*> by_year;
    for (const auto& l : layers) by_year.push_back(&l);
    std::stable_sort(by_year.begin(), by_year.end(), [](auto* a, auto* b) {
        return std::tie(a->key.year, a->key.commodity) < std::tie(b->key.year, b->key.commodity);
    });
    for (std::size_t i = 0; i < by_year.size(); ++i)
        for (std::size_t j = i + 1; j < by_year.size() && by_year[j]->key.year == by_year[i]->key.year; ++j)
            nmi_row("commodity", *by_year[i], *by_year[j]);
    std::vector<const LayerPartition*> by_commodity;
    for (const auto& l : layers) by_commodity.push_back(&l);
    std::stable_sort(by_commodity.begin(), by_commodity.end(), [](auto* a, auto* b) { return a->key < b->key; });
    for (std::size_t i = 0; i < by_commodity.size(); ++i)
        for (std::size_t j = i + 1;
             j < by_commodity.size() && by_commodity[j]->key.commodity == by_commodity[i]->key.commodity; ++j)
            nmi_row("year", *by_commodity[i], *by_commodity[j]);

    for (const auto* l : by_commodity) {
        const Partition p = l->partition.restricted(l->active);
        out.herfindahl.push_back({l->key, "single", p.size(), compare::herfindahl(p)});
    }
    for (const auto& ym : multi)
        for (std::size_t x = 0; x < ym.commodities.size(); ++x) {
            const Partition p = multilayer::project(ym.result.partition, x).restricted(ym.active[x]);
            out.herfindahl.push_back({{ym.commodities[x], ym.year}, "multilayer", p.size(), compare::herfindahl(p)});
        }
    std::stable_sort(out.herfindahl.begin(), out.herfindahl.end(), [](const auto& a, const auto& b) {
        return std::tie(a.key, a.source) < std::tie(b.key, b.source);
    });
    return out;
}

std::vector<YearPca> run_pca(std::span<const StatsRow> rows, const RunConfig& config) {
    std::set<int> years;
    for (const auto& r : rows) years.insert(r.key.year);
    std::vector<YearPca> out;
    for (int y : years) {
        YearPca yp;
        yp.year = y;
        reduce::StatsTable table;
        for (auto name : stats::kStatNames) table.variables.emplace_back(name);
        std::vector<const StatsRow*> in_year;
        for (const auto& r : rows)
            if (r.key.year == y) in_year.push_back(&r);
        table.values = Matrix(in_year.size(), table.variables.size());
        for (std::size_t i = 0; i < in_year.size(); ++i) {
            table.row_labels.push_back(in_year[i]->key.commodity);
            const auto v = in_year[i]->stats.values();
            for (std::size_t j = 0; j < v.size(); ++j) table.values(i, j) = v[j].value_or(std::nan(""));
        }
        const auto complete = table.complete_rows();
        for (const auto& label : table.row_labels)
            if (std::find(complete.row_labels.begin(), complete.row_labels.end(), label) == complete.row_labels.end())
                yp.excluded_rows.push_back(label);
        std::vector<std::string> varying;
        for (std::size_t j = 0; j < complete.n_vars(); ++j) {
            const auto col = complete.column(j);
            const bool flat = std::all_of(col.begin(), col.end(), [&](double v) { return v == col.front(); });
            (flat ? yp.constant : varying).push_back(complete.variables[j]);
        }
        if (complete.n_rows() < 2) {
            yp.notice = "fewer than two layers with every statistic defined";
        } else if (varying.size() < 2) {
            yp.notice = "fewer than two statistics vary across layers";
        } else {
            try {
                yp.result = reduce::pruned_pca(complete.select(varying), config.prune_threshold);
            } catch (const Error& e) {
                yp.notice = e.what();
            }
        }
        out.push_back(std::move(yp));
    }
    return out;
}

EconOutput run_econ(const NodeUniverse& universe, std::span<const LayerPartition> layers,
                    const econ::CovariateTable& covariates, const RunConfig& config) {
    EconOutput out;
    out.covariate_diagnostics = covariates.diagnostics;
    econ::DyadOptions opt;
    opt.include_inactive = config.include_inactive;
    std::vector<econ::LayerFitRequest> cs;
    std::map<std::string, std::vector<econ::LayerMembership>> by_commodity;
    for (const auto& l : layers) {
        econ::LayerMembership m{l.key.year, l.partition, l.active};
        cs.push_back({l.key.commodity, {m}});
        by_commodity[l.key.commodity].push_back(std::move(m));
    }
    out.cross_section = econ::fit_all_layers(universe, cs, covariates, config.link, opt, config.fit, config.threads);
    if (config.panel) {
        std::vector<econ::LayerFitRequest> panel;
        for (auto& [c, ms] : by_commodity)
            if (ms.size() >= 2) panel.push_back({c, std::move(ms)});
        opt.mode = econ::FrameMode::Panel;
        out.panel = econ::fit_all_layers(universe, panel, covariates, config.link, opt, config.fit, config.threads);
    }
    return out;
}

// ---------------------------------------------------------------- readers

Universe read_partitions(const fs::path& path) {
    auto in = open_input(path, "partition file");
    csv::Reader r(in);
    const auto c_commodity = r.require("commodity");
    const auto c_year = r.require("year");
    const auto c_node = r.require("node");
    const auto c_comm = r.require("community");
    std::map<LayerKey, std::vector<std::pair<std::string, CommunityId>>> rows;
    std::set<std::string> labels;
    while (r.next()) {
        const auto& row = r.row();
        const auto where = path.string() + ":" + std::to_string(r.line());
        if (row.size() != r.header().size()) throw InvalidInput(where + ": wrong field count");
        const auto year = csv::parse_int(row[c_year]);
        const auto comm = csv::parse_int(row[c_comm]);
        if (!year || !comm || *comm < 0) throw InvalidInput(where + ": malformed year or community");
        labels.insert(row[c_node]);
        rows[{row[c_commodity], static_cast<int>(*year)}].push_back({row[c_node], static_cast<CommunityId>(*comm)});
    }
    Universe u;
    u.universe = NodeUniverse(std::vector<std::string>(labels.begin(), labels.end()));
    const std::size_t n = u.universe.size();
    for (auto& [key, members] : rows) {
        LayerPartition lp;
        lp.key = key;
        lp.active.assign(n, false);
        std::vector<NodeIndex> nodes;
        std::vector<CommunityId> ids;
        std::sort(members.begin(), members.end());
        for (const auto& [label, c] : members) {
            const NodeIndex i = u.universe.index(label);
            if (lp.active[i]) throw InvalidInput(path.string() + ": node " + label + " listed twice in " + key.to_string());
            lp.active[i] = true;
            nodes.push_back(i);
            ids.push_back(c);
        }
        lp.partition = Partition(with_singletons(nodes, Partition(ids), n));
        u.layers.push_back(std::move(lp));
    }
    return u;
}

std::vector<StatsRow> read_stats(const fs::path& path) {
    auto in = open_input(path, "statistics file");
    csv::Reader r(in);
    const auto c_commodity = r.require("commodity");
    const auto c_year = r.require("year");
    std::vector<std::size_t> cols;
    for (auto name : stats::kStatNames) cols.push_back(r.require(name));
    std::vector<StatsRow> out;
    while (r.next()) {
        const auto& row = r.row();
        const auto where = path.string() + ":" + std::to_string(r.line());
        if (row.size() != r.header().size()) throw InvalidInput(where + ": wrong field count");
        const auto year = csv::parse_int(row[c_year]);
        if (!year) throw InvalidInput(where + ": malformed year");
        std::array<std::optional<double>, 11> v;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            if (row[cols[k]] == "NA") continue;
            v[k] = csv::parse_double(row[cols[k]]);
            if (!v[k]) throw InvalidInput(where + ": malformed " + std::string(stats::kStatNames[k]));
        }
        StatsRow s;
        s.key = {row[c_commodity], static_cast<int>(*year)};
        s.stats.density = v[0];
        s.stats.bilateral_density = v[1];
        s.stats.weighted_asymmetry = v[2];
        s.stats.lcc_size = v[3] ? static_cast<std::size_t>(*v[3]) : 0;
        s.stats.centralization = v[4];
        s.stats.bin_assortativity = v[5];
        s.stats.wei_assortativity = v[6];
        s.stats.bin_clustering = v[7];
        s.stats.wei_clustering = v[8];
        s.stats.mean_log_weight = v[9];
        s.stats.std_log_weight = v[10];
        out.push_back(std::move(s));
    }
    return out;
}

// ---------------------------------------------------------------- writers

std::vector<std::string> stats_files() { return {"stats.csv", "layer_correlations.csv"}; }
std::vector<std::string> detect_files() { return {"partitions.csv", "layer_communities.csv", "detection_log.jsonl"}; }
std::vector<std::string> multilayer_files() {
    return {"multilayer_partitions.csv", "multilayer_summary.csv", "diversification.csv",
            "diversification_histogram.csv", "multilayer_log.jsonl"};
}
std::vector<std::string> compare_files() { return {"nmi.csv", "herfindahl.csv"}; }
std::vector<std::string> pca_files() {
    return {"pca_variance.csv", "pca_loadings.csv", "pca_scores.csv", "pca_pruning.csv"};
}
std::vector<std::string> econ_files() {
    return {"regressions.csv", "regression_status.csv", "regressions_panel.csv", "regression_panel_status.csv",
            "covariate_diagnostics.csv"};
}

void write_stats(const fs::path& dir, const StatsOutput& out, std::uint64_t seed) {
    {
        auto f = open_output(dir / "stats.csv");
        csv::Writer w(f);
        w.comment(meta_line(seed));
        std::vector<std::string> header = {"commodity", "year", "n_nodes", "n_edges", "volume"};
        for (auto name : stats::kStatNames) header.emplace_back(name);
        header.emplace_back("intensity_ratio");
        w.row(header);
        for (const auto& r : out.rows) {
            std::vector<std::string> row = {r.key.commodity, std::to_string(r.key.year), std::to_string(r.n_nodes),
                                            std::to_string(r.n_edges), fmt(r.volume)};
            for (const auto& v : r.stats.values()) row.push_back(fmt(v));
            row.push_back(fmt(r.stats.intensity_ratio));
            w.row(row);
        }
    }
    auto f = open_output(dir / "layer_correlations.csv");
    csv::Writer w(f);
    w.comment(meta_line(seed));
    w.row({"year", "commodity_a", "commodity_b", "r"});
    for (const auto& c : out.correlations)
        for (std::size_t a = 0; a < c.commodities.size(); ++a)
            for (std::size_t b = a + 1; b < c.commodities.size(); ++b)
                w.row({std::to_string(c.year), c.commodities[a], c.commodities[b], fmt(c.r[a][b])});
}

void write_detect(const fs::path& dir, const NodeUniverse& universe, std::span<const LayerPartition> layers,
                  std::uint64_t seed) {
    {
        auto f = open_output(dir / "partitions.csv");
        csv::Writer w(f);
        w.comment(meta_line(seed));
        w.row({"commodity", "year", "node", "community"});
        for (const auto& l : layers) {
            const Partition active = l.partition.restricted(l.active);
            std::size_t k = 0;
            for (NodeIndex i = 0; i < universe.size(); ++i)
                if (l.active[i])
                    w.row({l.key.commodity, std::to_string(l.key.year), universe.label(i), std::to_string(active[k++])});
        }
    }
    {
        auto f = open_output(dir / "layer_communities.csv");
        csv::Writer w(f);
        w.comment(meta_line(seed));
        w.row({"commodity", "year", "n_nodes", "communities", "modularity", "best_restart", "fell_back"});
        for (const auto& l : layers) {
            const Partition active = l.partition.restricted(l.active);
            w.row({l.key.commodity, std::to_string(l.key.year), std::to_string(active.size()),
                   std::to_string(active.n_communities()), fmt(l.modularity),
                   std::to_string(l.detection.best_restart), l.detection.fell_back ? "true" : "false"});
        }
    }
    auto f = open_output(dir / "detection_log.jsonl");
    f << json{{"meta", {{"tool", "tradenet"}, {"version", kVersion}, {"seed", seed}}}}.dump() << '\n';
    for (const auto& l : layers) {
        json traces = json::array();
        for (const auto& t : l.detection.traces) traces.push_back(trace_json(t));
        f << json{{"commodity", l.key.commodity},
                  {"year", l.key.year},
                  {"modularity", number(l.modularity)},
                  {"best_restart", l.detection.best_restart},
                  {"fell_back", l.detection.fell_back},
                  {"restarts", traces}}
                 .dump()
          << '\n';
    }
}

void write_multilayer(const fs::path& dir, const NodeUniverse& universe, std::span<const YearMultilayer> years,
                      double coupling, std::uint64_t seed) {
    auto open = [&](const char* name, std::vector<std::string> header) {
        auto f = open_output(dir / name);
        csv::Writer(f).comment(meta_line(seed));
        csv::Writer(f).row(header);
        return f;
    };
    auto parts = open("multilayer_partitions.csv", {"year", "commodity", "node", "active", "community"});
    auto summary = open("multilayer_summary.csv",
                        {"year", "layers", "nodes", "coupling", "q_star", "communities", "best_restart", "fell_back"});
    auto div = open("diversification.csv", {"year", "node", "diversification"});
    auto hist = open("diversification_histogram.csv", {"year", "diversification", "count"});
    auto log = open_output(dir / "multilayer_log.jsonl");
    log << json{{"meta", {{"tool", "tradenet"}, {"version", kVersion}, {"seed", seed}}}}.dump() << '\n';
    csv::Writer wp(parts), ws(summary), wd(div), wh(hist);
    for (const auto& ym : years) {
        const auto& p = ym.result.partition;
        const std::string y = std::to_string(ym.year);
        for (std::size_t x = 0; x < p.n_layers(); ++x)
            for (std::size_t k = 0; k < p.n_nodes(); ++k)
                wp.row({y, ym.commodities[x], universe.label(ym.nodes[k]), ym.active[x][k] ? "1" : "0",
                        std::to_string(p.community(k, x))});
        ws.row({y, std::to_string(p.n_layers()), std::to_string(p.n_nodes()), fmt(coupling), fmt(ym.result.q_star),
                std::to_string(p.flat().n_communities()), std::to_string(ym.result.best_restart),
                ym.result.fell_back ? "true" : "false"});
        const auto d = multilayer::diversification(p);
        for (std::size_t k = 0; k < d.size(); ++k) wd.row({y, universe.label(ym.nodes[k]), std::to_string(d[k])});
        const auto h = multilayer::diversification_histogram(p);
        for (std::size_t k = 1; k < h.size(); ++k) wh.row({y, std::to_string(k), std::to_string(h[k])});
        json traces = json::array();
        for (const auto& t : ym.result.traces) traces.push_back(trace_json(t));
        log << json{{"year", ym.year},
                    {"commodities", ym.commodities},
                    {"q_star", number(ym.result.q_star)},
                    {"best_restart", ym.result.best_restart},
                    {"fell_back", ym.result.fell_back},
                    {"restarts", traces}}
                   .dump()
            << '\n';
    }
}

void write_compare(const fs::path& dir, const CompareOutput& out, std::uint64_t seed) {
    {
        auto f = open_output(dir / "nmi.csv");
        csv::Writer w(f);
        w.comment(meta_line(seed));
        w.row({"kind", "commodity_a", "year_a", "commodity_b", "year_b", "n_nodes", "nmi"});
        for (const auto& r : out.nmi)
            w.row({r.kind, r.a.commodity, std::to_string(r.a.year), r.b.commodity, std::to_string(r.b.year),
                   std::to_string(r.n_nodes), fmt(r.nmi)});
    }
    auto f = open_output(dir / "herfindahl.csv");
    csv::Writer w(f);
    w.comment(meta_line(seed));
    w.row({"commodity", "year", "source", "n_nodes", "communities", "h", "h_normalized"});
    for (const auto& r : out.herfindahl)
        w.row({r.key.commodity, std::to_string(r.key.year), r.source, std::to_string(r.n_nodes),
               std::to_string(r.h.k), fmt(r.h.h), fmt(r.h.normalized)});
}

void write_pca(const fs::path& dir, std::span<const YearPca> years, std::uint64_t seed) {
    auto open = [&](const char* name, std::vector<std::string> header) {
        auto f = open_output(dir / name);
        csv::Writer(f).comment(meta_line(seed));
        csv::Writer(f).row(header);
        return f;
    };
    auto var = open("pca_variance.csv", {"year", "component", "eigenvalue", "explained_variance_ratio"});
    auto load = open("pca_loadings.csv", {"year", "variable", "component", "loading"});
    auto score = open("pca_scores.csv", {"year", "commodity", "component", "score"});
    auto prune = open("pca_pruning.csv", {"year", "variable", "status", "partner", "abs_r"});
    csv::Writer wv(var), wl(load), ws(score), wp(prune);
    for (const auto& yp : years) {
        const std::string y = std::to_string(yp.year);
        for (const auto& v : yp.constant) wp.row({y, v, "constant", "", ""});
        if (!yp.result) continue;
        const auto& r = *yp.result;
        auto pc = [](std::size_t k) { return "PC" + std::to_string(k + 1); };
        for (std::size_t k = 0; k < r.eigenvalues.size(); ++k)
            wv.row({y, pc(k), fmt(r.eigenvalues[k]), fmt(r.explained_variance_ratio[k])});
        for (std::size_t j = 0; j < r.variables.size(); ++j)
            for (std::size_t k = 0; k < r.loadings.cols(); ++k) wl.row({y, r.variables[j], pc(k), fmt(r.loadings(j, k))});
        for (std::size_t i = 0; i < r.row_labels.size(); ++i)
            for (std::size_t k = 0; k < r.scores.cols(); ++k) ws.row({y, r.row_labels[i], pc(k), fmt(r.scores(i, k))});
        for (const auto& v : r.kept_variables) wp.row({y, v, "kept", "", ""});
        for (const auto& d : r.dropped_variables) wp.row({y, d.name, "dropped", d.partner, fmt(d.abs_r)});
    }
}

void write_econ(const fs::path& dir, const EconOutput& out, std::uint64_t seed) {
    auto emit = [&](const char* name, auto&& body) {
        auto f = open_output(dir / name);
        csv::Writer(f).comment(meta_line(seed));
        body(f);
    };
    emit("regressions.csv", [&](std::ostream& f) { econ::write_results(f, out.cross_section); });
    emit("regression_status.csv", [&](std::ostream& f) { econ::write_status(f, out.cross_section); });
    emit("regressions_panel.csv", [&](std::ostream& f) { econ::write_results(f, out.panel); });
    emit("regression_panel_status.csv", [&](std::ostream& f) { econ::write_status(f, out.panel); });
    emit("covariate_diagnostics.csv", [&](std::ostream& f) {
        csv::Writer w(f);
        w.row({"line", "message"});
        for (const auto& d : out.covariate_diagnostics) w.row({std::to_string(d.line), d.message});
    });
}

// ---------------------------------------------------------------- full run

bool RunReport::ok() const {
    return std::none_of(stages.begin(), stages.end(), [](const StageReport& s) { return s.status == "failed"; });
}

namespace {

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json config_json(const RunConfig& c) {
    const auto d = c.detector_config();
    json commodities = nullptr;
    if (c.commodities) commodities = *c.commodities;
    return {
        {"edges", c.edges.string()},
        {"factors", c.factors.string()},
        {"covariates", c.covariates.string()},
        {"output_dir", c.output_dir.string()},
        {"years", c.years},
        {"commodities", commodities},
        {"seed", c.seed},
        {"threads", c.threads},
        {"detector",
         {{"resolution", d.resolution},
          {"restarts", d.restarts},
          {"max_iterations", d.max_iterations},
          {"max_levels", d.max_levels},
          {"max_repetitions", d.max_repetitions},
          {"min_gain", d.min_gain}}},
        {"multilayer", {{"enabled", c.multilayer}, {"coupling", c.coupling}, {"resolutions", "1 per layer"}}},
        {"stats", {{"node_base", c.active_only ? "layer" : "year"}, {"log_base", "e"}}},
        {"compare", {{"inactive_nodes", c.compare_inactive == compare::InactiveNodes::Exclude ? "exclude" : "singletons"}}},
        {"pca", {{"prune_threshold", c.prune_threshold}, {"priority", reduce::default_priority()}}},
        {"econ",
         {{"link", econ::to_string(c.link)},
          {"panel", c.panel},
          {"include_inactive", c.include_inactive},
          {"max_iterations", c.fit.max_iterations},
          {"score_tolerance", c.fit.score_tolerance},
          {"loglik_tolerance", c.fit.loglik_tolerance},
          {"separation_bound", c.fit.separation_bound},
          {"step_halvings", 60}}},
    };
}

template <class Fn>
void timed_stage(std::vector<StageReport>& stages, const std::string& name, Fn&& fn) {
    StageReport rep;
    rep.name = name;
    rep.status = "ok";
    const auto t0 = std::chrono::steady_clock::now();
    try {
        fn(rep);
    } catch (const std::exception& e) {
        rep.status = "failed";
        rep.notices.push_back(e.what());
    }
    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    stages.push_back(std::move(rep));
}

void write_manifest(const RunConfig& config, const RunReport& report, const std::string& started,
                    const json& inputs) {
    json stages = json::array();
    for (const auto& s : report.stages)
        stages.push_back({{"name", s.name},
                          {"status", s.status},
                          {"wall_seconds", s.wall_seconds},
                          {"notices", s.notices},
                          {"outputs", s.outputs}});
    json m = {
        {"tool", "tradenet"},
        {"version", kVersion},
        {"versions",
         {{"tradenet", kVersion},
          {"compiler", __VERSION__},
          {"cplusplus", __cplusplus},
          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}},
        {"seed", config.seed},
        {"config", config_json(config)},
        {"inputs", inputs},
        {"stages", stages},
        {"status", report.ok() ? "ok" : "failed"},
        {"started_at", started},
        {"finished_at", utc_now()},
    };
    auto f = open_output(config.output_dir / "manifest.json");
    f << m.dump(2) << '\n';
}

}  // namespace

RunReport run_pipeline(const RunConfig& config) {
    config.validate();
    const std::string started = utc_now();
    fs::create_directories(config.output_dir);
    const fs::path& dir = config.output_dir;

    RunReport report;
    json inputs = json::object();
    Dataset data;
    StatsOutput stats_out;
    std::vector<LayerPartition> partitions;
    std::vector<YearMultilayer> multi;

    auto failed = [&] { return report.stages.back().status == "failed"; };
    auto abort = [&]() {
        write_manifest(config, report, started, inputs);
        const auto& s = report.stages.back();
        throw StageError(s.name, s.notices.back());
    };

    timed_stage(report.stages, "ingest", [&](StageReport& rep) {
        data = load(config);
        inputs = {{"layers", data.data.layers.size()},
                  {"selected_layers", data.selected.size()},
                  {"nodes", data.data.universe.size()},
                  {"rejected_edge_rows", data.data.diagnostics.size()}};
        if (data.ingest) {
            inputs["raw_rows"] = data.ingest->rows;
            inputs["zero_quantity_rows"] = data.ingest->zero_quantity;
            inputs["unmapped_rows"] = data.ingest->unmapped;
            inputs["malformed_rows"] = data.ingest->malformed;
        }
        if (!data.data.diagnostics.empty())
            rep.notices.push_back(std::to_string(data.data.diagnostics.size()) + " edge rows rejected");
        if (data.ingest && !data.ingest->diagnostics.empty())
            rep.notices.push_back(std::to_string(data.ingest->diagnostics.size()) + " raw rows reported");
    });
    if (failed()) abort();

    timed_stage(report.stages, "stats", [&](StageReport& rep) {
        stats_out = run_stats(data, config);
        write_stats(dir, stats_out, config.seed);
        rep.outputs = stats_files();
    });
    if (failed()) abort();

    timed_stage(report.stages, "detect", [&](StageReport& rep) {
        partitions = run_detect(data, config);
        if (partitions.size() != data.selected.size())
            rep.notices.push_back(std::to_string(data.selected.size() - partitions.size()) +
                                  " layers without weight skipped");
        write_detect(dir, data.data.universe, partitions, config.seed);
        rep.outputs = detect_files();
    });
    if (failed()) abort();

    timed_stage(report.stages, "detect-multi", [&](StageReport& rep) {
        if (!config.multilayer) {
            rep.status = "skipped";
            rep.notices.push_back("multilayer detection disabled");
        } else {
            multi = run_multilayer(data, config);
        }
        write_multilayer(dir, data.data.universe, multi, config.coupling, config.seed);
        rep.outputs = multilayer_files();
    });
    if (failed()) abort();

    timed_stage(report.stages, "compare", [&](StageReport& rep) {
        write_compare(dir, run_compare(partitions, multi, config), config.seed);
        rep.outputs = compare_files();
    });
    if (failed()) abort();

    timed_stage(report.stages, "pca", [&](StageReport& rep) {
        const auto years = run_pca(stats_out.rows, config);
        for (const auto& y : years) {
            if (!y.excluded_rows.empty())
                rep.notices.push_back(std::to_string(y.year) + ": " + std::to_string(y.excluded_rows.size()) +
                                      " layers with undefined statistics left out");
            for (const auto& v : y.constant)
                rep.notices.push_back(std::to_string(y.year) + ": " + v + " is constant across layers, left out");
            if (!y.notice.empty()) rep.notices.push_back(std::to_string(y.year) + " skipped: " + y.notice);
        }
        write_pca(dir, years, config.seed);
        rep.outputs = pca_files();
    });
    if (failed()) abort();

    timed_stage(report.stages, "econ", [&](StageReport& rep) {
        if (config.covariates.empty() || !fs::exists(config.covariates)) {
            rep.status = "skipped";
            rep.notices.push_back(config.covariates.empty()
                                      ? "no covariates file configured"
                                      : "covariates file '" + config.covariates.string() + "' not found");
            return;
        }
        const auto cov = econ::read_covariates(config.covariates);
        const auto out = run_econ(data.data.universe, partitions, cov, config);
        if (!cov.diagnostics.empty())
            rep.notices.push_back(std::to_string(cov.diagnostics.size()) + " covariate rows rejected");
        std::size_t bad = 0;
        for (const auto* set : {&out.cross_section, &out.panel})
            for (const auto& o : *set) bad += o.status.rfind("ok", 0) != 0;
        if (bad) rep.notices.push_back(std::to_string(bad) + " regressions skipped or failed; see status files");
        write_econ(dir, out, config.seed);
        rep.outputs = econ_files();
    });
    if (failed()) abort();

    write_manifest(config, report, started, inputs);
    return report;
}

}  // namespace tradenet::pipeline
