#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "pipeline.hpp"
#include "tradenet/errors.hpp"

namespace fs = std::filesystem;
using namespace tradenet;
using namespace tradenet::pipeline;

namespace {

void say(const std::string& msg) { std::cerr << "tradenet: " << msg << '\n'; }

void report_diagnostics(const std::vector<RowDiagnostic>& diags, const std::string& what) {
    if (diags.empty()) return;
    say(std::to_string(diags.size()) + " " + what + " rows reported");
    const std::size_t shown = std::min<std::size_t>(diags.size(), 10);
    for (std::size_t k = 0; k < shown; ++k)
        std::cerr << "  line " << diags[k].line << ": " << diags[k].message << '\n';
    if (shown < diags.size()) std::cerr << "  ...\n";
}

void prepare(const fs::path& dir) {
    if (dir.empty()) throw InvalidInput("no output directory given (--out)");
    fs::create_directories(dir);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Community structure and co-membership regressions for layered trade networks"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Flat key = value file; command-line options override it");

    RunConfig cfg;
    std::string raw, partitions_file, stats_file, link = "probit", inactive = "exclude";
    std::vector<std::string> commodities;

    app.add_option("--edges", cfg.edges, "Edge list (year,commodity,src,dst,weight), or raw flows with --factors");
    app.add_option("--raw", raw, "Raw flows for ingest (year,item_code,src,dst,quantity)");
    app.add_option("--factors", cfg.factors, "Conversion factors (item_code,group,kcal_per_unit)");
    app.add_option("--covariates", cfg.covariates, "Pair covariates CSV");
    app.add_option("--partitions", partitions_file, "partitions.csv written by detect");
    app.add_option("--stats", stats_file, "stats.csv written by stats");
    app.add_option("--out", cfg.output_dir, "Output directory");
    app.add_option("--years", cfg.years, "Years to analyse")->delimiter(',');
    app.add_option("--commodities", commodities, "Commodities to analyse (default: all)")->delimiter(',');
    app.add_option("--seed", cfg.seed, "Global random seed")->capture_default_str();
    app.add_option("--threads", cfg.threads, "Worker threads within a stage")->capture_default_str();

    auto& d = cfg.detector;
    app.add_option("--resolution", d.resolution, "Modularity resolution")->capture_default_str();
    app.add_option("--restarts", d.restarts, "Detector restarts")->capture_default_str();
    app.add_option("--max-iterations", d.max_iterations, "Coarsen/refine cycles per restart")->capture_default_str();
    app.add_option("--max-levels", d.max_levels, "Coarsening levels per cycle")->capture_default_str();
    app.add_option("--max-repetitions", d.max_repetitions, "Vertex-moving sweeps per level")->capture_default_str();
    app.add_option("--min-gain", d.min_gain, "Smallest modularity gain accepted")->capture_default_str();
    app.add_option("--coupling", cfg.coupling, "Interlayer coupling weight")->capture_default_str();
    app.add_flag("!--no-multilayer", cfg.multilayer, "Skip multilayer detection in pipeline");
    app.add_flag("--active-only", cfg.active_only, "Statistics over each layer's active nodes only");
    app.add_option("--compare-inactive", inactive, "Inactive nodes in NMI: exclude | singletons")
        ->check(CLI::IsMember({"exclude", "singletons"}))
        ->capture_default_str();
    app.add_option("--prune-threshold", cfg.prune_threshold, "Absolute correlation above which a statistic is dropped")
        ->capture_default_str();
    app.add_option("--link", link, "probit | logit")->check(CLI::IsMember({"probit", "logit"}))->capture_default_str();
    app.add_flag("--panel", cfg.panel, "Also fit pooled panels over the selected years");
    app.add_flag("--include-inactive", cfg.include_inactive, "Keep pairs with an inactive member as y = 0");
    app.add_option("--fit-max-iterations", cfg.fit.max_iterations, "Newton iteration cap")->capture_default_str();
    app.add_option("--score-tolerance", cfg.fit.score_tolerance, "Newton score tolerance")->capture_default_str();
    app.add_option("--loglik-tolerance", cfg.fit.loglik_tolerance, "Newton log-likelihood tolerance")
        ->capture_default_str();
    app.add_option("--separation-bound", cfg.fit.separation_bound, "Coefficient bound signalling separation")
        ->capture_default_str();

    auto* ingest_cmd = app.add_subcommand("ingest", "Convert raw flows to an edge list");
    auto* stats_cmd = app.add_subcommand("stats", "Per-layer statistics and cross-layer weight correlations");
    auto* detect_cmd = app.add_subcommand("detect", "Single-layer community detection");
    auto* multi_cmd = app.add_subcommand("detect-multi", "Multilayer community detection per year");
    auto* compare_cmd = app.add_subcommand("compare", "NMI and Herfindahl tables from partitions.csv");
    auto* pca_cmd = app.add_subcommand("pca", "Correlation pruning and PCA from stats.csv");
    auto* probit_cmd = app.add_subcommand("probit", "Co-membership regressions from partitions.csv");
    auto* pipeline_cmd = app.add_subcommand("pipeline", "Every stage in order, plus manifest.json");
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    CLI11_PARSE(app, argc, argv);

    if (app.count("--commodities")) {
        std::vector<std::string> keep;
        for (auto& c : commodities)
            if (!c.empty()) keep.push_back(c);
        if (!(keep.size() == 1 && keep[0] == "all")) cfg.commodities = keep;
    }
    cfg.link = link == "logit" ? econ::Link::Logit : econ::Link::Probit;
    cfg.compare_inactive = inactive == "singletons" ? compare::InactiveNodes::Singletons : compare::InactiveNodes::Exclude;

    try {
        if (ingest_cmd->parsed()) {
            if (raw.empty()) throw InvalidInput("ingest needs --raw");
            prepare(cfg.output_dir);
            std::ifstream in(raw, std::ios::binary);
            if (!in) throw InvalidInput("cannot open raw flows '" + raw + "'");
            std::ifstream factors;
            if (!cfg.factors.empty()) {
                factors.open(cfg.factors, std::ios::binary);
                if (!factors) throw InvalidInput("cannot open factor table '" + cfg.factors.string() + "'");
            }
            const auto result = ingest(in, cfg.factors.empty() ? nullptr : &factors);
            std::ofstream out(cfg.output_dir / "edges.csv", std::ios::binary);
            write_ingested(out, result, cfg.seed);
            const auto& r = result.report;
            say(std::to_string(r.rows) + " rows read, " + std::to_string(r.aggregated_edges) + " edges written, " +
                std::to_string(r.zero_quantity) + " zero-quantity, " + std::to_string(r.unmapped) + " unmapped, " +
                std::to_string(r.malformed) + " malformed");
            report_diagnostics(r.diagnostics, "raw");
            return 0;
        }
        if (stats_cmd->parsed() || detect_cmd->parsed() || multi_cmd->parsed()) {
            cfg.validate();
            prepare(cfg.output_dir);
            const Dataset data = load(cfg);
            report_diagnostics(data.data.diagnostics, "edge");
            if (stats_cmd->parsed()) write_stats(cfg.output_dir, run_stats(data, cfg), cfg.seed);
            if (detect_cmd->parsed())
                write_detect(cfg.output_dir, data.data.universe, run_detect(data, cfg), cfg.seed);
            if (multi_cmd->parsed())
                write_multilayer(cfg.output_dir, data.data.universe, run_multilayer(data, cfg), cfg.coupling,
                                 cfg.seed);
            return 0;
        }
        if (compare_cmd->parsed() || probit_cmd->parsed()) {
            if (partitions_file.empty()) throw InvalidInput("needs --partitions");
            prepare(cfg.output_dir);
            const Universe u = read_partitions(partitions_file);
            if (compare_cmd->parsed()) {
                write_compare(cfg.output_dir, run_compare(u.layers, {}, cfg), cfg.seed);
                return 0;
            }
            if (cfg.covariates.empty()) throw InvalidInput("probit needs --covariates");
            const auto cov = econ::read_covariates(cfg.covariates);
            report_diagnostics(cov.diagnostics, "covariate");
            const auto out = run_econ(u.universe, u.layers, cov, cfg);
            write_econ(cfg.output_dir, out, cfg.seed);
            for (const auto* set : {&out.cross_section, &out.panel})
                for (const auto& o : *set)
                    if (o.status.rfind("ok", 0) != 0) say(o.commodity + " " + o.period + ": " + o.status);
            return 0;
        }
        if (pca_cmd->parsed()) {
            if (stats_file.empty()) throw InvalidInput("pca needs --stats");
            prepare(cfg.output_dir);
            const auto years = run_pca(read_stats(stats_file), cfg);
            for (const auto& y : years)
                if (!y.notice.empty()) say(std::to_string(y.year) + " skipped: " + y.notice);
            write_pca(cfg.output_dir, years, cfg.seed);
            return 0;
        }
        if (pipeline_cmd->parsed()) {
            const RunReport report = run_pipeline(cfg);
            for (const auto& s : report.stages) {
                std::fprintf(stderr, "  %-13s %-8s %8.3fs\n", s.name.c_str(), s.status.c_str(), s.wall_seconds);
                for (const auto& n : s.notices) std::cerr << "      " << n << '\n';
            }
            return report.ok() ? 0 : 1;
        }
    } catch (const StageError& e) {
        say(e.what());
        return 1;
    } catch (const std::exception& e) {
        say(std::string("error: ") + e.what());
        return 1;
    }
    return 1;
}
