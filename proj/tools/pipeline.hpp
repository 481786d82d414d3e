#pragma once

// Batch driver: ingestion, per-layer statistics, single-layer and multilayer
// detection, partition comparison, PCA and co-membership regressions.
//
// Every CSV the driver writes starts with a `# tradenet <version> seed=<n>`
// line. Data files carry no timestamps, so two runs with one configuration
// produce identical bytes; wall times and timestamps live in manifest.json.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tradenet/community.hpp"
#include "tradenet/errors.hpp"
#include "tradenet/compare.hpp"
#include "tradenet/econ.hpp"
#include "tradenet/io.hpp"
#include "tradenet/multilayer.hpp"
#include "tradenet/netstats.hpp"
#include "tradenet/reduce.hpp"

namespace tradenet::pipeline {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------- ingestion

struct IngestReport {
    std::size_t rows = 0;
    std::size_t aggregated_edges = 0;
    std::size_t zero_quantity = 0;
    std::size_t unmapped = 0;
    std::size_t malformed = 0;
    std::vector<RowDiagnostic> diagnostics;
};

struct IngestResult {
    std::vector<std::string> header;  // edge-list header
    // Rows in edge-list order: year, commodity, src, dst, kcal.
    std::vector<std::vector<std::string>> rows;
    IngestReport report;
};

// Raw flows: `year,item_code,src,dst,quantity`. With a factor table
// (`item_code,group,kcal_per_unit`) each quantity is converted to kcal and
// summed into its group per dyad and year; rows whose item has no factor
// are counted and skipped. Without one the item code is the commodity and
// the quantity the weight. Zero quantities are skipped.
IngestResult ingest(std::istream& raw, std::istream* factors);
void write_ingested(std::ostream& out, const IngestResult& result, std::uint64_t seed);

// ---------------------------------------------------------------- configuration

struct RunConfig {
    // Edge list, or raw flows when `factors` is set.
    std::filesystem::path edges;
    std::filesystem::path factors;
    std::filesystem::path covariates;
    std::filesystem::path output_dir;
    std::vector<int> years;
    // Unset selects every commodity; an empty list is an error.
    std::optional<std::vector<std::string>> commodities;

    std::uint64_t seed = 42;
    community::DetectorConfig detector;  // rng_seed is taken from `seed`
    double coupling = 1.0;
    bool multilayer = true;

    // Statistics over each layer's own active nodes instead of the nodes
    // active anywhere in the year.
    bool active_only = false;
    compare::InactiveNodes compare_inactive = compare::InactiveNodes::Exclude;
    double prune_threshold = 0.9;

    econ::Link link = econ::Link::Probit;
    bool panel = false;
    bool include_inactive = false;
    econ::FitOptions fit;

    int threads = 1;

    // Throws InvalidInput.
    void validate() const;
    community::DetectorConfig detector_config() const;
};

// ---------------------------------------------------------------- stage data

struct Dataset {
    EdgeListData data;
    std::optional<IngestReport> ingest;
    std::vector<std::size_t> selected;  // indices into data.layers
};

// Selects layers by year and commodity; throws InvalidInput when nothing
// matches.
Dataset load(const RunConfig& config);

struct StatsRow {
    LayerKey key;
    std::size_t n_nodes = 0;
    std::size_t n_edges = 0;
    double volume = 0.0;
    stats::StatsRecord stats;
};

struct YearCorrelation {
    int year = 0;
    std::vector<std::string> commodities;
    stats::CorrelationMatrix r;
};

struct StatsOutput {
    std::vector<StatsRow> rows;
    std::vector<YearCorrelation> correlations;
};

// Nodes active in some selected layer of `year`.
std::vector<NodeIndex> year_nodes(const Dataset& data, int year);

StatsOutput run_stats(const Dataset& data, const RunConfig& config);

// A layer's communities over the whole universe. Nodes inactive in the
// layer sit in singleton communities.
struct LayerPartition {
    LayerKey key;
    std::vector<bool> active;
    Partition partition;
    double modularity = 0.0;
    community::DetectionResult detection;  // empty when read back from file
};

std::vector<LayerPartition> run_detect(const Dataset& data, const RunConfig& config);

struct YearMultilayer {
    int year = 0;
    std::vector<std::string> commodities;
    std::vector<NodeIndex> nodes;  // universe indices of the supra-graph nodes
    std::vector<std::vector<bool>> active;  // per layer, over `nodes`
    multilayer::MultilayerResult result;
};

std::vector<YearMultilayer> run_multilayer(const Dataset& data, const RunConfig& config);

struct NmiRow {
    std::string kind;  // "commodity" (same year) or "year" (same commodity)
    LayerKey a;
    LayerKey b;
    std::optional<double> nmi;
    std::size_t n_nodes = 0;
};

struct HerfindahlRow {
    LayerKey key;
    std::string source;  // "single" or "multilayer"
    std::size_t n_nodes = 0;
    compare::Herfindahl h;
};

struct CompareOutput {
    std::vector<NmiRow> nmi;
    std::vector<HerfindahlRow> herfindahl;
};

CompareOutput run_compare(std::span<const LayerPartition> layers, std::span<const YearMultilayer> multi,
                          const RunConfig& config);

struct YearPca {
    int year = 0;
    std::optional<reduce::PcaResult> result;
    std::vector<std::string> excluded_rows;  // layers with undefined statistics
    std::vector<std::string> constant;       // statistics without variation, set aside
    std::string notice;                      // why the year was skipped
};

std::vector<YearPca> run_pca(std::span<const StatsRow> rows, const RunConfig& config);

struct EconOutput {
    std::vector<econ::LayerFitOutcome> cross_section;
    std::vector<econ::LayerFitOutcome> panel;
    std::vector<RowDiagnostic> covariate_diagnostics;
};

EconOutput run_econ(const NodeUniverse& universe, std::span<const LayerPartition> layers,
                    const econ::CovariateTable& covariates, const RunConfig& config);

// ---------------------------------------------------------------- files

struct Universe {
    NodeUniverse universe;
    std::vector<LayerPartition> layers;
};

// partitions.csv from run_detect: commodity,year,node,community for the
// active nodes of each layer.
Universe read_partitions(const std::filesystem::path& path);
std::vector<StatsRow> read_stats(const std::filesystem::path& path);

void write_stats(const std::filesystem::path& dir, const StatsOutput& out, std::uint64_t seed);
void write_detect(const std::filesystem::path& dir, const NodeUniverse& universe,
                  std::span<const LayerPartition> layers, std::uint64_t seed);
void write_multilayer(const std::filesystem::path& dir, const NodeUniverse& universe,
                      std::span<const YearMultilayer> years, double coupling, std::uint64_t seed);
void write_compare(const std::filesystem::path& dir, const CompareOutput& out, std::uint64_t seed);
void write_pca(const std::filesystem::path& dir, std::span<const YearPca> years, std::uint64_t seed);
void write_econ(const std::filesystem::path& dir, const EconOutput& out, std::uint64_t seed);

// Names of the data files each writer produces.
std::vector<std::string> stats_files();
std::vector<std::string> detect_files();
std::vector<std::string> multilayer_files();
std::vector<std::string> compare_files();
std::vector<std::string> pca_files();
std::vector<std::string> econ_files();

// ---------------------------------------------------------------- full run

class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error("stage '" + stage + "' failed: " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct StageReport {
    std::string name;
    std::string status;  // ok | skipped | failed
    double wall_seconds = 0.0;
    std::vector<std::string> notices;
    std::vector<std::string> outputs;
};

struct RunReport {
    std::vector<StageReport> stages;
    bool ok() const;
};

// Runs every stage in order and writes the output tree plus manifest.json.
// A stage that fails throws StageError after the manifest is written.
RunReport run_pipeline(const RunConfig& config);

}  // namespace tradenet::pipeline
