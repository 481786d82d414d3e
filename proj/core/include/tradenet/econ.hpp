#pragma once

// Binary-response models of community co-membership.
//
// For each unordered country pair (i, j) of a layer, y = 1 when i and j sit
// in the same community, modelled as P(y = 1) = F(z'b) with F the standard
// normal CDF (probit) or the logistic CDF (logit), fitted by maximum
// likelihood.

#include <array>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tradenet/io.hpp"
#include "tradenet/net.hpp"
#include "tradenet/numeric.hpp"

namespace tradenet::econ {

enum class Link { Probit, Logit };
enum class FrameMode { CrossSection, Panel };

std::string to_string(Link link);

// Link CDF and density, accurate far into the tails.
double link_cdf(Link link, double eta);
double link_pdf(Link link, double eta);

// ---------------------------------------------------------------- covariates

// Raw covariate columns of the pair table after the key columns.
inline constexpr std::array<std::string_view, 19> kCovariateColumns = {
    "gdp_i", "gdp_j", "gdppc_i",  "gdppc_j", "dist_km", "contiguity",   "region",   "fta",      "nafta", "afta",
    "comesa", "efta", "eu",       "mercosur", "col_rel", "com_col",     "same_country", "com_lang", "com_ethno"};

// Regressors derived from one covariate row: log GDP product, log GDP per
// capita product, log distance, then the dummies in file order.
std::vector<std::string> regressor_names();
// Whether each regressor_names() entry is a 0/1 dummy.
std::vector<bool> regressor_is_dummy();

struct PairKey {
    int year = 0;
    std::string a;  // a < b
    std::string b;
    auto operator<=>(const PairKey&) const = default;
};

PairKey make_pair_key(int year, std::string_view u, std::string_view v);

struct CovariateTable {
    std::map<PairKey, std::vector<double>> rows;  // regressor values
    std::vector<RowDiagnostic> diagnostics;

    const std::vector<double>* find(int year, std::string_view u, std::string_view v) const;
};

// Rows with missing or nonnumeric fields, nonpositive GDP or distance, or a
// repeated pair are reported and skipped.
CovariateTable read_covariates(std::istream& in);
CovariateTable read_covariates(const std::filesystem::path& path);

// ---------------------------------------------------------------- dyad frame

struct LayerMembership {
    int year = 0;
    Partition partition;       // over the universe
    std::vector<bool> active;  // nodes active in the layer
};

struct DyadOptions {
    FrameMode mode = FrameMode::CrossSection;
    // Pairs with an inactive member enter with y = 0 instead of being left out.
    bool include_inactive = false;
};

enum class ColumnKind { Intercept, Covariate, YearEffect, CountryEffect };

struct DyadFrame {
    std::vector<std::string> columns;
    std::vector<ColumnKind> kinds;
    std::vector<bool> is_dummy;
    Matrix x;  // rows x columns
    std::vector<double> y;
    std::vector<PairKey> keys;
    std::vector<PairKey> missing_covariates;
    std::vector<std::string> dropped_columns;  // constant over the frame

    std::size_t n_rows() const { return y.size(); }
};

// Cross-section mode takes exactly one layer; panel mode stacks one layer
// per year and appends year dummies (first year dropped) and country
// presence dummies (first country dropped). Pairs without a covariate row
// are listed in missing_covariates and left out. Constant columns other than
// the intercept are dropped and listed, as are fixed-effect dummies
// linearly dependent on the columns before them.
DyadFrame build_dyads(const NodeUniverse& universe, std::span<const LayerMembership> layers,
                      const CovariateTable& covariates, const DyadOptions& options = {});

// ---------------------------------------------------------------- fitting

struct GlmFit {
    Link link = Link::Probit;
    std::vector<std::string> terms;
    std::vector<ColumnKind> kinds;
    std::vector<double> coefficients;
    Matrix covariance;  // inverse observed information
    std::vector<double> std_errors;
    double loglik = 0.0;
    double aic = 0.0;
    std::size_t n = 0;
    int iterations = 0;
    bool converged = false;
    double max_abs_score = 0.0;
    // Hessian of the log-likelihood at the estimate.
    Matrix hessian;
};

struct FitOptions {
    int max_iterations = 100;
    double score_tolerance = 1e-8;
    double loglik_tolerance = 1e-10;
    // |coefficient| on standardized regressors beyond which the fit is
    // declared separated.
    double separation_bound = 50.0;
};

// Throws SeparationError (single response class or diverging coefficient),
// RankDeficiencyError (naming the dependent columns) or EstimationError.
GlmFit fit(const DyadFrame& frame, Link link, const FitOptions& options = {});
// Plain design-matrix form; a column named "intercept" is the intercept.
GlmFit fit(const Matrix& x, std::span<const double> y, std::vector<std::string> terms, Link link,
           const FitOptions& options = {});

struct MarginalEffect {
    std::string term;
    double ame = 0.0;
    double se = 0.0;
};

// Average marginal effects of the covariate columns (not the intercept or
// fixed-effect dummies): mean f(x b) b_k for continuous columns, mean
// F(x | d = 1) - F(x | d = 0) for dummies; delta-method standard errors.
std::vector<MarginalEffect> marginal_effects(const GlmFit& fit, const DyadFrame& frame);
std::vector<MarginalEffect> marginal_effects(const GlmFit& fit, const Matrix& x, const std::vector<bool>& is_dummy,
                                             std::span<const std::size_t> columns);

// ---------------------------------------------------------------- batch

struct LayerFitRequest {
    std::string commodity;
    std::vector<LayerMembership> years;  // one for cross-section, several for panel
};

struct LayerFitOutcome {
    std::string commodity;
    std::string period;  // "2011" or "2001-2011"
    std::optional<GlmFit> fit;
    std::vector<MarginalEffect> effects;
    std::string status;  // "ok", or the reason the layer was skipped or failed
    std::size_t n = 0;
    std::size_t missing_covariates = 0;
    std::vector<std::string> dropped_columns;
};

// One fit per request; failures are recorded in the outcome's status.
std::vector<LayerFitOutcome> fit_all_layers(const NodeUniverse& universe, std::span<const LayerFitRequest> requests,
                                            const CovariateTable& covariates, Link link, const DyadOptions& options,
                                            const FitOptions& fit_options = {}, int threads = 1);

// Header commodity,year,term,estimate,se,ame,ame_se,z,loglik,aic,n; one row
// per term of every successful fit.
void write_results(std::ostream& out, std::span<const LayerFitOutcome> outcomes);
// Header commodity,year,status,n,missing_covariates,dropped_columns.
void write_status(std::ostream& out, std::span<const LayerFitOutcome> outcomes);

}  // namespace tradenet::econ
