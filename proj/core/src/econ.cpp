#include "tradenet/econ.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "tradenet/csv.hpp"
#include "tradenet/errors.hpp"
#include "tradenet/parallel.hpp"

namespace tradenet::econ {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// 1 - 1/t^2 + 3/t^4 - 15/t^6 + 105/t^8: asymptotic tail factor of Phi(t).
double tail_series(double t) {
    const double u = 1.0 / (t * t);
    return 1.0 - u * (1.0 - u * (3.0 - u * (15.0 - u * 105.0)));
}

double normal_pdf(double t) { return std::exp(-0.5 * t * t - kLogSqrt2Pi); }
double normal_cdf(double t) { return 0.5 * std::erfc(-t * kInvSqrt2); }

double normal_log_cdf(double t) {
    if (t > 0.0) return std::log1p(-0.5 * std::erfc(t * kInvSqrt2));
    if (t > -35.0) return std::log(normal_cdf(t));
    return -0.5 * t * t - kLogSqrt2Pi - std::log(-t) + std::log(tail_series(t));
}

// phi(t) / Phi(t).
double inverse_mills(double t) {
    if (t > -35.0) return normal_pdf(t) / normal_cdf(t);
    return -t / tail_series(t);
}

double logistic_cdf(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

double softplus(double t) { return std::max(t, 0.0) + std::log1p(std::exp(-std::abs(t))); }

// Log-likelihood contribution and its first two derivatives in eta.
struct Contribution {
    double ll;
    double d1;
    double d2;
};

Contribution contribution(Link link, double y, double eta) {
    if (link == Link::Logit) {
        const double p = logistic_cdf(eta);
        return {y * eta - softplus(eta), y - p, -p * (1.0 - p)};
    }
    const double q = y > 0.5 ? 1.0 : -1.0;
    const double lambda = q * inverse_mills(q * eta);
    return {normal_log_cdf(q * eta), lambda, -lambda * (lambda + eta)};
}

// Derivative of the link density.
double link_pdf_slope(Link link, double eta) {
    if (link == Link::Logit) {
        const double p = logistic_cdf(eta);
        return p * (1.0 - p) * (1.0 - 2.0 * p);
    }
    return -eta * normal_pdf(eta);
}

std::vector<double> linear_predictor(const Matrix& x, std::span<const double> b) {
    std::vector<double> eta(x.rows(), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        auto r = x.row(i);
        double s = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) s += r[j] * b[j];
        eta[i] = s;
    }
    return eta;
}

struct Evaluation {
    double ll = 0.0;
    std::vector<double> score;
    Matrix hessian;
};

Evaluation evaluate(Link link, const Matrix& x, std::span<const double> y, std::span<const double> b,
                    bool derivatives) {
    const std::size_t n = x.rows(), k = x.cols();
    const auto eta = linear_predictor(x, b);
    Evaluation ev;
    if (derivatives) {
        ev.score.assign(k, 0.0);
        ev.hessian = Matrix(k, k);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const Contribution c = contribution(link, y[i], eta[i]);
        ev.ll += c.ll;
        if (!derivatives) continue;
        auto r = x.row(i);
        for (std::size_t a = 0; a < k; ++a) {
            if (r[a] == 0.0) continue;
            ev.score[a] += c.d1 * r[a];
            const double w = c.d2 * r[a];
            for (std::size_t bb = a; bb < k; ++bb) ev.hessian(a, bb) += w * r[bb];
        }
    }
    if (derivatives)
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t bb = 0; bb < a; ++bb) ev.hessian(a, bb) = ev.hessian(bb, a);
    return ev;
}

Matrix negated(const Matrix& m) {
    Matrix out = m;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) = -m(i, j);
    return out;
}

// Columns linearly dependent on earlier ones, by sequential Cholesky of the
// normalized cross-product matrix.
std::vector<std::size_t> dependent_columns(const Matrix& x) {
    const std::size_t n = x.rows(), k = x.cols();
    Matrix g(k, k);
    for (std::size_t i = 0; i < n; ++i) {
        auto r = x.row(i);
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = a; b < k; ++b) g(a, b) += r[a] * r[b];
    }
    std::vector<double> norm(k);
    for (std::size_t a = 0; a < k; ++a) norm[a] = std::sqrt(g(a, a));
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t b = a; b < k; ++b) {
            const double d = norm[a] * norm[b];
            g(a, b) = d > 0.0 ? g(a, b) / d : 0.0;
            g(b, a) = g(a, b);
        }
    std::vector<std::size_t> dependent;
    std::vector<std::size_t> kept;
    Matrix l(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        double d = g(j, j);
        for (std::size_t c : kept) d -= l(j, c) * l(j, c);
        if (!(d > 1e-10)) {
            dependent.push_back(j);
            continue;
        }
        l(j, j) = std::sqrt(d);
        for (std::size_t i = j + 1; i < k; ++i) {
            double s = g(i, j);
            for (std::size_t c : kept) s -= l(i, c) * l(j, c);
            l(i, j) = s / l(j, j);
        }
        kept.push_back(j);
    }
    return dependent;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

}  // namespace

std::string to_string(Link link) { return link == Link::Probit ? "probit" : "logit"; }

double link_cdf(Link link, double eta) { return link == Link::Probit ? normal_cdf(eta) : logistic_cdf(eta); }

double link_pdf(Link link, double eta) {
    if (link == Link::Probit) return normal_pdf(eta);
    const double p = logistic_cdf(eta);
    return p * (1.0 - p);
}

// ---------------------------------------------------------------- covariates

std::vector<std::string> regressor_names() {
    std::vector<std::string> names = {"log_gdp", "log_gdppc", "log_dist"};
    for (std::size_t c = 5; c < kCovariateColumns.size(); ++c) names.emplace_back(kCovariateColumns[c]);
    return names;
}

std::vector<bool> regressor_is_dummy() {
    std::vector<bool> d(regressor_names().size(), true);
    d[0] = d[1] = d[2] = false;
    return d;
}

PairKey make_pair_key(int year, std::string_view u, std::string_view v) {
    if (v < u) std::swap(u, v);
    return {year, std::string(u), std::string(v)};
}

const std::vector<double>* CovariateTable::find(int year, std::string_view u, std::string_view v) const {
    auto it = rows.find(make_pair_key(year, u, v));
    return it == rows.end() ? nullptr : &it->second;
}

CovariateTable read_covariates(std::istream& in) {
    csv::Reader reader(in);
    const std::size_t c_year = reader.require("year");
    const std::size_t c_i = reader.require("iso3_i");
    const std::size_t c_j = reader.require("iso3_j");
    std::vector<std::size_t> cols;
    for (auto name : kCovariateColumns) cols.push_back(reader.require(name));

    CovariateTable table;
    auto reject = [&](std::string msg) { table.diagnostics.push_back({reader.line(), std::move(msg)}); };
    while (reader.next()) {
        const auto& row = reader.row();
        if (row.size() != reader.header().size()) {
            reject("expected " + std::to_string(reader.header().size()) + " fields, found " +
                   std::to_string(row.size()));
            continue;
        }
        const auto year = csv::parse_int(row[c_year]);
        if (!year) {
            reject("invalid year '" + row[c_year] + "'");
            continue;
        }
        if (row[c_i].empty() || row[c_j].empty() || row[c_i] == row[c_j]) {
            reject("invalid country pair");
            continue;
        }
        std::vector<double> raw;
        std::string bad;
        for (std::size_t k = 0; k < cols.size(); ++k) {
            const auto v = csv::parse_double(row[cols[k]]);
            if (!v || !std::isfinite(*v)) {
                bad = std::string(kCovariateColumns[k]);
                break;
            }
            raw.push_back(*v);
        }
        if (!bad.empty()) {
            reject("missing or nonnumeric " + bad);
            continue;
        }
        if (!(raw[0] > 0.0 && raw[1] > 0.0 && raw[2] > 0.0 && raw[3] > 0.0 && raw[4] > 0.0)) {
            reject("GDP, GDP per capita and distance must be positive");
            continue;
        }
        std::vector<double> reg = {std::log(raw[0]) + std::log(raw[1]), std::log(raw[2]) + std::log(raw[3]),
                                   std::log(raw[4])};
        for (std::size_t k = 5; k < raw.size(); ++k) {
            if (raw[k] != 0.0 && raw[k] != 1.0) {
                bad = std::string(kCovariateColumns[k]);
                break;
            }
            reg.push_back(raw[k]);
        }
        if (!bad.empty()) {
            reject(bad + " must be 0 or 1");
            continue;
        }
        auto key = make_pair_key(static_cast<int>(*year), row[c_i], row[c_j]);
        if (!table.rows.emplace(std::move(key), std::move(reg)).second) reject("duplicate country pair");
    }
    return table;
}

CovariateTable read_covariates(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot open covariates file " + path.string());
    return read_covariates(in);
}

// ---------------------------------------------------------------- dyad frame

DyadFrame build_dyads(const NodeUniverse& universe, std::span<const LayerMembership> layers,
                      const CovariateTable& covariates, const DyadOptions& options) {
    const bool panel = options.mode == FrameMode::Panel;
    if (!panel && layers.size() != 1) throw InvalidInput("a cross-section frame needs exactly one layer");
    if (layers.empty()) throw InvalidInput("a panel frame needs at least one layer");
    const std::size_t n = universe.size();
    std::vector<int> years;
    for (const auto& l : layers) {
        if (l.partition.size() != n || l.active.size() != n)
            throw InvalidInput("layer membership does not cover the node universe");
        years.push_back(l.year);
    }
    std::sort(years.begin(), years.end());
    if (std::adjacent_find(years.begin(), years.end()) != years.end())
        throw InvalidInput("panel layers must have distinct years");

    const auto names = regressor_names();
    const auto dummies = regressor_is_dummy();

    struct RawRow {
        PairKey key;
        NodeIndex i, j;
        double y;
        const std::vector<double>* cov;
    };
    std::vector<RawRow> raw;
    DyadFrame frame;
    std::vector<LayerMembership> ordered(layers.begin(), layers.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) { return a.year < b.year; });
    for (const auto& l : ordered)
        for (NodeIndex i = 0; i < n; ++i)
            for (NodeIndex j = i + 1; j < n; ++j) {
                const bool both = l.active[i] && l.active[j];
                if (!both && !options.include_inactive) continue;
                PairKey key{l.year, universe.label(i), universe.label(j)};
                const auto* cov = covariates.find(l.year, key.a, key.b);
                if (!cov) {
                    frame.missing_covariates.push_back(std::move(key));
                    continue;
                }
                const double y = both && l.partition[i] == l.partition[j] ? 1.0 : 0.0;
                raw.push_back({std::move(key), i, j, y, cov});
            }

    std::vector<std::string> columns = {"intercept"};
    std::vector<ColumnKind> kinds = {ColumnKind::Intercept};
    std::vector<bool> is_dummy = {false};
    for (std::size_t k = 0; k < names.size(); ++k) {
        columns.push_back(names[k]);
        kinds.push_back(ColumnKind::Covariate);
        is_dummy.push_back(dummies[k]);
    }
    const std::size_t first_year_col = columns.size();
    std::vector<NodeIndex> countries;
    if (panel) {
        for (std::size_t t = 1; t < years.size(); ++t) {
            columns.push_back("year_" + std::to_string(years[t]));
            kinds.push_back(ColumnKind::YearEffect);
            is_dummy.push_back(true);
        }
        std::set<NodeIndex> present;
        for (const auto& r : raw) {
            present.insert(r.i);
            present.insert(r.j);
        }
        countries.assign(present.begin(), present.end());
        for (std::size_t c = 1; c < countries.size(); ++c) {
            columns.push_back("country_" + universe.label(countries[c]));
            kinds.push_back(ColumnKind::CountryEffect);
            is_dummy.push_back(true);
        }
    }
    const std::size_t first_country_col = first_year_col + (panel ? years.size() - 1 : 0);

    Matrix full(raw.size(), columns.size());
    for (std::size_t r = 0; r < raw.size(); ++r) {
        full(r, 0) = 1.0;
        const auto& cov = *raw[r].cov;
        for (std::size_t k = 0; k < cov.size(); ++k) full(r, 1 + k) = cov[k];
        if (!panel) continue;
        auto yt = std::lower_bound(years.begin(), years.end(), raw[r].key.year) - years.begin();
        if (yt > 0) full(r, first_year_col + static_cast<std::size_t>(yt) - 1) = 1.0;
        for (NodeIndex member : {raw[r].i, raw[r].j}) {
            auto c = std::lower_bound(countries.begin(), countries.end(), member) - countries.begin();
            if (c > 0) full(r, first_country_col + static_cast<std::size_t>(c) - 1) = 1.0;
        }
    }

    std::vector<std::size_t> keep;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        bool constant = true;
        for (std::size_t r = 1; r < raw.size() && constant; ++r) constant = full(r, c) == full(0, c);
        if (kinds[c] != ColumnKind::Intercept && constant)
            frame.dropped_columns.push_back(columns[c]);
        else
            keep.push_back(c);
    }
    if (panel && !raw.empty()) {
        // Fixed-effect dummies spanned by earlier columns go too; dependent
        // covariates stay and fail the fit with their names.
        Matrix kept(raw.size(), keep.size());
        for (std::size_t r = 0; r < raw.size(); ++r)
            for (std::size_t k = 0; k < keep.size(); ++k) kept(r, k) = full(r, keep[k]);
        std::vector<bool> drop(keep.size(), false);
        for (std::size_t k : dependent_columns(kept))
            if (kinds[keep[k]] == ColumnKind::YearEffect || kinds[keep[k]] == ColumnKind::CountryEffect) {
                drop[k] = true;
                frame.dropped_columns.push_back(columns[keep[k]]);
            }
        std::vector<std::size_t> independent;
        for (std::size_t k = 0; k < keep.size(); ++k)
            if (!drop[k]) independent.push_back(keep[k]);
        keep = std::move(independent);
    }
    frame.x = Matrix(raw.size(), keep.size());
    for (std::size_t k = 0; k < keep.size(); ++k) {
        frame.columns.push_back(columns[keep[k]]);
        frame.kinds.push_back(kinds[keep[k]]);
        frame.is_dummy.push_back(is_dummy[keep[k]]);
        for (std::size_t r = 0; r < raw.size(); ++r) frame.x(r, k) = full(r, keep[k]);
    }
    for (auto& r : raw) {
        frame.y.push_back(r.y);
        frame.keys.push_back(std::move(r.key));
    }
    return frame;
}

// ---------------------------------------------------------------- fitting

GlmFit fit(const Matrix& x, std::span<const double> y, std::vector<std::string> terms, Link link,
           const FitOptions& options) {
    const std::size_t n = x.rows(), k = x.cols();
    if (y.size() != n || terms.size() != k) throw InvalidInput("design matrix, response and terms disagree in size");
    if (n == 0 || k == 0) throw EstimationError("empty design");
    std::size_t ones = 0;
    for (double v : y) {
        if (v != 0.0 && v != 1.0) throw InvalidInput("response must be 0 or 1");
        ones += v == 1.0;
    }
    if (ones == 0 || ones == n) throw SeparationError("response has a single class");

    const auto dependent = dependent_columns(x);
    if (!dependent.empty()) {
        std::vector<std::string> names;
        for (std::size_t c : dependent) names.push_back(terms[c]);
        throw RankDeficiencyError("design is rank deficient; dependent columns: " + join(names, ", "));
    }

    // Newton runs on standardized columns: centred when the design has an
    // intercept, always scaled by the population standard deviation. Then
    // b_orig[c] = b[c] / scale[c] and the intercept absorbs the centring.
    std::optional<std::size_t> intercept;
    std::vector<double> centre(k, 0.0), scale(k, 1.0);
    for (std::size_t c = 0; c < k; ++c) {
        double mean = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x(i, c);
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) ss += (x(i, c) - mean) * (x(i, c) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n));
        if (sd > 0.0) {
            centre[c] = mean;
            scale[c] = sd;
        } else if (!intercept && x(0, c) == 1.0) {
            intercept = c;
        }
    }
    if (!intercept) std::fill(centre.begin(), centre.end(), 0.0);
    Matrix xs = x;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < k; ++c) xs(i, c) = (x(i, c) - centre[c]) / scale[c];

    auto to_original = [&](const std::vector<double>& bs) {
        std::vector<double> b(k);
        for (std::size_t c = 0; c < k; ++c) b[c] = bs[c] / scale[c];
        if (intercept)
            for (std::size_t c = 0; c < k; ++c)
                if (c != *intercept) b[*intercept] -= b[c] * centre[c];
        return b;
    };
    // Score with respect to the original coefficients.
    auto max_abs_score = [&](const std::vector<double>& g) {
        double m = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            double v = scale[c] * g[c];
            if (intercept && c != *intercept) v += centre[c] * g[*intercept];
            m = std::max(m, std::abs(v));
        }
        return m;
    };

    std::vector<double> b(k, 0.0);
    Evaluation ev = evaluate(link, xs, y, b, true);
    double last_change = std::numeric_limits<double>::infinity();
    GlmFit out;
    out.link = link;
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        if (max_abs_score(ev.score) < options.score_tolerance && std::abs(last_change) < options.loglik_tolerance) {
            out.converged = true;
            break;
        }
        const auto chol = cholesky(negated(ev.hessian));
        if (!chol) throw EstimationError("information matrix is not positive definite");
        const auto step = cholesky_solve(*chol, ev.score);

        // Gains below this are rounding noise in the summed log-likelihood.
        const double slack = 1e-13 * (1.0 + std::abs(ev.ll));
        double t = 1.0;
        std::vector<double> trial(k);
        double trial_ll = 0.0;
        for (int half = 0; half < 60; ++half, t *= 0.5) {
            for (std::size_t c = 0; c < k; ++c) trial[c] = b[c] + t * step[c];
            trial_ll = evaluate(link, xs, y, trial, false).ll;
            if (trial_ll >= ev.ll - slack) break;
        }
        if (!(trial_ll >= ev.ll - slack)) {
            // No ascent along the Newton direction: rounding floor reached.
            last_change = 0.0;
            continue;
        }
        last_change = trial_ll - ev.ll;
        b = trial;
        ev = evaluate(link, xs, y, b, true);
        for (std::size_t c = 0; c < k; ++c)
            if (std::abs(b[c]) > options.separation_bound && last_change > 0.0)
                throw SeparationError("coefficient of '" + terms[c] + "' diverges (perfect or quasi separation)");
    }
    if (!out.converged && max_abs_score(ev.score) < options.score_tolerance &&
        std::abs(last_change) < options.loglik_tolerance)
        out.converged = true;

    {
        // Complete separation: every response reproduced to within rounding.
        const auto eta = linear_predictor(xs, b);
        double worst = 0.0;
        for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(y[i] - link_cdf(link, eta[i])));
        if (worst < 1e-6) throw SeparationError("the regressors separate the response perfectly");
    }

    // Hessian and covariance in original coordinates, through the linear
    // map b_orig = T b: H_orig = T^-T H T^-1 and Cov_orig = T Cov T^T.
    Matrix tmap(k, k);
    for (std::size_t c = 0; c < k; ++c) {
        tmap(c, c) = 1.0 / scale[c];
        if (intercept && c != *intercept) tmap(*intercept, c) = -centre[c] / scale[c];
    }
    Matrix tinv(k, k);  // T^-1: b = T^-1 b_orig
    for (std::size_t c = 0; c < k; ++c) {
        tinv(c, c) = scale[c];
        if (intercept && c != *intercept) tinv(*intercept, c) = centre[c];
    }
    const auto chol = cholesky(negated(ev.hessian));
    if (!chol) throw EstimationError("information matrix is not positive definite at the estimate");
    const Matrix cov_std = cholesky_inverse(*chol);

    out.terms = std::move(terms);
    out.kinds.assign(k, ColumnKind::Covariate);
    for (std::size_t c = 0; c < k; ++c)
        if (out.terms[c] == "intercept") out.kinds[c] = ColumnKind::Intercept;
    out.coefficients = to_original(b);
    out.covariance = tmap * cov_std * tmap.transposed();
    out.hessian = tinv.transposed() * ev.hessian * tinv;
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t c = 0; c < a; ++c) {
            out.covariance(a, c) = out.covariance(c, a) = 0.5 * (out.covariance(a, c) + out.covariance(c, a));
            out.hessian(a, c) = out.hessian(c, a) = 0.5 * (out.hessian(a, c) + out.hessian(c, a));
        }
    out.std_errors.resize(k);
    for (std::size_t a = 0; a < k; ++a) out.std_errors[a] = std::sqrt(std::max(out.covariance(a, a), 0.0));
    out.loglik = ev.ll;
    out.n = n;
    out.aic = 2.0 * static_cast<double>(k) - 2.0 * ev.ll;
    out.iterations = it;
    out.max_abs_score = max_abs_score(ev.score);
    return out;
}

GlmFit fit(const DyadFrame& frame, Link link, const FitOptions& options) {
    GlmFit out = fit(frame.x, frame.y, frame.columns, link, options);
    out.kinds = frame.kinds;
    return out;
}

std::vector<MarginalEffect> marginal_effects(const GlmFit& fit, const Matrix& x, const std::vector<bool>& is_dummy,
                                             std::span<const std::size_t> columns) {
    const std::size_t n = x.rows(), k = x.cols();
    if (fit.coefficients.size() != k || is_dummy.size() != k)
        throw InvalidInput("marginal effects: design does not match the fit");
    const auto& beta = fit.coefficients;
    const auto eta = linear_predictor(x, beta);
    const double inv_n = 1.0 / static_cast<double>(n);

    std::vector<MarginalEffect> out;
    for (std::size_t c : columns) {
        std::vector<double> grad(k, 0.0);
        double ame = 0.0;
        if (is_dummy[c]) {
            for (std::size_t i = 0; i < n; ++i) {
                const double e1 = eta[i] + (1.0 - x(i, c)) * beta[c];
                const double e0 = eta[i] - x(i, c) * beta[c];
                ame += link_cdf(fit.link, e1) - link_cdf(fit.link, e0);
                const double f1 = link_pdf(fit.link, e1), f0 = link_pdf(fit.link, e0);
                for (std::size_t l = 0; l < k; ++l) {
                    if (l == c)
                        grad[l] += f1;
                    else
                        grad[l] += (f1 - f0) * x(i, l);
                }
            }
        } else {
            double mean_pdf = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double f = link_pdf(fit.link, eta[i]);
                mean_pdf += f;
                const double slope = link_pdf_slope(fit.link, eta[i]) * beta[c];
                for (std::size_t l = 0; l < k; ++l) grad[l] += slope * x(i, l);
            }
            ame = mean_pdf * beta[c];
            grad[c] += mean_pdf;
        }
        ame *= inv_n;
        for (double& g : grad) g *= inv_n;
        double var = 0.0;
        for (std::size_t a = 0; a < k; ++a)
            for (std::size_t b = 0; b < k; ++b) var += grad[a] * fit.covariance(a, b) * grad[b];
        out.push_back({fit.terms.at(c), ame, std::sqrt(std::max(var, 0.0))});
    }
    return out;
}

std::vector<MarginalEffect> marginal_effects(const GlmFit& fit, const DyadFrame& frame) {
    std::vector<std::size_t> columns;
    for (std::size_t c = 0; c < frame.columns.size(); ++c)
        if (frame.kinds[c] == ColumnKind::Covariate) columns.push_back(c);
    return marginal_effects(fit, frame.x, frame.is_dummy, columns);
}

// ---------------------------------------------------------------- batch

std::vector<LayerFitOutcome> fit_all_layers(const NodeUniverse& universe, std::span<const LayerFitRequest> requests,
                                            const CovariateTable& covariates, Link link, const DyadOptions& options,
                                            const FitOptions& fit_options, int threads) {
    std::vector<LayerFitOutcome> outcomes(requests.size());
    parallel_for(requests.size(), threads, [&](std::size_t r) {
        const LayerFitRequest& req = requests[r];
        LayerFitOutcome& out = outcomes[r];
        out.commodity = req.commodity;
        std::vector<int> years;
        for (const auto& m : req.years) years.push_back(m.year);
        std::sort(years.begin(), years.end());
        if (years.empty()) {
            out.status = "skipped: no layers";
            return;
        }
        out.period = years.size() == 1 ? std::to_string(years.front())
                                       : std::to_string(years.front()) + "-" + std::to_string(years.back());
        try {
            const DyadFrame frame = build_dyads(universe, req.years, covariates, options);
            out.n = frame.n_rows();
            out.missing_covariates = frame.missing_covariates.size();
            out.dropped_columns = frame.dropped_columns;
            if (frame.n_rows() == 0) {
                out.status = "skipped: no dyads";
                return;
            }
            GlmFit f = fit(frame, link, fit_options);
            out.effects = marginal_effects(f, frame);
            out.status = f.converged ? "ok" : "ok: iteration cap reached before convergence";
            out.fit = std::move(f);
        } catch (const Error& e) {
            out.status = std::string("failed: ") + e.what();
        }
    });
    return outcomes;
}

void write_results(std::ostream& out, std::span<const LayerFitOutcome> outcomes) {
    csv::Writer w(out);
    w.row({"commodity", "year", "term", "estimate", "se", "ame", "ame_se", "z", "loglik", "aic", "n"});
    for (const auto& o : outcomes) {
        if (!o.fit) continue;
        const GlmFit& f = *o.fit;
        for (std::size_t c = 0; c < f.terms.size(); ++c) {
            std::string ame = "NA", ame_se = "NA";
            for (const auto& e : o.effects)
                if (e.term == f.terms[c]) {
                    ame = csv::format_number(e.ame);
                    ame_se = csv::format_number(e.se);
                }
            const double z = f.std_errors[c] > 0.0 ? f.coefficients[c] / f.std_errors[c] : std::nan("");
            w.row({o.commodity, o.period, f.terms[c], csv::format_number(f.coefficients[c]),
                   csv::format_number(f.std_errors[c]), ame, ame_se, csv::format_number(z),
                   csv::format_number(f.loglik), csv::format_number(f.aic), std::to_string(f.n)});
        }
    }
}

void write_status(std::ostream& out, std::span<const LayerFitOutcome> outcomes) {
    csv::Writer w(out);
    w.row({"commodity", "year", "status", "n", "missing_covariates", "dropped_columns"});
    for (const auto& o : outcomes)
        w.row({o.commodity, o.period, o.status, std::to_string(o.n), std::to_string(o.missing_covariates),
               join(o.dropped_columns, ";")});
}

}  // namespace tradenet::econ
