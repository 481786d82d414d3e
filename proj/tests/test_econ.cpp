#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "tradenet/errors.hpp"
#include "tradenet/econ.hpp"

using namespace tradenet;
using namespace tradenet::econ;

namespace {

// Phi^-1(p) by bisection on the erfc form of Phi.
double probit_quantile(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

struct Design {
    Matrix x;
    std::vector<double> y;
};

// y = 1[b0 + b1 x1 + b2 d + e > 0], x1 normal, d Bernoulli(0.4).
Design simulate(std::uint64_t seed, std::size_t n, double b0, double b1, double b2, Link link) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::bernoulli_distribution coin(0.4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Design d{Matrix(n, 3), std::vector<double>(n)};
    for (std::size_t i = 0; i < n; ++i) {
        d.x(i, 0) = 1.0;
        d.x(i, 1) = z(rng);
        d.x(i, 2) = coin(rng) ? 1.0 : 0.0;
        const double eta = b0 + b1 * d.x(i, 1) + b2 * d.x(i, 2);
        double e;
        if (link == Link::Probit) {
            e = z(rng);
        } else {
            const double v = u(rng);
            e = std::log(v / (1.0 - v));
        }
        d.y[i] = eta + e > 0.0 ? 1.0 : 0.0;
    }
    return d;
}

const std::vector<std::string> kTerms = {"intercept", "x", "d"};

// AME computed straight from the definition, for arbitrary coefficients.
double ame_direct(Link link, const Matrix& x, const std::vector<double>& b, std::size_t c, bool dummy) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double eta = 0.0;
        for (std::size_t l = 0; l < x.cols(); ++l) eta += x(i, l) * b[l];
        if (dummy) {
            const double e0 = eta - x(i, c) * b[c];
            s += link_cdf(link, e0 + b[c]) - link_cdf(link, e0);
        } else {
            s += link_pdf(link, eta) * b[c];
        }
    }
    return s / static_cast<double>(x.rows());
}

std::string covariate_header() {
    std::string h = "year,iso3_i,iso3_j";
    for (auto c : kCovariateColumns) h += "," + std::string(c);
    return h + "\n";
}

// One covariate row with pseudo-random values derived from `salt`.
std::string covariate_row(int year, const std::string& a, const std::string& b, unsigned salt) {
    std::ostringstream s;
    s << year << ',' << a << ',' << b;
    s << ',' << 100.0 + salt << ',' << 200.0 + 3 * salt << ',' << 5.0 + salt % 7 << ',' << 9.0 + salt % 5;
    s << ',' << 100.0 * (1 + salt % 11);
    for (std::size_t k = 5; k < kCovariateColumns.size(); ++k) s << ',' << ((salt >> (k % 4)) & 1u);
    return s.str() + "\n";
}

CovariateTable all_pairs(const NodeUniverse& u, std::vector<int> years) {
    std::string text = covariate_header();
    unsigned salt = 1;
    for (int y : years)
        for (std::size_t i = 0; i < u.size(); ++i)
            for (std::size_t j = i + 1; j < u.size(); ++j) text += covariate_row(y, u.label(i), u.label(j), salt++);
    std::istringstream in(text);
    return read_covariates(in);
}

LayerMembership membership(int year, std::vector<CommunityId> ids, std::vector<bool> active = {}) {
    if (active.empty()) active.assign(ids.size(), true);
    return {year, Partition(ids), std::move(active)};
}

}  // namespace

TEST(Links, CdfAndPdf) {
    EXPECT_NEAR(link_pdf(Link::Probit, 0.0), 0.3989422804014327, 1e-15);
    EXPECT_DOUBLE_EQ(link_cdf(Link::Probit, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(link_cdf(Link::Logit, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(link_pdf(Link::Logit, 0.0), 0.25);
    EXPECT_NEAR(link_cdf(Link::Probit, 1.959963984540054), 0.975, 1e-12);
    EXPECT_GT(link_cdf(Link::Probit, -38.0), 0.0);
    EXPECT_EQ(to_string(Link::Probit), "probit");
    EXPECT_EQ(to_string(Link::Logit), "logit");
}

TEST(Fit, InterceptOnlyClosedForm) {
    for (double p : {0.1, 0.3, 0.5, 0.77}) {
        const std::size_t n = 1000;
        const auto ones = static_cast<std::size_t>(p * n);
        Matrix x(n, 1);
        std::vector<double> y(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            x(i, 0) = 1.0;
            y[i] = i < ones ? 1.0 : 0.0;
        }
        const double ll = n * (p * std::log(p) + (1 - p) * std::log(1 - p));
        const auto pr = fit(x, y, {"intercept"}, Link::Probit);
        EXPECT_NEAR(pr.coefficients[0], probit_quantile(p), 1e-9);
        EXPECT_NEAR(pr.loglik, ll, 1e-8);
        EXPECT_TRUE(pr.converged);
        const auto lg = fit(x, y, {"intercept"}, Link::Logit);
        EXPECT_NEAR(lg.coefficients[0], std::log(p / (1 - p)), 1e-9);
        EXPECT_NEAR(lg.loglik, ll, 1e-8);
        EXPECT_NEAR(lg.aic, 2.0 - 2.0 * ll, 1e-8);
        // Logit information for the intercept is n p (1 - p).
        EXPECT_NEAR(lg.std_errors[0], 1.0 / std::sqrt(n * p * (1 - p)), 1e-9);
    }
}

TEST(Fit, RecoversSimulatedCoefficients) {
    const std::vector<double> truth = {-0.3, 0.8, 0.5};
    for (Link link : {Link::Probit, Link::Logit}) {
        const auto d = simulate(42, 20000, truth[0], truth[1], truth[2], link);
        const auto f = fit(d.x, d.y, kTerms, link);
        ASSERT_TRUE(f.converged);
        EXPECT_LT(f.max_abs_score, 1e-8);
        for (std::size_t c = 0; c < 3; ++c) EXPECT_NEAR(f.coefficients[c], truth[c], 4.0 * f.std_errors[c]);
        // Negative definite Hessian at the optimum.
        EXPECT_TRUE(cholesky([&] {
                        Matrix m = f.hessian;
                        for (std::size_t a = 0; a < 3; ++a)
                            for (std::size_t b = 0; b < 3; ++b) m(a, b) = -m(a, b);
                        return m;
                    }())
                        .has_value());
    }
}

TEST(Fit, LogitProbitRatio) {
    const auto d = simulate(7, 20000, 0.2, 0.9, -0.6, Link::Probit);
    const auto p = fit(d.x, d.y, kTerms, Link::Probit);
    const auto l = fit(d.x, d.y, kTerms, Link::Logit);
    for (std::size_t c = 1; c < 3; ++c) {
        const double r = l.coefficients[c] / p.coefficients[c];
        EXPECT_GE(r, 1.4);
        EXPECT_LE(r, 2.1);
    }
}

TEST(Fit, InformativeCovariateLowersAic) {
    const auto d = simulate(9, 3000, 0.0, 1.0, 0.0, Link::Probit);
    Matrix x0(d.x.rows(), 1);
    for (std::size_t i = 0; i < d.x.rows(); ++i) x0(i, 0) = 1.0;
    const auto small = fit(x0, d.y, {"intercept"}, Link::Probit);
    Matrix x1(d.x.rows(), 2);
    for (std::size_t i = 0; i < d.x.rows(); ++i) {
        x1(i, 0) = 1.0;
        x1(i, 1) = d.x(i, 1);
    }
    const auto big = fit(x1, d.y, {"intercept", "x"}, Link::Probit);
    EXPECT_LT(big.aic, small.aic);
    EXPECT_GT(big.loglik, small.loglik);
}

TEST(Fit, PredictorScaleInvariance) {
    const auto d = simulate(10, 4000, 0.1, 0.7, 0.4, Link::Probit);
    auto x = d.x;
    for (std::size_t i = 0; i < x.rows(); ++i) x(i, 1) *= 1000.0;
    const auto a = fit(d.x, d.y, kTerms, Link::Probit);
    const auto b = fit(x, d.y, kTerms, Link::Probit);
    EXPECT_NEAR(b.coefficients[1] * 1000.0, a.coefficients[1], 1e-8);
    EXPECT_NEAR(b.loglik, a.loglik, 1e-8);
}

TEST(Fit, Errors) {
    Matrix x(6, 2);
    std::vector<double> y = {0, 0, 0, 1, 1, 1};
    for (std::size_t i = 0; i < 6; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = static_cast<double>(i);
    }
    EXPECT_THROW(fit(x, y, {"intercept", "x"}, Link::Probit), SeparationError);
    EXPECT_THROW(fit(x, y, {"intercept", "x"}, Link::Logit), SeparationError);
    std::vector<double> same(6, 1.0);
    EXPECT_THROW(fit(x, same, {"intercept", "x"}, Link::Probit), SeparationError);

    Matrix dup(6, 3);
    std::vector<double> mixed = {0, 1, 0, 1, 1, 0};
    for (std::size_t i = 0; i < 6; ++i) {
        dup(i, 0) = 1.0;
        dup(i, 1) = static_cast<double>(i % 3);
        dup(i, 2) = 2.0 * dup(i, 1) + 1.0;
    }
    try {
        fit(dup, mixed, {"intercept", "a", "b"}, Link::Probit);
        FAIL();
    } catch (const RankDeficiencyError& e) {
        EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
    }
    const std::vector<double> three = {0, 1, 2, 0, 1, 0};
    EXPECT_THROW(fit(x, three, {"intercept", "x"}, Link::Probit), InvalidInput);
}

TEST(MarginalEffects, MatchDefinitionAndDeltaMethod) {
    for (Link link : {Link::Probit, Link::Logit}) {
        const auto d = simulate(11, 3000, -0.2, 0.6, 0.7, link);
        const auto f = fit(d.x, d.y, kTerms, link);
        const std::vector<bool> dummy = {false, false, true};
        const std::vector<std::size_t> cols = {1, 2};
        const auto me = marginal_effects(f, d.x, dummy, cols);
        ASSERT_EQ(me.size(), 2u);
        for (std::size_t m = 0; m < 2; ++m) {
            const std::size_t c = cols[m];
            EXPECT_EQ(me[m].term, kTerms[c]);
            EXPECT_NEAR(me[m].ame, ame_direct(link, d.x, f.coefficients, c, dummy[c]), 1e-12);
            // Delta method with a central-difference gradient.
            std::vector<double> g(3);
            for (std::size_t l = 0; l < 3; ++l) {
                auto up = f.coefficients, dn = f.coefficients;
                const double h = 1e-6;
                up[l] += h;
                dn[l] -= h;
                g[l] = (ame_direct(link, d.x, up, c, dummy[c]) - ame_direct(link, d.x, dn, c, dummy[c])) / (2 * h);
            }
            double var = 0.0;
            for (std::size_t a = 0; a < 3; ++a)
                for (std::size_t b = 0; b < 3; ++b) var += g[a] * f.covariance(a, b) * g[b];
            EXPECT_NEAR(me[m].se, std::sqrt(var), 1e-6 * std::sqrt(var) + 1e-10);
        }
    }
}

TEST(MarginalEffects, ZeroIndexProbitSlope) {
    // With every linear predictor at zero the AME is phi(0) b.
    GlmFit f;
    f.link = Link::Probit;
    f.terms = {"x"};
    f.coefficients = {0.0};
    f.covariance = Matrix(1, 1);
    Matrix x(4, 1);
    for (std::size_t i = 0; i < 4; ++i) x(i, 0) = static_cast<double>(i);
    const std::vector<std::size_t> cols = {0};
    const auto me = marginal_effects(f, x, {false}, cols);
    EXPECT_DOUBLE_EQ(me[0].ame, 0.0);
    f.coefficients = {1e-9};
    Matrix z(3, 1);
    EXPECT_NEAR(marginal_effects(f, z, {false}, cols)[0].ame / 1e-9, 0.3989423, 1e-7);
}

TEST(Covariates, ParseAndValidate) {
    std::string text = covariate_header();
    text += covariate_row(2011, "USA", "CAN", 3);
    text += covariate_row(2011, "CAN", "USA", 4);  // duplicate pair, swapped
    text += covariate_row(2011, "MEX", "MEX", 5);  // self pair
    std::string neg = covariate_row(2011, "USA", "MEX", 6);
    neg.replace(neg.find(",106,"), 5, ",-1,");
    text += neg;
    text += "2011,USA,BRA,1,2\n";
    std::string bad_dummy = covariate_row(2011, "BRA", "CAN", 0);
    bad_dummy.replace(bad_dummy.size() - 2, 1, "2");
    text += bad_dummy;
    text += covariate_row(2012, "USA", "CAN", 7);
    std::istringstream in(text);
    const auto table = read_covariates(in);
    EXPECT_EQ(table.rows.size(), 2u);
    EXPECT_EQ(table.diagnostics.size(), 5u);
    const auto* row = table.find(2011, "USA", "CAN");
    ASSERT_NE(row, nullptr);
    EXPECT_EQ(row, table.find(2011, "CAN", "USA"));
    EXPECT_EQ(row->size(), regressor_names().size());
    EXPECT_NEAR((*row)[0], std::log(103.0) + std::log(209.0), 1e-12);
    EXPECT_NEAR((*row)[2], std::log(100.0 * (1 + 3 % 11)), 1e-12);
    EXPECT_EQ(table.find(2013, "USA", "CAN"), nullptr);
    EXPECT_EQ(table.diagnostics[0].line, 3u);
}

TEST(Covariates, RegressorNames) {
    const auto names = regressor_names();
    ASSERT_EQ(names.size(), 17u);
    EXPECT_EQ(names[0], "log_gdp");
    EXPECT_EQ(names[2], "log_dist");
    EXPECT_EQ(names[3], "contiguity");
    EXPECT_EQ(names.back(), "com_ethno");
    const auto dummy = regressor_is_dummy();
    EXPECT_FALSE(dummy[2]);
    EXPECT_TRUE(dummy[3]);
}

TEST(Dyads, TwoCommunitiesOfThree) {
    NodeUniverse u({"A", "B", "C"});
    const auto cov = all_pairs(u, {2011});
    const LayerMembership layers[] = {membership(2011, {0, 0, 1})};
    const auto f = build_dyads(u, layers, cov);
    ASSERT_EQ(f.n_rows(), 3u);
    EXPECT_EQ(f.y, (std::vector<double>{1.0, 0.0, 0.0}));
    EXPECT_EQ(f.keys[0], make_pair_key(2011, "B", "A"));
    EXPECT_EQ(f.keys[2], (PairKey{2011, "B", "C"}));
    EXPECT_EQ(f.columns[0], "intercept");
    EXPECT_EQ(f.columns.size() + f.dropped_columns.size(), 18u);

    const LayerMembership one[] = {membership(2011, {0, 0, 0})};
    const auto g = build_dyads(u, one, cov);
    EXPECT_EQ(g.y, (std::vector<double>{1.0, 1.0, 1.0}));
}

TEST(Dyads, CountsAndSymmetry) {
    NodeUniverse u({"A", "B", "C", "D", "E", "F"});
    const auto cov = all_pairs(u, {2011});
    const LayerMembership layers[] = {membership(2011, {0, 1, 0, 2, 1, 2})};
    const auto f = build_dyads(u, layers, cov);
    EXPECT_EQ(f.n_rows(), 15u);
    EXPECT_TRUE(f.missing_covariates.empty());
    for (std::size_t r = 0; r < f.n_rows(); ++r) {
        EXPECT_LT(f.keys[r].a, f.keys[r].b);
        const auto& row = *cov.find(2011, f.keys[r].b, f.keys[r].a);
        EXPECT_EQ(f.x(r, 1), row[0]);
    }

    // Inactive members leave the frame unless requested.
    const LayerMembership partial[] = {membership(2011, {0, 1, 0, 2, 1, 2}, {true, true, true, true, true, false})};
    EXPECT_EQ(build_dyads(u, partial, cov).n_rows(), 10u);
    DyadOptions all;
    all.include_inactive = true;
    const auto g = build_dyads(u, partial, cov, all);
    EXPECT_EQ(g.n_rows(), 15u);
    for (std::size_t r = 0; r < g.n_rows(); ++r)
        if (g.keys[r].b == "F") EXPECT_EQ(g.y[r], 0.0);
}

TEST(Dyads, MissingCovariatesReported) {
    NodeUniverse u({"A", "B", "C"});
    std::string text = covariate_header() + covariate_row(2011, "A", "B", 1) + covariate_row(2011, "B", "C", 2);
    std::istringstream in(text);
    const auto cov = read_covariates(in);
    const LayerMembership layers[] = {membership(2011, {0, 0, 1})};
    const auto f = build_dyads(u, layers, cov);
    EXPECT_EQ(f.n_rows(), 2u);
    ASSERT_EQ(f.missing_covariates.size(), 1u);
    EXPECT_EQ(f.missing_covariates[0], (PairKey{2011, "A", "C"}));
}

TEST(Dyads, PanelEffects) {
    NodeUniverse u({"A", "B", "C", "D", "E", "F", "G", "H"});
    const auto cov = all_pairs(u, {2009, 2010, 2011});
    const LayerMembership layers[] = {membership(2011, {0, 0, 1, 1, 2, 2, 3, 3}),
                                      membership(2009, {0, 1, 0, 1, 0, 1, 0, 1}),
                                      membership(2010, {0, 0, 0, 1, 1, 1, 2, 2})};
    DyadOptions opt;
    opt.mode = FrameMode::Panel;
    const auto f = build_dyads(u, layers, cov, opt);
    EXPECT_EQ(f.n_rows(), 84u);
    EXPECT_EQ(f.keys.front().year, 2009);
    std::vector<std::size_t> year_cols, country_cols;
    for (std::size_t c = 0; c < f.columns.size(); ++c) {
        if (f.kinds[c] == ColumnKind::YearEffect) year_cols.push_back(c);
        if (f.kinds[c] == ColumnKind::CountryEffect) country_cols.push_back(c);
    }
    ASSERT_EQ(year_cols.size(), 2u);
    EXPECT_EQ(f.columns[year_cols[0]], "year_2010");
    ASSERT_EQ(country_cols.size(), 7u);
    EXPECT_EQ(f.columns[country_cols[0]], "country_B");
    for (std::size_t r = 0; r < f.n_rows(); ++r) {
        double members = 0.0;
        for (std::size_t c : country_cols) members += f.x(r, c);
        EXPECT_EQ(members, f.keys[r].a == "A" ? 1.0 : 2.0);
        EXPECT_EQ(f.x(r, year_cols[0]), f.keys[r].year == 2010 ? 1.0 : 0.0);
    }
    const LayerMembership two[] = {membership(2011, {0, 0, 1, 1, 2, 2, 3, 3}), membership(2011, {0, 1, 0, 1, 0, 1, 0, 1})};
    EXPECT_THROW(build_dyads(u, two, cov, opt), InvalidInput);
    EXPECT_THROW(build_dyads(u, two, cov), InvalidInput);
}

TEST(Dyads, CollinearFixedEffectsDropped) {
    // GDP fixed per country: log_gdp and log_gdppc are sums of country
    // effects, so two country dummies become redundant.
    NodeUniverse u({"A", "B", "C", "D", "E", "F"});
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> g(1.0, 100.0);
    std::vector<double> gdp(6), pc(6);
    for (std::size_t i = 0; i < 6; ++i) {
        gdp[i] = g(rng);
        pc[i] = g(rng);
    }
    std::string text = covariate_header();
    for (int year : {2001, 2011})
        for (std::size_t i = 0; i < 6; ++i)
            for (std::size_t j = i + 1; j < 6; ++j) {
                std::ostringstream row;
                row << year << ',' << u.label(i) << ',' << u.label(j) << ',' << gdp[i] << ',' << gdp[j] << ',' << pc[i]
                    << ',' << pc[j] << ',' << g(rng);
                for (std::size_t k = 5; k < kCovariateColumns.size(); ++k) row << ',' << (k == 5 ? (i + j) % 2 : 0);
                text += row.str() + "\n";
            }
    std::istringstream in(text);
    const auto cov = read_covariates(in);
    DyadOptions opt;
    opt.mode = FrameMode::Panel;
    const LayerMembership layers[] = {membership(2001, {0, 0, 0, 1, 1, 1}), membership(2011, {0, 0, 1, 1, 2, 2})};
    const auto f = build_dyads(u, layers, cov, opt);
    std::size_t dropped_fe = 0;
    for (const auto& c : f.dropped_columns) dropped_fe += c.rfind("country_", 0) == 0;
    EXPECT_EQ(dropped_fe, 2u);
    for (const auto& c : f.columns) EXPECT_TRUE(c != "country_E" && c != "country_F") << c;
    EXPECT_NO_THROW(fit(f, Link::Logit));
}

TEST(Batch, StatusAndResults) {
    NodeUniverse u({"A", "B", "C", "D", "E", "F", "G", "H"});
    const auto cov = all_pairs(u, {2011});
    std::vector<LayerFitRequest> req = {
        {"wheat", {membership(2011, {0, 1, 0, 1, 0, 1, 2, 2})}},
        {"rice", {membership(2011, {0, 0, 0, 0, 0, 0, 0, 0})}},
        {"empty", {}},
    };
    const auto out = fit_all_layers(u, req, cov, Link::Probit, {}, {}, 2);
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out[1].status.rfind("failed:", 0), 0u);
    EXPECT_EQ(out[2].status.rfind("skipped:", 0), 0u);
    EXPECT_EQ(out[0].period, "2011");
    std::ostringstream s;
    write_status(s, out);
    EXPECT_EQ(s.str().substr(0, s.str().find('\n')), "commodity,year,status,n,missing_covariates,dropped_columns");
    std::ostringstream r;
    write_results(r, out);
    EXPECT_EQ(r.str().substr(0, r.str().find('\n')), "commodity,year,term,estimate,se,ame,ame_se,z,loglik,aic,n");
}
