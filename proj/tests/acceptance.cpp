// Acceptance checks. One line per criterion; exit status 1 when any gated
// criterion fails. Criterion 11 needs TRADENET_FAOSTAT_EXTRACT (an edge list
// with 2011 layers) and never affects the exit status.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "pipeline.hpp"
#include "synthetic.hpp"
#include "tradenet/community.hpp"
#include "tradenet/compare.hpp"
#include "tradenet/econ.hpp"
#include "tradenet/errors.hpp"
#include "tradenet/multilayer.hpp"
#include "tradenet/netstats.hpp"
#include "tradenet/reduce.hpp"

using namespace tradenet;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Verdict {
    bool pass = false;
    std::string detail;
    bool skip = false;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Layer make(std::size_t n, std::vector<Edge> e) { return Layer::from_edges({"t", 2011}, n, std::move(e)); }

std::vector<std::string> labels(std::size_t n) {
    std::vector<std::string> l;
    for (std::size_t i = 0; i < n; ++i) l.push_back("N" + std::to_string(1000 + i));
    return l;
}

// ---------------------------------------------------------------- 1

Verdict modularity_oracle() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> p(0.2, 0.5);
    int hit = 0, total = 0;
    double worst = 0.0, enumeration = 0.0;
    while (total < 20) {
        const std::size_t n = 4 + static_cast<std::size_t>(total % 5);
        const Layer l = oracle::random_layer(rng, n, p(rng), 0.5, 3.0);
        if (l.empty()) continue;
        ++total;
        const auto t0 = Clock::now();
        const auto best = oracle::max_modularity(oracle::dense(l));
        enumeration += seconds_since(t0);
        community::DetectorConfig cfg;
        cfg.restarts = 10;
        cfg.rng_seed = 42;
        const double gap = std::abs(community::detect(l, cfg).modularity - best.value);
        worst = std::max(worst, gap);
        hit += gap <= 1e-9;
    }
    return {hit == 20 && enumeration < 10.0,
            fmt("%d/20 at the enumerated maximum (worst gap %.2e), enumeration %.2f s", hit, worst, enumeration)};
}

// ---------------------------------------------------------------- 2

Verdict gain_identity() {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> size(3, 16);
    std::uniform_real_distribution<double> p(0.1, 0.6), gamma(0.5, 2.0);
    int failures = 0, cases = 0;
    double worst = 0.0;
    while (cases < 1000) {
        const auto n = static_cast<std::size_t>(size(rng));
        const Layer l = oracle::random_layer(rng, n, p(rng), 0.1, 10.0);
        if (l.empty()) continue;
        std::uniform_int_distribution<CommunityId> pick(0, static_cast<CommunityId>(std::min<std::size_t>(n, 5) - 1));
        std::vector<CommunityId> ids(n);
        for (auto& c : ids) c = pick(rng);
        const Partition before(ids);
        const auto node = std::uniform_int_distribution<NodeIndex>(0, static_cast<NodeIndex>(n - 1))(rng);
        const auto target = std::uniform_int_distribution<CommunityId>(
            0, static_cast<CommunityId>(before.n_communities()))(rng);
        const double g = cases % 2 ? 1.0 : gamma(rng);
        std::vector<CommunityId> moved(before.assignment().begin(), before.assignment().end());
        moved[node] = target;
        const double full = community::evaluate_modularity(l, Partition(moved), g) -
                            community::evaluate_modularity(l, before, g);
        const double err = std::abs(community::local_move_gain(l, before, node, target, g) - full);
        worst = std::max(worst, err);
        failures += err > 1e-12;
        ++cases;
    }
    return {failures == 0, fmt("%d/1000 cases off by more than 1e-12 (worst %.2e)", failures, worst)};
}

// ---------------------------------------------------------------- 3

Verdict planted_recovery() {
    const auto t0 = Clock::now();
    int good = 0;
    double lowest = 1.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        std::mt19937_64 rng(seed);
        const auto planted = oracle::planted_blocks(rng, 64, 4, 0.5, 0.02, 1.0, 2.0);
        const double v = compare::nmi(community::detect(planted.layer).partition, Partition(planted.labels));
        lowest = std::min(lowest, v);
        good += v >= 0.95;
    }
    const double t = seconds_since(t0);
    return {good >= 95 && t < 10.0, fmt("%d/100 seeds with NMI >= 0.95 (lowest %.4f), %.2f s", good, lowest, t)};
}

// ---------------------------------------------------------------- 4

Verdict multilayer_limits() {
    std::mt19937_64 rng(4);
    int exact = 0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 24 + 4 * static_cast<std::size_t>(t % 3);
        std::vector<Layer> layers;
        for (int x = 0; x < 3; ++x)
            layers.push_back(
                oracle::planted_blocks(rng, n, 3 + t % 2, 0.6, 0.03).layer.with_key({"c" + std::to_string(x), 2011}));
        const MultiNetwork m(NodeUniverse(labels(n)), layers, 0.0);
        const auto r = multilayer::detect_multilayer(m);
        for (std::size_t x = 0; x < 3; ++x)
            exact += compare::nmi(multilayer::project(r.partition, x), community::detect(m.layer(x)).partition) == 1.0;
    }
    int merged = 0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 15 + static_cast<std::size_t>(t);
        std::vector<Layer> layers;
        double max_volume = 0.0;
        for (int x = 0; x < 3; ++x) {
            layers.push_back(oracle::random_layer(rng, n, 0.15).with_key({"c" + std::to_string(x), 2011}));
            max_volume = std::max(max_volume, layers.back().volume());
        }
        const MultiNetwork m(NodeUniverse(labels(n)), layers, 10.0 * max_volume);
        const auto d = multilayer::diversification(multilayer::detect_multilayer(m).partition);
        merged += std::all_of(d.begin(), d.end(), [](std::size_t v) { return v == 1; });
    }
    return {exact == 60 && merged == 20,
            fmt("theta = 0: %d/60 projections with NMI 1; strong coupling: %d/20 with every node undivided", exact,
                merged)};
}

// ---------------------------------------------------------------- 5

Verdict q_star_oracle() {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> theta(0.0, 2.0);
    int instances = 0, mismatched = 0, above = 0, reached = 0;
    double worst = 0.0;
    while (instances < 50) {
        std::vector<Layer> layers{oracle::random_layer(rng, 3, 0.6, 0.5, 3.0).with_key({"a", 2011}),
                                  oracle::random_layer(rng, 3, 0.6, 0.5, 3.0).with_key({"b", 2011})};
        if (layers[0].empty() && layers[1].empty()) continue;
        ++instances;
        const MultiNetwork m(NodeUniverse(labels(3)), layers, instances % 5 == 0 ? 0.0 : theta(rng));
        const std::vector<oracle::Dense> dense{oracle::dense(m.layer(0)), oracle::dense(m.layer(1))};
        double best = -1e300;
        bool ok = true;
        oracle::for_each_partition(6, [&](const std::vector<std::uint32_t>& c) {
            const double o = oracle::q_star(dense, m.coupling(), c);
            const std::vector<CommunityId> ids(c.begin(), c.end());
            const double v = multilayer::evaluate_q_star(m, MultilayerPartition(3, 2, ids));
            worst = std::max(worst, std::abs(o - v));
            ok = ok && std::abs(o - v) <= 1e-9;
            best = std::max(best, o);
        });
        mismatched += !ok;
        const double q = multilayer::detect_multilayer(m).q_star;
        above += q > best + 1e-9;
        reached += std::abs(q - best) <= 1e-9;
    }
    return {mismatched == 0 && above == 0,
            fmt("%d/50 instances disagree with enumeration (worst %.2e), %d above the maximum, %d/50 reach it",
                mismatched, worst, above, reached)};
}

// ---------------------------------------------------------------- 6

Verdict nmi_suite() {
    std::mt19937_64 rng(6);
    int identity = 0, relabel = 0;
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + static_cast<std::size_t>(t) * 7;
        std::uniform_int_distribution<CommunityId> pick(0, static_cast<CommunityId>(t % 9));
        std::vector<CommunityId> a(n), b(n);
        for (auto& c : a) c = pick(rng);
        for (auto& c : b) c = pick(rng);
        std::vector<CommunityId> perm(10);
        std::iota(perm.begin(), perm.end(), CommunityId{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<CommunityId> a2(n);
        for (std::size_t i = 0; i < n; ++i) a2[i] = perm[a[i]] + 17;
        const Partition pa(a), pb(b), pa2(a2);
        identity += compare::nmi(pa, pa) == 1.0;
        relabel += compare::nmi(pa, pa2) == 1.0 && compare::nmi(pa2, pb) == compare::nmi(pa, pb) &&
                   compare::nmi(pb, pa2) == compare::nmi(pb, pa);
    }
    int low = 0;
    double highest = 0.0;
    std::uniform_int_distribution<CommunityId> four(0, 3);
    for (int t = 0; t < 100; ++t) {
        std::vector<CommunityId> a(2000), b(2000);
        for (auto& c : a) c = four(rng);
        for (auto& c : b) c = four(rng);
        const double v = compare::nmi(Partition(a), Partition(b));
        highest = std::max(highest, v);
        low += v < 0.05;
    }
    return {identity == 100 && relabel == 100 && low == 100,
            fmt("identity %d/100, relabeling %d/100, independent 4-way on 2000 nodes %d/100 below 0.05 (max %.4f)",
                identity, relabel, low, highest)};
}

// ---------------------------------------------------------------- 7

double probit_quantile(double p) {
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (0.5 * std::erfc(-mid / std::sqrt(2.0)) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

Verdict probit_recovery() {
    const std::vector<double> beta = {0.5, -1.0, 0.3};
    const std::size_t n = 10000;
    std::array<int, 3> within{};
    int failed = 0;
    double slowest = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> z;
        Matrix x(n, 3);
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x(i, 0) = 1.0;
            x(i, 1) = z(rng);
            x(i, 2) = z(rng);
            y[i] = beta[0] + beta[1] * x(i, 1) + beta[2] * x(i, 2) + z(rng) > 0.0 ? 1.0 : 0.0;
        }
        const auto t0 = Clock::now();
        try {
            const auto f = econ::fit(x, y, {"intercept", "x1", "x2"}, econ::Link::Probit);
            slowest = std::max(slowest, seconds_since(t0));
            for (std::size_t k = 0; k < 3; ++k) within[k] += std::abs(f.coefficients[k] - beta[k]) <= 3.0 * f.std_errors[k];
        } catch (const Error&) {
            ++failed;
        }
    }
    double closed = 0.0;
    for (double p : {0.05, 0.2, 0.5, 0.63, 0.9}) {
        const std::size_t m = 2000;
        Matrix x(m, 1);
        std::vector<double> y(m, 0.0);
        for (std::size_t i = 0; i < m; ++i) {
            x(i, 0) = 1.0;
            y[i] = static_cast<double>(i) < p * static_cast<double>(m) ? 1.0 : 0.0;
        }
        closed = std::max(closed, std::abs(econ::fit(x, y, {"intercept"}, econ::Link::Probit).coefficients[0] -
                                           probit_quantile(p)));
        closed = std::max(closed, std::abs(econ::fit(x, y, {"intercept"}, econ::Link::Logit).coefficients[0] -
                                           std::log(p / (1 - p))));
    }
    const bool pass = failed == 0 && *std::min_element(within.begin(), within.end()) >= 99 && closed <= 1e-10 &&
                      slowest < 1.0;
    return {pass, fmt("within 3 SE: b0 %d/100, b1 %d/100, b2 %d/100; intercept-only error %.2e; slowest fit %.3f s",
                      within[0], within[1], within[2], closed, slowest)};
}

// ---------------------------------------------------------------- 8

reduce::StatsTable random_table(std::mt19937_64& rng, std::size_t n, std::size_t p, bool isotropic) {
    std::normal_distribution<double> z;
    reduce::StatsTable t;
    t.values = Matrix(n, p);
    for (std::size_t j = 0; j < p; ++j) t.variables.push_back("v" + std::to_string(j));
    for (std::size_t i = 0; i < n; ++i) {
        t.row_labels.push_back("r" + std::to_string(i));
        const double common = z(rng);
        for (std::size_t j = 0; j < p; ++j)
            t.values(i, j) = z(rng) + (isotropic ? 0.0 : 0.4 * static_cast<double>(j % 3) * common);
    }
    return t;
}

Verdict pca_checks() {
    std::mt19937_64 rng(8);
    double ortho = 0.0, recon = 0.0, affine = 0.0;
    int exact = 0;
    for (int t = 0; t < 20; ++t) {
        const std::size_t n = 40 + 10 * static_cast<std::size_t>(t), p = 2 + static_cast<std::size_t>(t % 9);
        const auto tab = random_table(rng, n, p, false);
        const auto r = reduce::pca(tab);
        const Matrix ltl = r.loadings.transposed() * r.loadings;
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j) ortho = std::max(ortho, std::abs(ltl(i, j) - (i == j)));
        const Matrix back = r.scores * r.loadings.transposed();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p; ++j)
                recon = std::max(recon, std::abs(back(i, j) - (tab.values(i, j) - r.means[j]) / r.stds[j]));

        auto pow2 = tab, aff = tab;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < p; ++j) {
                pow2.values(i, j) *= std::ldexp(1.0, static_cast<int>(j % 5) - 2);
                aff.values(i, j) = (1.3 + 2.1 * static_cast<double>(j)) * aff.values(i, j) - 7.0 * static_cast<double>(j);
            }
        const auto r2 = reduce::pca(pow2);
        exact += r2.loadings == r.loadings && r2.scores == r.scores &&
                 r2.explained_variance_ratio == r.explained_variance_ratio;
        const auto ra = reduce::pca(aff);
        for (std::size_t j = 0; j < p; ++j)
            for (std::size_t k = 0; k < p; ++k) affine = std::max(affine, std::abs(ra.loadings(j, k) - r.loadings(j, k)));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < p; ++k) affine = std::max(affine, std::abs(ra.scores(i, k) - r.scores(i, k)));
    }
    double iso = 0.0;
    for (std::size_t p : {3, 5, 8}) {
        const auto r = reduce::pca(random_table(rng, 5000, p, true));
        for (double v : r.explained_variance_ratio) iso = std::max(iso, std::abs(v - 1.0 / static_cast<double>(p)));
    }
    return {ortho <= 1e-9 && recon <= 1e-9 && exact == 20 && affine <= 1e-9 && iso <= 0.05,
            fmt("orthonormality %.1e, reconstruction %.1e, power-of-two rescaling bit-exact %d/20, affine %.1e, "
                "isotropic ratio deviation %.4f",
                ortho, recon, exact, affine, iso)};
}

// ---------------------------------------------------------------- 9

Layer star(std::size_t n) {
    std::vector<Edge> e;
    for (NodeIndex i = 1; i < n; ++i) {
        e.push_back({0, i, 1.0});
        e.push_back({i, 0, 1.0});
    }
    return make(n, e);
}

Layer two_cliques(std::size_t a, std::size_t b) {
    std::vector<Edge> e;
    NodeIndex base = 0;
    for (std::size_t s : {a, b}) {
        for (NodeIndex i = 0; i < s; ++i)
            for (NodeIndex j = 0; j < s; ++j)
                if (i != j) e.push_back({base + i, base + j, 1.0});
        base += static_cast<NodeIndex>(s);
    }
    return make(base, e);
}

Verdict netstats_checks() {
    using namespace tradenet::stats;
    std::vector<std::string> failed;
    auto check = [&](bool ok, const char* what) {
        if (!ok) failed.emplace_back(what);
    };
    const Layer abc = make(3, {{0, 1, 1}, {1, 0, 1}, {0, 2, 1}});
    check(density(abc) == 0.5, "density");
    check(bilateral_density(abc) == 2.0 / 3.0, "bilateral density");
    check(weighted_asymmetry(make(2, {{0, 1, 3}, {1, 0, 1}})) == 0.4, "weighted asymmetry");
    check(lcc_size(make(4, {{0, 1, 1}, {1, 2, 1}})) == 3, "lcc");
    check(centralization(star(4)) == 1.0, "centralization");
    for (std::size_t n : {4, 6, 9}) {
        const double r = assortativity(star(n), Mode::Binary);
        check(r < 0.0 && std::abs(r - oracle::assortativity(oracle::dense(star(n)), false)) <= 1e-12,
              "star assortativity");
    }
    for (auto [a, b] : {std::pair<std::size_t, std::size_t>{3, 5}, {2, 4}, {4, 7}}) {
        const Layer l = two_cliques(a, b);
        const double r = assortativity(l, Mode::Binary);
        check(r > 0.0 && std::abs(r - oracle::assortativity(oracle::dense(l), false)) <= 1e-12,
              "clique assortativity");
    }
    // Directed 3-cycle: the total-clustering formula, evaluated by matrix
    // power, gives 2 / 4 per node.
    const Layer cyc = make(3, {{0, 1, 1}, {1, 2, 1}, {2, 0, 1}});
    const auto oc = oracle::clustering(oracle::dense(cyc));
    const auto nc = node_clustering(cyc, Mode::Binary);
    for (std::size_t i = 0; i < 3; ++i) check(nc[i] && oc[i] && *nc[i] == *oc[i], "3-cycle clustering");
    check(clustering(cyc, Mode::Binary) == 0.5, "3-cycle clustering");
    for (const auto& s : strengths(cyc)) check(s.in == 1.0 && s.out == 1.0, "3-cycle strengths");
    for (const auto& d : degrees(cyc)) check(d.bilateral == 0, "3-cycle bilateral degree");
    const auto m = weight_moments(log_weights(make(3, {{0, 1, std::exp(2.0)}, {1, 2, std::exp(3.0)}})));
    check(std::abs(m.mean - 2.5) <= 1e-15 && std::abs(m.std - 0.5) <= 1e-15, "log weight moments");
    check(intensity_ratio(make(3, {{0, 1, 4}, {2, 1, 2}, {0, 2, 2}})) == 1.0, "intensity ratio");

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> p(0.0, 0.7);
    std::uniform_int_distribution<int> size(2, 30);
    std::size_t violations = 0;
    auto in = [&](const std::optional<double>& v, double lo, double hi) {
        if (v && !(*v >= lo - 1e-12 && *v <= hi + 1e-12)) ++violations;
    };
    for (int t = 0; t < 10000; ++t) {
        const auto n = static_cast<std::size_t>(size(rng));
        const Layer l = oracle::random_layer(rng, n, p(rng), 0.2, 1e5);
        const auto r = compute_stats(l);
        in(r.density, 0, 1);
        in(r.bilateral_density, 0, 1);
        in(r.weighted_asymmetry, 0, 1);
        in(r.centralization, 0, 1);
        in(r.bin_assortativity, -1, 1);
        in(r.wei_assortativity, -1, 1);
        in(r.bin_clustering, 0, 1);
        in(r.wei_clustering, 0, 1);
        in(r.std_log_weight, 0, HUGE_VAL);
        in(r.intensity_ratio, 0, HUGE_VAL);
        if (r.lcc_size < 1 || r.lcc_size > n) ++violations;
        if (!r.density) ++violations;
    }
    std::string detail = failed.empty() ? "all hand cases reproduced" : "failed:";
    for (const auto& f : failed) detail += " " + f + ";";
    detail += fmt(", %zu range violations over 10000 random layers (directed 3-cycle clustering 0.5)", violations);
    return {failed.empty() && violations == 0, detail};
}

// ---------------------------------------------------------------- 10

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict determinism() {
    const fs::path dir = fs::temp_directory_path() / "tradenet_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto files = synthetic::write(dir);
    pipeline::RunConfig cfg;
    cfg.edges = files.edges;
    cfg.covariates = files.covariates;
    cfg.years = {2001, 2011};
    cfg.panel = true;
    cfg.threads = 2;
    auto one = cfg, two = cfg;
    one.output_dir = dir / "one";
    two.output_dir = dir / "two";
    if (!pipeline::run_pipeline(one).ok() || !pipeline::run_pipeline(two).ok()) return {false, "a run failed"};
    int same = 0, differ = 0;
    for (const auto& entry : fs::directory_iterator(one.output_dir)) {
        const auto name = entry.path().filename();
        if (name == "manifest.json") continue;
        (slurp(entry.path()) == slurp(two.output_dir / name) ? same : differ)++;
    }
    for (const auto& entry : fs::directory_iterator(two.output_dir))
        if (!fs::exists(one.output_dir / entry.path().filename())) ++differ;
    fs::remove_all(dir);
    return {differ == 0 && same >= 18, fmt("%d data files identical, %d differ", same, differ)};
}

// ---------------------------------------------------------------- 11

Verdict data_check() {
    const char* path = std::getenv("TRADENET_FAOSTAT_EXTRACT");
    if (!path || !*path) return {false, "TRADENET_FAOSTAT_EXTRACT not set", true};
    pipeline::RunConfig cfg;
    cfg.edges = path;
    cfg.years = {2011};
    cfg.detector.restarts = 10;
    try {
        const auto data = pipeline::load(cfg);
        int layers = 0, bad = 0;
        std::string where;
        for (const auto& l : pipeline::run_detect(data, cfg)) {
            ++layers;
            const bool cassava = l.key.commodity.find("assava") != std::string::npos;
            const std::size_t k = l.partition.restricted(l.active).n_communities();
            const bool q_ok = cassava || (l.modularity >= 0.2 && l.modularity <= 0.5);
            if (!q_ok || k < 3 || k > 10) {
                ++bad;
                where += fmt(" %s(Q=%.3f,k=%zu)", l.key.commodity.c_str(), l.modularity, k);
            }
        }
        return {bad == 0, fmt("%d/%d 2011 layers in band", layers - bad, layers) + where};
    } catch (const std::exception& e) {
        return {false, std::string("could not evaluate: ") + e.what()};
    }
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        Verdict (*run)();
    };
    const Criterion criteria[] = {
        {1, "modularity oracle", modularity_oracle}, {2, "gain identity", gain_identity},
        {3, "planted recovery", planted_recovery},   {4, "multilayer limits", multilayer_limits},
        {5, "Q* oracle", q_star_oracle},             {6, "NMI suite", nmi_suite},
        {7, "probit recovery", probit_recovery},     {8, "PCA", pca_checks},
        {9, "statistics", netstats_checks},          {10, "determinism", determinism},
        {11, "data check", data_check},
    };
    bool ok = true;
    for (const auto& c : criteria) {
        Verdict v;
        try {
            v = c.run();
        } catch (const std::exception& e) {
            v = {false, std::string("threw: ") + e.what()};
        }
        const char* tag = v.skip ? "SKIP" : v.pass ? "PASS" : "FAIL";
        std::printf("%s %2d %-18s %s\n", tag, c.id, c.name, v.detail.c_str());
        std::fflush(stdout);
        if (c.id != 11 && !v.pass) ok = false;
    }
    return ok ? 0 : 1;
}
