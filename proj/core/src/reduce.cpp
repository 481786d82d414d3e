#include "tradenet/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tradenet/errors.hpp"

namespace tradenet::reduce {

std::vector<double> StatsTable::column(std::size_t j) const {
    std::vector<double> c(n_rows());
    for (std::size_t i = 0; i < n_rows(); ++i) c[i] = values(i, j);
    return c;
}

StatsTable StatsTable::select(std::span<const std::string> names) const {
    std::vector<std::size_t> idx;
    for (const auto& name : names) {
        auto it = std::find(variables.begin(), variables.end(), name);
        if (it == variables.end()) throw InvalidInput("unknown statistic '" + name + "'");
        idx.push_back(static_cast<std::size_t>(it - variables.begin()));
    }
    StatsTable out{{names.begin(), names.end()}, row_labels, Matrix(n_rows(), idx.size())};
    for (std::size_t i = 0; i < n_rows(); ++i)
        for (std::size_t k = 0; k < idx.size(); ++k) out.values(i, k) = values(i, idx[k]);
    return out;
}

StatsTable StatsTable::complete_rows() const {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < n_rows(); ++i) {
        auto r = values.row(i);
        if (std::none_of(r.begin(), r.end(), [](double v) { return std::isnan(v); })) keep.push_back(i);
    }
    StatsTable out{variables, {}, Matrix(keep.size(), n_vars())};
    for (std::size_t k = 0; k < keep.size(); ++k) {
        out.row_labels.push_back(row_labels.at(keep[k]));
        for (std::size_t j = 0; j < n_vars(); ++j) out.values(k, j) = values(keep[k], j);
    }
    return out;
}

std::vector<std::string> default_priority() {
    return {"density",           "bilateral_density", "lcc_size",       "centralization",
            "bin_assortativity", "mean_log_weight",   "std_log_weight", "wei_assortativity",
            "bin_clustering",    "wei_clustering",    "weighted_asymmetry"};
}

namespace {

std::optional<double> complete_pair_correlation(const StatsTable& t, std::size_t a, std::size_t b) {
    std::vector<double> x, y;
    for (std::size_t i = 0; i < t.n_rows(); ++i) {
        const double u = t.values(i, a), v = t.values(i, b);
        if (std::isnan(u) || std::isnan(v)) continue;
        x.push_back(u);
        y.push_back(v);
    }
    return pearson(x, y);
}

}  // namespace

PruneResult prune(const StatsTable& table, double threshold, std::span<const std::string> priority) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw InvalidInput("prune threshold must lie in [0, 1]");
    const std::vector<std::string> defaults = priority.empty() ? default_priority() : std::vector<std::string>{};
    if (priority.empty()) priority = defaults;

    const std::size_t p = table.n_vars();
    auto rank = [&](std::size_t j) {
        auto it = std::find(priority.begin(), priority.end(), table.variables[j]);
        return it == priority.end() ? priority.size() : static_cast<std::size_t>(it - priority.begin());
    };
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rank(a) < rank(b); });

    std::vector<bool> dropped(p, false);
    PruneResult out;
    for (std::size_t u = 0; u < p; ++u) {
        const std::size_t a = order[u];
        if (dropped[a]) continue;
        for (std::size_t w = u + 1; w < p; ++w) {
            const std::size_t b = order[w];
            if (dropped[b]) continue;
            const auto r = complete_pair_correlation(table, a, b);
            if (r && std::abs(*r) > threshold) {
                dropped[b] = true;
                out.dropped.push_back({table.variables[b], table.variables[a], std::abs(*r)});
            }
        }
    }
    for (std::size_t j = 0; j < p; ++j)
        if (!dropped[j]) out.kept.push_back(table.variables[j]);
    return out;
}

PcaResult pca(const StatsTable& table) {
    const std::size_t n = table.n_rows(), p = table.n_vars();
    if (n < 2 || p < 2) throw InvalidInput("PCA needs at least 2 rows and 2 variables");
    if (table.variables.size() != p) throw InvalidInput("PCA table has mismatched variable names");

    PcaResult out;
    out.variables = table.variables;
    out.row_labels = table.row_labels;
    out.kept_variables = table.variables;
    out.means.resize(p);
    out.stds.resize(p);

    Matrix z(n, p);
    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = table.values(i, j);
            if (!std::isfinite(v))
                throw InvalidInput("PCA input has an undefined value in column '" + table.variables[j] + "'");
            mean += v;
        }
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) ss += (table.values(i, j) - mean) * (table.values(i, j) - mean);
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        if (!(sd > 1e-12 * std::abs(mean)) || sd == 0.0)
            throw InvalidInput("PCA column '" + table.variables[j] + "' is constant");
        out.means[j] = mean;
        out.stds[j] = sd;
        for (std::size_t i = 0; i < n; ++i) z(i, j) = (table.values(i, j) - mean) / sd;
    }

    Matrix corr(p, p);
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a; b < p; ++b) {
            double s = 0.0;
            for (std::size_t i = 0; i < n; ++i) s += z(i, a) * z(i, b);
            corr(a, b) = corr(b, a) = s / static_cast<double>(n - 1);
        }

    SymmetricEigen eig = jacobi_eigen(corr);
    for (std::size_t k = 0; k < p; ++k) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < p; ++j)
            if (std::abs(eig.vectors(j, k)) > std::abs(eig.vectors(arg, k))) arg = j;
        if (eig.vectors(arg, k) < 0.0)
            for (std::size_t j = 0; j < p; ++j) eig.vectors(j, k) = -eig.vectors(j, k);
    }
    out.loadings = eig.vectors;
    out.scores = z * out.loadings;
    out.eigenvalues = eig.values;

    double total = 0.0;
    for (double& l : out.eigenvalues) {
        l = std::max(l, 0.0);
        total += l;
    }
    for (double l : out.eigenvalues) out.explained_variance_ratio.push_back(l / total);
    return out;
}

PcaResult pruned_pca(const StatsTable& table, double threshold, std::span<const std::string> priority) {
    const PruneResult pr = prune(table, threshold, priority);
    PcaResult out = pca(table.select(pr.kept));
    out.dropped_variables = pr.dropped;
    return out;
}

}  // namespace tradenet::reduce
