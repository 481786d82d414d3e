#pragma once

// Correlation pruning and correlation-matrix PCA over a table of layer
// statistics (rows = layers, columns = statistics).

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tradenet/numeric.hpp"

namespace tradenet::reduce {

// Undefined cells are NaN.
struct StatsTable {
    std::vector<std::string> variables;
    std::vector<std::string> row_labels;
    Matrix values;  // row_labels.size() x variables.size()

    std::size_t n_rows() const { return values.rows(); }
    std::size_t n_vars() const { return values.cols(); }
    std::vector<double> column(std::size_t j) const;
    // Columns named in `names`, in that order; throws InvalidInput for unknown names.
    StatsTable select(std::span<const std::string> names) const;
    // Rows without undefined cells.
    StatsTable complete_rows() const;
};

struct DroppedVariable {
    std::string name;
    std::string partner;
    double abs_r = 0.0;
};

struct PruneResult {
    std::vector<std::string> kept;  // in input column order
    std::vector<DroppedVariable> dropped;
};

// Variables earlier in this list win when a pair is too correlated.
std::vector<std::string> default_priority();

// Visits variables from highest to lowest priority (names missing from
// `priority` rank after those present, in column order). Each variable still
// kept drops every lower-priority variable correlated with it above
// `threshold` in absolute value. Correlations use rows where both cells are
// defined; undefined correlations never trigger a drop.
PruneResult prune(const StatsTable& table, double threshold = 0.9,
                  std::span<const std::string> priority = {});

struct PcaResult {
    std::vector<std::string> variables;
    std::vector<std::string> row_labels;
    std::vector<double> means;
    std::vector<double> stds;  // sample standard deviations
    Matrix loadings;           // variables x components, orthonormal columns
    Matrix scores;             // rows x components
    std::vector<double> eigenvalues;
    std::vector<double> explained_variance_ratio;
    std::vector<std::string> kept_variables;
    std::vector<DroppedVariable> dropped_variables;
};

// Standardizes every column and diagonalizes the correlation matrix.
// Components come in decreasing eigenvalue order, and each loading column
// has its largest-magnitude entry positive. Throws InvalidInput with the
// column name for undefined cells or a constant column.
PcaResult pca(const StatsTable& table);

// prune() then pca() on the kept columns.
PcaResult pruned_pca(const StatsTable& table, double threshold = 0.9, std::span<const std::string> priority = {});

}  // namespace tradenet::reduce
