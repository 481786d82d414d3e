#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace tradenet {

// Pearson correlation; nullopt for fewer than two points or a zero-variance
// input.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

struct Moments {
    double mean = 0.0;
    double std = 0.0;  // population standard deviation
};

// Throws UndefinedStatistic on empty input.
Moments population_moments(std::span<const double> values);

// Dense row-major matrix.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }

    Matrix transposed() const;
    Matrix operator*(const Matrix& other) const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct SymmetricEigen {
    std::vector<double> values;  // descending
    Matrix vectors;              // column k pairs with values[k]
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix.
SymmetricEigen jacobi_eigen(const Matrix& a);

// Cholesky factor L (lower) of a symmetric positive definite matrix;
// nullopt if a pivot is not positive.
std::optional<Matrix> cholesky(const Matrix& a);
std::vector<double> cholesky_solve(const Matrix& l, std::span<const double> b);
Matrix cholesky_inverse(const Matrix& l);

}  // namespace tradenet
