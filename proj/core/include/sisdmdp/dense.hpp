#pragma once

#include "sisdmdp/timing.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace sisdmdp {

/// Row-major dense matrix.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static DenseMatrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

    friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

/// Solves A x = b by Gauss-Jordan elimination with partial pivoting.
///
/// A pivot smaller than 1e-13 times the largest initial row infinity-norm is
/// treated as singular (SolverError). The deadline is polled once per pivot
/// column. `a` and `b` are consumed.
std::vector<double> gauss_jordan_solve(DenseMatrix a, std::vector<double> b,
                                       const Deadline& deadline = {});

/// Stationary distribution of an irreducible row-stochastic matrix by
/// Grassmann-Taksar-Heyman state reduction. Subtraction-free; throws
/// SolverError when a reduction step finds no remaining mass (reducible input).
std::vector<double> gth_steady_state(DenseMatrix p, const Deadline& deadline = {});

} // namespace sisdmdp
