#include "sisdmdp/dense.hpp"

#include "sisdmdp/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sisdmdp {

void Deadline::check() const {
    if (expired()) throw BudgetExceeded();
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

std::vector<double> gauss_jordan_solve(DenseMatrix a, std::vector<double> b, const Deadline& deadline) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw SolverError("gauss_jordan_solve: dimension mismatch");

    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double norm = 0.0;
        for (double v : a.row(i)) norm += std::abs(v);
        scale = std::max(scale, norm);
    }
    const double tiny = 1e-13 * scale;

    for (std::size_t col = 0; col < n; ++col) {
        deadline.check();
        std::size_t piv = col;
        double best = std::abs(a(col, col));
        for (std::size_t i = col + 1; i < n; ++i) {
            const double v = std::abs(a(i, col));
            if (v > best) {
                best = v;
                piv = i;
            }
        }
        if (!(best > tiny))
            throw SolverError("singular system (pivot " + std::to_string(best) + " in column " +
                              std::to_string(col) + ")");
        if (piv != col) {
            std::swap_ranges(a.row(col).begin(), a.row(col).end(), a.row(piv).begin());
            std::swap(b[col], b[piv]);
        }
        const double inv = 1.0 / a(col, col);
        auto prow = a.row(col);
        for (std::size_t j = col; j < n; ++j) prow[j] *= inv;
        b[col] *= inv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col) continue;
            const double f = a(i, col);
            if (f == 0.0) continue;
            auto r = a.row(i);
            for (std::size_t j = col; j < n; ++j) r[j] -= f * prow[j];
            b[i] -= f * b[col];
        }
    }
    return b;
}

std::vector<double> gth_steady_state(DenseMatrix p, const Deadline& deadline) {
    const std::size_t n = p.rows();
    if (p.cols() != n || n == 0) throw SolverError("gth_steady_state: matrix must be square and non-empty");

    for (std::size_t k = n - 1; k > 0; --k) {
        deadline.check();
        double mass = 0.0;
        for (std::size_t j = 0; j < k; ++j) mass += p(k, j);
        if (!(mass > 0.0))
            throw SolverError("gth_steady_state: reducible matrix (state " + std::to_string(k) +
                              " has no mass towards lower states)");
        for (std::size_t i = 0; i < k; ++i) p(i, k) /= mass;
        for (std::size_t i = 0; i < k; ++i) {
            const double f = p(i, k);
            if (f == 0.0) continue;
            auto ri = p.row(i);
            auto rk = p.row(k);
            for (std::size_t j = 0; j < k; ++j) ri[j] += f * rk[j];
        }
    }

    std::vector<double> x(n, 0.0);
    x[0] = 1.0;
    double total = 1.0;
    for (std::size_t k = 1; k < n; ++k) {
        double v = 0.0;
        for (std::size_t i = 0; i < k; ++i) v += x[i] * p(i, k);
        x[k] = v;
        total += v;
    }
    for (double& v : x) v /= total;
    return x;
}

} // namespace sisdmdp
