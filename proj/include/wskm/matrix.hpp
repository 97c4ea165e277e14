#ifndef WSKM_MATRIX_HPP
#define WSKM_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <string>
#include <vector>

#include "wskm/error.hpp"

namespace wskm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Dense row-major matrix of IEEE binary64 values.
///
/// This is the single container shared by the whole library: datapoints
/// (n x d), centroids (k x d), distances (n x k), responsibilities (n x k)
/// and projections (d x p) are all plain instances of it. Everything is
/// real64; there is no mixed precision anywhere, which keeps run-to-run
/// determinism a non-issue.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major, size rows * cols

    Matrix() = default;

    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    static Matrix from_rows(std::initializer_list<std::initializer_list<double>> init) {
        Matrix m;
        m.rows = init.size();
        m.cols = init.size() ? init.begin()->size() : 0;
        m.data.reserve(m.rows * m.cols);
        for (const auto& row : init) {
            if (row.size() != m.cols)
                throw InvalidArgument("from_rows: ragged initializer");
            m.data.insert(m.data.end(), row.begin(), row.end());
        }
        return m;
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n, 0.0);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    const double* row_ptr(std::size_t i) const { return data.data() + i * cols; }
    double* row_ptr(std::size_t i) { return data.data() + i * cols; }

    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    bool all_finite() const {
        for (double v : data)
            if (!std::isfinite(v)) return false;
        return true;
    }
};

inline std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

/// Squared Euclidean distances between every row of `x` and every row of `c`.
///
/// D[i][j] = sum_m (x[i][m] - c[j][m])^2, accumulated left to right. The
/// explicit squared-difference sum is used instead of the norm expansion
/// ||x||^2 - 2<x,c> + ||c||^2 so near-duplicate points cannot suffer
/// catastrophic cancellation.
inline Matrix pairwise_sq_dist(const Matrix& x, const Matrix& c) {
    if (x.cols != c.cols)
        throw InvalidArgument("pairwise_sq_dist: column mismatch " + shape_str(x) +
                              " vs " + shape_str(c));
    Matrix d(x.rows, c.rows);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row_ptr(i);
        for (std::size_t j = 0; j < c.rows; ++j) {
            const double* cj = c.row_ptr(j);
            double acc = 0.0;
            for (std::size_t m = 0; m < x.cols; ++m) {
                const double diff = xi[m] - cj[m];
                acc += diff * diff;
            }
            d(i, j) = acc;
        }
    }
    return d;
}

/// Value of the clustering objective <A, D>, optionally with the negative
/// Shannon entropy regularizer <A, log A> - <A, 1>.
///
/// Entries with a[i][j] = 0 contribute exactly zero (0 log 0 = 0 by the
/// standard limit) and are skipped, so +inf sentinels in `d` at
/// zero-responsibility positions do not poison the sum. Responsibilities
/// below 1e-300 are treated as exact zeros in the entropy term.
inline double clustering_objective(const Matrix& a, const Matrix& d, bool with_entropy) {
    if (!a.same_shape(d))
        throw InvalidArgument("clustering_objective: shape mismatch " + shape_str(a) +
                              " vs " + shape_str(d));
    double obj = 0.0;
    double ent = 0.0;
    double mass = 0.0;
    for (std::size_t idx = 0; idx < a.data.size(); ++idx) {
        const double aij = a.data[idx];
        if (aij < 0.0)
            throw InvalidArgument("clustering_objective: negative responsibility");
        if (aij == 0.0) continue;
        obj += aij * d.data[idx];
        if (with_entropy) {
            mass += aij;
            if (aij >= 1e-300) ent += aij * std::log(aij);
        }
    }
    return with_entropy ? obj + ent - mass : obj;
}

}  // namespace wskm

#endif  // WSKM_MATRIX_HPP
