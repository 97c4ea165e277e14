#ifndef WSKM_SUBSPACE_HPP
#define WSKM_SUBSPACE_HPP

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "wskm/error.hpp"
#include "wskm/matrix.hpp"

namespace wskm {

/// Total, within-cluster and between-cluster scatter of a clustered dataset,
/// plus the sample mean they are centered on. With centroids produced by the
/// centroid update, s_t == s_w + s_b holds for hard and soft assignments.
struct ScatterTriple {
    Matrix s_t;
    Matrix s_w;
    Matrix s_b;
    std::vector<double> mean;
};

/// A learned linear subspace: d x p matrix whose columns are normalized so
/// that u^T s_t u = I, together with the ascending generalized eigenvalues
/// they correspond to.
struct Projection {
    Matrix u;
    std::vector<double> eigenvalues;

    static Projection identity(std::size_t d) {
        Projection p;
        p.u = Matrix::identity(d);
        return p;
    }

    /// First p standard basis directions; the starting point before the
    /// first eigensolve.
    static Projection basis(std::size_t d, std::size_t p) {
        Projection pr;
        pr.u = Matrix(d, p, 0.0);
        for (std::size_t j = 0; j < p && j < d; ++j) pr.u(j, j) = 1.0;
        return pr;
    }
};

namespace detail {

inline double frobenius(const Matrix& m) {
    double acc = 0.0;
    for (double v : m.data) acc += v * v;
    return std::sqrt(acc);
}

inline void accumulate_outer(Matrix& s, const double* v, double w, std::size_t d) {
    for (std::size_t p = 0; p < d; ++p) {
        double* row = s.row_ptr(p);
        const double wp = w * v[p];
        for (std::size_t q = 0; q < d; ++q) row[q] += wp * v[q];
    }
}

}  // namespace detail

/// Scatter matrices of `x` under responsibilities `a` and centroids `c`.
///
/// The centroids must come from the centroid update for this `a`; otherwise
/// the decomposition s_t = s_w + s_b fails and the residual check throws.
/// The check is scaled by ||s_t||_F so it is insensitive to data magnitude.
inline ScatterTriple compute_scatter(const Matrix& x, const Matrix& a, const Matrix& c) {
    if (x.rows != a.rows || c.rows != a.cols || c.cols != x.cols)
        throw InvalidArgument("compute_scatter: inconsistent shapes");
    const std::size_t n = x.rows, d = x.cols, k = c.rows;
    if (n == 0) throw InvalidArgument("compute_scatter: empty dataset");

    ScatterTriple st;
    st.mean.assign(d, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row_ptr(i);
        for (std::size_t m = 0; m < d; ++m) st.mean[m] += xi[m];
    }
    for (std::size_t m = 0; m < d; ++m) st.mean[m] /= static_cast<double>(n);

    st.s_t = Matrix(d, d, 0.0);
    std::vector<double> centered(d);
    for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.row_ptr(i);
        for (std::size_t m = 0; m < d; ++m) centered[m] = xi[m] - st.mean[m];
        detail::accumulate_outer(st.s_t, centered.data(), 1.0, d);
    }

    st.s_w = Matrix(d, d, 0.0);
    std::vector<double> mass(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        const double* cj = c.row_ptr(j);
        for (std::size_t i = 0; i < n; ++i) {
            const double w = a(i, j);
            if (w == 0.0) continue;
            mass[j] += w;
            const double* xi = x.row_ptr(i);
            for (std::size_t m = 0; m < d; ++m) centered[m] = xi[m] - cj[m];
            detail::accumulate_outer(st.s_w, centered.data(), w, d);
        }
    }

    st.s_b = Matrix(d, d, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        const double* cj = c.row_ptr(j);
        for (std::size_t m = 0; m < d; ++m) centered[m] = cj[m] - st.mean[m];
        detail::accumulate_outer(st.s_b, centered.data(), mass[j], d);
    }

    Matrix resid(d, d, 0.0);
    for (std::size_t idx = 0; idx < resid.data.size(); ++idx)
        resid.data[idx] = st.s_t.data[idx] - st.s_w.data[idx] - st.s_b.data[idx];
    const double scale = std::max(detail::frobenius(st.s_t), 1.0);
    if (detail::frobenius(resid) > 1e-6 * scale)
        throw InvalidArgument(
            "compute_scatter: scatter identity violated; centroids are not the "
            "responsibility-weighted means of the assignments");
    return st;
}

/// Dimension of the discriminative subspace: min(d, k-1). With fewer than two
/// prototypes no discriminative direction exists.
inline std::size_t projection_dim(std::size_t k, std::size_t d) {
    if (k < 2)
        throw InvalidArgument("projection_dim: need at least 2 prototypes, got " +
                              std::to_string(k));
    return std::min(d, k - 1);
}

/// Solves s_w u = s_t u diag(lambda) for the p smallest generalized
/// eigenvalues of the symmetric pair (s_w, s_t).
///
/// Route: factor s_t + ridge*I = L L^T, eigendecompose L^-1 s_w L^-T, map the
/// eigenvectors back through L^-T and rescale each column against the
/// unregularized s_t so u^T s_t u = I by construction. When the factorization
/// fails the ridge is escalated by decades from 1e-10*tr(s_t)/d up to
/// 1e-4*tr(s_t)/d before giving up.
///
/// Columns are sign-canonicalized (largest-magnitude entry positive), making
/// the result a deterministic function of its inputs. Columns that fall in
/// the numerical null space of s_t cannot satisfy the dispersion constraint
/// and are dropped, so the output may have fewer than p columns on
/// rank-deficient inputs.
inline Projection solve_projection(const Matrix& s_w, const Matrix& s_t, std::size_t p,
                                   double ridge = 0.0) {
    if (s_w.rows != s_w.cols || s_t.rows != s_t.cols || s_w.rows != s_t.rows)
        throw InvalidArgument("solve_projection: scatter matrices must be square and equal size");
    const std::size_t d = s_t.rows;
    if (p == 0 || p > d)
        throw InvalidArgument("solve_projection: p = " + std::to_string(p) +
                              " outside [1, " + std::to_string(d) + "]");

    using Emat = Eigen::MatrixXd;
    Emat w(d, d), t(d, d);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s_w(i, j);
            t(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s_t(i, j);
        }

    const double trace_t = t.trace();
    const double ridge_unit = trace_t > 0.0 ? trace_t / static_cast<double>(d) : 1.0;
    std::vector<double> ladder;
    ladder.push_back(ridge);
    if (ridge == 0.0)
        for (double r = 1e-10; r <= 1e-4 * 1.0000001; r *= 10.0) ladder.push_back(r * ridge_unit);

    Eigen::LLT<Emat> llt;
    bool ok = false;
    for (double r : ladder) {
        llt.compute(t + r * Emat::Identity(static_cast<Eigen::Index>(d),
                                           static_cast<Eigen::Index>(d)));
        if (llt.info() == Eigen::Success) {
            ok = true;
            break;
        }
    }
    if (!ok)
        throw Error("solve_projection: total scatter not factorizable even with ridge " +
                    std::to_string(1e-4 * ridge_unit) + " (trace " + std::to_string(trace_t) +
                    "); data dispersion is degenerate");

    const Emat l = llt.matrixL();
    Emat m = l.triangularView<Eigen::Lower>().solve(w);
    m = l.triangularView<Eigen::Lower>().solve(m.transpose()).transpose();
    m = 0.5 * (m + m.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Emat> es(m);
    if (es.info() != Eigen::Success)
        throw Error("solve_projection: eigendecomposition failed");

    // eigenvalues ascending; keep the p smallest
    Emat v = es.eigenvectors().leftCols(static_cast<Eigen::Index>(p));
    Emat u = l.transpose().triangularView<Eigen::Upper>().solve(v);

    Projection proj;
    proj.u = Matrix(d, 0);
    std::vector<std::vector<double>> cols;
    for (std::size_t j = 0; j < p; ++j) {
        Eigen::VectorXd uj = u.col(static_cast<Eigen::Index>(j));
        // v was unit-length in the whitened space, so uj^T (s_t + ridge I) uj = 1
        // exactly; q measures how much of that lands on the true s_t.
        const double q = uj.dot(t * uj);
        if (!(q > 1e-8)) continue;  // null direction of s_t, dispersion constraint unsatisfiable
        uj /= std::sqrt(q);
        // sign convention: largest-magnitude entry positive
        Eigen::Index arg = 0;
        uj.cwiseAbs().maxCoeff(&arg);
        if (uj(arg) < 0.0) uj = -uj;
        std::vector<double> col(d);
        for (std::size_t i = 0; i < d; ++i) col[i] = uj(static_cast<Eigen::Index>(i));
        cols.push_back(std::move(col));
        proj.eigenvalues.push_back(es.eigenvalues()(static_cast<Eigen::Index>(j)));
    }
    proj.u = Matrix(d, cols.size(), 0.0);
    for (std::size_t j = 0; j < cols.size(); ++j)
        for (std::size_t i = 0; i < d; ++i) proj.u(i, j) = cols[j][i];
    if (proj.u.cols == 0)
        throw Error("solve_projection: every requested direction lies in the null space "
                    "of the total scatter");
    return proj;
}

/// Projects rows of `x` through `u`: returns x * u (row i becomes u^T x_i).
inline Matrix project_rows(const Matrix& x, const Matrix& u) {
    if (x.cols != u.rows)
        throw InvalidArgument("project_rows: " + shape_str(x) + " incompatible with " +
                              shape_str(u));
    Matrix out(x.rows, u.cols, 0.0);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row_ptr(i);
        double* oi = out.row_ptr(i);
        for (std::size_t m = 0; m < x.cols; ++m) {
            const double v = xi[m];
            if (v == 0.0) continue;
            const double* um = u.row_ptr(m);
            for (std::size_t j = 0; j < u.cols; ++j) oi[j] += v * um[j];
        }
    }
    return out;
}

}  // namespace wskm

#endif  // WSKM_SUBSPACE_HPP
