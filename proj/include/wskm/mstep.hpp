#ifndef WSKM_MSTEP_HPP
#define WSKM_MSTEP_HPP

#include <string>
#include <vector>

#include "wskm/error.hpp"
#include "wskm/matrix.hpp"

namespace wskm {

/// Responsibility mass below this is an empty cluster (soft assignments can
/// leave stray denormals on forbidden-ish prototypes).
inline constexpr double kEmptyClusterMass = 1e-12;

/// Centroid update: each centroid becomes the responsibility-weighted mean of
/// the data. Clusters with (numerically) zero mass keep their previous
/// centroid, so the prototype count never shrinks mid-run.
///
/// The same update is optimal whether distances were measured in the original
/// or a projected space, which is why no projection argument exists here.
inline Matrix update_centroids(const Matrix& x, const Matrix& a, const Matrix& prev_c) {
    if (x.rows != a.rows)
        throw InvalidArgument("update_centroids: rows mismatch " + shape_str(x) + " vs " +
                              shape_str(a));
    if (prev_c.rows != a.cols || prev_c.cols != x.cols)
        throw InvalidArgument("update_centroids: centroid shape " + shape_str(prev_c) +
                              " does not match");
    const std::size_t k = a.cols;
    const std::size_t ddim = x.cols;
    std::vector<double> mass(k, 0.0);
    Matrix c(k, ddim, 0.0);
    // fixed row-order accumulation keeps the result independent of any
    // scheduling; rows are visited once, ascending
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.row_ptr(i);
        for (std::size_t j = 0; j < k; ++j) {
            const double w = a(i, j);
            if (w == 0.0) continue;
            mass[j] += w;
            double* cj = c.row_ptr(j);
            for (std::size_t m = 0; m < ddim; ++m) cj[m] += w * xi[m];
        }
    }
    for (std::size_t j = 0; j < k; ++j) {
        if (mass[j] < kEmptyClusterMass) {
            for (std::size_t m = 0; m < ddim; ++m) c(j, m) = prev_c(j, m);
        } else {
            for (std::size_t m = 0; m < ddim; ++m) c(j, m) /= mass[j];
        }
    }
    return c;
}

}  // namespace wskm

#endif  // WSKM_MSTEP_HPP
