#ifndef WSKM_ESTEP_HPP
#define WSKM_ESTEP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "wskm/error.hpp"
#include "wskm/matrix.hpp"
#include "wskm/tags.hpp"

namespace wskm {

/// Sentinel for "no allowed prototype in this group".
inline constexpr int kNoProto = -1;

/// Assignment step of hard k-means under a supervision mask: each row is
/// one-hot at its nearest allowed prototype, ties broken by lowest index.
inline Matrix hard_assign(const Matrix& d, const SupervisionMask& z) {
    if (d.rows != z.rows || d.cols != z.cols)
        throw InvalidArgument("hard_assign: mask shape mismatch");
    Matrix a(d.rows, d.cols, 0.0);
    for (std::size_t i = 0; i < d.rows; ++i) {
        int best = kNoProto;
        double best_d = kInf;
        for (std::size_t j = 0; j < d.cols; ++j) {
            if (!z.allowed(i, j)) continue;
            if (best == kNoProto || d(i, j) < best_d) {
                best = static_cast<int>(j);
                best_d = d(i, j);
            }
        }
        if (best == kNoProto)
            throw FeasibilityError("hard_assign: row " + std::to_string(i) +
                                   " allows no prototype");
        a(i, static_cast<std::size_t>(best)) = 1.0;
    }
    return a;
}

/// Assignment step of entropy-regularized (soft) k-means under a mask:
/// a masked softmax of -D, computed with a per-row shift for stability.
inline Matrix soft_assign(const Matrix& d, const SupervisionMask& z) {
    if (d.rows != z.rows || d.cols != z.cols)
        throw InvalidArgument("soft_assign: mask shape mismatch");
    Matrix a(d.rows, d.cols, 0.0);
    for (std::size_t i = 0; i < d.rows; ++i) {
        double lo = kInf;
        for (std::size_t j = 0; j < d.cols; ++j)
            if (z.allowed(i, j)) lo = std::min(lo, d(i, j));
        if (!(lo < kInf))
            throw FeasibilityError("soft_assign: row " + std::to_string(i) +
                                   " allows no prototype");
        double sum = 0.0;
        for (std::size_t j = 0; j < d.cols; ++j) {
            if (!z.allowed(i, j)) continue;
            const double e = std::exp(lo - d(i, j));
            a(i, j) = e;
            sum += e;
        }
        for (std::size_t j = 0; j < d.cols; ++j) a(i, j) /= sum;
    }
    return a;
}

/// Per-row minima of the distance matrix over the two prototype groups
/// (O prototypes vs everything else), restricted to mask-allowed entries.
/// Rows where a group has no allowed prototype get +inf and kNoProto.
struct ContractedDistances {
    std::vector<double> d_o;
    std::vector<double> d_others;
    std::vector<int> argmin_o;
    std::vector<int> argmin_others;
};

/// Contracts each prototype group into a single node, keeping per row only
/// the cheapest allowed edge into each group.
inline ContractedDistances contract_o_groups(const Matrix& d, const SupervisionMask& z,
                                             const TagMap& phi) {
    if (phi.k() != d.cols)
        throw InvalidArgument("contract_o_groups: tag map has " + std::to_string(phi.k()) +
                              " prototypes, distances have " + std::to_string(d.cols));
    if (d.rows != z.rows || d.cols != z.cols)
        throw InvalidArgument("contract_o_groups: mask shape mismatch");
    ContractedDistances cd;
    cd.d_o.assign(d.rows, kInf);
    cd.d_others.assign(d.rows, kInf);
    cd.argmin_o.assign(d.rows, kNoProto);
    cd.argmin_others.assign(d.rows, kNoProto);
    for (std::size_t i = 0; i < d.rows; ++i) {
        for (std::size_t j = 0; j < d.cols; ++j) {
            if (!z.allowed(i, j)) continue;
            if (phi.is_o(j)) {
                if (d(i, j) < cd.d_o[i]) {
                    cd.d_o[i] = d(i, j);
                    cd.argmin_o[i] = static_cast<int>(j);
                }
            } else {
                if (d(i, j) < cd.d_others[i]) {
                    cd.d_others[i] = d(i, j);
                    cd.argmin_others[i] = static_cast<int>(j);
                }
            }
        }
    }
    return cd;
}

/// Expected O-tag ratio together with the integral row budget it induces.
/// Non-integral n * r_o rounds to the nearest count, halves away from zero.
struct RatioBudget {
    double r_o = 0.0;
    std::int64_t budget = 0;

    static RatioBudget from_ratio(std::size_t n, double r_o) {
        if (!(r_o >= 0.0 && r_o <= 1.0))
            throw InvalidArgument("RatioBudget: ratio " + std::to_string(r_o) +
                                  " outside [0, 1]");
        RatioBudget rb;
        rb.r_o = r_o;
        rb.budget = std::llround(static_cast<double>(n) * r_o);
        return rb;
    }

    static RatioBudget from_count(std::size_t n, std::int64_t budget) {
        RatioBudget rb;
        rb.budget = budget;
        rb.r_o = n ? static_cast<double>(budget) / static_cast<double>(n) : 0.0;
        return rb;
    }
};

namespace detail {

struct ForcedCounts {
    std::size_t forced_o = 0;      // rows with no allowed non-O prototype
    std::size_t forced_non_o = 0;  // rows with no allowed O prototype
};

inline ForcedCounts count_forced(const SupervisionMask& z, const TagMap& phi) {
    ForcedCounts fc;
    for (std::size_t i = 0; i < z.rows; ++i) {
        bool has_o = false, has_other = false;
        for (std::size_t j = 0; j < z.cols; ++j) {
            if (!z.allowed(i, j)) continue;
            (phi.is_o(j) ? has_o : has_other) = true;
        }
        if (!has_o && !has_other)
            throw FeasibilityError("row " + std::to_string(i) + " allows no prototype");
        if (!has_other) ++fc.forced_o;
        if (!has_o) ++fc.forced_non_o;
    }
    return fc;
}

inline void check_budget(const ForcedCounts& fc, std::int64_t budget, std::size_t n) {
    const auto lo = static_cast<std::int64_t>(fc.forced_o);
    const auto hi = static_cast<std::int64_t>(n - fc.forced_non_o);
    if (budget < lo || budget > hi)
        throw FeasibilityError(
            "infeasible O budget " + std::to_string(budget) + ": " +
            std::to_string(fc.forced_o) + " rows are forced into the O group and " +
            std::to_string(fc.forced_non_o) + " rows are forced out of it, so the budget "
            "must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

}  // namespace detail

/// Hard assignment step under the O-ratio constraint.
///
/// Contracts the prototypes into the O group and the rest, then fills the
/// budget with the rows whose penalized distance d' = d_o - d_others is
/// smallest; remaining rows go to their cheapest non-O prototype. Rows that
/// can only reach one group carry an infinite penalty of the matching sign
/// and are always respected. d' ties break on the lower row index.
inline Matrix hard_assign_ratio(const Matrix& d, const SupervisionMask& z, const TagMap& phi,
                                const RatioBudget& rb) {
    const ContractedDistances cd = contract_o_groups(d, z, phi);
    const std::size_t n = d.rows;

    detail::ForcedCounts fc;
    std::vector<double> penalty(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool no_o = cd.argmin_o[i] == kNoProto;
        const bool no_other = cd.argmin_others[i] == kNoProto;
        if (no_o && no_other)
            throw FeasibilityError("hard_assign_ratio: row " + std::to_string(i) +
                                   " allows no prototype");
        if (no_o) {
            ++fc.forced_non_o;
            penalty[i] = kInf;
        } else if (no_other) {
            ++fc.forced_o;
            penalty[i] = -kInf;
        } else {
            penalty[i] = cd.d_o[i] - cd.d_others[i];
        }
    }
    detail::check_budget(fc, rb.budget, n);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (penalty[a] != penalty[b]) return penalty[a] < penalty[b];
        return a < b;
    });

    Matrix a(d.rows, d.cols, 0.0);
    for (std::size_t pos = 0; pos < n; ++pos) {
        const std::size_t i = order[pos];
        const bool to_o = pos < static_cast<std::size_t>(rb.budget);
        const int j = to_o ? cd.argmin_o[i] : cd.argmin_others[i];
        a(i, static_cast<std::size_t>(j)) = 1.0;
    }
    return a;
}

/// KL projection onto {rows sum to 1} intersected with the mask support:
/// zero the forbidden entries and renormalize each row.
inline Matrix bregman_project_simplex(const Matrix& a, const SupervisionMask& z) {
    if (a.rows != z.rows || a.cols != z.cols)
        throw InvalidArgument("bregman_project_simplex: mask shape mismatch");
    Matrix out(a.rows, a.cols, 0.0);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double mass = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) {
            const double v = a(i, j);
            if (v < 0.0)
                throw InvalidArgument("bregman_project_simplex: negative entry");
            if (z.allowed(i, j)) mass += v;
        }
        if (!(mass > 0.0))
            throw FeasibilityError("bregman_project_simplex: row " + std::to_string(i) +
                                   " has zero allowed mass");
        for (std::size_t j = 0; j < a.cols; ++j)
            if (z.allowed(i, j)) out(i, j) = a(i, j) / mass;
    }
    return out;
}

/// Total mass sitting on O prototypes, accumulated in row order.
inline double o_block_mass(const Matrix& a, const TagMap& phi) {
    double mass = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i)
        for (int j : phi.o_prototypes) mass += a(i, static_cast<std::size_t>(j));
    return mass;
}

/// KL projection onto {O-block mass equals the budget} intersected with the
/// mask support: scale the allowed O-block entries to hit the budget exactly,
/// leave non-O entries untouched apart from masking.
inline Matrix bregman_project_ratio(const Matrix& a, const SupervisionMask& z,
                                    const TagMap& phi, const RatioBudget& rb) {
    if (a.rows != z.rows || a.cols != z.cols)
        throw InvalidArgument("bregman_project_ratio: mask shape mismatch");
    if (phi.k() != a.cols)
        throw InvalidArgument("bregman_project_ratio: tag map size mismatch");
    Matrix masked(a.rows, a.cols, 0.0);
    double mass = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) {
            const double v = a(i, j);
            if (v < 0.0)
                throw InvalidArgument("bregman_project_ratio: negative entry");
            if (!z.allowed(i, j)) continue;
            masked(i, j) = v;
            if (phi.is_o(j)) mass += v;
        }
    }
    if (!(mass > 0.0)) {
        if (rb.budget > 0)
            throw FeasibilityError("bregman_project_ratio: zero O-block mass with budget " +
                                   std::to_string(rb.budget));
        // budget 0 and no mass: nothing to scale
        return masked;
    }
    const double scale = static_cast<double>(rb.budget) / mass;
    for (std::size_t i = 0; i < a.rows; ++i)
        for (int j : phi.o_prototypes) masked(i, static_cast<std::size_t>(j)) *= scale;
    return masked;
}

/// Result of the iterative Bregman projection loop. `converged` is false when
/// the cycle cap was hit first; the returned matrix is still row-stochastic
/// because the loop always stops right after a simplex projection.
struct SoftRatioResult {
    Matrix a;
    std::size_t cycles = 0;
    double row_sum_residual = 0.0;
    double ratio_residual = 0.0;  // |o_mass - budget| / n
    bool converged = false;
};

/// Largest deviation of a row sum from 1.
inline double max_row_sum_residual(const Matrix& a) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < a.cols; ++j) s += a(i, j);
        worst = std::max(worst, std::abs(s - 1.0));
    }
    return worst;
}

/// Soft assignment step under the O-ratio constraint, solved by alternating
/// KL projections between the row-stochastic set and the budget set,
/// starting from the masked Gibbs kernel exp(-D).
inline SoftRatioResult soft_assign_ratio(const Matrix& d, const SupervisionMask& z,
                                         const TagMap& phi, const RatioBudget& rb,
                                         std::size_t max_iters = 100, double tol = 1e-9) {
    if (d.rows != z.rows || d.cols != z.cols)
        throw InvalidArgument("soft_assign_ratio: mask shape mismatch");
    if (max_iters == 0)
        throw InvalidArgument("soft_assign_ratio: max_iters must be positive");
    const std::size_t n = d.rows;
    detail::check_budget(detail::count_forced(z, phi), rb.budget, n);

    // Masked exp(-D) with a per-row shift; the shift is a positive row
    // scaling and is absorbed by the first simplex projection.
    Matrix a(d.rows, d.cols, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double lo = kInf;
        for (std::size_t j = 0; j < d.cols; ++j)
            if (z.allowed(i, j)) lo = std::min(lo, d(i, j));
        for (std::size_t j = 0; j < d.cols; ++j)
            if (z.allowed(i, j)) a(i, j) = std::exp(lo - d(i, j));
    }

    SoftRatioResult res;
    while (res.cycles < max_iters) {
        ++res.cycles;
        a = bregman_project_simplex(a, z);
        res.ratio_residual = std::abs(o_block_mass(a, phi) - static_cast<double>(rb.budget)) /
                             static_cast<double>(n);
        if (res.ratio_residual <= tol) {
            res.converged = true;
            break;
        }
        if (res.cycles < max_iters) a = bregman_project_ratio(a, z, phi, rb);
    }
    res.row_sum_residual = max_row_sum_residual(a);
    res.a = std::move(a);
    return res;
}

}  // namespace wskm

#endif  // WSKM_ESTEP_HPP
