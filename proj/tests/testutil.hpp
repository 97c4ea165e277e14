#ifndef WSKM_TESTS_TESTUTIL_HPP
#define WSKM_TESTS_TESTUTIL_HPP

// Shared helpers for the test suites: a seeded generator for random
// instances plus brute-force oracles kept deliberately independent of the
// library code paths they are used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "wskm/matrix.hpp"
#include "wskm/synth.hpp"
#include "wskm/tags.hpp"

namespace testutil {

struct Rng {
    wskm::SplitMix64 sm;

    explicit Rng(std::uint64_t seed) : sm(seed) {}

    double uniform(double lo, double hi) { return lo + (hi - lo) * sm.uniform(); }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(sm.below(n)); }
    bool coin(double p) { return sm.uniform() < p; }
};

inline wskm::Matrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, double lo,
                                  double hi) {
    wskm::Matrix m(rows, cols);
    for (double& v : m.data) v = rng.uniform(lo, hi);
    return m;
}

/// Random mask whose rows are never empty.
inline wskm::SupervisionMask random_mask(Rng& rng, std::size_t n, std::size_t k,
                                         double keep_prob) {
    wskm::SupervisionMask z(n, k, 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) z.set(i, j, rng.coin(keep_prob));
        if (z.row_sum(i) == 0) z.set(i, rng.below(k), true);
    }
    return z;
}

/// Random tag map over k prototypes with `o_count` O-prototypes placed at
/// random positions; every other prototype owns its own tag.
inline wskm::TagMap random_tag_map(Rng& rng, std::size_t k, std::size_t o_count) {
    std::vector<std::size_t> idx(k);
    for (std::size_t j = 0; j < k; ++j) idx[j] = j;
    for (std::size_t i = k - 1; i > 0; --i) std::swap(idx[i], idx[rng.below(i + 1)]);
    std::vector<int> proto_tag(k, -1);
    for (std::size_t r = 0; r < o_count; ++r) proto_tag[idx[r]] = 0;
    std::vector<std::string> tags{"O"};
    for (std::size_t r = o_count; r < k; ++r) {
        tags.push_back("I-T" + std::to_string(r - o_count));
        proto_tag[idx[r]] = static_cast<int>(tags.size()) - 1;
    }
    return wskm::TagMap::from_proto_tags(std::move(tags), std::move(proto_tag));
}

/// Exhaustive oracle for the ratio-constrained hard assignment step:
/// enumerates every masked one-hot assignment, buckets objectives by the
/// number of rows in the O group, and keeps the per-bucket minimum.
/// Objectives accumulate in ascending row order, one term per row.
inline std::vector<double> ratio_oracle_best_by_budget(const wskm::Matrix& d,
                                                       const wskm::SupervisionMask& z,
                                                       const wskm::TagMap& phi) {
    const std::size_t n = d.rows, k = d.cols;
    std::vector<double> best(n + 1, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> choice(n, 0);
    while (true) {
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) ok = z.allowed(i, choice[i]);
        if (ok) {
            double obj = 0.0;
            std::size_t o_rows = 0;
            for (std::size_t i = 0; i < n; ++i) {
                obj += d(i, choice[i]);
                if (phi.is_o(choice[i])) ++o_rows;
            }
            best[o_rows] = std::min(best[o_rows], obj);
        }
        std::size_t pos = 0;
        while (pos < n && ++choice[pos] == k) choice[pos++] = 0;
        if (pos == n) break;
    }
    return best;
}

/// Generalized KL divergence KL[a | b] = sum a log(a/b) - sum a + sum b with
/// the 0 log 0 = 0 convention. Entries where b = 0 require a = 0.
inline double generalized_kl(const wskm::Matrix& a, const wskm::Matrix& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double ai = a.data[i], bi = b.data[i];
        acc += bi - ai;
        if (ai > 0.0) acc += ai * std::log(ai / bi);
    }
    return acc;
}

/// Ward cost of merging two explicit member lists, computed from scratch.
inline double oracle_ward_cost(const wskm::Matrix& p, const std::vector<std::size_t>& a,
                               const std::vector<std::size_t>& b) {
    const std::size_t d = p.cols;
    std::vector<double> ma(d, 0.0), mb(d, 0.0);
    for (std::size_t r : a)
        for (std::size_t m = 0; m < d; ++m) ma[m] += p(r, m);
    for (std::size_t r : b)
        for (std::size_t m = 0; m < d; ++m) mb[m] += p(r, m);
    double sq = 0.0;
    for (std::size_t m = 0; m < d; ++m) {
        const double diff = ma[m] / static_cast<double>(a.size()) -
                            mb[m] / static_cast<double>(b.size());
        sq += diff * diff;
    }
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    return na * nb / (na + nb) * sq;
}

}  // namespace testutil

#endif  // WSKM_TESTS_TESTUTIL_HPP
