#ifndef WSKM_SYNTH_HPP
#define WSKM_SYNTH_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wskm/error.hpp"
#include "wskm/matrix.hpp"
#include "wskm/tags.hpp"

namespace wskm {

/// Self-contained splitmix64 stream. The generator is pinned here rather
/// than taken from <random> so fixtures can be reproduced from the algorithm
/// alone, in any language.
struct SplitMix64 {
    std::uint64_t state;

    explicit SplitMix64(std::uint64_t seed) : state(seed) {}

    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1): the high 53 bits scaled by 2^-53.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in (0, 1), never hitting either endpoint.
    double uniform_open() {
        return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52;
    }

    /// Bounded draw; the modulo bias is irrelevant at the sizes involved and
    /// keeping it avoids a rejection loop whose iteration count would depend
    /// on the stream.
    std::uint64_t below(std::uint64_t n) { return next() % n; }
};

/// Inverse of the standard normal CDF (Acklam's rational approximation,
/// |relative error| < 1.2e-9). Pure arithmetic in the central region; the
/// tails use sqrt/log.
inline double inverse_normal_cdf(double p) {
    static constexpr double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double dd[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                     2.445134137142996e+00, 3.754408661907416e+00};
    static constexpr double p_low = 0.02425;
    if (!(p > 0.0 && p < 1.0))
        throw InvalidArgument("inverse_normal_cdf: p must lie strictly in (0, 1)");
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    }
    if (p > 1.0 - p_low) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((dd[0] * q + dd[1]) * q + dd[2]) * q + dd[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

inline double sample_normal(SplitMix64& rng) { return inverse_normal_cdf(rng.uniform_open()); }

/// Configuration for the synthetic corpus generator. Total row count is
/// n_per_tag * #tags; o_fraction then decides how many of those rows carry
/// the O tag, the remainder is split as evenly as possible over the other
/// tags (earlier tags take the leftover).
struct SynthConfig {
    std::uint64_t seed = 0;
    std::size_t n_per_tag = 10;
    std::size_t dim = 2;
    std::vector<std::string> tags;               // tags[0] == "O"
    std::vector<std::vector<double>> tag_means;  // one mean per tag, each length dim
    double noise_std = 1.0;
    double o_fraction = 0.5;
    double label_fraction = 1.0;  // share of rows that keep their gold label
};

struct SynthData {
    Matrix x;
    std::vector<int> labels;  // kUnlabeled on rows that lost their label
    std::vector<int> gold;
};

/// Deterministic synthetic corpus. The draw order is frozen and documented:
///
///   1. gold tags: counts per tag as described on SynthConfig, laid out
///      grouped by tag and shuffled by one Fisher-Yates pass (i from n-1
///      down to 1, j = next() mod (i+1));
///   2. features: row by row in shuffled order, each coordinate
///      mean[tag][m] + noise_std * N(0,1), normals drawn via the inverse CDF;
///   3. labeled subset: a second Fisher-Yates pass over row indices on the
///      same stream; the first round(label_fraction * n) rows of that
///      permutation keep their gold label.
///
/// Identical configs therefore give bit-identical outputs. (The normal draws
/// go through libm's log/sqrt in the far tails, the one place where exact
/// bits could differ across C libraries.)
inline SynthData gen_synth(const SynthConfig& cfg) {
    if (cfg.tags.empty() || cfg.tags[0] != "O")
        throw InvalidArgument("gen_synth: tags[0] must be \"O\"");
    if (cfg.tag_means.size() != cfg.tags.size())
        throw InvalidArgument("gen_synth: need one mean per tag");
    for (const auto& mean : cfg.tag_means)
        if (mean.size() != cfg.dim)
            throw InvalidArgument("gen_synth: tag mean dimension does not match dim");
    if (!(cfg.noise_std > 0.0)) throw InvalidArgument("gen_synth: noise_std must be positive");
    if (!(cfg.o_fraction >= 0.0 && cfg.o_fraction <= 1.0))
        throw InvalidArgument("gen_synth: o_fraction outside [0, 1]");
    if (!(cfg.label_fraction >= 0.0 && cfg.label_fraction <= 1.0))
        throw InvalidArgument("gen_synth: label_fraction outside [0, 1]");
    if (cfg.n_per_tag == 0) throw InvalidArgument("gen_synth: n_per_tag must be positive");

    const std::size_t t_count = cfg.tags.size();
    const std::size_t n = cfg.n_per_tag * t_count;

    std::vector<std::size_t> counts(t_count, 0);
    counts[0] = static_cast<std::size_t>(
        std::llround(cfg.o_fraction * static_cast<double>(n)));
    if (t_count == 1) {
        counts[0] = n;
    } else {
        const std::size_t rest = n - counts[0];
        const std::size_t base = rest / (t_count - 1);
        const std::size_t extra = rest % (t_count - 1);
        for (std::size_t t = 1; t < t_count; ++t)
            counts[t] = base + (t - 1 < extra ? 1 : 0);
    }

    SynthData out;
    out.gold.reserve(n);
    for (std::size_t t = 0; t < t_count; ++t)
        out.gold.insert(out.gold.end(), counts[t], static_cast<int>(t));

    SplitMix64 rng(cfg.seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(out.gold[i], out.gold[j]);
    }

    out.x = Matrix(n, cfg.dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& mean = cfg.tag_means[static_cast<std::size_t>(out.gold[i])];
        for (std::size_t m = 0; m < cfg.dim; ++m)
            out.x(i, m) = mean[m] + cfg.noise_std * sample_normal(rng);
    }

    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(perm[i], perm[j]);
    }
    const std::size_t keep = static_cast<std::size_t>(
        std::llround(cfg.label_fraction * static_cast<double>(n)));
    out.labels.assign(n, kUnlabeled);
    for (std::size_t r = 0; r < keep && r < n; ++r)
        out.labels[perm[r]] = out.gold[perm[r]];
    return out;
}

}  // namespace wskm

#endif  // WSKM_SYNTH_HPP
