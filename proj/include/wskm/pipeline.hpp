#ifndef WSKM_PIPELINE_HPP
#define WSKM_PIPELINE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "wskm/error.hpp"
#include "wskm/estep.hpp"
#include "wskm/init.hpp"
#include "wskm/matrix.hpp"
#include "wskm/mstep.hpp"
#include "wskm/subspace.hpp"
#include "wskm/tags.hpp"

namespace wskm {

/// Supervision mask from partial labels: a labeled row may only use the
/// prototypes of its tag, an unlabeled row may use all of them.
inline SupervisionMask build_supervision_mask(const std::vector<int>& labels,
                                              const TagMap& phi) {
    SupervisionMask z(labels.size(), phi.k(), 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int t = labels[i];
        if (t == kUnlabeled) {
            for (std::size_t j = 0; j < phi.k(); ++j) z.set(i, j, true);
        } else {
            if (t < 0 || static_cast<std::size_t>(t) >= phi.tag_count())
                throw InvalidArgument("build_supervision_mask: row " + std::to_string(i) +
                                      " carries unknown tag index " + std::to_string(t));
            for (std::size_t j = 0; j < phi.k(); ++j)
                z.set(i, j, phi.proto_tag[j] == t);
        }
    }
    return z;
}

struct FitConfig {
    enum class Variant { hard, soft };

    Variant variant = Variant::hard;
    std::optional<double> ratio;     // expected O-tag ratio r_O, if supplied
    std::size_t o_prototypes = 10;   // used when the tag map is built from a tag set
    std::size_t acs_iters = 10;
    bool use_subspace = true;
    std::size_t bregman_iters = 100;
    double bregman_tol = 1e-9;
    double ridge = 0.0;              // starting ridge for the eigensolve
};

struct TraceEntry {
    std::size_t iter;           // 1-based round index
    double objective;           // clustering objective after the round
    double row_sum_residual;
    double ratio_residual;
};

struct Model {
    Matrix centroids;            // k x d, original space
    Projection projection;       // identity when subspace selection is off
    TagMap tag_map;
    std::vector<TraceEntry> trace;
};

/// Fine-tunes prototypes on a partially labeled dataset by alternate convex
/// search: assignment step, centroid step, then (optionally) the subspace
/// step, in that order, for `acs_iters` rounds.
///
/// Distances in the assignment step are measured in the current subspace;
/// the centroid step always runs in the original space (it is invariant to
/// the projection). The whole loop makes no random draws: identical inputs
/// give bit-identical models.
inline Model fit(const Matrix& x, const std::vector<int>& labels, const TagMap& phi,
                 const FitConfig& cfg) {
    const std::size_t n = x.rows, d = x.cols, k = phi.k();
    if (labels.size() != n) throw InvalidArgument("fit: label count does not match rows");
    if (n == 0) throw InvalidArgument("fit: empty dataset");

    const SupervisionMask z = build_supervision_mask(labels, phi);

    std::optional<RatioBudget> budget;
    if (cfg.ratio) {
        budget = RatioBudget::from_ratio(n, *cfg.ratio);
        detail::check_budget(detail::count_forced(z, phi), budget->budget, n);
    }

    Model model;
    model.tag_map = phi;
    model.centroids = init_prototypes(x, labels, phi);
    const std::size_t p_request = cfg.use_subspace ? projection_dim(k, d) : d;
    model.projection = cfg.use_subspace ? Projection::basis(d, p_request)
                                        : Projection::identity(d);

    Matrix dist = pairwise_sq_dist(project_rows(x, model.projection.u),
                                   project_rows(model.centroids, model.projection.u));

    for (std::size_t round = 1; round <= cfg.acs_iters; ++round) {
        // assignment step
        Matrix a;
        double row_res = 0.0, ratio_res = 0.0;
        if (cfg.variant == FitConfig::Variant::hard) {
            a = budget ? hard_assign_ratio(dist, z, phi, *budget) : hard_assign(dist, z);
        } else if (budget) {
            SoftRatioResult sr =
                soft_assign_ratio(dist, z, phi, *budget, cfg.bregman_iters, cfg.bregman_tol);
            a = std::move(sr.a);
            row_res = sr.row_sum_residual;
            ratio_res = sr.ratio_residual;
        } else {
            a = soft_assign(dist, z);
            row_res = max_row_sum_residual(a);
        }

        // centroid step, original space
        model.centroids = update_centroids(x, a, model.centroids);

        // subspace step
        if (cfg.use_subspace) {
            const ScatterTriple sc = compute_scatter(x, a, model.centroids);
            Projection proj = solve_projection(sc.s_w, sc.s_t, p_request, cfg.ridge);
            // degenerate between-cluster scatter cannot support a direction;
            // such eigenvalues sit at 1 and their directions are dropped
            std::size_t p_eff = 0;
            while (p_eff < proj.eigenvalues.size() && proj.eigenvalues[p_eff] < 1.0 - 1e-10)
                ++p_eff;
            if (p_eff > 0 && p_eff < proj.u.cols) {
                Matrix trimmed(proj.u.rows, p_eff, 0.0);
                for (std::size_t i = 0; i < proj.u.rows; ++i)
                    for (std::size_t j = 0; j < p_eff; ++j) trimmed(i, j) = proj.u(i, j);
                proj.u = std::move(trimmed);
                proj.eigenvalues.resize(p_eff);
            }
            if (p_eff > 0) model.projection = std::move(proj);
            // p_eff == 0: clusters collapsed onto the mean; keep the old subspace
        }

        dist = pairwise_sq_dist(project_rows(x, model.projection.u),
                                project_rows(model.centroids, model.projection.u));
        model.trace.push_back({round,
                               clustering_objective(a, dist,
                                                    cfg.variant == FitConfig::Variant::soft),
                               row_res, ratio_res});
    }
    return model;
}

/// Builds the tag map for a named tag set and runs `fit`.
///
/// The O tag receives `cfg.o_prototypes` prototypes on the lowest indices,
/// every other tag one prototype — except that the O prototype count is
/// clamped to the number of labeled O rows, since initialization needs one
/// labeled row per prototype and sparse supports often cannot feed ten.
inline Model fit_with_tag_set(const Matrix& x, const std::vector<int>& labels,
                              const std::vector<std::string>& tag_names, const FitConfig& cfg) {
    std::size_t labeled_o = 0;
    for (int t : labels)
        if (t == kOutsideTag) ++labeled_o;
    const std::size_t o_protos = std::max<std::size_t>(1, std::min(cfg.o_prototypes, labeled_o));
    const TagMap phi = TagMap::with_o_block(tag_names, o_protos);
    return fit(x, labels, phi, cfg);
}

/// Tag of the closest prototype in the learned subspace, per query row.
/// No mask or ratio applies at prediction time; ties go to the lower
/// prototype index.
inline std::vector<int> predict(const Matrix& xq, const Model& model) {
    if (xq.cols != model.centroids.cols)
        throw InvalidArgument("predict: query dimension " + std::to_string(xq.cols) +
                              " does not match model dimension " +
                              std::to_string(model.centroids.cols));
    const Matrix dist = pairwise_sq_dist(project_rows(xq, model.projection.u),
                                         project_rows(model.centroids, model.projection.u));
    std::vector<int> tags(xq.rows);
    for (std::size_t i = 0; i < xq.rows; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < dist.cols; ++j)
            if (dist(i, j) < dist(i, best)) best = j;
        tags[i] = model.tag_map.proto_tag[best];
    }
    return tags;
}

struct LinearModel {
    Matrix weights;            // k x d
    std::vector<double> bias;  // length k
};

/// Equivalent linear scorer for nearest-prototype classification:
/// argmax_j (C x + b)_j = argmin_j ||x - C_j||^2 with b_j = -||C_j||^2 / 2.
inline LinearModel to_linear_model(const Matrix& c) {
    LinearModel lm;
    lm.weights = c;
    lm.bias.resize(c.rows);
    for (std::size_t j = 0; j < c.rows; ++j) {
        double sq = 0.0;
        for (std::size_t m = 0; m < c.cols; ++m) sq += c(j, m) * c(j, m);
        lm.bias[j] = -0.5 * sq;
    }
    return lm;
}

/// Linear scorer over original-space inputs that reproduces `predict`:
/// scores = (C U) (U^T x) + b composed into W = C U U^T.
inline LinearModel export_linear(const Model& model) {
    const Matrix projected_c = project_rows(model.centroids, model.projection.u);
    LinearModel lm = to_linear_model(projected_c);  // weights k x p, bias from projected rows
    // fold the projection into the weights so the scorer consumes raw inputs
    Matrix w(projected_c.rows, model.projection.u.rows, 0.0);
    for (std::size_t j = 0; j < projected_c.rows; ++j)
        for (std::size_t m = 0; m < model.projection.u.rows; ++m) {
            double acc = 0.0;
            for (std::size_t q = 0; q < projected_c.cols; ++q)
                acc += projected_c(j, q) * model.projection.u(m, q);
            w(j, m) = acc;
        }
    lm.weights = std::move(w);
    return lm;
}

/// Scores = W x + b for one query row; returns the argmax index, ties to the
/// lower index.
inline std::size_t linear_argmax(const LinearModel& lm, const double* x) {
    std::size_t best = 0;
    double best_score = -kInf;
    for (std::size_t j = 0; j < lm.weights.rows; ++j) {
        double s = lm.bias[j];
        const double* wj = lm.weights.row_ptr(j);
        for (std::size_t m = 0; m < lm.weights.cols; ++m) s += wj[m] * x[m];
        if (j == 0 || s > best_score) {
            best = j;
            best_score = s;
        }
    }
    return best;
}

/// A sentence worth of per-token tag indices under the IO scheme.
struct TaggedSequence {
    std::vector<int> tags;
};

struct EvalResult {
    double precision;
    double recall;
    double f1;
};

namespace detail {

// (sequence, start, end, tag) of every maximal run of one non-O tag
inline std::vector<std::tuple<std::size_t, std::size_t, std::size_t, int>> collect_mentions(
    const std::vector<TaggedSequence>& seqs) {
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t, int>> out;
    for (std::size_t s = 0; s < seqs.size(); ++s) {
        const auto& tags = seqs[s].tags;
        std::size_t i = 0;
        while (i < tags.size()) {
            if (tags[i] == kOutsideTag) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j + 1 < tags.size() && tags[j + 1] == tags[i]) ++j;
            out.emplace_back(s, i, j, tags[i]);
            i = j + 1;
        }
    }
    return out;
}

}  // namespace detail

/// Exact-match mention precision/recall/F1 under the IO scheme. A mention is
/// a maximal run of one non-O tag; a match requires identical boundaries and
/// tag. When one side has no mentions at all, 0/0 counts as perfect (1) for
/// that side.
inline EvalResult mention_f1(const std::vector<TaggedSequence>& gold,
                             const std::vector<TaggedSequence>& pred) {
    if (gold.size() != pred.size())
        throw InvalidArgument("mention_f1: sequence count mismatch");
    for (std::size_t s = 0; s < gold.size(); ++s)
        if (gold[s].tags.size() != pred[s].tags.size())
            throw InvalidArgument("mention_f1: sequence " + std::to_string(s) +
                                  " length mismatch");
    auto gm = detail::collect_mentions(gold);
    auto pm = detail::collect_mentions(pred);
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t, int>> matched;
    std::set_intersection(gm.begin(), gm.end(), pm.begin(), pm.end(),
                          std::back_inserter(matched));
    const double matches = static_cast<double>(matched.size());
    EvalResult r{};
    r.precision = pm.empty() ? (gm.empty() ? 1.0 : 0.0) : matches / static_cast<double>(pm.size());
    r.recall = gm.empty() ? (pm.empty() ? 1.0 : 0.0) : matches / static_cast<double>(gm.size());
    r.f1 = (r.precision + r.recall) > 0.0
               ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
               : 0.0;
    return r;
}

/// Fraction of tokens whose predicted tag equals the gold tag.
inline double token_accuracy(const std::vector<int>& gold, const std::vector<int>& pred) {
    if (gold.size() != pred.size())
        throw InvalidArgument("token_accuracy: length mismatch");
    if (gold.empty()) return 1.0;
    std::size_t hits = 0;
    for (std::size_t i = 0; i < gold.size(); ++i)
        if (gold[i] == pred[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(gold.size());
}

}  // namespace wskm

#endif  // WSKM_PIPELINE_HPP
