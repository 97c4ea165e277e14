#ifndef WSKM_INIT_HPP
#define WSKM_INIT_HPP

#include <algorithm>
#include <cstddef>
#include <iterator>
#include <string>
#include <vector>

#include "wskm/error.hpp"
#include "wskm/matrix.hpp"
#include "wskm/tags.hpp"

namespace wskm {

/// One agglomeration step. Clusters are named by their smallest member row.
struct WardMerge {
    std::size_t cluster_a;
    std::size_t cluster_b;
    double ward_cost;
    std::size_t new_size;
};

struct Dendrogram {
    std::vector<WardMerge> merges;
    std::size_t leaf_count = 0;
};

struct WardResult {
    Matrix centroids;            // target x d, ordered by smallest member row
    std::vector<int> labels;     // length m, cluster index per input row
    Dendrogram dendrogram;
};

/// Ward merge cost between two clusters given sizes and centroids:
/// |a||b| / (|a|+|b|) * ||mean_a - mean_b||^2.
inline double ward_cost(std::size_t size_a, const double* mean_a, std::size_t size_b,
                        const double* mean_b, std::size_t d) {
    double sq = 0.0;
    for (std::size_t m = 0; m < d; ++m) {
        const double diff = mean_a[m] - mean_b[m];
        sq += diff * diff;
    }
    const double na = static_cast<double>(size_a);
    const double nb = static_cast<double>(size_b);
    return (na * nb) / (na + nb) * sq;
}

/// Greedy agglomerative clustering with the Ward linkage, run until `target`
/// clusters remain.
///
/// Deliberately the naive O(m^3) scheme with centroids recomputed from their
/// member rows after every merge: supports are small and this keeps the
/// deterministic tie-break (lexicographic on the smallest member rows of the
/// merged pair) easy to audit.
inline WardResult ward_clusters(const Matrix& p, std::size_t target) {
    const std::size_t m = p.rows, d = p.cols;
    if (target < 1 || target > m)
        throw InvalidArgument("ward_clusters: target " + std::to_string(target) +
                              " outside [1, " + std::to_string(m) + "]");

    struct Cluster {
        std::vector<std::size_t> members;  // ascending
        std::vector<double> mean;
    };
    std::vector<Cluster> active(m);
    for (std::size_t i = 0; i < m; ++i) {
        active[i].members = {i};
        active[i].mean.assign(p.row_ptr(i), p.row_ptr(i) + d);
    }

    WardResult res;
    res.dendrogram.leaf_count = m;

    while (active.size() > target) {
        std::size_t best_a = 0, best_b = 1;
        double best_cost = kInf;
        // active stays ordered by smallest member, so the first minimum seen
        // is the lexicographically smallest pair
        for (std::size_t a = 0; a + 1 < active.size(); ++a)
            for (std::size_t b = a + 1; b < active.size(); ++b) {
                const double cost =
                    ward_cost(active[a].members.size(), active[a].mean.data(),
                              active[b].members.size(), active[b].mean.data(), d);
                if (cost < best_cost) {
                    best_cost = cost;
                    best_a = a;
                    best_b = b;
                }
            }

        Cluster& ca = active[best_a];
        Cluster& cb = active[best_b];
        res.dendrogram.merges.push_back({ca.members.front(), cb.members.front(), best_cost,
                                         ca.members.size() + cb.members.size()});

        std::vector<std::size_t> merged;
        merged.reserve(ca.members.size() + cb.members.size());
        std::merge(ca.members.begin(), ca.members.end(), cb.members.begin(), cb.members.end(),
                   std::back_inserter(merged));
        ca.members = std::move(merged);
        // recompute the mean from scratch over ascending members
        ca.mean.assign(d, 0.0);
        for (std::size_t row : ca.members)
            for (std::size_t mm = 0; mm < d; ++mm) ca.mean[mm] += p(row, mm);
        for (std::size_t mm = 0; mm < d; ++mm)
            ca.mean[mm] /= static_cast<double>(ca.members.size());
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(best_b));
    }

    res.centroids = Matrix(active.size(), d, 0.0);
    res.labels.assign(m, -1);
    for (std::size_t cidx = 0; cidx < active.size(); ++cidx) {
        for (std::size_t mm = 0; mm < d; ++mm) res.centroids(cidx, mm) = active[cidx].mean[mm];
        for (std::size_t row : active[cidx].members) res.labels[row] = static_cast<int>(cidx);
    }
    return res;
}

/// Deterministic prototype initialization.
///
/// Single-prototype tags get the mean of their labeled rows. Tags owning
/// several prototypes run Ward clustering over their labeled rows and take
/// the resulting centroids, matched to the tag's prototype indices in the
/// deterministic smallest-member order. Unlabeled rows take no part.
inline Matrix init_prototypes(const Matrix& x, const std::vector<int>& labels,
                              const TagMap& phi) {
    if (labels.size() != x.rows)
        throw InvalidArgument("init_prototypes: label count does not match rows");
    const std::size_t d = x.cols;
    Matrix c(phi.k(), d, 0.0);

    for (int t = 0; t < static_cast<int>(phi.tag_count()); ++t) {
        const std::vector<int> protos = phi.prototypes_of(t);
        std::vector<std::size_t> rows;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == t) rows.push_back(i);
        if (rows.size() < protos.size())
            throw FeasibilityError("init_prototypes: tag " + phi.tags[static_cast<std::size_t>(t)] +
                                   " needs " + std::to_string(protos.size()) +
                                   " labeled rows but has " + std::to_string(rows.size()));
        if (protos.size() == 1) {
            double* cj = c.row_ptr(static_cast<std::size_t>(protos[0]));
            for (std::size_t row : rows)
                for (std::size_t m = 0; m < d; ++m) cj[m] += x(row, m);
            for (std::size_t m = 0; m < d; ++m) cj[m] /= static_cast<double>(rows.size());
        } else {
            Matrix sub(rows.size(), d, 0.0);
            for (std::size_t r = 0; r < rows.size(); ++r)
                for (std::size_t m = 0; m < d; ++m) sub(r, m) = x(rows[r], m);
            const WardResult wr = ward_clusters(sub, protos.size());
            for (std::size_t cidx = 0; cidx < protos.size(); ++cidx)
                for (std::size_t m = 0; m < d; ++m)
                    c(static_cast<std::size_t>(protos[cidx]), m) = wr.centroids(cidx, m);
        }
    }
    return c;
}

}  // namespace wskm

#endif  // WSKM_INIT_HPP
