#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "craft/kmeans.hpp"

namespace craft {

// Cluster-level distribution estimated from the validation set: joint counts
// over (source cluster, target cluster), the source marginal p_a, and the
// row-stochastic conditional p(b|a). Rows with p_a = 0 are all-zero and
// flagged in row_empty.
struct ValidationDistribution {
    std::size_t m_s = 0;
    std::size_t m_t = 0;
    std::uint64_t M = 0;  // validation pair count
    std::vector<std::uint64_t> joint_counts;  // m_s x m_t, row-major
    std::vector<double> marginal;             // size m_s
    std::vector<double> conditional;          // m_s x m_t, row-major
    std::vector<char> row_empty;              // size m_s

    std::uint64_t joint(std::size_t a, std::size_t b) const { return joint_counts[a * m_t + b]; }
    double cond(std::size_t a, std::size_t b) const { return conditional[a * m_t + b]; }
};

ValidationDistribution estimate_distribution(std::span<const std::uint32_t> src_assign,
                                             std::span<const std::uint32_t> tgt_assign,
                                             std::size_t m_s, std::size_t m_t);

// Pairwise Euclidean distances between target centroids.
struct CentroidDistanceMatrix {
    std::size_t m_t = 0;
    std::vector<double> d;  // m_t x m_t, symmetric, zero diagonal

    double at(std::size_t j, std::size_t k) const { return d[j * m_t + k]; }
};

CentroidDistanceMatrix centroid_distances(const KMeansModel& target_model);

// Expected centroid distance of a selection, per source cluster, averaged
// over the validation conditional: term_i = sum_{j,k} d_{jk} p(j|i) q(k|i)
// where q is the selection's empirical target-cluster fraction in bucket i.
// `weighted` multiplies each term by p_i; `unweighted` sums the raw terms.
struct DiscreteLoss {
    double weighted = 0.0;
    double unweighted = 0.0;
};

DiscreteLoss discrete_loss(const ValidationDistribution& dist, const CentroidDistanceMatrix& D,
                           const std::vector<std::vector<std::uint32_t>>& selection_tgt_clusters);

// KL(p || q) in nats over cluster histograms. Smoothing q' = (q+eps)/(1+m*eps)
// is applied only when some q_i = 0 has p_i > 0, so the value is always finite.
double discretized_kl(std::span<const double> p, std::span<const double> q,
                      double epsilon = 1e-9);

// sum_i p_i * lipschitz * diameters[i] + kl_discrete
double diameter_bound(const ValidationDistribution& dist, std::span<const double> diameters,
                      double lipschitz, double kl_discrete);

struct ClusterDiagnostics {
    std::size_t cluster = 0;
    double p = 0.0;
    std::uint64_t budget = 0;
    std::uint64_t filled = 0;
    double epsilon = 0.0;
};

struct Diagnostics {
    double discrete_loss_weighted = 0.0;
    double discrete_loss_unweighted = 0.0;
    double source_kl = 0.0;
    double weighted_diameter = 0.0;
    double diameter_bound = 0.0;
    std::vector<ClusterDiagnostics> per_cluster;
};

// Build the full diagnostic block for a selection over an assigned pool.
// `budgets` may be empty (baselines without an allocation), in which case the
// realized per-cluster fill doubles as the budget column.
Diagnostics compute_diagnostics(std::span<const std::uint64_t> selected,
                                std::span<const std::uint32_t> pool_src_assign,
                                std::span<const std::uint32_t> pool_tgt_assign,
                                const ValidationDistribution& dist,
                                const CentroidDistanceMatrix& D,
                                std::span<const std::uint64_t> budgets);

// Fill in the diameter-dependent pieces once source-cluster diameters are
// known: per-cluster epsilon, the probability-weighted diameter, and the
// bound lipschitz * weighted_diameter + source_kl.
void apply_diameters(Diagnostics& diag, const ValidationDistribution& dist,
                     std::span<const double> diameters, double lipschitz);

std::string diagnostics_to_json(const Diagnostics& diag);

namespace detail {

// Row i of the expected-distance cost table: r_k = sum_j p(j|i) * d_{jk},
// accumulated in ascending j order. The selector's precomputed table and every
// discrete-loss evaluation share this routine so scores and reported losses
// agree exactly.
void cost_row(const ValidationDistribution& dist, const CentroidDistanceMatrix& D, std::size_t i,
              double* out_row);

// One source bucket's contribution to the discrete loss, the selection
// summarized as per-target-cluster counts. Shared by discrete_loss and the
// brute-force oracle.
double bucket_term(std::span<const double> cost_row, std::span<const std::uint64_t> counts,
                   std::uint64_t n_selected);

}  // namespace detail

}  // namespace craft
