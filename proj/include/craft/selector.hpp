#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "craft/stats.hpp"
#include "craft/vector_set.hpp"

namespace craft {

// Per-cluster budgets k_a from largest-remainder rounding of k * p_a, with
// surplus from over-capacity clusters re-awarded until feasible.
struct BudgetAllocation {
    std::vector<std::uint64_t> budgets;
    std::uint64_t total = 0;
    std::uint64_t underflow_moved = 0;  // budget units displaced by small buckets
};

BudgetAllocation allocate_budget(std::span<const double> marginal,
                                 std::span<const std::uint64_t> bucket_sizes, std::uint64_t k);

// C[i][b'] = sum_j p(j|i) * d(j, b'): the expected centroid distance of a
// candidate in target cluster b' under source cluster i's conditional.
// Rows for empty source clusters are zero and flagged unused.
struct CostTable {
    std::size_t m_s = 0;
    std::size_t m_t = 0;
    std::vector<double> c;  // m_s x m_t, row-major
    std::vector<char> row_unused;

    double at(std::size_t i, std::size_t b) const { return c[i * m_t + b]; }
};

CostTable precompute_cost_table(const ValidationDistribution& dist,
                                const CentroidDistanceMatrix& D);

double score_candidate(const CostTable& table, std::size_t src_cluster, std::size_t tgt_cluster);

struct ClusterFill {
    std::uint64_t budget = 0;
    std::uint64_t filled = 0;
    double cost_sum = 0.0;
};

struct SelectionResult {
    std::vector<std::uint64_t> indices;  // ascending pool indices
    std::vector<ClusterFill> per_cluster;
    Diagnostics diagnostics;
};

// The two-stage selection: proportional budgets over source clusters, then
// the k_a lowest-cost candidates within each bucket (ties by ascending pool
// index). Deterministic; `seed` is accepted for interface uniformity with the
// baselines and ignored.
SelectionResult select_craft(std::span<const std::uint32_t> pool_src_assign,
                             std::span<const std::uint32_t> pool_tgt_assign,
                             const ValidationDistribution& dist, const CentroidDistanceMatrix& D,
                             std::uint64_t k, std::uint64_t seed);

// Uniform sample of k pool indices without replacement. per_cluster and
// diagnostics are left empty: the caller holds the clustering context.
SelectionResult select_random(std::uint64_t pool_size, std::uint64_t k, std::uint64_t seed);

// Ablation baseline: k-means on concatenated source+target validation
// vectors, proportional budgets over the joint clusters, uniform random picks
// within each bucket. per_cluster rows are in the joint-cluster frame;
// diagnostics are left for the caller to compute in the separate-cluster
// frame.
SelectionResult select_joint_ablation(const VectorSet& joint_validation,
                                      const VectorSet& joint_pool, std::size_t m, std::uint64_t k,
                                      std::uint64_t seed);

// Exhaustive minimizer of the weighted discrete loss subject to the given
// per-bucket budgets. Buckets are independent, so per-bucket enumeration
// composes to the global optimum. Test oracle for tiny instances only.
struct OracleResult {
    double best_loss = 0.0;
    std::vector<std::uint64_t> witness;  // ascending pool indices
};

OracleResult brute_force_oracle(std::span<const std::uint32_t> pool_src_assign,
                                std::span<const std::uint32_t> pool_tgt_assign,
                                const ValidationDistribution& dist,
                                const CentroidDistanceMatrix& D,
                                std::span<const std::uint64_t> budgets);

}  // namespace craft
