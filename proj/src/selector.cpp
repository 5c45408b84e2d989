#include "craft/selector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "craft/kmeans.hpp"
#include "craft/rng.hpp"

namespace craft {

namespace {

// Largest-remainder award of `units` across `eligible` clusters with the
// given weights: floors of units*w_a, then +1 to the largest fractional
// remainders (ties to the lowest cluster index).
void award_largest_remainder(std::span<const double> weights,
                             const std::vector<std::size_t>& eligible, std::uint64_t units,
                             std::vector<std::uint64_t>& budgets) {
    if (units == 0 || eligible.empty()) return;
    double wsum = 0.0;
    for (std::size_t a : eligible) wsum += weights[a];

    std::vector<double> remainder(eligible.size(), 0.0);
    std::uint64_t awarded = 0;
    for (std::size_t e = 0; e < eligible.size(); ++e) {
        const double exact = wsum > 0.0 ? double(units) * weights[eligible[e]] / wsum
                                        : double(units) / double(eligible.size());
        const double fl = std::floor(exact);
        budgets[eligible[e]] += std::uint64_t(fl);
        awarded += std::uint64_t(fl);
        remainder[e] = exact - fl;
    }

    std::vector<std::size_t> order(eligible.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        if (remainder[x] != remainder[y]) return remainder[x] > remainder[y];
        return eligible[x] < eligible[y];
    });
    // one extra unit per cluster in remainder order, cycling in the
    // (floating-point-noise) case where more units remain than clusters
    std::size_t cursor = 0;
    while (awarded < units) {
        budgets[eligible[order[cursor]]] += 1;
        ++awarded;
        cursor = (cursor + 1) % order.size();
    }
}

}  // namespace

BudgetAllocation allocate_budget(std::span<const double> marginal,
                                 std::span<const std::uint64_t> bucket_sizes, std::uint64_t k) {
    if (marginal.size() != bucket_sizes.size())
        throw std::runtime_error("allocate_budget: " + std::to_string(marginal.size()) +
                                 " marginals vs " + std::to_string(bucket_sizes.size()) +
                                 " bucket sizes");
    if (marginal.empty()) throw std::runtime_error("allocate_budget: no clusters");
    if (k < 1) throw std::runtime_error("allocate_budget: k must be at least 1");
    double psum = 0.0;
    for (double p : marginal) {
        if (p < 0.0) throw std::runtime_error("allocate_budget: negative marginal");
        psum += p;
    }
    if (std::abs(psum - 1.0) > 1e-6)
        throw std::runtime_error("allocate_budget: marginal sums to " + std::to_string(psum));
    std::uint64_t capacity = 0;
    for (std::uint64_t s : bucket_sizes) capacity += s;
    if (capacity < k) throw std::runtime_error("allocate_budget: pool too small");

    const std::size_t m = marginal.size();
    BudgetAllocation alloc;
    alloc.budgets.assign(m, 0);
    alloc.total = k;

    std::vector<std::size_t> all(m);
    std::iota(all.begin(), all.end(), 0);
    award_largest_remainder(marginal, all, k, alloc.budgets);

    // capacity repair: clip over-full clusters, re-award the surplus over the
    // still-unclipped ones, repeat until feasible
    std::vector<char> clipped(m, 0);
    for (;;) {
        std::uint64_t surplus = 0;
        for (std::size_t a = 0; a < m; ++a) {
            if (alloc.budgets[a] > bucket_sizes[a]) {
                surplus += alloc.budgets[a] - bucket_sizes[a];
                alloc.budgets[a] = bucket_sizes[a];
                clipped[a] = 1;
            }
        }
        if (surplus == 0) break;
        alloc.underflow_moved += surplus;

        std::vector<std::size_t> eligible;
        double weight_sum = 0.0;
        for (std::size_t a = 0; a < m; ++a) {
            if (!clipped[a] && alloc.budgets[a] < bucket_sizes[a]) {
                eligible.push_back(a);
                weight_sum += marginal[a];
            }
        }
        if (!eligible.empty() && weight_sum > 0.0) {
            award_largest_remainder(marginal, eligible, surplus, alloc.budgets);
            continue;
        }
        // only zero-probability clusters have room left; spread the surplus
        // uniformly over whatever spare capacity exists
        std::vector<std::size_t> spare;
        for (std::size_t a = 0; a < m; ++a)
            if (alloc.budgets[a] < bucket_sizes[a]) spare.push_back(a);
        const std::vector<double> uniform(m, 1.0);
        award_largest_remainder(uniform, spare, surplus, alloc.budgets);
    }
    return alloc;
}

CostTable precompute_cost_table(const ValidationDistribution& dist,
                                const CentroidDistanceMatrix& D) {
    if (D.m_t != dist.m_t)
        throw std::runtime_error("precompute_cost_table: distance matrix size " +
                                 std::to_string(D.m_t) + " does not match m_t " +
                                 std::to_string(dist.m_t));
    CostTable table;
    table.m_s = dist.m_s;
    table.m_t = dist.m_t;
    table.c.assign(dist.m_s * dist.m_t, 0.0);
    table.row_unused.assign(dist.m_s, 0);
    for (std::size_t i = 0; i < dist.m_s; ++i) {
        if (dist.row_empty[i]) {
            table.row_unused[i] = 1;  // all-zero conditional leaves the row zero
            continue;
        }
        detail::cost_row(dist, D, i, table.c.data() + i * dist.m_t);
    }
    return table;
}

double score_candidate(const CostTable& table, std::size_t src_cluster, std::size_t tgt_cluster) {
    if (src_cluster >= table.m_s || tgt_cluster >= table.m_t)
        throw std::runtime_error("score_candidate: cluster index out of range");
    return table.at(src_cluster, tgt_cluster);
}

namespace {

// Bucket membership by counting sort: members of bucket a are
// order[offsets[a] .. offsets[a+1]), in ascending pool index.
void bucket_pool(std::span<const std::uint32_t> src_assign, std::size_t m_s,
                 std::vector<std::uint64_t>& offsets, std::vector<std::uint64_t>& order,
                 std::vector<std::uint64_t>& sizes) {
    sizes.assign(m_s, 0);
    for (std::size_t i = 0; i < src_assign.size(); ++i) {
        if (src_assign[i] >= m_s)
            throw std::runtime_error("pool source assignment " + std::to_string(src_assign[i]) +
                                     " out of range at index " + std::to_string(i));
        ++sizes[src_assign[i]];
    }
    offsets.assign(m_s + 1, 0);
    for (std::size_t a = 0; a < m_s; ++a) offsets[a + 1] = offsets[a] + sizes[a];
    order.resize(src_assign.size());
    std::vector<std::uint64_t> cursor(offsets.begin(), offsets.end() - 1);
    for (std::size_t i = 0; i < src_assign.size(); ++i) order[cursor[src_assign[i]]++] = i;
}

}  // namespace

SelectionResult select_craft(std::span<const std::uint32_t> pool_src_assign,
                             std::span<const std::uint32_t> pool_tgt_assign,
                             const ValidationDistribution& dist, const CentroidDistanceMatrix& D,
                             std::uint64_t k, std::uint64_t seed) {
    (void)seed;  // the deterministic path has no random choices
    if (pool_src_assign.size() != pool_tgt_assign.size())
        throw std::runtime_error("select_craft: pool assignment lengths differ");
    if (k > pool_src_assign.size())
        throw std::runtime_error("select_craft: k " + std::to_string(k) +
                                 " exceeds pool size " +
                                 std::to_string(pool_src_assign.size()));
    for (std::size_t i = 0; i < pool_tgt_assign.size(); ++i)
        if (pool_tgt_assign[i] >= dist.m_t)
            throw std::runtime_error("select_craft: pool target assignment out of range at index " +
                                     std::to_string(i));

    std::vector<std::uint64_t> offsets, order, sizes;
    bucket_pool(pool_src_assign, dist.m_s, offsets, order, sizes);

    const BudgetAllocation alloc = allocate_budget(dist.marginal, sizes, k);
    const CostTable table = precompute_cost_table(dist, D);

    std::vector<std::vector<std::uint64_t>> picked(dist.m_s);
    std::vector<ClusterFill> fills(dist.m_s);

#pragma omp parallel for schedule(dynamic)
    for (std::int64_t sa = 0; sa < std::int64_t(dist.m_s); ++sa) {
        const std::size_t a = std::size_t(sa);
        const std::uint64_t budget = alloc.budgets[a];
        fills[a].budget = budget;
        if (budget == 0) continue;

        const std::uint64_t begin = offsets[a], end = offsets[a + 1];
        std::vector<std::pair<double, std::uint64_t>> scored;
        scored.reserve(end - begin);
        for (std::uint64_t p = begin; p < end; ++p) {
            const std::uint64_t idx = order[p];
            scored.emplace_back(table.at(a, pool_tgt_assign[idx]), idx);
        }
        if (budget < scored.size())
            std::nth_element(scored.begin(), scored.begin() + std::ptrdiff_t(budget),
                             scored.end());
        auto& out = picked[a];
        out.reserve(budget);
        for (std::uint64_t p = 0; p < budget; ++p) out.push_back(scored[p].second);
        std::sort(out.begin(), out.end());

        fills[a].filled = budget;
        double cost = 0.0;
        for (std::uint64_t idx : out) cost += table.at(a, pool_tgt_assign[idx]);
        fills[a].cost_sum = cost;
    }

    SelectionResult result;
    result.indices.reserve(k);
    for (const auto& bucket : picked)
        result.indices.insert(result.indices.end(), bucket.begin(), bucket.end());
    std::sort(result.indices.begin(), result.indices.end());
    result.per_cluster = std::move(fills);
    result.diagnostics = compute_diagnostics(result.indices, pool_src_assign, pool_tgt_assign,
                                             dist, D, alloc.budgets);
    return result;
}

SelectionResult select_random(std::uint64_t pool_size, std::uint64_t k, std::uint64_t seed) {
    if (k > pool_size)
        throw std::runtime_error("select_random: k " + std::to_string(k) +
                                 " exceeds pool size " + std::to_string(pool_size));
    std::vector<std::uint64_t> idx(pool_size);
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    for (std::uint64_t i = 0; i < k; ++i) {
        const std::uint64_t j = i + uniform_below(rng, pool_size - i);
        std::swap(idx[i], idx[j]);
    }
    SelectionResult result;
    result.indices.assign(idx.begin(), idx.begin() + std::ptrdiff_t(k));
    std::sort(result.indices.begin(), result.indices.end());
    return result;
}

SelectionResult select_joint_ablation(const VectorSet& joint_validation,
                                      const VectorSet& joint_pool, std::size_t m, std::uint64_t k,
                                      std::uint64_t seed) {
    if (joint_validation.dim != joint_pool.dim)
        throw std::runtime_error("select_joint_ablation: validation dim " +
                                 std::to_string(joint_validation.dim) + " vs pool dim " +
                                 std::to_string(joint_pool.dim));
    if (k > joint_pool.count)
        throw std::runtime_error("select_joint_ablation: k exceeds pool size");

    KMeansConfig cfg;
    cfg.k = m;
    cfg.seed = seed;
    std::vector<std::uint32_t> val_assign;
    const KMeansModel model = kmeans_fit(joint_validation, cfg, &val_assign);
    const std::vector<std::uint32_t> pool_assign = assign_nearest(model, joint_pool);

    std::vector<double> marginal(m, 0.0);
    for (std::uint32_t a : val_assign) marginal[a] += 1.0;
    for (double& p : marginal) p /= double(val_assign.size());

    std::vector<std::uint64_t> offsets, order, sizes;
    bucket_pool(pool_assign, m, offsets, order, sizes);
    const BudgetAllocation alloc = allocate_budget(marginal, sizes, k);

    SelectionResult result;
    result.per_cluster.resize(m);
    result.indices.reserve(k);
    for (std::size_t a = 0; a < m; ++a) {
        const std::uint64_t budget = alloc.budgets[a];
        result.per_cluster[a].budget = budget;
        result.per_cluster[a].filled = budget;
        if (budget == 0) continue;
        const std::uint64_t begin = offsets[a], size = sizes[a];
        // partial Fisher-Yates over this bucket's members, one independent
        // stream per bucket so parallel callers cannot perturb the draw
        std::vector<std::uint64_t> members(order.begin() + std::ptrdiff_t(begin),
                                           order.begin() + std::ptrdiff_t(begin + size));
        SplitMix64 rng(derive_seed(seed, a));
        for (std::uint64_t i = 0; i < budget; ++i) {
            const std::uint64_t j = i + uniform_below(rng, size - i);
            std::swap(members[i], members[j]);
        }
        result.indices.insert(result.indices.end(), members.begin(),
                              members.begin() + std::ptrdiff_t(budget));
    }
    std::sort(result.indices.begin(), result.indices.end());
    return result;
}

OracleResult brute_force_oracle(std::span<const std::uint32_t> pool_src_assign,
                                std::span<const std::uint32_t> pool_tgt_assign,
                                const ValidationDistribution& dist,
                                const CentroidDistanceMatrix& D,
                                std::span<const std::uint64_t> budgets) {
    if (pool_src_assign.size() != pool_tgt_assign.size())
        throw std::runtime_error("brute_force_oracle: pool assignment lengths differ");
    if (budgets.size() != dist.m_s)
        throw std::runtime_error("brute_force_oracle: expected " + std::to_string(dist.m_s) +
                                 " budgets, got " + std::to_string(budgets.size()));

    std::vector<std::uint64_t> offsets, order, sizes;
    bucket_pool(pool_src_assign, dist.m_s, offsets, order, sizes);

    OracleResult result;
    std::vector<std::vector<std::uint32_t>> witness_clusters(dist.m_s);
    std::vector<double> row(dist.m_t);
    std::vector<std::uint64_t> counts(dist.m_t);

    for (std::size_t a = 0; a < dist.m_s; ++a) {
        const std::uint64_t budget = budgets[a];
        if (budget == 0) continue;
        const std::uint64_t n = sizes[a];
        if (budget > n)
            throw std::runtime_error("brute_force_oracle: budget " + std::to_string(budget) +
                                     " exceeds bucket " + std::to_string(a) + " size " +
                                     std::to_string(n));
        if (n > 25)
            throw std::runtime_error("brute_force_oracle: combinatorial cap exceeded (bucket " +
                                     std::to_string(a) + " has " + std::to_string(n) +
                                     " candidates)");
        double combos = 1.0;
        for (std::uint64_t i = 0; i < budget; ++i)
            combos = combos * double(n - i) / double(i + 1);
        if (combos > 1e6)
            throw std::runtime_error("brute_force_oracle: combinatorial cap exceeded (bucket " +
                                     std::to_string(a) + " has ~" + std::to_string(combos) +
                                     " combinations)");

        detail::cost_row(dist, D, a, row.data());

        // enumerate ascending index-combinations of size `budget` over the
        // bucket members; keep the first-found minimum term
        std::vector<std::uint64_t> comb(budget);
        std::iota(comb.begin(), comb.end(), 0);
        double best_term = std::numeric_limits<double>::infinity();
        std::vector<std::uint64_t> best_comb;
        for (;;) {
            std::fill(counts.begin(), counts.end(), 0);
            for (std::uint64_t c : comb) ++counts[pool_tgt_assign[order[offsets[a] + c]]];
            const double term = detail::bucket_term(row, counts, budget);
            if (term < best_term) {
                best_term = term;
                best_comb = comb;
            }
            // advance to the next combination
            std::int64_t pos = std::int64_t(budget) - 1;
            while (pos >= 0 && comb[std::size_t(pos)] == n - budget + std::uint64_t(pos)) --pos;
            if (pos < 0) break;
            ++comb[std::size_t(pos)];
            for (std::uint64_t q = std::uint64_t(pos) + 1; q < budget; ++q)
                comb[q] = comb[q - 1] + 1;
        }

        for (std::uint64_t c : best_comb) result.witness.push_back(order[offsets[a] + c]);
    }

    std::sort(result.witness.begin(), result.witness.end());
    for (std::uint64_t idx : result.witness)
        witness_clusters[pool_src_assign[idx]].push_back(pool_tgt_assign[idx]);
    result.best_loss = discrete_loss(dist, D, witness_clusters).weighted;
    return result;
}

}  // namespace craft
