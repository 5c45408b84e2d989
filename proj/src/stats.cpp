#include "craft/stats.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "craft/log.hpp"

namespace craft {

ValidationDistribution estimate_distribution(std::span<const std::uint32_t> src_assign,
                                             std::span<const std::uint32_t> tgt_assign,
                                             std::size_t m_s, std::size_t m_t) {
    if (src_assign.size() != tgt_assign.size())
        throw std::runtime_error("estimate_distribution: " + std::to_string(src_assign.size()) +
                                 " source assignments vs " + std::to_string(tgt_assign.size()) +
                                 " target assignments");
    if (m_s == 0 || m_t == 0)
        throw std::runtime_error("estimate_distribution: cluster counts must be positive");
    if (src_assign.empty())
        throw std::runtime_error("estimate_distribution: no validation pairs");

    ValidationDistribution dist;
    dist.m_s = m_s;
    dist.m_t = m_t;
    dist.M = src_assign.size();
    dist.joint_counts.assign(m_s * m_t, 0);
    for (std::size_t i = 0; i < src_assign.size(); ++i) {
        const std::uint32_t a = src_assign[i];
        const std::uint32_t b = tgt_assign[i];
        if (a >= m_s)
            throw std::runtime_error("estimate_distribution: source assignment " +
                                     std::to_string(a) + " out of range at pair " +
                                     std::to_string(i));
        if (b >= m_t)
            throw std::runtime_error("estimate_distribution: target assignment " +
                                     std::to_string(b) + " out of range at pair " +
                                     std::to_string(i));
        ++dist.joint_counts[std::size_t(a) * m_t + b];
    }

    dist.marginal.assign(m_s, 0.0);
    dist.conditional.assign(m_s * m_t, 0.0);
    dist.row_empty.assign(m_s, 0);
    for (std::size_t a = 0; a < m_s; ++a) {
        std::uint64_t row_total = 0;
        for (std::size_t b = 0; b < m_t; ++b) row_total += dist.joint(a, b);
        dist.marginal[a] = double(row_total) / double(dist.M);
        if (row_total == 0) {
            dist.row_empty[a] = 1;  // conditional row stays all-zero
            continue;
        }
        for (std::size_t b = 0; b < m_t; ++b)
            dist.conditional[a * m_t + b] = double(dist.joint(a, b)) / double(row_total);
    }
    return dist;
}

CentroidDistanceMatrix centroid_distances(const KMeansModel& target_model) {
    const std::size_t m = target_model.k;
    if (m == 0) throw std::runtime_error("centroid_distances: model has no centroids");
    CentroidDistanceMatrix out;
    out.m_t = m;
    out.d.assign(m * m, 0.0);
    bool duplicate = false;
    for (std::size_t j = 0; j < m; ++j) {
        const float* cj = target_model.centroid(j);
        for (std::size_t k = j + 1; k < m; ++k) {
            const float* ck = target_model.centroid(k);
            double s = 0.0;
            for (std::size_t t = 0; t < target_model.dim; ++t) {
                const double diff = double(cj[t]) - double(ck[t]);
                s += diff * diff;
            }
            const double dist = std::sqrt(s);
            out.d[j * m + k] = dist;
            out.d[k * m + j] = dist;
            if (dist == 0.0) duplicate = true;
        }
    }
    if (duplicate)
        log_warn("centroid_distances: duplicate target centroids (off-diagonal zero distance)");
    return out;
}

namespace detail {

void cost_row(const ValidationDistribution& dist, const CentroidDistanceMatrix& D, std::size_t i,
              double* out_row) {
    for (std::size_t k = 0; k < dist.m_t; ++k) {
        double acc = 0.0;
        for (std::size_t j = 0; j < dist.m_t; ++j)
            acc += dist.cond(i, j) * D.at(j, k);
        out_row[k] = acc;
    }
}

double bucket_term(std::span<const double> cost_row, std::span<const std::uint64_t> counts,
                   std::uint64_t n_selected) {
    if (n_selected == 0) return 0.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < cost_row.size(); ++k)
        if (counts[k] != 0) acc += double(counts[k]) * cost_row[k];
    return acc / double(n_selected);
}

}  // namespace detail

DiscreteLoss discrete_loss(const ValidationDistribution& dist, const CentroidDistanceMatrix& D,
                           const std::vector<std::vector<std::uint32_t>>& selection_tgt_clusters) {
    if (selection_tgt_clusters.size() != dist.m_s)
        throw std::runtime_error("discrete_loss: expected " + std::to_string(dist.m_s) +
                                 " bucket lists, got " +
                                 std::to_string(selection_tgt_clusters.size()));
    if (D.m_t != dist.m_t)
        throw std::runtime_error("discrete_loss: distance matrix size " + std::to_string(D.m_t) +
                                 " does not match m_t " + std::to_string(dist.m_t));

    std::vector<double> row(dist.m_t);
    std::vector<std::uint64_t> counts(dist.m_t);
    DiscreteLoss loss;
    for (std::size_t i = 0; i < dist.m_s; ++i) {
        const auto& clusters = selection_tgt_clusters[i];
        if (clusters.empty()) continue;
        std::fill(counts.begin(), counts.end(), 0);
        for (std::uint32_t c : clusters) {
            if (c >= dist.m_t)
                throw std::runtime_error("discrete_loss: target cluster " + std::to_string(c) +
                                         " out of range in bucket " + std::to_string(i));
            ++counts[c];
        }
        detail::cost_row(dist, D, i, row.data());
        const double term = detail::bucket_term(row, counts, clusters.size());
        loss.unweighted += term;
        loss.weighted += dist.marginal[i] * term;
    }
    return loss;
}

double discretized_kl(std::span<const double> p, std::span<const double> q, double epsilon) {
    if (p.size() != q.size())
        throw std::runtime_error("discretized_kl: distributions of different length");
    double ps = 0.0, qs = 0.0;
    for (double v : p) ps += v;
    for (double v : q) qs += v;
    if (std::abs(ps - 1.0) > 1e-6 || std::abs(qs - 1.0) > 1e-6)
        throw std::runtime_error("discretized_kl: inputs must sum to 1 (got " +
                                 std::to_string(ps) + " and " + std::to_string(qs) + ")");

    bool needs_smoothing = false;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (q[i] == 0.0 && p[i] > 0.0) needs_smoothing = true;

    const double m = double(p.size());
    double kl = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0.0) continue;
        const double qi = needs_smoothing ? (q[i] + epsilon) / (1.0 + m * epsilon) : q[i];
        kl += p[i] * std::log(p[i] / qi);
    }
    return kl;
}

double diameter_bound(const ValidationDistribution& dist, std::span<const double> diameters,
                      double lipschitz, double kl_discrete) {
    if (diameters.size() != dist.m_s)
        throw std::runtime_error("diameter_bound: expected " + std::to_string(dist.m_s) +
                                 " diameters, got " + std::to_string(diameters.size()));
    if (lipschitz < 0.0) throw std::runtime_error("diameter_bound: lipschitz must be >= 0");
    double weighted = 0.0;
    for (std::size_t i = 0; i < dist.m_s; ++i)
        weighted += dist.marginal[i] * lipschitz * diameters[i];
    return weighted + kl_discrete;
}

Diagnostics compute_diagnostics(std::span<const std::uint64_t> selected,
                                std::span<const std::uint32_t> pool_src_assign,
                                std::span<const std::uint32_t> pool_tgt_assign,
                                const ValidationDistribution& dist,
                                const CentroidDistanceMatrix& D,
                                std::span<const std::uint64_t> budgets) {
    if (pool_src_assign.size() != pool_tgt_assign.size())
        throw std::runtime_error("compute_diagnostics: pool assignment lengths differ");
    if (!budgets.empty() && budgets.size() != dist.m_s)
        throw std::runtime_error("compute_diagnostics: budget list length mismatch");

    std::vector<std::vector<std::uint32_t>> bucket_clusters(dist.m_s);
    std::vector<std::uint64_t> filled(dist.m_s, 0);
    for (std::uint64_t idx : selected) {
        if (idx >= pool_src_assign.size())
            throw std::runtime_error("compute_diagnostics: selected index " + std::to_string(idx) +
                                     " out of range for pool of " +
                                     std::to_string(pool_src_assign.size()));
        const std::uint32_t a = pool_src_assign[idx];
        if (a >= dist.m_s)
            throw std::runtime_error("compute_diagnostics: pool source assignment out of range");
        bucket_clusters[a].push_back(pool_tgt_assign[idx]);
        ++filled[a];
    }

    Diagnostics diag;
    const DiscreteLoss loss = discrete_loss(dist, D, bucket_clusters);
    diag.discrete_loss_weighted = loss.weighted;
    diag.discrete_loss_unweighted = loss.unweighted;

    std::vector<double> q(dist.m_s, 0.0);
    if (!selected.empty())
        for (std::size_t a = 0; a < dist.m_s; ++a)
            q[a] = double(filled[a]) / double(selected.size());
    diag.source_kl = selected.empty() ? 0.0 : discretized_kl(dist.marginal, q);
    diag.weighted_diameter = 0.0;
    diag.diameter_bound = diag.source_kl;

    diag.per_cluster.resize(dist.m_s);
    for (std::size_t a = 0; a < dist.m_s; ++a) {
        diag.per_cluster[a].cluster = a;
        diag.per_cluster[a].p = dist.marginal[a];
        diag.per_cluster[a].budget = budgets.empty() ? filled[a] : budgets[a];
        diag.per_cluster[a].filled = filled[a];
        diag.per_cluster[a].epsilon = 0.0;
    }
    return diag;
}

void apply_diameters(Diagnostics& diag, const ValidationDistribution& dist,
                     std::span<const double> diameters, double lipschitz) {
    if (diameters.size() != dist.m_s)
        throw std::runtime_error("apply_diameters: expected " + std::to_string(dist.m_s) +
                                 " diameters, got " + std::to_string(diameters.size()));
    double weighted = 0.0;
    for (std::size_t i = 0; i < dist.m_s; ++i) {
        if (i < diag.per_cluster.size()) diag.per_cluster[i].epsilon = diameters[i];
        weighted += dist.marginal[i] * diameters[i];
    }
    diag.weighted_diameter = weighted;
    diag.diameter_bound = lipschitz * weighted + diag.source_kl;
}

std::string diagnostics_to_json(const Diagnostics& diag) {
    nlohmann::json j;
    j["discrete_loss"] = diag.discrete_loss_weighted;  // canonical variant
    j["discrete_loss_weighted"] = diag.discrete_loss_weighted;
    j["discrete_loss_unweighted"] = diag.discrete_loss_unweighted;
    j["source_kl"] = diag.source_kl;
    j["weighted_diameter"] = diag.weighted_diameter;
    j["diameter_bound"] = diag.diameter_bound;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& c : diag.per_cluster) {
        rows.push_back({{"cluster", c.cluster},
                        {"p", c.p},
                        {"budget", c.budget},
                        {"filled", c.filled},
                        {"epsilon", c.epsilon}});
    }
    j["per_cluster"] = std::move(rows);
    return j.dump(2);
}

}  // namespace craft
