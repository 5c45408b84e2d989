#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "craft/kmeans.hpp"
#include "craft/stats.hpp"

using namespace craft;

namespace {

CentroidDistanceMatrix matrix_from(std::size_t m_t, std::vector<double> d) {
    CentroidDistanceMatrix D;
    D.m_t = m_t;
    D.d = std::move(d);
    return D;
}

std::vector<double> random_simplex(std::mt19937_64& g, std::size_t n) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::vector<double> p(n);
    double s = 0;
    for (auto& v : p) {
        v = u(g);
        s += v;
    }
    for (auto& v : p) v /= s;
    return p;
}

}  // namespace

TEST_CASE("estimate_distribution tallies joint counts, marginal, conditional") {
    std::vector<std::uint32_t> src = {0, 0, 1};
    std::vector<std::uint32_t> tgt = {0, 1, 1};
    auto dist = estimate_distribution(src, tgt, 2, 2);
    CHECK(dist.M == 3);
    CHECK(dist.joint(0, 0) == 1);
    CHECK(dist.joint(0, 1) == 1);
    CHECK(dist.joint(1, 0) == 0);
    CHECK(dist.joint(1, 1) == 1);
    CHECK(dist.marginal[0] == doctest::Approx(2.0 / 3.0));
    CHECK(dist.marginal[1] == doctest::Approx(1.0 / 3.0));
    CHECK(dist.cond(0, 0) == doctest::Approx(0.5));
    CHECK(dist.cond(0, 1) == doctest::Approx(0.5));
    CHECK(dist.cond(1, 0) == 0.0);
    CHECK(dist.cond(1, 1) == doctest::Approx(1.0));
    CHECK_FALSE(dist.row_empty[0]);
    CHECK_FALSE(dist.row_empty[1]);
}

TEST_CASE("estimate_distribution flags unobserved source clusters with zero rows") {
    std::vector<std::uint32_t> src = {0, 0};
    std::vector<std::uint32_t> tgt = {1, 1};
    auto dist = estimate_distribution(src, tgt, 3, 2);
    CHECK(dist.marginal[1] == 0.0);
    CHECK(dist.marginal[2] == 0.0);
    CHECK(dist.row_empty[1]);
    CHECK(dist.row_empty[2]);
    // Empty rows are all-zero, not uniform: downstream code checks the flag.
    CHECK(dist.cond(1, 0) == 0.0);
    CHECK(dist.cond(1, 1) == 0.0);
    CHECK(dist.cond(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("estimate_distribution validates its inputs") {
    std::vector<std::uint32_t> a = {0, 1};
    std::vector<std::uint32_t> b = {0};
    CHECK_THROWS_AS(estimate_distribution(a, b, 2, 2), std::runtime_error);

    std::vector<std::uint32_t> oor = {0, 5};
    std::vector<std::uint32_t> ok = {0, 0};
    CHECK_THROWS_WITH_AS(estimate_distribution(oor, ok, 2, 2), doctest::Contains("pair 1"),
                         std::runtime_error);
    CHECK_THROWS_AS(estimate_distribution(ok, oor, 2, 2), std::runtime_error);

    std::vector<std::uint32_t> none;
    CHECK_THROWS_AS(estimate_distribution(none, none, 2, 2), std::runtime_error);
}

TEST_CASE("centroid_distances is symmetric with a zero diagonal") {
    KMeansModel model;
    model.k = 3;
    model.dim = 2;
    model.centroids = {0.0f, 0.0f, 3.0f, 4.0f, 3.0f, 0.0f};
    auto D = centroid_distances(model);
    REQUIRE(D.m_t == 3);
    CHECK(D.at(0, 0) == 0.0);
    CHECK(D.at(1, 1) == 0.0);
    CHECK(D.at(0, 1) == doctest::Approx(5.0));
    CHECK(D.at(1, 0) == D.at(0, 1));
    CHECK(D.at(0, 2) == doctest::Approx(3.0));
    CHECK(D.at(1, 2) == doctest::Approx(4.0));

    KMeansModel single;
    single.k = 1;
    single.dim = 4;
    single.centroids = {1, 2, 3, 4};
    auto D1 = centroid_distances(single);
    CHECK(D1.m_t == 1);
    CHECK(D1.at(0, 0) == 0.0);
}

TEST_CASE("discrete_loss on a single target cluster is zero") {
    std::vector<std::uint32_t> src = {0, 0, 1, 1};
    std::vector<std::uint32_t> tgt = {0, 0, 0, 0};
    auto dist = estimate_distribution(src, tgt, 2, 1);
    auto D = matrix_from(1, {0.0});
    std::vector<std::vector<std::uint32_t>> sel = {{0, 0}, {0}};
    auto loss = discrete_loss(dist, D, sel);
    CHECK(loss.weighted == 0.0);
    CHECK(loss.unweighted == 0.0);
}

TEST_CASE("discrete_loss averages centroid distances under the conditional") {
    // One source cluster; conditional is 50/50 over two target clusters at
    // distance 5. A selection entirely in cluster 0 pays 0.5 * 5 = 2.5.
    std::vector<std::uint32_t> src = {0, 0};
    std::vector<std::uint32_t> tgt = {0, 1};
    auto dist = estimate_distribution(src, tgt, 1, 2);
    auto D = matrix_from(2, {0.0, 5.0, 5.0, 0.0});

    std::vector<std::vector<std::uint32_t>> sel_zero = {{0, 0, 0}};
    auto l0 = discrete_loss(dist, D, sel_zero);
    CHECK(l0.weighted == doctest::Approx(2.5));
    CHECK(l0.unweighted == doctest::Approx(2.5));  // p_0 = 1

    // A selection matching the conditional still pays the cross terms:
    // 0.5*0.5*(d00+d01+d10+d11 weights) = 2.5 as well for this symmetric D.
    std::vector<std::vector<std::uint32_t>> sel_mix = {{0, 1}};
    auto lm = discrete_loss(dist, D, sel_mix);
    CHECK(lm.weighted == doctest::Approx(2.5));

    // Point-mass conditional: p(1|0)=1. Selecting cluster 0 pays d(1,0)=5.
    std::vector<std::uint32_t> tgt2 = {1, 1};
    auto dist2 = estimate_distribution(src, tgt2, 1, 2);
    auto lp = discrete_loss(dist2, D, sel_zero);
    CHECK(lp.weighted == doctest::Approx(5.0));
    // And selecting cluster 1 pays zero.
    std::vector<std::vector<std::uint32_t>> sel_one = {{1, 1}};
    CHECK(discrete_loss(dist2, D, sel_one).weighted == doctest::Approx(0.0));
}

TEST_CASE("discrete_loss weights bucket terms by the source marginal") {
    // Two source clusters, p = (0.75, 0.25), both with point-mass
    // conditionals on different target clusters.
    std::vector<std::uint32_t> src = {0, 0, 0, 1};
    std::vector<std::uint32_t> tgt = {0, 0, 0, 1};
    auto dist = estimate_distribution(src, tgt, 2, 2);
    auto D = matrix_from(2, {0.0, 2.0, 2.0, 0.0});
    // Bucket 0 selects the wrong cluster (term 2), bucket 1 the right one.
    std::vector<std::vector<std::uint32_t>> sel = {{1}, {1}};
    auto loss = discrete_loss(dist, D, sel);
    CHECK(loss.weighted == doctest::Approx(0.75 * 2.0));
    CHECK(loss.unweighted == doctest::Approx(2.0));
}

TEST_CASE("discrete_loss is linear in the selection histogram") {
    std::mt19937_64 g(99);
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t m_t = 4;
        std::vector<std::uint32_t> src, tgt;
        for (int i = 0; i < 64; ++i) {
            src.push_back(std::uint32_t(g() % 3));
            tgt.push_back(std::uint32_t(g() % m_t));
        }
        auto dist = estimate_distribution(src, tgt, 3, m_t);
        KMeansModel model;
        model.k = m_t;
        model.dim = 3;
        std::uniform_real_distribution<float> u(-1.0f, 1.0f);
        model.centroids.resize(m_t * 3);
        for (auto& c : model.centroids) c = u(g);
        auto D = centroid_distances(model);

        // Duplicating every bucket's selection twice leaves the loss fixed
        // (the histogram q is scale-invariant).
        std::vector<std::vector<std::uint32_t>> sel(3), doubled(3);
        for (std::size_t a = 0; a < 3; ++a) {
            const std::size_t n = 1 + g() % 5;
            for (std::size_t t = 0; t < n; ++t) {
                const std::uint32_t c = std::uint32_t(g() % m_t);
                sel[a].push_back(c);
                doubled[a].push_back(c);
                doubled[a].push_back(c);
            }
        }
        auto l1 = discrete_loss(dist, D, sel);
        auto l2 = discrete_loss(dist, D, doubled);
        CHECK(std::abs(l1.weighted - l2.weighted) <=
              1e-9 * std::max(1.0, std::abs(l1.weighted)));

        // The merged histogram's bucket term is the count-weighted mix of
        // the separate terms (verified through bucket_term directly).
        std::vector<double> row(m_t);
        detail::cost_row(dist, D, 0, row.data());
        std::vector<std::uint64_t> ca(m_t, 0), cb(m_t, 0), cm(m_t, 0);
        for (std::size_t t = 0; t < m_t; ++t) {
            ca[t] = g() % 4;
            cb[t] = g() % 4;
            cm[t] = ca[t] + cb[t];
        }
        const std::uint64_t na = std::accumulate(ca.begin(), ca.end(), std::uint64_t(0));
        const std::uint64_t nb = std::accumulate(cb.begin(), cb.end(), std::uint64_t(0));
        if (na == 0 || nb == 0) continue;
        const double ta = detail::bucket_term(row, ca, na);
        const double tb = detail::bucket_term(row, cb, nb);
        const double tm = detail::bucket_term(row, cm, na + nb);
        const double expect = (double(na) * ta + double(nb) * tb) / double(na + nb);
        CHECK(std::abs(tm - expect) <= 1e-9 * std::max(1.0, std::abs(expect)));
    }
}

TEST_CASE("discretized_kl of a distribution with itself is zero") {
    std::mt19937_64 g(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto p = random_simplex(g, 1 + g() % 12);
        CHECK(discretized_kl(p, p) == 0.0);
    }
}

TEST_CASE("discretized_kl matches a hand-computed value") {
    std::vector<double> p = {0.5, 0.5};
    std::vector<double> q = {0.25, 0.75};
    // 0.5*ln(2) + 0.5*ln(2/3)
    CHECK(discretized_kl(p, q) ==
          doctest::Approx(0.14384103622589045).epsilon(1e-12));
}

TEST_CASE("discretized_kl smooths only impossible events") {
    std::vector<double> p = {1.0, 0.0};
    std::vector<double> q = {0.0, 1.0};
    const double eps = 1e-6;
    const double kl = discretized_kl(p, q, eps);
    CHECK(std::isfinite(kl));
    // q' = (eps/(1+2eps), (1+eps)/(1+2eps)); KL = ln(1/q'_0)
    CHECK(kl == doctest::Approx(std::log((1.0 + 2.0 * eps) / eps)));

    // When q covers p's support no smoothing happens even with q_i = 0.
    std::vector<double> p2 = {1.0, 0.0};
    std::vector<double> q2 = {1.0, 0.0};
    CHECK(discretized_kl(p2, q2) == 0.0);
}

TEST_CASE("discretized_kl is non-negative on random simplex pairs") {
    std::mt19937_64 g(17);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + g() % 10;
        auto p = random_simplex(g, n);
        auto q = random_simplex(g, n);
        CHECK(discretized_kl(p, q) >= 0.0);
    }
}

TEST_CASE("discretized_kl validates lengths and normalization") {
    std::vector<double> p = {0.5, 0.5};
    std::vector<double> q3 = {0.3, 0.3, 0.4};
    CHECK_THROWS_AS(discretized_kl(p, q3), std::runtime_error);
    std::vector<double> not_norm = {0.9, 0.3};
    CHECK_THROWS_AS(discretized_kl(p, not_norm), std::runtime_error);
    CHECK_THROWS_AS(discretized_kl(not_norm, p), std::runtime_error);
}

TEST_CASE("diameter_bound combines weighted diameters and the KL term") {
    std::vector<std::uint32_t> src = {0, 0, 0, 1};
    std::vector<std::uint32_t> tgt = {0, 0, 0, 0};
    auto dist = estimate_distribution(src, tgt, 2, 1);  // p = (0.75, 0.25)
    std::vector<double> diam = {2.0, 4.0};
    // 1.5*(0.75*2 + 0.25*4) + 0.125 = 1.5*2.5 + 0.125
    CHECK(diameter_bound(dist, diam, 1.5, 0.125) == doctest::Approx(3.875));
    CHECK(diameter_bound(dist, diam, 0.0, 0.125) == doctest::Approx(0.125));

    // Monotone in each diameter.
    std::vector<double> bigger = {2.5, 4.0};
    CHECK(diameter_bound(dist, bigger, 1.5, 0.125) >
          diameter_bound(dist, diam, 1.5, 0.125));
}

TEST_CASE("compute_diagnostics reports fill, loss, and source KL") {
    // Pool of 6: src clusters 0,0,0,1,1,1; tgt clusters 0,0,1,1,1,0.
    std::vector<std::uint32_t> pool_src = {0, 0, 0, 1, 1, 1};
    std::vector<std::uint32_t> pool_tgt = {0, 0, 1, 1, 1, 0};
    std::vector<std::uint32_t> val_src = {0, 0, 1, 1};
    std::vector<std::uint32_t> val_tgt = {0, 0, 1, 1};
    auto dist = estimate_distribution(val_src, val_tgt, 2, 2);
    auto D = matrix_from(2, {0.0, 1.0, 1.0, 0.0});

    std::vector<std::uint64_t> selected = {0, 1, 3, 4};
    std::vector<std::uint64_t> budgets = {2, 2};
    auto diag = compute_diagnostics(selected, pool_src, pool_tgt, dist, D, budgets);
    REQUIRE(diag.per_cluster.size() == 2);
    CHECK(diag.per_cluster[0].budget == 2);
    CHECK(diag.per_cluster[0].filled == 2);
    CHECK(diag.per_cluster[0].p == doctest::Approx(0.5));
    // Selection matches the conditional exactly -> loss 0, KL 0.
    CHECK(diag.discrete_loss_weighted == doctest::Approx(0.0));
    CHECK(diag.source_kl == doctest::Approx(0.0));

    // Without budgets, the realized fill doubles as the budget column.
    auto diag2 = compute_diagnostics(selected, pool_src, pool_tgt, dist, D, {});
    CHECK(diag2.per_cluster[0].budget == diag2.per_cluster[0].filled);
    CHECK(diag2.discrete_loss_weighted == diag.discrete_loss_weighted);

    // A lopsided selection has positive source KL.
    std::vector<std::uint64_t> lop = {0, 1, 2, 3};  // 3 from cluster 0, 1 from 1
    auto diag3 = compute_diagnostics(lop, pool_src, pool_tgt, dist, D, {});
    CHECK(diag3.source_kl > 0.0);

    std::vector<std::uint64_t> oor = {0, 99};
    CHECK_THROWS_WITH_AS(compute_diagnostics(oor, pool_src, pool_tgt, dist, D, {}),
                         doctest::Contains("99"), std::runtime_error);
}

TEST_CASE("apply_diameters fills the bound fields") {
    std::vector<std::uint32_t> val_src = {0, 0, 0, 1};
    std::vector<std::uint32_t> val_tgt = {0, 0, 0, 0};
    auto dist = estimate_distribution(val_src, val_tgt, 2, 1);
    auto D = matrix_from(1, {0.0});
    std::vector<std::uint64_t> selected = {0};
    std::vector<std::uint32_t> pool_src = {0};
    std::vector<std::uint32_t> pool_tgt = {0};
    auto diag = compute_diagnostics(selected, pool_src, pool_tgt, dist, D, {});
    std::vector<double> diam = {2.0, 4.0};
    apply_diameters(diag, dist, diam, 1.5);
    CHECK(diag.weighted_diameter == doctest::Approx(0.75 * 2.0 + 0.25 * 4.0));
    CHECK(diag.diameter_bound == doctest::Approx(1.5 * 2.5 + diag.source_kl));
    CHECK(diag.per_cluster[0].epsilon == doctest::Approx(2.0));
    CHECK(diag.per_cluster[1].epsilon == doctest::Approx(4.0));
}

TEST_CASE("diagnostics_to_json exposes the expected keys") {
    Diagnostics diag;
    diag.discrete_loss_weighted = 0.25;
    diag.discrete_loss_unweighted = 0.5;
    diag.source_kl = 0.01;
    diag.weighted_diameter = 1.5;
    diag.diameter_bound = 2.0;
    diag.per_cluster.push_back({0, 0.6, 3, 3, 0.7});
    auto json = diagnostics_to_json(diag);
    for (const char* key :
         {"\"discrete_loss\"", "\"discrete_loss_weighted\"", "\"discrete_loss_unweighted\"",
          "\"source_kl\"", "\"weighted_diameter\"", "\"diameter_bound\"", "\"per_cluster\"",
          "\"cluster\"", "\"budget\"", "\"filled\"", "\"epsilon\""}) {
        INFO(key);
        CHECK(json.find(key) != std::string::npos);
    }
}
