#include "craft/kmeans.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "craft/kernels.hpp"
#include "craft/log.hpp"
#include "craft/rng.hpp"
#include "craft/vector_io.hpp"

namespace craft {

namespace {

void copy_row_to(const VectorSet& vs, std::uint64_t r, float* dst) {
    std::memset(dst, 0, vs.dim * sizeof(float));
    if (vs.is_dense()) {
        std::memcpy(dst, vs.dense_row(r), vs.dim * sizeof(float));
    } else {
        for (std::uint64_t p = vs.indptr[r]; p < vs.indptr[r + 1]; ++p)
            dst[vs.cols[p]] = vs.vals[p];
    }
}

// k-means++: each next center drawn with probability proportional to the
// squared distance to the nearest already-chosen center.
std::vector<float> init_plus_plus(const VectorSet& vs, std::size_t k, std::uint64_t seed) {
    const std::uint64_t n = vs.count;
    const std::size_t dim = vs.dim;
    std::mt19937_64 rng(seed);
    std::vector<float> centroids(k * dim, 0.0f);
    std::vector<char> chosen(n, 0);

    const std::uint64_t first = uniform_below(rng, n);
    copy_row_to(vs, first, centroids.data());
    chosen[first] = 1;

    std::vector<double> minsq(n, std::numeric_limits<double>::infinity());
    update_min_sqdist(vs, centroids.data(), minsq.data());

    for (std::size_t c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::uint64_t r = 0; r < n; ++r) total += minsq[r];

        std::uint64_t pick = n;
        if (total > 0.0) {
            const double target = uniform01(rng) * total;
            double cum = 0.0;
            for (std::uint64_t r = 0; r < n; ++r) {
                cum += minsq[r];
                if (cum > target) {
                    pick = r;
                    break;
                }
            }
            if (pick == n) {  // rounding pushed the target past the last mass
                for (std::uint64_t r = n; r-- > 0;)
                    if (minsq[r] > 0.0) {
                        pick = r;
                        break;
                    }
            }
        }
        if (pick == n) {  // all remaining mass zero: duplicates of chosen points
            for (std::uint64_t r = 0; r < n; ++r)
                if (!chosen[r]) {
                    pick = r;
                    break;
                }
            if (pick == n) pick = 0;
        }
        chosen[pick] = 1;
        copy_row_to(vs, pick, centroids.data() + c * dim);
        update_min_sqdist(vs, centroids.data() + c * dim, minsq.data());
    }
    return centroids;
}

// One k-means++ init plus Lloyd iterations; the restart loop in kmeans_fit
// picks the best of several of these.
KMeansModel fit_single(const VectorSet& vs, const KMeansConfig& cfg, std::uint64_t init_seed,
                       std::vector<std::uint32_t>& out_assign) {
    const std::uint64_t n = vs.count;
    const std::size_t k = cfg.k;
    const std::size_t dim = vs.dim;

    KMeansModel model;
    model.k = k;
    model.dim = dim;
    model.seed = cfg.seed;
    model.centroids = init_plus_plus(vs, k, init_seed);

    std::vector<std::uint32_t> assign(n);
    std::vector<double> sqdist(n);
    std::vector<double> sums(k * dim);
    std::vector<std::uint64_t> counts(k);

    double prev_inertia = std::numeric_limits<double>::infinity();
    for (std::size_t iter = 1; iter <= cfg.max_iters; ++iter) {
        assign_rows(vs, model.centroids.data(), k, assign.data(), sqdist.data());
        double inertia = 0.0;
        for (std::uint64_t r = 0; r < n; ++r) inertia += sqdist[r];
        model.inertia_history.push_back(inertia);
        model.inertia = inertia;
        model.iterations_run = iter;

        accumulate_clusters(vs, assign.data(), k, sums.data(), counts.data());
        bool has_empty = false;
        for (std::size_t c = 0; c < k; ++c)
            if (counts[c] == 0) has_empty = true;

        const bool converged =
            inertia == 0.0 ||
            (iter > 1 && prev_inertia > 0.0 && (prev_inertia - inertia) / prev_inertia < cfg.tol);
        if ((converged && !has_empty) || iter == cfg.max_iters) {
            if (has_empty)
                log_warn("kmeans_fit: " + std::to_string(k) + " clusters requested but " +
                         "some ended empty at max_iters");
            break;
        }
        prev_inertia = inertia;

        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;
            float* dst = model.centroids.data() + c * dim;
            const double* src = sums.data() + c * dim;
            const double inv = 1.0 / double(counts[c]);
            for (std::size_t j = 0; j < dim; ++j) dst[j] = float(src[j] * inv);
        }
        if (has_empty) {
            // reseed each empty cluster from the point farthest from its centroid
            std::vector<char> used(n, 0);
            for (std::size_t c = 0; c < k; ++c) {
                if (counts[c] != 0) continue;
                std::uint64_t farthest = 0;
                double best = -1.0;
                for (std::uint64_t r = 0; r < n; ++r)
                    if (!used[r] && sqdist[r] > best) {
                        best = sqdist[r];
                        farthest = r;
                    }
                used[farthest] = 1;
                copy_row_to(vs, farthest, model.centroids.data() + c * dim);
            }
        }
    }

    out_assign = std::move(assign);
    return model;
}

}  // namespace

KMeansModel kmeans_fit(const VectorSet& vs, const KMeansConfig& cfg,
                       std::vector<std::uint32_t>* out_assign) {
    if (cfg.k < 1) throw std::runtime_error("kmeans_fit: k must be at least 1");
    if (cfg.max_iters < 1) throw std::runtime_error("kmeans_fit: max_iters must be at least 1");
    if (cfg.restarts < 1) throw std::runtime_error("kmeans_fit: restarts must be at least 1");
    if (vs.count < cfg.k)
        throw std::runtime_error("kmeans_fit: " + std::to_string(vs.count) +
                                 " points cannot form " + std::to_string(cfg.k) + " clusters");

    KMeansModel best;
    std::vector<std::uint32_t> best_assign, assign;
    for (std::size_t r = 0; r < cfg.restarts; ++r) {
        auto model = fit_single(vs, cfg, derive_seed(cfg.seed, 0x6B6D, r), assign);
        if (r == 0 || model.inertia < best.inertia) {
            best = std::move(model);
            best_assign.swap(assign);
        }
        if (best.inertia == 0.0) break;  // no restart can improve on zero
    }
    if (out_assign) *out_assign = std::move(best_assign);
    return best;
}

std::vector<std::uint32_t> assign_nearest(const KMeansModel& model, const VectorSet& vs) {
    if (vs.dim != model.dim)
        throw std::runtime_error("assign_nearest: vector dim " + std::to_string(vs.dim) +
                                 " does not match model dim " + std::to_string(model.dim));
    std::vector<std::uint32_t> out(vs.count);
    assign_rows(vs, model.centroids.data(), model.k, out.data(), nullptr);
    return out;
}

namespace {

double row_to_centroid_dist(const VectorSet& vs, std::uint64_t r, const float* c,
                            std::size_t dim) {
    double s = 0.0;
    if (vs.is_dense()) {
        const float* x = vs.dense_row(r);
        for (std::size_t j = 0; j < dim; ++j) {
            const double d = double(x[j]) - double(c[j]);
            s += d * d;
        }
    } else {
        double cnorm = 0.0, dot = 0.0, xnorm = 0.0;
        for (std::size_t j = 0; j < dim; ++j) cnorm += double(c[j]) * c[j];
        for (std::uint64_t p = vs.indptr[r]; p < vs.indptr[r + 1]; ++p) {
            const double v = vs.vals[p];
            xnorm += v * v;
            dot += v * double(c[vs.cols[p]]);
        }
        s = xnorm - 2.0 * dot + cnorm;
        if (s < 0.0) s = 0.0;
    }
    return std::sqrt(s);
}

}  // namespace

std::vector<DiameterEstimate> cluster_diameters(const KMeansModel& model, const VectorSet& vs,
                                                std::span<const std::uint32_t> assignment,
                                                std::size_t exact_cap) {
    if (assignment.size() != vs.count)
        throw std::runtime_error("cluster_diameters: assignment length mismatch");

    std::vector<std::vector<std::uint64_t>> members(model.k);
    for (std::uint64_t r = 0; r < vs.count; ++r) members[assignment[r]].push_back(r);

    std::vector<DiameterEstimate> out(model.k);
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t c = 0; c < std::int64_t(model.k); ++c) {
        const auto& rows = members[c];
        if (rows.size() < 2) {
            out[c] = {0.0, true};
            continue;
        }
        if (rows.size() <= exact_cap) {
            double best = 0.0;
            for (std::size_t i = 0; i + 1 < rows.size(); ++i)
                for (std::size_t j = i + 1; j < rows.size(); ++j)
                    best = std::max(best, row_sqdist(vs, rows[i], vs, rows[j]));
            out[c] = {std::sqrt(best), true};
        } else {
            double radius = 0.0;
            for (std::uint64_t r : rows)
                radius = std::max(radius, row_to_centroid_dist(vs, r, model.centroid(c),
                                                               model.dim));
            out[c] = {2.0 * radius, false};
        }
    }
    return out;
}

void save_kmeans_model(const KMeansModel& model, const std::string& prefix) {
    VectorSet centroids;
    centroids.count = model.k;
    centroids.dim = model.dim;
    centroids.dense = model.centroids;
    save_vectors(centroids, prefix + ".centroids.bin");

    nlohmann::json meta{{"k", model.k},
                        {"dim", model.dim},
                        {"inertia", model.inertia},
                        {"seed", model.seed},
                        {"iterations_run", model.iterations_run}};
    std::ofstream out(prefix + ".meta.json", std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write model metadata: " + prefix + ".meta.json");
    out << meta.dump(2) << "\n";
}

KMeansModel load_kmeans_model(const std::string& prefix) {
    const VectorSet centroids = load_vectors(prefix + ".centroids.bin");
    std::ifstream in(prefix + ".meta.json");
    if (!in) throw std::runtime_error("cannot open model metadata: " + prefix + ".meta.json");
    nlohmann::json meta = nlohmann::json::parse(in);

    KMeansModel model;
    model.k = meta.at("k").get<std::size_t>();
    model.dim = meta.at("dim").get<std::size_t>();
    model.inertia = meta.at("inertia").get<double>();
    model.seed = meta.at("seed").get<std::uint64_t>();
    model.iterations_run = meta.at("iterations_run").get<std::size_t>();
    if (model.k != centroids.count || model.dim != centroids.dim)
        throw std::runtime_error("model metadata disagrees with centroid file: " + prefix);
    model.centroids = centroids.dense;
    return model;
}

}  // namespace craft
