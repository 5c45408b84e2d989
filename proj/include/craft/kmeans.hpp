#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "craft/vector_set.hpp"

namespace craft {

struct KMeansConfig {
    std::size_t k = 1;
    std::size_t max_iters = 100;
    double tol = 1e-4;  // relative inertia improvement threshold
    std::uint64_t seed = 0;
    std::size_t restarts = 4;  // independent k-means++ initializations; best kept
};

struct KMeansModel {
    std::size_t k = 0;
    std::size_t dim = 0;
    std::vector<float> centroids;  // k x dim row-major
    double inertia = 0.0;
    std::size_t iterations_run = 0;
    std::uint64_t seed = 0;
    std::vector<double> inertia_history;  // one entry per Lloyd iteration

    const float* centroid(std::size_t c) const { return centroids.data() + c * dim; }
};

// k-means++ seeded Lloyd iterations until the relative inertia improvement
// drops below cfg.tol or cfg.max_iters is reached. Empty clusters are
// reseeded from the point farthest from its assigned centroid. Runs
// cfg.restarts independently seeded initializations and keeps the run with
// the lowest inertia (ties to the earliest), so a single unlucky init cannot
// wedge the fit in a poor local optimum. When out_assign is non-null it
// receives the assignment consistent with the returned centroids.
// Deterministic in (cfg.seed, cfg.restarts) for any thread count.
KMeansModel kmeans_fit(const VectorSet& vs, const KMeansConfig& cfg,
                       std::vector<std::uint32_t>* out_assign = nullptr);

// Index of the nearest centroid per row, ties to the lowest centroid index.
std::vector<std::uint32_t> assign_nearest(const KMeansModel& model, const VectorSet& vs);

struct DiameterEstimate {
    double value = 0.0;
    bool exact = true;  // false when the 2*max radius upper bound was used
};

// Per-cluster diameter: exact max pairwise distance when the member count is
// at most exact_cap, otherwise the upper bound 2 * max ||point - centroid||.
std::vector<DiameterEstimate> cluster_diameters(const KMeansModel& model, const VectorSet& vs,
                                                std::span<const std::uint32_t> assignment,
                                                std::size_t exact_cap = 2000);

// Persistence: centroids in the dense vector binary at <prefix>.centroids.bin
// plus metadata at <prefix>.meta.json.
void save_kmeans_model(const KMeansModel& model, const std::string& prefix);
KMeansModel load_kmeans_model(const std::string& prefix);

}  // namespace craft
