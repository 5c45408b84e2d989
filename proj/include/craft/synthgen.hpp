#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "craft/vector_set.hpp"

namespace craft {

// Paired Gaussian-mixture generator. Component means sit on a fixed lattice
// scaled to the noise level; each pair draws a source component uniformly and,
// with probability `coupling`, a target component given by a seeded
// permutation of the source component (otherwise an independent uniform one).
struct SyntheticConfig {
    std::size_t n_components = 8;
    std::size_t dim_s = 1;
    std::size_t dim_t = 1;
    double coupling = 0.8;  // fraction of pairs with conditioned targets
    double noise_sigma = 0.05;
    std::uint64_t n_validation = 1000;
    std::uint64_t n_pool = 10000;
    std::uint64_t seed = 0;
};

enum class SynthPart {
    validation_source,
    validation_target,
    pool_source,
    pool_target,
};

struct SyntheticData {
    SyntheticConfig config;
    VectorSet validation_source;
    VectorSet validation_target;
    VectorSet pool_source;
    VectorSet pool_target;
    std::vector<std::uint32_t> validation_source_labels;
    std::vector<std::uint32_t> validation_target_labels;
    std::vector<std::uint32_t> pool_source_labels;
    std::vector<std::uint32_t> pool_target_labels;
    std::vector<float> source_means;  // n_components x dim_s
    std::vector<float> target_means;  // n_components x dim_t
    std::vector<std::uint32_t> coupling_map;
};

// Component means for one side, on the scaled lattice.
std::vector<float> component_means(const SyntheticConfig& cfg, std::size_t dim);

// The seeded source-component -> target-component permutation.
std::vector<std::uint32_t> coupling_map(const SyntheticConfig& cfg);

// Materialize one of the four vector sets independently (each pair owns
// derived RNG streams, so parts agree regardless of which are generated).
// `labels_out`, when given, receives that side's component labels.
VectorSet generate_part(const SyntheticConfig& cfg, SynthPart part,
                        std::vector<std::uint32_t>* labels_out = nullptr);

// All four parts plus labels, means, and the coupling map.
SyntheticData generate(const SyntheticConfig& cfg);

// CSV "source,target,role" of all validation pairs plus the selected pool
// pairs; requires 1-D sides.
void emit_scatter(const VectorSet& val_src, const VectorSet& val_tgt, const VectorSet& sel_src,
                  const VectorSet& sel_tgt, const std::string& path);

// Mean over selected pool pairs of |target - E[target | source component]|,
// against the generator's analytic conditional mean. Requires dim_t = 1.
double conditional_concentration(const SyntheticData& data,
                                 std::span<const std::uint64_t> selected_pool_indices);

}  // namespace craft
