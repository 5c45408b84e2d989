#include "craft/synthgen.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "craft/rng.hpp"

namespace craft {

namespace {

void check_config(const SyntheticConfig& cfg) {
    if (cfg.n_components < 1) throw std::runtime_error("synthgen: n_components must be >= 1");
    if (cfg.dim_s < 1 || cfg.dim_t < 1) throw std::runtime_error("synthgen: dims must be >= 1");
    if (cfg.coupling < 0.0 || cfg.coupling > 1.0)
        throw std::runtime_error("synthgen: coupling must lie in [0, 1]");
    if (cfg.noise_sigma < 0.0) throw std::runtime_error("synthgen: noise_sigma must be >= 0");
    if (cfg.n_validation < 1 || cfg.n_pool < 1)
        throw std::runtime_error("synthgen: sizes must be >= 1");
}

// RNG stream ids: labels, source noise, and target noise are separate
// sub-streams per pair so any single part can be materialized alone.
constexpr std::uint64_t kStreamValidation = 1;
constexpr std::uint64_t kStreamPool = 2;
constexpr std::uint64_t kNoiseSourceOffset = 10;
constexpr std::uint64_t kNoiseTargetOffset = 20;
constexpr std::uint64_t kCouplingStream = 99;

struct PairComponents {
    std::uint32_t src;
    std::uint32_t tgt;
};

PairComponents pair_components(const SyntheticConfig& cfg,
                               std::span<const std::uint32_t> sigma, std::uint64_t stream,
                               std::uint64_t index) {
    SplitMix64 rng(derive_seed(cfg.seed, stream, index));
    PairComponents pc;
    pc.src = std::uint32_t(uniform_below(rng, cfg.n_components));
    if (uniform01(rng) < cfg.coupling)
        pc.tgt = sigma[pc.src];
    else
        pc.tgt = std::uint32_t(uniform_below(rng, cfg.n_components));
    return pc;
}

void fill_noisy_point(const SyntheticConfig& cfg, const float* mean, std::size_t dim,
                      std::uint64_t noise_stream, std::uint64_t index, float* out) {
    SplitMix64 rng(derive_seed(cfg.seed, noise_stream, index));
    for (std::size_t j = 0; j < dim; j += 2) {
        double z0, z1;
        normal_pair(rng, z0, z1);
        out[j] = float(double(mean[j]) + cfg.noise_sigma * z0);
        if (j + 1 < dim) out[j + 1] = float(double(mean[j + 1]) + cfg.noise_sigma * z1);
    }
}

}  // namespace

std::vector<float> component_means(const SyntheticConfig& cfg, std::size_t dim) {
    check_config(cfg);
    // smallest lattice side that fits every component
    std::size_t side = 1;
    while (true) {
        double cells = 1.0;
        for (std::size_t j = 0; j < dim && cells < double(cfg.n_components); ++j)
            cells *= double(side);
        if (cells >= double(cfg.n_components)) break;
        ++side;
    }
    const double spacing = cfg.noise_sigma > 0.0 ? 10.0 * cfg.noise_sigma : 1.0;
    std::vector<float> means(cfg.n_components * dim, 0.0f);
    for (std::size_t c = 0; c < cfg.n_components; ++c) {
        std::size_t digits = c;
        for (std::size_t j = 0; j < dim; ++j) {
            means[c * dim + j] = float(spacing * double(digits % side));
            digits /= side;
        }
    }
    return means;
}

std::vector<std::uint32_t> coupling_map(const SyntheticConfig& cfg) {
    check_config(cfg);
    std::vector<std::uint32_t> sigma(cfg.n_components);
    for (std::size_t c = 0; c < cfg.n_components; ++c) sigma[c] = std::uint32_t(c);
    SplitMix64 rng(derive_seed(cfg.seed, kCouplingStream));
    for (std::size_t i = cfg.n_components; i > 1; --i) {
        const std::uint64_t j = uniform_below(rng, i);
        std::swap(sigma[i - 1], sigma[j]);
    }
    return sigma;
}

VectorSet generate_part(const SyntheticConfig& cfg, SynthPart part,
                        std::vector<std::uint32_t>* labels_out) {
    check_config(cfg);
    const bool is_validation =
        part == SynthPart::validation_source || part == SynthPart::validation_target;
    const bool is_source = part == SynthPart::validation_source || part == SynthPart::pool_source;
    const std::uint64_t n = is_validation ? cfg.n_validation : cfg.n_pool;
    const std::size_t dim = is_source ? cfg.dim_s : cfg.dim_t;
    const std::uint64_t stream = is_validation ? kStreamValidation : kStreamPool;
    const std::uint64_t noise_stream =
        stream + (is_source ? kNoiseSourceOffset : kNoiseTargetOffset);

    const std::vector<float> means = component_means(cfg, dim);
    const std::vector<std::uint32_t> sigma = coupling_map(cfg);

    VectorSet vs;
    vs.count = n;
    vs.dim = dim;
    vs.storage = VectorSet::Storage::dense;
    vs.dense.resize(n * dim);
    std::vector<std::uint32_t> labels(n);

#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < std::int64_t(n); ++i) {
        const PairComponents pc = pair_components(cfg, sigma, stream, std::uint64_t(i));
        const std::uint32_t comp = is_source ? pc.src : pc.tgt;
        labels[std::size_t(i)] = comp;
        fill_noisy_point(cfg, means.data() + std::size_t(comp) * dim, dim, noise_stream,
                         std::uint64_t(i), vs.dense.data() + std::uint64_t(i) * dim);
    }

    if (labels_out) *labels_out = std::move(labels);
    return vs;
}

SyntheticData generate(const SyntheticConfig& cfg) {
    SyntheticData data;
    data.config = cfg;
    data.validation_source =
        generate_part(cfg, SynthPart::validation_source, &data.validation_source_labels);
    data.validation_target =
        generate_part(cfg, SynthPart::validation_target, &data.validation_target_labels);
    data.pool_source = generate_part(cfg, SynthPart::pool_source, &data.pool_source_labels);
    data.pool_target = generate_part(cfg, SynthPart::pool_target, &data.pool_target_labels);
    data.source_means = component_means(cfg, cfg.dim_s);
    data.target_means = component_means(cfg, cfg.dim_t);
    data.coupling_map = coupling_map(cfg);
    return data;
}

void emit_scatter(const VectorSet& val_src, const VectorSet& val_tgt, const VectorSet& sel_src,
                  const VectorSet& sel_tgt, const std::string& path) {
    for (const VectorSet* vs : {&val_src, &val_tgt, &sel_src, &sel_tgt}) {
        if (vs->dim != 1)
            throw std::runtime_error(
                "emit_scatter: sides must be 1-D for plotting (got dim " +
                std::to_string(vs->dim) +
                "); generate with --dim-s 1 --dim-t 1 or project down first");
        if (!vs->is_dense()) throw std::runtime_error("emit_scatter: expects dense vectors");
    }
    if (val_src.count != val_tgt.count || sel_src.count != sel_tgt.count)
        throw std::runtime_error("emit_scatter: paired sides differ in length");

    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("emit_scatter: cannot write " + path);
    out.precision(9);  // float round-trip
    out << "source,target,role\n";
    for (std::uint64_t i = 0; i < val_src.count; ++i)
        out << val_src.dense[i] << "," << val_tgt.dense[i] << ",validation\n";
    for (std::uint64_t i = 0; i < sel_src.count; ++i)
        out << sel_src.dense[i] << "," << sel_tgt.dense[i] << ",selected\n";
    if (!out) throw std::runtime_error("emit_scatter: write failed for " + path);
}

double conditional_concentration(const SyntheticData& data,
                                 std::span<const std::uint64_t> selected_pool_indices) {
    const SyntheticConfig& cfg = data.config;
    if (cfg.dim_t != 1)
        throw std::runtime_error("conditional_concentration: requires dim_t = 1");
    if (selected_pool_indices.empty())
        throw std::runtime_error("conditional_concentration: empty selection");

    double mean_of_means = 0.0;
    for (std::size_t b = 0; b < cfg.n_components; ++b)
        mean_of_means += double(data.target_means[b]);
    mean_of_means /= double(cfg.n_components);

    double acc = 0.0;
    for (std::uint64_t idx : selected_pool_indices) {
        if (idx >= data.pool_target.count)
            throw std::runtime_error("conditional_concentration: index " + std::to_string(idx) +
                                     " out of range");
        const std::uint32_t a = data.pool_source_labels[idx];
        const double cm = cfg.coupling * double(data.target_means[data.coupling_map[a]]) +
                          (1.0 - cfg.coupling) * mean_of_means;
        acc += std::abs(double(data.pool_target.dense[idx]) - cm);
    }
    return acc / double(selected_pool_indices.size());
}

}  // namespace craft
