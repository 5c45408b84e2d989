#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "craft/corpus.hpp"
#include "craft/kmeans.hpp"
#include "craft/rng.hpp"
#include "craft/selection_io.hpp"
#include "craft/selector.hpp"
#include "craft/stats.hpp"
#include "craft/synthgen.hpp"
#include "craft/tfidf.hpp"
#include "craft/vector_io.hpp"
#include "craft/vector_set.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

void apply_threads(int threads) {
    if (threads > 0) {
        omp_set_dynamic(0);
        omp_set_num_threads(threads);
    }
}

std::size_t auto_cluster_count(std::uint64_t validation_size) {
    const auto root = std::size_t(std::floor(std::sqrt(double(validation_size))));
    return std::max<std::size_t>(1, std::min<std::size_t>(100, root));
}

craft::VectorSet slice_dense_rows(const craft::VectorSet& vs, std::uint64_t begin,
                                  std::uint64_t end) {
    craft::VectorSet out;
    out.count = end - begin;
    out.dim = vs.dim;
    out.storage = craft::VectorSet::Storage::dense;
    out.normalized = vs.normalized;
    out.dense.assign(vs.dense.begin() + std::ptrdiff_t(begin * vs.dim),
                     vs.dense.begin() + std::ptrdiff_t(end * vs.dim));
    return out;
}

craft::VectorSet gather_dense_rows(const craft::VectorSet& vs,
                                   const std::vector<std::uint64_t>& rows) {
    craft::VectorSet out;
    out.count = rows.size();
    out.dim = vs.dim;
    out.storage = craft::VectorSet::Storage::dense;
    out.normalized = vs.normalized;
    out.dense.reserve(rows.size() * vs.dim);
    for (std::uint64_t r : rows)
        out.dense.insert(out.dense.end(), vs.dense.begin() + std::ptrdiff_t(r * vs.dim),
                         vs.dense.begin() + std::ptrdiff_t((r + 1) * vs.dim));
    return out;
}

struct VectorizeArgs {
    std::string corpus;
    std::string format = "tsv";
    std::uint64_t validation_size = 0;
    std::string vectorizer = "tfidf";
    std::string dense_source;
    std::string dense_target;
    std::size_t max_vocab = craft::kDefaultMaxVocab;
    bool normalize_dense = false;
    int threads = 0;
    std::string out_dir;
};

void run_vectorize(const VectorizeArgs& a) {
    apply_threads(a.threads);
    const craft::CorpusFormat format =
        a.format == "jsonl" ? craft::CorpusFormat::jsonl : craft::CorpusFormat::tsv;
    const craft::ParallelCorpus corpus = craft::load_corpus(a.corpus, format);
    auto [validation, pool] = craft::split_head(corpus, a.validation_size);

    const auto start = Clock::now();
    if (a.vectorizer == "tfidf") {
        for (const craft::CorpusSide side :
             {craft::CorpusSide::source, craft::CorpusSide::target}) {
            const bool is_source = side == craft::CorpusSide::source;
            std::vector<std::string_view> val_docs = craft::side_documents(validation, side);
            std::vector<std::string_view> pool_docs = craft::side_documents(pool, side);
            std::vector<std::string_view> all_docs;
            all_docs.reserve(val_docs.size() + pool_docs.size());
            all_docs.insert(all_docs.end(), val_docs.begin(), val_docs.end());
            all_docs.insert(all_docs.end(), pool_docs.begin(), pool_docs.end());

            const craft::Vocabulary vocab = craft::fit_tfidf(all_docs, a.max_vocab);
            const std::string side_name = is_source ? "source" : "target";
            craft::save_vocabulary(vocab, a.out_dir + "/vocab." + side_name + ".json");
            craft::save_vectors(craft::transform_tfidf(vocab, val_docs),
                                a.out_dir + "/validation." + side_name + ".vec");
            craft::save_vectors(craft::transform_tfidf(vocab, pool_docs),
                                a.out_dir + "/pool." + side_name + ".vec");
        }
    } else if (a.vectorizer == "dense-file") {
        if (a.dense_source.empty() || a.dense_target.empty())
            throw std::runtime_error(
                "vectorize: dense-file mode needs --dense-source and --dense-target");
        for (const bool is_source : {true, false}) {
            craft::VectorSet dense =
                craft::load_vectors(is_source ? a.dense_source : a.dense_target);
            if (dense.count != corpus.size())
                throw std::runtime_error("vectorize: dense vector count " +
                                         std::to_string(dense.count) +
                                         " does not match corpus size " +
                                         std::to_string(corpus.size()));
            if (!dense.is_dense())
                throw std::runtime_error("vectorize: dense-file mode expects dense vectors");
            if (a.normalize_dense) dense = craft::l2_normalize(std::move(dense));
            const std::string side_name = is_source ? "source" : "target";
            craft::save_vectors(slice_dense_rows(dense, 0, a.validation_size),
                                a.out_dir + "/validation." + side_name + ".vec");
            craft::save_vectors(slice_dense_rows(dense, a.validation_size, dense.count),
                                a.out_dir + "/pool." + side_name + ".vec");
        }
    } else {
        throw std::runtime_error("vectorize: unknown vectorizer \"" + a.vectorizer + "\"");
    }
    std::printf("vectorize_seconds=%.6f\n", seconds_since(start));
}

struct SelectArgs {
    std::string out_dir;
    std::size_t ms = 0;
    std::size_t mt = 0;
    std::uint64_t k = 0;
    std::uint64_t seed = 0;
    std::string method = "craft";
    double lipschitz = 1.0;
    std::string scatter;
    int threads = 0;
};

void run_select(const SelectArgs& a) {
    apply_threads(a.threads);
    const craft::VectorSet val_src = craft::load_vectors(a.out_dir + "/validation.source.vec");
    const craft::VectorSet val_tgt = craft::load_vectors(a.out_dir + "/validation.target.vec");
    const craft::VectorSet pool_src = craft::load_vectors(a.out_dir + "/pool.source.vec");
    const craft::VectorSet pool_tgt = craft::load_vectors(a.out_dir + "/pool.target.vec");
    if (val_src.count != val_tgt.count)
        throw std::runtime_error("select: validation sides differ in length");
    if (pool_src.count != pool_tgt.count)
        throw std::runtime_error("select: pool sides differ in length");

    const auto start = Clock::now();
    const std::size_t m_s = a.ms > 0 ? a.ms : auto_cluster_count(val_src.count);
    const std::size_t m_t = a.mt > 0 ? a.mt : auto_cluster_count(val_src.count);

    craft::KMeansConfig src_cfg;
    src_cfg.k = m_s;
    src_cfg.seed = craft::derive_seed(a.seed, 1);
    std::vector<std::uint32_t> val_src_assign;
    const craft::KMeansModel src_model = craft::kmeans_fit(val_src, src_cfg, &val_src_assign);

    craft::KMeansConfig tgt_cfg;
    tgt_cfg.k = m_t;
    tgt_cfg.seed = craft::derive_seed(a.seed, 2);
    std::vector<std::uint32_t> val_tgt_assign;
    const craft::KMeansModel tgt_model = craft::kmeans_fit(val_tgt, tgt_cfg, &val_tgt_assign);

    const std::vector<std::uint32_t> pool_src_assign = craft::assign_nearest(src_model, pool_src);
    const std::vector<std::uint32_t> pool_tgt_assign = craft::assign_nearest(tgt_model, pool_tgt);

    const craft::ValidationDistribution dist =
        craft::estimate_distribution(val_src_assign, val_tgt_assign, m_s, m_t);
    const craft::CentroidDistanceMatrix D = craft::centroid_distances(tgt_model);

    craft::SelectionResult result;
    if (a.method == "craft") {
        result = craft::select_craft(pool_src_assign, pool_tgt_assign, dist, D, a.k, a.seed);
    } else if (a.method == "random") {
        result = craft::select_random(pool_src.count, a.k, a.seed);
        result.diagnostics = craft::compute_diagnostics(result.indices, pool_src_assign,
                                                        pool_tgt_assign, dist, D, {});
    } else if (a.method == "joint-ablation") {
        const craft::VectorSet joint_val = craft::hconcat(val_src, val_tgt);
        const craft::VectorSet joint_pool = craft::hconcat(pool_src, pool_tgt);
        result = craft::select_joint_ablation(joint_val, joint_pool, m_s, a.k, a.seed);
        result.diagnostics = craft::compute_diagnostics(result.indices, pool_src_assign,
                                                        pool_tgt_assign, dist, D, {});
    } else {
        throw std::runtime_error("select: unknown method \"" + a.method + "\"");
    }

    const std::vector<craft::DiameterEstimate> diam =
        craft::cluster_diameters(src_model, val_src, val_src_assign);
    std::vector<double> eps(diam.size());
    for (std::size_t i = 0; i < diam.size(); ++i) eps[i] = diam[i].value;
    craft::apply_diameters(result.diagnostics, dist, eps, a.lipschitz);

    craft::save_selection(result, a.out_dir + "/selection.txt");
    craft::save_kmeans_model(src_model, a.out_dir + "/source.model");
    craft::save_kmeans_model(tgt_model, a.out_dir + "/target.model");

    if (!a.scatter.empty()) {
        if (!pool_src.is_dense() || !pool_tgt.is_dense())
            throw std::runtime_error("select: --scatter requires dense 1-D vectors");
        craft::emit_scatter(val_src, val_tgt, gather_dense_rows(pool_src, result.indices),
                            gather_dense_rows(pool_tgt, result.indices), a.scatter);
    }
    std::printf("select_seconds=%.6f\n", seconds_since(start));
}

struct EvaluateArgs {
    std::string out_dir;
    std::string selection;
    double lipschitz = 1.0;
    int threads = 0;
};

void run_evaluate(const EvaluateArgs& a) {
    apply_threads(a.threads);
    const craft::VectorSet val_src = craft::load_vectors(a.out_dir + "/validation.source.vec");
    const craft::VectorSet val_tgt = craft::load_vectors(a.out_dir + "/validation.target.vec");
    const craft::VectorSet pool_src = craft::load_vectors(a.out_dir + "/pool.source.vec");
    const craft::VectorSet pool_tgt = craft::load_vectors(a.out_dir + "/pool.target.vec");
    const craft::KMeansModel src_model = craft::load_kmeans_model(a.out_dir + "/source.model");
    const craft::KMeansModel tgt_model = craft::load_kmeans_model(a.out_dir + "/target.model");
    const std::vector<std::uint64_t> selection = craft::load_selection(a.selection);

    const std::vector<std::uint32_t> val_src_assign = craft::assign_nearest(src_model, val_src);
    const std::vector<std::uint32_t> val_tgt_assign = craft::assign_nearest(tgt_model, val_tgt);
    const std::vector<std::uint32_t> pool_src_assign = craft::assign_nearest(src_model, pool_src);
    const std::vector<std::uint32_t> pool_tgt_assign = craft::assign_nearest(tgt_model, pool_tgt);

    const craft::ValidationDistribution dist =
        craft::estimate_distribution(val_src_assign, val_tgt_assign, src_model.k, tgt_model.k);
    const craft::CentroidDistanceMatrix D = craft::centroid_distances(tgt_model);

    craft::Diagnostics diag = craft::compute_diagnostics(selection, pool_src_assign,
                                                         pool_tgt_assign, dist, D, {});
    const std::vector<craft::DiameterEstimate> diam =
        craft::cluster_diameters(src_model, val_src, val_src_assign);
    std::vector<double> eps(diam.size());
    for (std::size_t i = 0; i < diam.size(); ++i) eps[i] = diam[i].value;
    craft::apply_diameters(diag, dist, eps, a.lipschitz);

    std::cout << craft::diagnostics_to_json(diag) << "\n";
}

struct SynthArgs {
    std::string out_dir;
    std::size_t components = 8;
    double coupling = 0.8;
    double noise = 0.05;
    std::uint64_t n_validation = 1000;
    std::uint64_t n_pool = 10000;
    std::size_t dim_s = 1;
    std::size_t dim_t = 1;
    std::uint64_t seed = 0;
    std::string scatter;
    int threads = 0;
};

void run_synth(const SynthArgs& a) {
    apply_threads(a.threads);
    craft::SyntheticConfig cfg;
    cfg.n_components = a.components;
    cfg.coupling = a.coupling;
    cfg.noise_sigma = a.noise;
    cfg.n_validation = a.n_validation;
    cfg.n_pool = a.n_pool;
    cfg.dim_s = a.dim_s;
    cfg.dim_t = a.dim_t;
    cfg.seed = a.seed;

    std::ofstream labels(a.out_dir + "/labels.tsv", std::ios::trunc);
    if (!labels) throw std::runtime_error("synth: cannot write " + a.out_dir + "/labels.tsv");

    // one part at a time keeps peak memory near a single side's footprint
    std::vector<std::uint32_t> src_labels, tgt_labels;
    craft::VectorSet val_src =
        craft::generate_part(cfg, craft::SynthPart::validation_source, &src_labels);
    craft::VectorSet val_tgt =
        craft::generate_part(cfg, craft::SynthPart::validation_target, &tgt_labels);
    craft::save_vectors(val_src, a.out_dir + "/validation.source.vec");
    craft::save_vectors(val_tgt, a.out_dir + "/validation.target.vec");
    for (std::uint64_t i = 0; i < cfg.n_validation; ++i)
        labels << "validation\t" << i << "\t" << src_labels[i] << "\t" << tgt_labels[i] << "\n";

    if (!a.scatter.empty()) {
        craft::VectorSet empty_src, empty_tgt;
        empty_src.dim = empty_tgt.dim = 1;
        craft::emit_scatter(val_src, val_tgt, empty_src, empty_tgt, a.scatter);
    }
    val_src = craft::VectorSet{};
    val_tgt = craft::VectorSet{};

    {
        craft::VectorSet pool_src =
            craft::generate_part(cfg, craft::SynthPart::pool_source, &src_labels);
        craft::save_vectors(pool_src, a.out_dir + "/pool.source.vec");
    }
    {
        craft::VectorSet pool_tgt =
            craft::generate_part(cfg, craft::SynthPart::pool_target, &tgt_labels);
        craft::save_vectors(pool_tgt, a.out_dir + "/pool.target.vec");
    }
    for (std::uint64_t i = 0; i < cfg.n_pool; ++i)
        labels << "pool\t" << i << "\t" << src_labels[i] << "\t" << tgt_labels[i] << "\n";
    if (!labels) throw std::runtime_error("synth: write failed for labels.tsv");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CRAFT: validation-matched corpus subset selection"};
    app.require_subcommand(1);

    VectorizeArgs va;
    CLI::App* vectorize = app.add_subcommand("vectorize", "Vectorize a parallel corpus per side");
    vectorize->add_option("--corpus", va.corpus, "Parallel corpus file")->required();
    vectorize->add_option("--format", va.format, "Corpus format")
        ->check(CLI::IsMember({"tsv", "jsonl"}));
    vectorize->add_option("--validation-size", va.validation_size, "Head pairs used as validation")
        ->required();
    vectorize->add_option("--vectorizer", va.vectorizer, "Vector source")
        ->check(CLI::IsMember({"tfidf", "dense-file"}));
    vectorize->add_option("--dense-source", va.dense_source, "Dense source-side vector file");
    vectorize->add_option("--dense-target", va.dense_target, "Dense target-side vector file");
    vectorize->add_option("--max-vocab", va.max_vocab, "Vocabulary size cap");
    vectorize->add_flag("--normalize-dense", va.normalize_dense,
                        "L2-normalize ingested dense vectors");
    vectorize->add_option("--threads", va.threads, "Worker thread cap (0 = default)");
    vectorize->add_option("--out-dir", va.out_dir, "Output directory")->required();
    vectorize->callback([&] { run_vectorize(va); });

    SelectArgs sa;
    CLI::App* select = app.add_subcommand("select", "Cluster, allocate budgets, and select");
    select->add_option("--out-dir", sa.out_dir, "Directory with vector files; receives outputs")
        ->required();
    select->add_option("--ms", sa.ms, "Source clusters (0 = min(100, sqrt(M)))");
    select->add_option("--mt", sa.mt, "Target clusters (0 = min(100, sqrt(M)))");
    select->add_option("--k", sa.k, "Selection budget")->required();
    select->add_option("--seed", sa.seed, "Random seed");
    select->add_option("--method", sa.method, "Selection method")
        ->check(CLI::IsMember({"craft", "random", "joint-ablation"}));
    select->add_option("--lipschitz", sa.lipschitz, "Lipschitz constant for the bound");
    select->add_option("--scatter", sa.scatter, "Write a 1-D scatter CSV here");
    select->add_option("--threads", sa.threads, "Worker thread cap (0 = default)");
    select->callback([&] { run_select(sa); });

    EvaluateArgs ea;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Recompute diagnostics for a selection");
    evaluate->add_option("--out-dir", ea.out_dir, "Directory with vectors and models")
        ->required();
    evaluate->add_option("--selection", ea.selection, "Selection file to evaluate")->required();
    evaluate->add_option("--lipschitz", ea.lipschitz, "Lipschitz constant for the bound");
    evaluate->add_option("--threads", ea.threads, "Worker thread cap (0 = default)");
    evaluate->callback([&] { run_evaluate(ea); });

    SynthArgs ya;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic paired dataset");
    synth->add_option("--out-dir", ya.out_dir, "Output directory")->required();
    synth->add_option("--components", ya.components, "Mixture components");
    synth->add_option("--coupling", ya.coupling, "Fraction of conditioned pairs");
    synth->add_option("--noise", ya.noise, "Per-coordinate noise sigma");
    synth->add_option("--n-validation", ya.n_validation, "Validation pairs");
    synth->add_option("--n-pool", ya.n_pool, "Pool pairs");
    synth->add_option("--dim-s", ya.dim_s, "Source dimensionality");
    synth->add_option("--dim-t", ya.dim_t, "Target dimensionality");
    synth->add_option("--seed", ya.seed, "Random seed");
    synth->add_option("--scatter", ya.scatter, "Write a validation-only scatter CSV here");
    synth->add_option("--threads", ya.threads, "Worker thread cap (0 = default)");
    synth->callback([&] { run_synth(ya); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "craft: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
