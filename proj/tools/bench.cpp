// Benchmark of the OpenMP kernels against the serial reference
// implementations, checking agreement while timing both.

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "craft/kernels.hpp"
#include "craft/rng.hpp"
#include "craft/vector_set.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double time_call(const std::function<void()>& fn, int repeats) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto start = Clock::now();
        fn();
        const double s = std::chrono::duration<double>(Clock::now() - start).count();
        if (s < best) best = s;
    }
    return best;
}

craft::VectorSet random_dense(std::uint64_t rows, std::uint64_t dim, std::uint64_t seed) {
    craft::VectorSet vs;
    vs.count = rows;
    vs.dim = dim;
    vs.dense.resize(rows * dim);
    craft::SplitMix64 rng(seed);
    for (auto& v : vs.dense) v = float(craft::uniform01(rng) * 2.0 - 1.0);
    return vs;
}

craft::VectorSet random_sparse(std::uint64_t rows, std::uint64_t dim, std::uint64_t nnz_per_row,
                               std::uint64_t seed) {
    craft::VectorSet vs;
    vs.count = rows;
    vs.dim = dim;
    vs.storage = craft::VectorSet::Storage::sparse;
    vs.indptr.resize(rows + 1);
    craft::SplitMix64 rng(seed);
    std::vector<std::uint32_t> cols;
    for (std::uint64_t r = 0; r < rows; ++r) {
        cols.clear();
        for (std::uint64_t j = 0; j < nnz_per_row; ++j)
            cols.push_back(std::uint32_t(craft::uniform_below(rng, dim)));
        std::sort(cols.begin(), cols.end());
        cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
        for (std::uint32_t c : cols) {
            vs.cols.push_back(c);
            vs.vals.push_back(float(craft::uniform01(rng) * 2.0 - 1.0));
        }
        vs.indptr[r + 1] = vs.cols.size();
    }
    return vs;
}

std::vector<float> random_centroids(std::size_t k, std::uint64_t dim, std::uint64_t seed) {
    std::vector<float> c(k * dim);
    craft::SplitMix64 rng(seed);
    for (auto& v : c) v = float(craft::uniform01(rng) * 2.0 - 1.0);
    return c;
}

void report(const std::string& name, double serial_s, double parallel_s, bool identical) {
    std::printf("%-22s serial %8.4fs  openmp %8.4fs  speedup %5.2fx  identical=%s\n",
                name.c_str(), serial_s, parallel_s, serial_s / parallel_s,
                identical ? "yes" : "NO");
}

void bench_assign(const craft::VectorSet& vs, std::size_t k, int repeats,
                  const std::string& name) {
    const std::vector<float> centroids = random_centroids(k, vs.dim, 99);
    std::vector<std::uint32_t> a_ser(vs.count), a_par(vs.count);
    std::vector<double> d_ser(vs.count), d_par(vs.count);

    const double s = time_call(
        [&] { craft::assign_rows_serial(vs, centroids.data(), k, a_ser.data(), d_ser.data()); },
        repeats);
    const double p = time_call(
        [&] { craft::assign_rows(vs, centroids.data(), k, a_par.data(), d_par.data()); },
        repeats);
    report(name, s, p, a_ser == a_par);
}

void bench_accumulate(const craft::VectorSet& vs, std::size_t k, int repeats,
                      const std::string& name) {
    const std::vector<float> centroids = random_centroids(k, vs.dim, 99);
    std::vector<std::uint32_t> assign(vs.count);
    craft::assign_rows(vs, centroids.data(), k, assign.data(), nullptr);

    std::vector<double> sums_ser(k * vs.dim), sums_par(k * vs.dim);
    std::vector<std::uint64_t> counts_ser(k), counts_par(k);
    const double s = time_call(
        [&] {
            craft::accumulate_clusters_serial(vs, assign.data(), k, sums_ser.data(),
                                              counts_ser.data());
        },
        repeats);
    const double p = time_call(
        [&] { craft::accumulate_clusters(vs, assign.data(), k, sums_par.data(),
                                         counts_par.data()); },
        repeats);
    bool same = counts_ser == counts_par;
    for (std::size_t i = 0; same && i < sums_ser.size(); ++i)
        if (std::abs(sums_ser[i] - sums_par[i]) > 1e-9 * (1.0 + std::abs(sums_ser[i])))
            same = false;
    report(name, s, p, same);
}

}  // namespace

int main(int argc, char** argv) {
    std::uint64_t rows = 200000;
    std::uint64_t dim = 64;
    std::size_t clusters = 64;
    int repeats = 3;
    int threads = 0;

    CLI::App app{"Kernel benchmark: serial reference vs OpenMP"};
    app.add_option("--rows", rows, "Row count");
    app.add_option("--dim", dim, "Dimensionality");
    app.add_option("--clusters", clusters, "Centroid count");
    app.add_option("--repeats", repeats, "Repetitions (best time kept)");
    app.add_option("--threads", threads, "Worker thread cap (0 = default)");
    CLI11_PARSE(app, argc, argv);

    if (threads > 0) {
        omp_set_dynamic(0);
        omp_set_num_threads(threads);
    }
    std::printf("rows=%llu dim=%llu clusters=%zu threads=%d\n",
                (unsigned long long)rows, (unsigned long long)dim, clusters,
                omp_get_max_threads());

    const craft::VectorSet dense = random_dense(rows, dim, 7);
    bench_assign(dense, clusters, repeats, "assign dense");
    bench_accumulate(dense, clusters, repeats, "accumulate dense");

    const craft::VectorSet sparse = random_sparse(rows, dim * 16, 12, 11);
    bench_assign(sparse, clusters, repeats, "assign sparse");
    bench_accumulate(sparse, clusters, repeats, "accumulate sparse");
    return 0;
}
