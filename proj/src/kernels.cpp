#include "craft/kernels.hpp"

#include <algorithm>
#include <cstring>
#include <limits>
#include <stdexcept>

namespace craft {

namespace {

// Squared L2 from one dense row to one centroid. Double accumulation keeps
// the result within reassociation noise of the serial reference, so argmin
// ties between the two paths are out of reach for real data.
inline double dense_sqdist(const float* x, const float* c, std::size_t dim) {
    double acc = 0.0;
#pragma omp simd reduction(+ : acc)
    for (std::size_t j = 0; j < dim; ++j) {
        const double d = double(x[j]) - double(c[j]);
        acc += d * d;
    }
    return acc;
}

inline void centroid_sqnorms(const float* centroids, std::size_t k, std::size_t dim,
                             std::vector<double>& out) {
    out.resize(k);
    for (std::size_t c = 0; c < k; ++c) {
        double s = 0.0;
        const float* row = centroids + c * dim;
        for (std::size_t j = 0; j < dim; ++j) s += double(row[j]) * row[j];
        out[c] = s;
    }
}

// Sparse row against all centroids via ||x||^2 - 2 x.c + ||c||^2 with the
// centroid norms cached by the caller.
inline void sparse_row_best(const std::uint32_t* cols, const float* vals, std::size_t nnz,
                            double xnorm, const float* centroids, std::size_t k, std::size_t dim,
                            const double* cnorm, std::uint32_t* best, double* best_d) {
    std::uint32_t arg = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
        const float* crow = centroids + c * dim;
        double dot = 0.0;
        for (std::size_t p = 0; p < nnz; ++p) dot += double(vals[p]) * crow[cols[p]];
        const double d = xnorm - 2.0 * dot + cnorm[c];
        if (d < bd) {
            bd = d;
            arg = std::uint32_t(c);
        }
    }
    *best = arg;
    *best_d = bd < 0.0 ? 0.0 : bd;  // rounding can push tiny distances below zero
}

}  // namespace

void assign_rows(const VectorSet& vs, const float* centroids, std::size_t k,
                 std::uint32_t* out_assign, double* out_sqdist) {
    const std::size_t dim = vs.dim;
    if (vs.is_dense()) {
        const std::int64_t n = std::int64_t(vs.count);
#pragma omp parallel for schedule(static)
        for (std::int64_t r = 0; r < n; ++r) {
            const float* x = vs.dense.data() + std::uint64_t(r) * dim;
            std::uint32_t arg = 0;
            double bd = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                const double d = dense_sqdist(x, centroids + c * dim, dim);
                if (d < bd) {
                    bd = d;
                    arg = std::uint32_t(c);
                }
            }
            out_assign[r] = arg;
            if (out_sqdist) out_sqdist[r] = bd;
        }
    } else {
        std::vector<double> cnorm;
        centroid_sqnorms(centroids, k, dim, cnorm);
        const std::int64_t n = std::int64_t(vs.count);
#pragma omp parallel for schedule(static)
        for (std::int64_t r = 0; r < n; ++r) {
            const std::uint64_t lo = vs.indptr[r];
            const std::size_t nnz = std::size_t(vs.indptr[r + 1] - lo);
            double xnorm = 0.0;
            for (std::size_t p = 0; p < nnz; ++p) {
                const double v = vs.vals[lo + p];
                xnorm += v * v;
            }
            std::uint32_t arg;
            double bd;
            sparse_row_best(vs.cols.data() + lo, vs.vals.data() + lo, nnz, xnorm, centroids, k,
                            dim, cnorm.data(), &arg, &bd);
            out_assign[r] = arg;
            if (out_sqdist) out_sqdist[r] = bd;
        }
    }
}

void assign_rows_serial(const VectorSet& vs, const float* centroids, std::size_t k,
                        std::uint32_t* out_assign, double* out_sqdist) {
    const std::size_t dim = vs.dim;
    for (std::uint64_t r = 0; r < vs.count; ++r) {
        std::uint32_t arg = 0;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < k; ++c) {
            double d = 0.0;
            if (vs.is_dense()) {
                const float* x = vs.dense_row(r);
                const float* crow = centroids + c * dim;
                for (std::size_t j = 0; j < dim; ++j) {
                    const double t = double(x[j]) - double(crow[j]);
                    d += t * t;
                }
            } else {
                const float* crow = centroids + c * dim;
                auto rc = vs.sparse_cols(r);
                auto rv = vs.sparse_vals(r);
                std::size_t p = 0;
                for (std::size_t j = 0; j < dim; ++j) {
                    double x = 0.0;
                    if (p < rc.size() && rc[p] == j) x = rv[p++];
                    const double t = x - double(crow[j]);
                    d += t * t;
                }
            }
            if (d < bd) {
                bd = d;
                arg = std::uint32_t(c);
            }
        }
        out_assign[r] = arg;
        if (out_sqdist) out_sqdist[r] = bd;
    }
}

void accumulate_clusters(const VectorSet& vs, const std::uint32_t* assign, std::size_t k,
                         double* sums, std::uint64_t* counts) {
    const std::size_t dim = vs.dim;
    const std::uint64_t n = vs.count;
    // chunk count depends only on (n, k, dim), never the thread count; the
    // cap keeps the per-chunk slabs from outgrowing ~256MB at large k*dim
    std::uint64_t chunk_rows = kAccumulateChunk;
    const std::uint64_t max_chunks =
        std::max<std::uint64_t>(1, (256ull << 20) / std::max<std::uint64_t>(1, k * dim * 8));
    std::uint64_t nchunks = (n + chunk_rows - 1) / chunk_rows;
    if (nchunks > max_chunks) {
        chunk_rows = (n + max_chunks - 1) / max_chunks;
        nchunks = (n + chunk_rows - 1) / chunk_rows;
    }

    std::vector<double> slab(nchunks * k * dim, 0.0);
    std::vector<std::uint64_t> slab_counts(nchunks * k, 0);

#pragma omp parallel for schedule(static)
    for (std::int64_t ci = 0; ci < std::int64_t(nchunks); ++ci) {
        double* local = slab.data() + std::size_t(ci) * k * dim;
        std::uint64_t* lcnt = slab_counts.data() + std::size_t(ci) * k;
        const std::uint64_t lo = std::uint64_t(ci) * chunk_rows;
        const std::uint64_t hi = std::min<std::uint64_t>(lo + chunk_rows, n);
        for (std::uint64_t r = lo; r < hi; ++r) {
            const std::uint32_t a = assign[r];
            ++lcnt[a];
            double* dst = local + std::size_t(a) * dim;
            if (vs.is_dense()) {
                const float* x = vs.dense_row(r);
                for (std::size_t j = 0; j < dim; ++j) dst[j] += x[j];
            } else {
                for (std::uint64_t p = vs.indptr[r]; p < vs.indptr[r + 1]; ++p)
                    dst[vs.cols[p]] += vs.vals[p];
            }
        }
    }

    // serial reduction in chunk order keeps results independent of thread count
    std::memset(sums, 0, k * dim * sizeof(double));
    std::memset(counts, 0, k * sizeof(std::uint64_t));
    for (std::size_t ci = 0; ci < nchunks; ++ci) {
        const double* local = slab.data() + ci * k * dim;
        const std::uint64_t* lcnt = slab_counts.data() + ci * k;
        for (std::size_t i = 0; i < k * dim; ++i) sums[i] += local[i];
        for (std::size_t c = 0; c < k; ++c) counts[c] += lcnt[c];
    }
}

void accumulate_clusters_serial(const VectorSet& vs, const std::uint32_t* assign, std::size_t k,
                                double* sums, std::uint64_t* counts) {
    const std::size_t dim = vs.dim;
    std::memset(sums, 0, k * dim * sizeof(double));
    std::memset(counts, 0, k * sizeof(std::uint64_t));
    for (std::uint64_t r = 0; r < vs.count; ++r) {
        const std::uint32_t a = assign[r];
        ++counts[a];
        double* dst = sums + std::size_t(a) * dim;
        if (vs.is_dense()) {
            const float* x = vs.dense_row(r);
            for (std::size_t j = 0; j < dim; ++j) dst[j] += x[j];
        } else {
            for (std::uint64_t p = vs.indptr[r]; p < vs.indptr[r + 1]; ++p)
                dst[vs.cols[p]] += vs.vals[p];
        }
    }
}

void update_min_sqdist(const VectorSet& vs, const float* centroid, double* io_minsq) {
    const std::size_t dim = vs.dim;
    const std::int64_t n = std::int64_t(vs.count);
    if (vs.is_dense()) {
#pragma omp parallel for schedule(static)
        for (std::int64_t r = 0; r < n; ++r) {
            const double d = dense_sqdist(vs.dense.data() + std::uint64_t(r) * dim, centroid, dim);
            if (d < io_minsq[r]) io_minsq[r] = d;
        }
    } else {
        double cnorm = 0.0;
        for (std::size_t j = 0; j < dim; ++j) cnorm += double(centroid[j]) * centroid[j];
#pragma omp parallel for schedule(static)
        for (std::int64_t r = 0; r < n; ++r) {
            const std::uint64_t lo = vs.indptr[r];
            const std::uint64_t hi = vs.indptr[r + 1];
            double xnorm = 0.0, dot = 0.0;
            for (std::uint64_t p = lo; p < hi; ++p) {
                const double v = vs.vals[p];
                xnorm += v * v;
                dot += v * double(centroid[vs.cols[p]]);
            }
            double d = xnorm - 2.0 * dot + cnorm;
            if (d < 0.0) d = 0.0;
            if (d < io_minsq[r]) io_minsq[r] = d;
        }
    }
}

}  // namespace craft
