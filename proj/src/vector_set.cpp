#include "craft/vector_set.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace craft {

std::uint64_t VectorSet::row_nnz(std::uint64_t r) const {
    if (storage == Storage::sparse) return indptr[r + 1] - indptr[r];
    std::uint64_t n = 0;
    const float* row = dense_row(r);
    for (std::uint64_t j = 0; j < dim; ++j)
        if (row[j] != 0.0f) ++n;
    return n;
}

std::uint64_t VectorSet::count_zero_rows() const {
    std::uint64_t n = 0;
    for (std::uint64_t r = 0; r < count; ++r)
        if (row_is_zero(r)) ++n;
    return n;
}

VectorSet make_dense(std::uint64_t count, std::uint64_t dim, std::vector<float> values) {
    if (values.size() != count * dim)
        throw std::runtime_error("make_dense: expected " + std::to_string(count * dim) +
                                 " values, got " + std::to_string(values.size()));
    VectorSet vs;
    vs.count = count;
    vs.dim = dim;
    vs.storage = VectorSet::Storage::dense;
    vs.dense = std::move(values);
    return vs;
}

VectorSet l2_normalize(VectorSet vs) {
    if (vs.storage == VectorSet::Storage::dense) {
        for (std::uint64_t r = 0; r < vs.count; ++r) {
            float* row = vs.dense.data() + r * vs.dim;
            double s = 0.0;
            for (std::uint64_t j = 0; j < vs.dim; ++j) s += double(row[j]) * row[j];
            if (s > 0.0) {
                const float inv = float(1.0 / std::sqrt(s));
                for (std::uint64_t j = 0; j < vs.dim; ++j) row[j] *= inv;
            }
        }
    } else {
        for (std::uint64_t r = 0; r < vs.count; ++r) {
            double s = 0.0;
            for (std::uint64_t p = vs.indptr[r]; p < vs.indptr[r + 1]; ++p)
                s += double(vs.vals[p]) * vs.vals[p];
            if (s > 0.0) {
                const float inv = float(1.0 / std::sqrt(s));
                for (std::uint64_t p = vs.indptr[r]; p < vs.indptr[r + 1]; ++p) vs.vals[p] *= inv;
            }
        }
    }
    vs.normalized = true;
    return vs;
}

double row_sqnorm(const VectorSet& vs, std::uint64_t r) {
    double s = 0.0;
    if (vs.is_dense()) {
        const float* row = vs.dense_row(r);
        for (std::uint64_t j = 0; j < vs.dim; ++j) s += double(row[j]) * row[j];
    } else {
        for (std::uint64_t p = vs.indptr[r]; p < vs.indptr[r + 1]; ++p)
            s += double(vs.vals[p]) * vs.vals[p];
    }
    return s;
}

double row_sqdist(const VectorSet& a, std::uint64_t ra, const VectorSet& b, std::uint64_t rb) {
    if (a.dim != b.dim) throw std::runtime_error("row_sqdist: dimensionality mismatch");
    if (a.is_dense() && b.is_dense()) {
        const float* x = a.dense_row(ra);
        const float* y = b.dense_row(rb);
        double s = 0.0;
        for (std::uint64_t j = 0; j < a.dim; ++j) {
            const double d = double(x[j]) - double(y[j]);
            s += d * d;
        }
        return s;
    }
    if (!a.is_dense() && !b.is_dense()) {
        // merge join over sorted columns
        auto ca = a.sparse_cols(ra), cb = b.sparse_cols(rb);
        auto va = a.sparse_vals(ra), vb = b.sparse_vals(rb);
        std::size_t i = 0, j = 0;
        double s = 0.0;
        while (i < ca.size() && j < cb.size()) {
            if (ca[i] == cb[j]) {
                const double d = double(va[i]) - double(vb[j]);
                s += d * d;
                ++i;
                ++j;
            } else if (ca[i] < cb[j]) {
                s += double(va[i]) * va[i];
                ++i;
            } else {
                s += double(vb[j]) * vb[j];
                ++j;
            }
        }
        for (; i < ca.size(); ++i) s += double(va[i]) * va[i];
        for (; j < cb.size(); ++j) s += double(vb[j]) * vb[j];
        return s;
    }
    throw std::runtime_error("row_sqdist: mixed dense/sparse rows");
}

VectorSet hconcat(const VectorSet& a, const VectorSet& b) {
    if (a.count != b.count) throw std::runtime_error("hconcat: row counts differ");
    if (a.storage != b.storage) throw std::runtime_error("hconcat: storage kinds differ");
    VectorSet out;
    out.count = a.count;
    out.dim = a.dim + b.dim;
    out.storage = a.storage;
    if (a.is_dense()) {
        out.dense.resize(out.count * out.dim);
        for (std::uint64_t r = 0; r < out.count; ++r) {
            float* dst = out.dense.data() + r * out.dim;
            const float* xa = a.dense_row(r);
            const float* xb = b.dense_row(r);
            for (std::uint64_t j = 0; j < a.dim; ++j) dst[j] = xa[j];
            for (std::uint64_t j = 0; j < b.dim; ++j) dst[a.dim + j] = xb[j];
        }
    } else {
        out.indptr.resize(out.count + 1);
        out.indptr[0] = 0;
        out.cols.reserve(a.cols.size() + b.cols.size());
        out.vals.reserve(a.vals.size() + b.vals.size());
        const std::uint32_t off = std::uint32_t(a.dim);
        for (std::uint64_t r = 0; r < out.count; ++r) {
            for (std::uint64_t p = a.indptr[r]; p < a.indptr[r + 1]; ++p) {
                out.cols.push_back(a.cols[p]);
                out.vals.push_back(a.vals[p]);
            }
            for (std::uint64_t p = b.indptr[r]; p < b.indptr[r + 1]; ++p) {
                out.cols.push_back(b.cols[p] + off);
                out.vals.push_back(b.vals[p]);
            }
            out.indptr[r + 1] = out.cols.size();
        }
    }
    return out;
}

void check_valid(const VectorSet& vs) {
    if (vs.is_dense()) {
        if (vs.dense.size() != vs.count * vs.dim)
            throw std::runtime_error("VectorSet: dense payload size mismatch");
        for (std::uint64_t i = 0; i < vs.dense.size(); ++i)
            if (!std::isfinite(vs.dense[i]))
                throw std::runtime_error("VectorSet: non-finite value at row " +
                                         std::to_string(vs.dim ? i / vs.dim : 0));
    } else {
        if (vs.indptr.size() != vs.count + 1 || vs.indptr[0] != 0 ||
            vs.indptr[vs.count] != vs.cols.size() || vs.cols.size() != vs.vals.size())
            throw std::runtime_error("VectorSet: malformed CSR structure");
        for (std::uint64_t r = 0; r < vs.count; ++r) {
            for (std::uint64_t p = vs.indptr[r]; p < vs.indptr[r + 1]; ++p) {
                if (vs.cols[p] >= vs.dim)
                    throw std::runtime_error("VectorSet: column out of range at row " +
                                             std::to_string(r));
                if (p > vs.indptr[r] && vs.cols[p] <= vs.cols[p - 1])
                    throw std::runtime_error("VectorSet: unsorted/duplicate column at row " +
                                             std::to_string(r));
                if (!std::isfinite(vs.vals[p]))
                    throw std::runtime_error("VectorSet: non-finite value at row " +
                                             std::to_string(r));
            }
        }
    }
    if (vs.normalized) {
        for (std::uint64_t r = 0; r < vs.count; ++r) {
            const double n = std::sqrt(row_sqnorm(vs, r));
            if (n != 0.0 && std::abs(n - 1.0) > 1e-4)
                throw std::runtime_error("VectorSet: row " + std::to_string(r) +
                                         " flagged normalized but |v| = " + std::to_string(n));
        }
    }
}

}  // namespace craft
