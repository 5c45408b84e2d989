#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace craft {

// Homogeneous collection of row vectors, one per sentence side.
// Dense rows are stored row-major; sparse rows are CSR with columns
// sorted ascending and no duplicates within a row.
struct VectorSet {
    enum class Storage { dense, sparse };

    std::uint64_t count = 0;
    std::uint64_t dim = 0;
    Storage storage = Storage::dense;
    bool normalized = false;  // every non-zero row has unit L2 norm

    std::vector<float> dense;  // count*dim when dense

    std::vector<std::uint64_t> indptr;  // count+1 when sparse
    std::vector<std::uint32_t> cols;
    std::vector<float> vals;

    bool is_dense() const { return storage == Storage::dense; }

    const float* dense_row(std::uint64_t r) const { return dense.data() + r * dim; }

    std::uint64_t row_nnz(std::uint64_t r) const;
    bool row_is_zero(std::uint64_t r) const { return row_nnz(r) == 0; }
    std::uint64_t count_zero_rows() const;

    std::span<const std::uint32_t> sparse_cols(std::uint64_t r) const {
        return {cols.data() + indptr[r], cols.data() + indptr[r + 1]};
    }
    std::span<const float> sparse_vals(std::uint64_t r) const {
        return {vals.data() + indptr[r], vals.data() + indptr[r + 1]};
    }
};

VectorSet make_dense(std::uint64_t count, std::uint64_t dim, std::vector<float> values);

// Scales every non-zero row to unit L2 norm; zero rows are left unchanged.
// Idempotent up to rounding.
VectorSet l2_normalize(VectorSet vs);

// Squared Euclidean distance between two rows (possibly from different sets).
// Both sets must share storage kind and dimensionality.
double row_sqdist(const VectorSet& a, std::uint64_t ra, const VectorSet& b, std::uint64_t rb);

double row_sqnorm(const VectorSet& vs, std::uint64_t r);

// Per-pair concatenation: row r of the result is [a_r | b_r]. Counts must
// match and the storage kinds must agree.
VectorSet hconcat(const VectorSet& a, const VectorSet& b);

// Throws if structural invariants are violated (CSR shape, sorted unique
// columns, finite values, unit norms when flagged normalized).
void check_valid(const VectorSet& vs);

}  // namespace craft
