#pragma once

#include <string>

#include "craft/vector_set.hpp"

namespace craft {

// Dense binary: magic "CVEC1\0", little-endian u64 count, u64 dim, then
// f32 row-major payload. Sparse binary: magic "CSPV1\0", u64 count, u64 dim,
// u64 nnz, u64 indptr[count+1], u32 cols[nnz], f32 vals[nnz]. Loaders reject
// truncated payloads and non-finite values, naming the offending row.

void save_vectors(const VectorSet& vs, const std::string& path);

// Auto-detects dense vs sparse (and the text format) by the leading magic.
VectorSet load_vectors(const std::string& path);

// Equivalent debug text format: "CVECT <count> <dim>" header line followed
// by one whitespace-separated row per line.
void save_dense_vectors_text(const VectorSet& vs, const std::string& path);

}  // namespace craft
