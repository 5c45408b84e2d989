#pragma once

#include <cstdint>
#include <vector>

#include "craft/vector_set.hpp"

namespace craft {

// Data-parallel primitives shared by clustering and scoring. Every kernel
// is deterministic for any OpenMP thread count: parallelism is over rows
// (independent outputs) or over fixed-size chunks whose partial results
// are reduced serially in chunk order. The *_serial functions are naive
// reference implementations kept for testing and benchmarking.

inline constexpr std::size_t kAccumulateChunk = 4096;

// Nearest centroid per row in Euclidean distance, ties to the lowest
// centroid index. centroids is row-major k x dim. out_sqdist may be null.
void assign_rows(const VectorSet& vs, const float* centroids, std::size_t k,
                 std::uint32_t* out_assign, double* out_sqdist);

void assign_rows_serial(const VectorSet& vs, const float* centroids, std::size_t k,
                        std::uint32_t* out_assign, double* out_sqdist);

// Per-cluster coordinate sums and member counts for a given assignment.
// sums is k x dim doubles, counts is k entries; both are overwritten.
void accumulate_clusters(const VectorSet& vs, const std::uint32_t* assign, std::size_t k,
                         double* sums, std::uint64_t* counts);

void accumulate_clusters_serial(const VectorSet& vs, const std::uint32_t* assign, std::size_t k,
                                double* sums, std::uint64_t* counts);

// io_minsq[r] <- min(io_minsq[r], squared distance from row r to centroid).
// Used by the k-means++ seeding loop.
void update_min_sqdist(const VectorSet& vs, const float* centroid, double* io_minsq);

}  // namespace craft
