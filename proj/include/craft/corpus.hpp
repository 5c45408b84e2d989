#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace craft {

struct SentencePair {
    std::uint64_t id = 0;  // zero-based index within its corpus
    std::string source;
    std::string target;
};

enum class CorpusRole { validation, pool };

struct ParallelCorpus {
    std::vector<SentencePair> pairs;
    CorpusRole role = CorpusRole::pool;

    std::uint64_t size() const { return pairs.size(); }
};

enum class CorpusFormat { tsv, jsonl };

// TSV: exactly one tab per row, no header. JSONL: one object per line with
// string fields "source" and "target"; unknown fields ignored. Rows whose
// source or target is empty after whitespace trim are errors (skipping them
// would shift pool indices between runs).
ParallelCorpus load_corpus(const std::string& path, CorpusFormat format,
                           CorpusRole role = CorpusRole::pool);

// First m pairs become the validation corpus, the remainder the pool; both
// are re-indexed from zero. Requires 0 < m < corpus size.
std::pair<ParallelCorpus, ParallelCorpus> split_head(const ParallelCorpus& corpus,
                                                     std::uint64_t m);

}  // namespace craft
