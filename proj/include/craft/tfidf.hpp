#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "craft/corpus.hpp"
#include "craft/vector_set.hpp"

namespace craft {

// Lowercased word tokens: splits on Unicode whitespace and punctuation,
// keeps letters/digits/marks of any script. Lowercasing covers ASCII and
// Latin-1; other scripts pass through unchanged.
std::vector<std::string> tokenize(std::string_view text);

struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view sv) const {
        return std::hash<std::string_view>{}(sv);
    }
    std::size_t operator()(const std::string& s) const {
        return std::hash<std::string_view>{}(std::string_view(s));
    }
};

struct Vocabulary {
    std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>> term_to_col;
    std::vector<std::string> terms;            // by column; lexicographic order
    std::vector<std::uint64_t> doc_frequency;  // by column
    std::uint64_t total_documents = 0;

    std::size_t size() const { return terms.size(); }
    // idf(t) = ln((1 + N) / (1 + df(t))) + 1
    double idf(std::uint32_t col) const;
};

inline constexpr std::size_t kDefaultMaxVocab = 200000;

// Fit over all documents; when distinct terms exceed max_vocab, the highest
// document-frequency terms are kept (ties broken lexicographically).
Vocabulary fit_tfidf(std::span<const std::string_view> docs,
                     std::size_t max_vocab = kDefaultMaxVocab);

// Sparse tf*idf rows, L2-normalized; out-of-vocabulary terms are ignored and
// all-OOV documents come out as zero rows (counted in a warning).
VectorSet transform_tfidf(const Vocabulary& vocab, std::span<const std::string_view> docs);

enum class CorpusSide { source, target };

// One side of a corpus as documents, in pair order.
std::vector<std::string_view> side_documents(const ParallelCorpus& corpus, CorpusSide side);

void save_vocabulary(const Vocabulary& vocab, const std::string& path);
Vocabulary load_vocabulary(const std::string& path);

}  // namespace craft
