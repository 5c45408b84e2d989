#include "craft/tfidf.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "craft/log.hpp"

namespace craft {

namespace {

bool is_space_cp(std::uint32_t cp) {
    if ((cp >= 0x09 && cp <= 0x0D) || cp == 0x20 || cp == 0x85 || cp == 0xA0) return true;
    if (cp == 0x1680 || (cp >= 0x2000 && cp <= 0x200A)) return true;
    return cp == 0x2028 || cp == 0x2029 || cp == 0x202F || cp == 0x205F || cp == 0x3000;
}

bool is_punct_cp(std::uint32_t cp) {
    if (cp < 0x80)
        return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
               (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
    if ((cp >= 0xA1 && cp <= 0xBF) || cp == 0xD7 || cp == 0xF7) return true;
    if (cp == 0x060C || cp == 0x060D || cp == 0x061B || cp == 0x061E || cp == 0x061F ||
        cp == 0x06D4)
        return true;  // Arabic separators
    if (cp == 0x0964 || cp == 0x0965) return true;  // Devanagari danda
    if (cp >= 0x2000 && cp <= 0x206F) return true;  // general punctuation
    if (cp >= 0x2E00 && cp <= 0x2E7F) return true;
    if (cp >= 0x3001 && cp <= 0x303F) return true;  // CJK punctuation
    if (cp >= 0xFE50 && cp <= 0xFE6F) return true;
    if ((cp >= 0xFF01 && cp <= 0xFF0F) || (cp >= 0xFF1A && cp <= 0xFF20) ||
        (cp >= 0xFF3B && cp <= 0xFF40) || (cp >= 0xFF5B && cp <= 0xFF65))
        return true;  // fullwidth forms
    return false;
}

// Decode one UTF-8 codepoint at position i; on invalid input consume one
// byte and report it as a boundary.
bool decode_cp(std::string_view s, std::size_t i, std::uint32_t& cp, std::size_t& len) {
    const unsigned char b0 = (unsigned char)s[i];
    if (b0 < 0x80) {
        cp = b0;
        len = 1;
        return true;
    }
    std::size_t need;
    std::uint32_t acc;
    if ((b0 >> 5) == 0x6) {
        need = 1;
        acc = b0 & 0x1F;
    } else if ((b0 >> 4) == 0xE) {
        need = 2;
        acc = b0 & 0x0F;
    } else if ((b0 >> 3) == 0x1E) {
        need = 3;
        acc = b0 & 0x07;
    } else {
        len = 1;
        return false;
    }
    if (i + need >= s.size()) {
        len = 1;
        return false;
    }
    for (std::size_t j = 1; j <= need; ++j) {
        const unsigned char bj = (unsigned char)s[i + j];
        if ((bj >> 6) != 0x2) {
            len = 1;
            return false;
        }
        acc = (acc << 6) | (bj & 0x3F);
    }
    cp = acc;
    len = need + 1;
    return true;
}

// Append the codepoint's bytes to `token`, lowercasing ASCII and Latin-1.
void append_lowered(std::string& token, std::string_view s, std::size_t i, std::size_t len,
                    std::uint32_t cp) {
    if (len == 1) {
        char c = s[i];
        if (c >= 'A' && c <= 'Z') c = char(c + 32);
        token.push_back(c);
        return;
    }
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) {  // Latin-1 uppercase
        const std::uint32_t low = cp + 0x20;
        token.push_back(char(0xC0 | (low >> 6)));
        token.push_back(char(0x80 | (low & 0x3F)));
        return;
    }
    token.append(s.substr(i, len));
}

template <class F>
void for_each_token(std::string_view text, std::string& token, F&& emit) {
    token.clear();
    std::size_t i = 0;
    while (i < text.size()) {
        std::uint32_t cp = 0;
        std::size_t len = 1;
        const bool valid = decode_cp(text, i, cp, len);
        const bool boundary = !valid || is_space_cp(cp) || is_punct_cp(cp);
        if (boundary) {
            if (!token.empty()) {
                emit(std::string_view(token));
                token.clear();
            }
        } else {
            append_lowered(token, text, i, len, cp);
        }
        i += len;
    }
    if (!token.empty()) {
        emit(std::string_view(token));
        token.clear();
    }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> out;
    std::string buf;
    for_each_token(text, buf, [&](std::string_view tok) { out.emplace_back(tok); });
    return out;
}

double Vocabulary::idf(std::uint32_t col) const {
    return std::log((1.0 + double(total_documents)) / (1.0 + double(doc_frequency[col]))) + 1.0;
}

Vocabulary fit_tfidf(std::span<const std::string_view> docs, std::size_t max_vocab) {
    if (docs.empty()) throw std::runtime_error("fit_tfidf: zero documents");
    if (max_vocab < 1) throw std::runtime_error("fit_tfidf: max_vocab must be at least 1");

    std::unordered_map<std::string, std::uint64_t, StringHash, std::equal_to<>> df;
    std::string buf;
    std::vector<std::string> doc_terms;
    for (std::string_view doc : docs) {
        doc_terms.clear();
        for_each_token(doc, buf, [&](std::string_view tok) { doc_terms.emplace_back(tok); });
        std::sort(doc_terms.begin(), doc_terms.end());
        doc_terms.erase(std::unique(doc_terms.begin(), doc_terms.end()), doc_terms.end());
        for (auto& t : doc_terms) {
            auto it = df.find(std::string_view(t));
            if (it == df.end())
                df.emplace(std::move(t), 1);
            else
                ++it->second;
        }
    }
    if (df.empty()) throw std::runtime_error("fit_tfidf: no retained terms");

    std::vector<std::pair<std::string, std::uint64_t>> entries;
    entries.reserve(df.size());
    for (auto& kv : df) entries.emplace_back(kv.first, kv.second);
    if (entries.size() > max_vocab) {
        std::sort(entries.begin(), entries.end(), [](const auto& x, const auto& y) {
            if (x.second != y.second) return x.second > y.second;
            return x.first < y.first;
        });
        entries.resize(max_vocab);
        log_info("fit_tfidf: vocabulary truncated to " + std::to_string(max_vocab) + " terms");
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });

    Vocabulary vocab;
    vocab.total_documents = docs.size();
    vocab.terms.reserve(entries.size());
    vocab.doc_frequency.reserve(entries.size());
    for (std::uint32_t col = 0; col < entries.size(); ++col) {
        vocab.terms.push_back(entries[col].first);
        vocab.doc_frequency.push_back(entries[col].second);
        vocab.term_to_col.emplace(entries[col].first, col);
    }
    return vocab;
}

VectorSet transform_tfidf(const Vocabulary& vocab, std::span<const std::string_view> docs) {
    if (vocab.terms.empty()) throw std::runtime_error("transform_tfidf: empty vocabulary");

    const std::size_t n = docs.size();
    std::vector<std::vector<std::pair<std::uint32_t, float>>> rows(n);
    std::uint64_t zero_rows = 0;

#pragma omp parallel reduction(+ : zero_rows)
    {
        std::string buf;
        std::vector<std::uint32_t> cols;
#pragma omp for schedule(dynamic, 256)
        for (std::int64_t r = 0; r < std::int64_t(n); ++r) {
            cols.clear();
            for_each_token(docs[std::size_t(r)], buf, [&](std::string_view tok) {
                auto it = vocab.term_to_col.find(tok);
                if (it != vocab.term_to_col.end()) cols.push_back(it->second);
            });
            if (cols.empty()) {
                ++zero_rows;
                continue;
            }
            std::sort(cols.begin(), cols.end());
            auto& row = rows[std::size_t(r)];
            std::size_t p = 0;
            double sqnorm = 0.0;
            while (p < cols.size()) {
                std::size_t q = p;
                while (q < cols.size() && cols[q] == cols[p]) ++q;
                const double w = double(q - p) * vocab.idf(cols[p]);
                row.emplace_back(cols[p], float(w));
                sqnorm += w * w;
                p = q;
            }
            const double inv = 1.0 / std::sqrt(sqnorm);
            for (auto& cv : row) cv.second = float(double(cv.second) * inv);
        }
    }

    if (zero_rows > 0)
        log_warn("transform_tfidf: " + std::to_string(zero_rows) +
                 " all-out-of-vocabulary documents became zero rows");

    VectorSet vs;
    vs.count = n;
    vs.dim = vocab.size();
    vs.storage = VectorSet::Storage::sparse;
    vs.normalized = true;
    vs.indptr.resize(n + 1);
    vs.indptr[0] = 0;
    std::uint64_t nnz = 0;
    for (std::size_t r = 0; r < n; ++r) {
        nnz += rows[r].size();
        vs.indptr[r + 1] = nnz;
    }
    vs.cols.reserve(nnz);
    vs.vals.reserve(nnz);
    for (std::size_t r = 0; r < n; ++r) {
        for (const auto& cv : rows[r]) {
            vs.cols.push_back(cv.first);
            vs.vals.push_back(cv.second);
        }
    }
    return vs;
}

std::vector<std::string_view> side_documents(const ParallelCorpus& corpus, CorpusSide side) {
    std::vector<std::string_view> docs;
    docs.reserve(corpus.pairs.size());
    for (const auto& pair : corpus.pairs)
        docs.push_back(side == CorpusSide::source ? std::string_view(pair.source)
                                                  : std::string_view(pair.target));
    return docs;
}

void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
    nlohmann::json j;
    j["total_documents"] = vocab.total_documents;
    nlohmann::json terms = nlohmann::json::array();
    for (std::uint32_t col = 0; col < vocab.terms.size(); ++col)
        terms.push_back(
            {{"term", vocab.terms[col]}, {"df", vocab.doc_frequency[col]}, {"col", col}});
    j["terms"] = std::move(terms);
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write vocabulary: " + path);
    out << j.dump(2) << "\n";
}

Vocabulary load_vocabulary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open vocabulary: " + path);
    nlohmann::json j = nlohmann::json::parse(in);

    Vocabulary vocab;
    vocab.total_documents = j.at("total_documents").get<std::uint64_t>();
    const auto& terms = j.at("terms");
    vocab.terms.resize(terms.size());
    vocab.doc_frequency.resize(terms.size());
    std::vector<char> seen(terms.size(), 0);
    for (const auto& t : terms) {
        const std::uint32_t col = t.at("col").get<std::uint32_t>();
        if (col >= vocab.terms.size() || seen[col])
            throw std::runtime_error("vocabulary columns not contiguous in " + path);
        seen[col] = 1;
        vocab.terms[col] = t.at("term").get<std::string>();
        vocab.doc_frequency[col] = t.at("df").get<std::uint64_t>();
        vocab.term_to_col.emplace(vocab.terms[col], col);
    }
    return vocab;
}

}  // namespace craft
