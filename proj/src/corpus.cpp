#include "craft/corpus.hpp"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace craft {

namespace {

bool blank(const std::string& s) {
    for (char c : s)
        if (c != ' ' && c != '\t' && c != '\r' && c != '\n' && c != '\f' && c != '\v') return false;
    return true;
}

[[noreturn]] void row_error(const std::string& path, std::uint64_t row, const std::string& what) {
    throw std::runtime_error(path + ": row " + std::to_string(row) + ": " + what);
}

}  // namespace

ParallelCorpus load_corpus(const std::string& path, CorpusFormat format, CorpusRole role) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open corpus file: " + path);

    ParallelCorpus corpus;
    corpus.role = role;

    std::string line;
    std::uint64_t row = 0;  // 1-based for messages
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();

        std::string source, target;
        if (format == CorpusFormat::tsv) {
            const auto tab = line.find('\t');
            if (tab == std::string::npos) row_error(path, row, "expected one tab, found none");
            if (line.find('\t', tab + 1) != std::string::npos)
                row_error(path, row, "expected exactly one tab, found more");
            source = line.substr(0, tab);
            target = line.substr(tab + 1);
        } else {
            nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
            if (obj.is_discarded()) row_error(path, row, "invalid JSON");
            if (!obj.is_object() || !obj.contains("source") || !obj.contains("target") ||
                !obj["source"].is_string() || !obj["target"].is_string())
                row_error(path, row, "expected string fields \"source\" and \"target\"");
            source = obj["source"].get<std::string>();
            target = obj["target"].get<std::string>();
        }

        if (blank(source)) row_error(path, row, "empty source side");
        if (blank(target)) row_error(path, row, "empty target side");

        corpus.pairs.push_back({corpus.pairs.size(), std::move(source), std::move(target)});
    }
    if (corpus.pairs.empty()) throw std::runtime_error(path + ": empty corpus");
    return corpus;
}

std::pair<ParallelCorpus, ParallelCorpus> split_head(const ParallelCorpus& corpus,
                                                     std::uint64_t m) {
    if (m == 0) throw std::runtime_error("split_head: validation size must be positive");
    if (m >= corpus.size())
        throw std::runtime_error("split_head: validation size " + std::to_string(m) +
                                 " must be smaller than corpus size " +
                                 std::to_string(corpus.size()));

    ParallelCorpus validation, pool;
    validation.role = CorpusRole::validation;
    pool.role = CorpusRole::pool;
    validation.pairs.reserve(m);
    pool.pairs.reserve(corpus.size() - m);
    for (std::uint64_t i = 0; i < corpus.size(); ++i) {
        auto& dst = i < m ? validation : pool;
        dst.pairs.push_back(
            {dst.pairs.size(), corpus.pairs[i].source, corpus.pairs[i].target});
    }
    return {std::move(validation), std::move(pool)};
}

}  // namespace craft
