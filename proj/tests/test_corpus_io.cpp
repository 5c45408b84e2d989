#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "craft/corpus.hpp"
#include "craft/selection_io.hpp"
#include "craft/vector_io.hpp"
#include "test_util.hpp"

using namespace craft;
using testutil::TempDir;
using testutil::read_file;
using testutil::write_file;

TEST_CASE("load_corpus parses TSV rows in order") {
    TempDir tmp;
    auto path = tmp.file("c.tsv");
    write_file(path, "hello world\tनमस्ते दुनिया\nsecond src\tsecond tgt\n");
    auto corpus = load_corpus(path, CorpusFormat::tsv, CorpusRole::validation);
    REQUIRE(corpus.size() == 2);
    CHECK(corpus.role == CorpusRole::validation);
    CHECK(corpus.pairs[0].id == 0);
    CHECK(corpus.pairs[0].source == "hello world");
    CHECK(corpus.pairs[0].target == "नमस्ते दुनिया");
    CHECK(corpus.pairs[1].id == 1);
    CHECK(corpus.pairs[1].target == "second tgt");
}

TEST_CASE("load_corpus rejects malformed TSV rows with the row number") {
    TempDir tmp;
    SUBCASE("two tabs") {
        auto path = tmp.file("bad.tsv");
        write_file(path, "a\tb\tc\n");
        CHECK_THROWS_WITH_AS(load_corpus(path, CorpusFormat::tsv),
                             doctest::Contains("row 1"), std::runtime_error);
    }
    SUBCASE("no tab") {
        auto path = tmp.file("bad2.tsv");
        write_file(path, "ok src\tok tgt\nno tab here\n");
        CHECK_THROWS_WITH_AS(load_corpus(path, CorpusFormat::tsv),
                             doctest::Contains("row 2"), std::runtime_error);
    }
    SUBCASE("empty side") {
        auto path = tmp.file("bad3.tsv");
        write_file(path, "src\t   \n");
        CHECK_THROWS_AS(load_corpus(path, CorpusFormat::tsv), std::runtime_error);
    }
}

TEST_CASE("load_corpus parses JSONL rows and ignores extra fields") {
    TempDir tmp;
    auto path = tmp.file("c.jsonl");
    write_file(path,
               "{\"source\": \"one\", \"target\": \"uno\", \"score\": 0.5}\n"
               "{\"target\": \"dos\", \"source\": \"two\"}\n"
               "{\"source\": \"three\", \"target\": \"tres\"}\n");
    auto corpus = load_corpus(path, CorpusFormat::jsonl);
    REQUIRE(corpus.size() == 3);
    CHECK(corpus.pairs[0].source == "one");
    CHECK(corpus.pairs[1].target == "dos");
    CHECK(corpus.pairs[2].id == 2);
}

TEST_CASE("load_corpus rejects JSONL rows with non-string fields") {
    TempDir tmp;
    auto path = tmp.file("bad.jsonl");
    write_file(path, "{\"source\": 12, \"target\": \"x\"}\n");
    CHECK_THROWS_WITH_AS(load_corpus(path, CorpusFormat::jsonl),
                         doctest::Contains("row 1"), std::runtime_error);
}

TEST_CASE("load_corpus rejects an empty file and a missing file") {
    TempDir tmp;
    auto path = tmp.file("empty.tsv");
    write_file(path, "");
    CHECK_THROWS_AS(load_corpus(path, CorpusFormat::tsv), std::runtime_error);
    CHECK_THROWS_AS(load_corpus(tmp.file("nope.tsv"), CorpusFormat::tsv), std::runtime_error);
}

TEST_CASE("split_head produces re-indexed validation and pool halves") {
    TempDir tmp;
    auto path = tmp.file("c.tsv");
    write_file(path, "s0\tt0\ns1\tt1\ns2\tt2\ns3\tt3\ns4\tt4\n");
    auto corpus = load_corpus(path, CorpusFormat::tsv);
    auto [val, pool] = split_head(corpus, 2);
    REQUIRE(val.size() == 2);
    REQUIRE(pool.size() == 3);
    CHECK(val.role == CorpusRole::validation);
    CHECK(pool.role == CorpusRole::pool);
    CHECK(val.pairs[1].source == "s1");
    CHECK(val.pairs[1].id == 1);
    CHECK(pool.pairs[0].source == "s2");
    CHECK(pool.pairs[0].id == 0);  // pool indices restart at zero
    CHECK(pool.pairs[2].target == "t4");

    CHECK_THROWS_AS(split_head(corpus, 0), std::runtime_error);
    CHECK_THROWS_AS(split_head(corpus, 5), std::runtime_error);
    CHECK_THROWS_AS(split_head(corpus, 6), std::runtime_error);
}

TEST_CASE("save_selection writes sorted indices plus a diagnostics sidecar") {
    TempDir tmp;
    SelectionResult result;
    result.indices = {4, 1, 9};
    result.diagnostics.discrete_loss_weighted = 0.25;
    result.diagnostics.source_kl = 0.01;
    auto path = tmp.file("sel.txt");
    save_selection(result, path);

    CHECK(read_file(path) == "1\n4\n9\n");
    auto sidecar = read_file(path + ".diag.json");
    CHECK(sidecar.find("\"discrete_loss\"") != std::string::npos);
    CHECK(sidecar.find("0.25") != std::string::npos);
}

TEST_CASE("load_selection round-trips and reports malformed lines") {
    TempDir tmp;
    auto path = tmp.file("sel.txt");
    write_file(path, "1\n4\n9\n");
    auto idx = load_selection(path);
    CHECK(idx == std::vector<std::uint64_t>{1, 4, 9});

    write_file(path, "1\nfour\n9\n");
    CHECK_THROWS_WITH_AS(load_selection(path), doctest::Contains("line 2"), std::runtime_error);

    write_file(path, "1\n\n9\n");
    CHECK_THROWS_WITH_AS(load_selection(path), doctest::Contains("line 2"), std::runtime_error);

    // Windows line endings are tolerated.
    write_file(path, "3\r\n7\r\n");
    CHECK(load_selection(path) == std::vector<std::uint64_t>{3, 7});
}

namespace {

VectorSet small_dense() {
    VectorSet vs;
    vs.storage = VectorSet::Storage::dense;
    vs.count = 3;
    vs.dim = 2;
    vs.dense = {1.0f, 2.0f, -0.5f, 0.25f, 3.0f, -4.0f};
    return vs;
}

VectorSet small_sparse() {
    VectorSet vs;
    vs.storage = VectorSet::Storage::sparse;
    vs.count = 3;
    vs.dim = 10;
    vs.indptr = {0, 2, 2, 5};
    vs.cols = {1, 7, 0, 4, 9};
    vs.vals = {0.5f, -1.5f, 2.0f, 0.125f, 8.0f};
    return vs;
}

}  // namespace

TEST_CASE("dense vector files round-trip exactly") {
    TempDir tmp;
    auto path = tmp.file("v.vec");
    auto vs = small_dense();
    save_vectors(vs, path);
    auto back = load_vectors(path);
    REQUIRE(back.storage == VectorSet::Storage::dense);
    CHECK(back.count == vs.count);
    CHECK(back.dim == vs.dim);
    CHECK(back.dense == vs.dense);
}

TEST_CASE("sparse vector files round-trip exactly") {
    TempDir tmp;
    auto path = tmp.file("v.spv");
    auto vs = small_sparse();
    save_vectors(vs, path);
    auto back = load_vectors(path);
    REQUIRE(back.storage == VectorSet::Storage::sparse);
    CHECK(back.indptr == vs.indptr);
    CHECK(back.cols == vs.cols);
    CHECK(back.vals == vs.vals);
}

TEST_CASE("text vector files round-trip through the auto-detecting loader") {
    TempDir tmp;
    auto path = tmp.file("v.txt");
    auto vs = small_dense();
    save_dense_vectors_text(vs, path);
    auto text = read_file(path);
    CHECK(text.rfind("CVECT 3 2", 0) == 0);
    auto back = load_vectors(path);
    REQUIRE(back.storage == VectorSet::Storage::dense);
    CHECK(back.count == 3);
    CHECK(back.dim == 2);
    for (std::size_t i = 0; i < vs.dense.size(); ++i)
        CHECK(back.dense[i] == doctest::Approx(vs.dense[i]).epsilon(1e-6));
}

TEST_CASE("load_vectors rejects truncated payloads") {
    TempDir tmp;
    auto path = tmp.file("v.vec");
    save_vectors(small_dense(), path);
    auto bytes = read_file(path);
    write_file(path, bytes.substr(0, bytes.size() - 4));
    CHECK_THROWS_AS(load_vectors(path), std::runtime_error);
}

TEST_CASE("load_vectors rejects trailing garbage") {
    TempDir tmp;
    auto path = tmp.file("v.vec");
    save_vectors(small_dense(), path);
    auto bytes = read_file(path);
    write_file(path, bytes + "xx");
    CHECK_THROWS_AS(load_vectors(path), std::runtime_error);
}

TEST_CASE("load_vectors names the row holding a non-finite value") {
    TempDir tmp;
    auto path = tmp.file("v.vec");
    auto vs = small_dense();
    vs.dense[2 * 2 + 1] = std::nanf("");  // row 2, col 1
    // Bypass save-side validation by writing the file manually.
    std::string payload;
    payload.append("CVEC1", 6);  // includes the trailing NUL
    std::uint64_t count = vs.count, dim = vs.dim;
    payload.append(reinterpret_cast<const char*>(&count), 8);
    payload.append(reinterpret_cast<const char*>(&dim), 8);
    payload.append(reinterpret_cast<const char*>(vs.dense.data()),
                   vs.dense.size() * sizeof(float));
    write_file(path, payload);
    CHECK_THROWS_WITH_AS(load_vectors(path), doctest::Contains("row 2"), std::runtime_error);
}

TEST_CASE("load_vectors rejects unknown magic") {
    TempDir tmp;
    auto path = tmp.file("v.bin");
    write_file(path, "NOTAVEC000000000000");
    CHECK_THROWS_AS(load_vectors(path), std::runtime_error);
}
