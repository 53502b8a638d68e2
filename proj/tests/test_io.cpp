#include <doctest.h>

#include <cmath>
#include <cstring>

#include "test_util.hpp"
#include "topeax/io.hpp"

using namespace topeax;
using test_util::TempDir;

namespace {

// Independent little-endian writer so the loader is not checked against its
// own serializer alone.
std::string raw_tpxe(std::uint32_t version, std::uint32_t rows, std::uint32_t cols,
                     const std::vector<float>& payload) {
    std::string out = "TPXE";
    auto put_u32 = [&out](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    };
    put_u32(version);
    put_u32(rows);
    put_u32(cols);
    for (float f : payload) {
        std::uint32_t bits;
        std::memcpy(&bits, &f, 4);
        put_u32(bits);
    }
    return out;
}

}  // namespace

TEST_CASE("TPXE loader reads the declared row-major layout") {
    TempDir dir("tpxe");
    test_util::spew(dir.file("m.tpxe"), raw_tpxe(1, 2, 3, {1, 2, 3, 4, 5, 6}));
    auto m = load_embedding_matrix(dir.file("m.tpxe"));
    CHECK(m.rows() == 2);
    CHECK(m.cols() == 3);
    CHECK(m(1, 2) == 6.0);
    CHECK(m(0, 0) == 1.0);
}

TEST_CASE("TPXE loader accepts empty matrices") {
    TempDir dir("tpxe");
    test_util::spew(dir.file("empty.tpxe"), raw_tpxe(1, 0, 3, {}));
    auto m = load_embedding_matrix(dir.file("empty.tpxe"));
    CHECK(m.rows() == 0);
    CHECK(m.empty());
}

TEST_CASE("TPXE loader rejects malformed files") {
    TempDir dir("tpxe");

    auto good = raw_tpxe(1, 2, 2, {1, 2, 3, 4});
    test_util::spew(dir.file("short.tpxe"), good.substr(0, good.size() - 4));
    CHECK_THROWS_WITH_AS(static_cast<void>(load_embedding_matrix(dir.file("short.tpxe"))),
                         doctest::Contains("truncated"), InputError);

    test_util::spew(dir.file("long.tpxe"), good + std::string(4, '\0'));
    CHECK_THROWS_AS(static_cast<void>(load_embedding_matrix(dir.file("long.tpxe"))), InputError);

    std::string bad_magic = good;
    bad_magic[0] = 'X';
    test_util::spew(dir.file("magic.tpxe"), bad_magic);
    CHECK_THROWS_WITH_AS(static_cast<void>(load_embedding_matrix(dir.file("magic.tpxe"))),
                         doctest::Contains("magic"), InputError);

    test_util::spew(dir.file("version.tpxe"), raw_tpxe(9, 1, 1, {1}));
    CHECK_THROWS_WITH_AS(static_cast<void>(load_embedding_matrix(dir.file("version.tpxe"))),
                         doctest::Contains("version"), InputError);

    test_util::spew(dir.file("nan.tpxe"), raw_tpxe(1, 1, 2, {1.0f, NAN}));
    CHECK_THROWS_WITH_AS(static_cast<void>(load_embedding_matrix(dir.file("nan.tpxe"))),
                         doctest::Contains("non-finite"), InputError);

    CHECK_THROWS_AS(static_cast<void>(load_embedding_matrix(dir.file("missing.tpxe"))),
                    InputError);
}

TEST_CASE("TPXE save/load round-trips at float precision") {
    TempDir dir("tpxe");
    auto m = test_util::random_matrix(7, 5, 99);
    // Quantize to float32 so the round-trip is exact.
    for (double& v : m.values()) v = static_cast<double>(static_cast<float>(v));
    save_embedding_matrix(m, dir.file("rt.tpxe"));
    auto back = load_embedding_matrix(dir.file("rt.tpxe"));
    CHECK(back == m);
}

TEST_CASE("corpus JSONL parsing handles labels and rejects bad lines") {
    TempDir dir("corpus");
    test_util::spew(dir.file("c.jsonl"),
                    "{\"text\": \"hello world\", \"label\": \"greeting\"}\n"
                    "\n"
                    "{\"text\": \"bye\", \"label\": 7}\n");
    auto corpus = load_corpus_jsonl(dir.file("c.jsonl"));
    REQUIRE(corpus.documents.size() == 2);
    CHECK(corpus.documents[0] == "hello world");
    CHECK(corpus.gold_labels == std::vector<std::string>{"greeting", "7"});

    test_util::spew(dir.file("nolabel.jsonl"), "{\"text\": \"a\"}\n{\"text\": \"b\"}\n");
    auto unlabelled = load_corpus_jsonl(dir.file("nolabel.jsonl"));
    CHECK(!unlabelled.has_gold_labels());

    test_util::spew(dir.file("mixed.jsonl"), "{\"text\": \"a\", \"label\": 1}\n{\"text\": \"b\"}\n");
    CHECK_THROWS_AS(static_cast<void>(load_corpus_jsonl(dir.file("mixed.jsonl"))), InputError);

    test_util::spew(dir.file("broken.jsonl"), "{\"text\": \"a\"\n");
    CHECK_THROWS_AS(static_cast<void>(load_corpus_jsonl(dir.file("broken.jsonl"))), InputError);

    test_util::spew(dir.file("notext.jsonl"), "{\"label\": 1}\n");
    CHECK_THROWS_AS(static_cast<void>(load_corpus_jsonl(dir.file("notext.jsonl"))), InputError);
}

TEST_CASE("corpus JSONL round-trips") {
    TempDir dir("corpus");
    Corpus corpus;
    corpus.documents = {"one \"quoted\" doc", "two\nlines"};
    corpus.gold_labels = {"a", "b"};
    save_corpus_jsonl(corpus, dir.file("rt.jsonl"));
    auto back = load_corpus_jsonl(dir.file("rt.jsonl"));
    CHECK(back.documents == corpus.documents);
    CHECK(back.gold_labels == corpus.gold_labels);
}

TEST_CASE("word-vector tables require matching term lists") {
    TempDir dir("wv");
    auto m = test_util::random_matrix(3, 4, 5);
    for (double& v : m.values()) v = static_cast<double>(static_cast<float>(v));
    save_embedding_matrix(m, dir.file("w.tpxe"));
    save_term_list({"alpha", "beta", "gamma"}, dir.file("w.terms"));

    auto table = load_word_vectors(dir.file("w.tpxe"), dir.file("w.terms"));
    REQUIRE(table.find("beta"));
    CHECK((*table.find("beta"))[0] == m(1, 0));
    CHECK(!table.find("delta"));

    save_term_list({"alpha", "beta"}, dir.file("short.terms"));
    CHECK_THROWS_AS(static_cast<void>(load_word_vectors(dir.file("w.tpxe"), dir.file("short.terms"))),
                    InputError);

    save_term_list({"alpha", "alpha", "gamma"}, dir.file("dup.terms"));
    CHECK_THROWS_AS(static_cast<void>(load_word_vectors(dir.file("w.tpxe"), dir.file("dup.terms"))),
                    InputError);
}

TEST_CASE("atomic writes leave no temp file behind") {
    TempDir dir("atomic");
    write_file_atomic(dir.file("out.txt"), "payload");
    CHECK(test_util::slurp(dir.file("out.txt")) == "payload");
    CHECK(!std::filesystem::exists(dir.file("out.txt.tmp")));
}
