#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <string>

#include <json.hpp>

#include "test_util.hpp"
#include "topeax/io.hpp"

using namespace topeax;
using test_util::TempDir;

namespace {

#ifndef TOPEAX_CLI_PATH
#error "TOPEAX_CLI_PATH must point at the built CLI"
#endif

int run_cli(const std::string& args, const std::filesystem::path& stdout_file = {},
            const std::filesystem::path& stderr_file = {}) {
    std::string cmd = std::string(TOPEAX_CLI_PATH) + " " + args;
    if (!stdout_file.empty()) cmd += " > " + stdout_file.string();
    cmd += stderr_file.empty() ? " 2> /dev/null" : " 2> " + stderr_file.string();
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Writes the full fixture set (corpus, embeddings, term vectors) into dir.
void write_fixture(const TempDir& dir, unsigned seed = 1400) {
    const std::vector<std::vector<std::string>> topic_words = {
        {"economy", "market", "trade", "growth"},
        {"music", "band", "album", "concert"},
        {"sport", "match", "team", "league"},
    };
    std::mt19937 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.7);

    Corpus corpus;
    const std::size_t per_topic = 20, dim = 10;
    DenseMatrix embeddings(3 * per_topic, dim);
    std::size_t row = 0;
    for (std::size_t t = 0; t < 3; ++t) {
        for (std::size_t d = 0; d < per_topic; ++d, ++row) {
            std::string text;
            for (int w = 0; w < 6; ++w) {
                if (w) text += ' ';
                text += topic_words[t][rng() % topic_words[t].size()];
            }
            corpus.documents.push_back(text);
            corpus.gold_labels.push_back("t" + std::to_string(t));
            for (std::size_t c = 0; c < dim; ++c) embeddings(row, c) = noise(rng);
            embeddings(row, t) += 8.0;
        }
    }
    save_corpus_jsonl(corpus, dir.file("corpus.jsonl"));
    save_embedding_matrix(embeddings, dir.file("embeddings.tpxe"));

    std::vector<std::string> terms;
    for (const auto& words : topic_words) terms.insert(terms.end(), words.begin(), words.end());
    DenseMatrix term_vectors(terms.size(), dim);
    for (std::size_t i = 0; i < terms.size(); ++i) {
        for (std::size_t c = 0; c < dim; ++c) term_vectors(i, c) = noise(rng);
        term_vectors(i, i / 4) += 8.0;
    }
    save_embedding_matrix(term_vectors, dir.file("terms.tpxe"));
    save_term_list(terms, dir.file("terms.tpxe.terms"));
}

std::string fit_args(const TempDir& dir, const std::string& out, unsigned seed = 7) {
    return "fit --corpus " + dir.file("corpus.jsonl").string() + " --embeddings " +
           dir.file("embeddings.tpxe").string() + " --term-embeddings " +
           dir.file("terms.tpxe").string() + " --out " + out +
           " --perplexity 10 --tsne-iters 300 --seed " + std::to_string(seed);
}

}  // namespace

TEST_CASE("fit writes the artifact set and reruns byte-identically") {
    TempDir dir("cli_fit");
    write_fixture(dir);

    auto out1 = dir.file("run1");
    REQUIRE(run_cli(fit_args(dir, out1.string()), dir.file("fit.out")) == 0);
    CHECK(std::filesystem::exists(out1 / "model.json"));
    CHECK(std::filesystem::exists(out1 / "keywords.csv"));

    auto stdout_text = test_util::slurp(dir.file("fit.out"));
    CHECK(stdout_text.find("Highest Ranking") != std::string::npos);

    auto out2 = dir.file("run2");
    REQUIRE(run_cli(fit_args(dir, out2.string())) == 0);
    CHECK(test_util::slurp(out1 / "keywords.csv") == test_util::slurp(out2 / "keywords.csv"));
    CHECK(test_util::slurp(out1 / "model.json") == test_util::slurp(out2 / "model.json"));

    auto csv = test_util::slurp(out1 / "keywords.csv");
    CHECK(csv.rfind("topic_id,rank,term,score\n", 0) == 0);
}

TEST_CASE("fit fails fast with exit code 2 on missing or broken inputs") {
    TempDir dir("cli_bad");
    write_fixture(dir);

    CHECK(run_cli("fit --corpus " + dir.file("corpus.jsonl").string() +
                  " --embeddings " + dir.file("nope.tpxe").string() + " --term-embeddings " +
                  dir.file("terms.tpxe").string() + " --out " + dir.file("o").string()) == 2);

    // Corrupt the embedding matrix; nothing should be written.
    test_util::spew(dir.file("broken.tpxe"), "NOPE....garbage");
    CHECK(run_cli("fit --corpus " + dir.file("corpus.jsonl").string() +
                  " --embeddings " + dir.file("broken.tpxe").string() +
                  " --term-embeddings " + dir.file("terms.tpxe").string() + " --out " +
                  dir.file("o2").string()) == 2);
    CHECK(!std::filesystem::exists(dir.file("o2") / "model.json"));

    CHECK(run_cli("fit --embeddings only.tpxe") == 2);  // missing required flags
    CHECK(run_cli("definitely-not-a-subcommand") == 2);
}

TEST_CASE("numerical failures exit with code 3") {
    TempDir dir("cli_numeric");
    write_fixture(dir);

    // A zero embedding row makes the cosine metric undefined mid-pipeline.
    auto embeddings = load_embedding_matrix(dir.file("embeddings.tpxe"));
    for (std::size_t c = 0; c < embeddings.cols(); ++c) embeddings(5, c) = 0.0;
    save_embedding_matrix(embeddings, dir.file("zero_row.tpxe"));

    CHECK(run_cli("fit --corpus " + dir.file("corpus.jsonl").string() + " --embeddings " +
                  dir.file("zero_row.tpxe").string() + " --term-embeddings " +
                  dir.file("terms.tpxe").string() + " --out " + dir.file("o3").string() +
                  " --perplexity 10") == 3);
    CHECK(!std::filesystem::exists(dir.file("o3") / "model.json"));
}

TEST_CASE("TOPEAX_OUT_DIR supplies the default output directory") {
    TempDir dir("cli_env");
    write_fixture(dir);
    auto out = dir.file("from_env");

    std::string cmd = "TOPEAX_OUT_DIR=" + out.string() + " " + TOPEAX_CLI_PATH +
                      " fit --corpus " + dir.file("corpus.jsonl").string() + " --embeddings " +
                      dir.file("embeddings.tpxe").string() + " --term-embeddings " +
                      dir.file("terms.tpxe").string() +
                      " --perplexity 10 --tsne-iters 200 > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    REQUIRE(WEXITSTATUS(status) == 0);
    CHECK(std::filesystem::exists(out / "model.json"));
    CHECK(std::filesystem::exists(out / "keywords.csv"));
}

TEST_CASE("eval emits a report whose fields satisfy the metric algebra") {
    TempDir dir("cli_eval");
    write_fixture(dir);
    auto out = dir.file("run");
    REQUIRE(run_cli(fit_args(dir, out.string())) == 0);

    auto report_path = dir.file("report.json");
    REQUIRE(run_cli("eval --model " + (out / "model.json").string() + " --corpus " +
                        dir.file("corpus.jsonl").string() + " --internal-vectors " +
                        dir.file("terms.tpxe").string() + " --external-vectors " +
                        dir.file("terms.tpxe").string() + " --report " + report_path.string(),
                    dir.file("eval.out")) == 0);

    auto report = nlohmann::json::parse(test_util::slurp(report_path));
    REQUIRE(report["fmi"].is_number());
    CHECK(report["fmi"].get<double>() >= 0.0);
    CHECK(report["fmi"].get<double>() <= 1.0);
    CHECK(report["n_topics_gold"].get<int>() == 3);
    double c_in = std::max(report["coherence_internal"].get<double>(), 0.0);
    double c_ex = std::max(report["coherence_external"].get<double>(), 0.0);
    double c_bar = report["coherence_aggregate"].get<double>();
    CHECK(std::abs(c_bar - std::sqrt(c_in * c_ex)) < 1e-12);
    CHECK(std::abs(report["interpretability"].get<double>() -
                   std::sqrt(c_bar * report["diversity"].get<double>())) < 1e-12);
}

TEST_CASE("eval without labels or vectors produces a partial report") {
    TempDir dir("cli_eval2");
    write_fixture(dir);
    auto out = dir.file("run");
    REQUIRE(run_cli(fit_args(dir, out.string())) == 0);

    REQUIRE(run_cli("eval --model " + (out / "model.json").string(), dir.file("eval.out")) == 0);
    auto report = nlohmann::json::parse(test_util::slurp(dir.file("eval.out")));
    CHECK(report["fmi"].is_null());
    CHECK(report["ami"].is_null());
    CHECK(report["coherence_internal"].is_null());
    CHECK(report["diversity"].is_number());

    // Mismatched corpus length is an input error.
    Corpus small;
    small.documents = {"one doc"};
    save_corpus_jsonl(small, dir.file("small.jsonl"));
    CHECK(run_cli("eval --model " + (out / "model.json").string() + " --corpus " +
                  dir.file("small.jsonl").string()) == 2);
}

TEST_CASE("sweep writes one row per value") {
    TempDir dir("cli_sweep");
    write_fixture(dir);
    auto out = dir.file("sweep_out");

    REQUIRE(run_cli("sweep --param perplexity --values 8,12 " + fit_args(dir, out.string()).substr(4),
                    dir.file("sweep.out")) == 0);
    auto csv = test_util::slurp(out / "sweep.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 rows
    CHECK(csv.find("perplexity,8,") != std::string::npos);
    CHECK(csv.find("perplexity,12,") != std::string::npos);

    // Subsample sweep: a value larger than the corpus is an input error.
    CHECK(run_cli("sweep --param subsample --values 10000 " +
                  fit_args(dir, out.string()).substr(4)) == 2);

    REQUIRE(run_cli("sweep --param subsample --values 40,full " +
                    fit_args(dir, out.string()).substr(4)) == 0);
    auto sub_csv = test_util::slurp(out / "sweep.csv");
    CHECK(std::count(sub_csv.begin(), sub_csv.end(), '\n') == 3);
    CHECK(sub_csv.find("subsample,40,") != std::string::npos);
    CHECK(sub_csv.find("subsample,full,") != std::string::npos);
}

TEST_CASE("plot renders SVG plus a JSON dump, and topics prints the table") {
    TempDir dir("cli_plot");
    write_fixture(dir);
    auto out = dir.file("run");
    REQUIRE(run_cli(fit_args(dir, out.string())) == 0);

    auto svg_path = dir.file("figure.svg");
    REQUIRE(run_cli("plot --model " + (out / "model.json").string() + " --svg " +
                    svg_path.string()) == 0);
    auto svg = test_util::slurp(svg_path);
    CHECK(svg.rfind("<?xml", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(std::filesystem::exists(dir.file("figure.json")));

    REQUIRE(run_cli("topics --model " + (out / "model.json").string() + " --top-k 4",
                    dir.file("topics.out")) == 0);
    auto table = test_util::slurp(dir.file("topics.out"));
    CHECK(table.find("ID\tHighest Ranking") != std::string::npos);
    CHECK(table.find("0\t") != std::string::npos);

    CHECK(run_cli("plot --model " + dir.file("no_such.json").string()) == 2);
}
