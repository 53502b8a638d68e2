#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "topeax/model.hpp"
#include "topeax/plot.hpp"

namespace fs = std::filesystem;
using namespace topeax;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

struct CommonOptions {
    std::string corpus_path;
    std::string embeddings_path;
    std::string term_embeddings_path;
    std::string term_terms_path;  // optional override for the sidecar
    std::string out_dir;
    std::string scheme_name = "combined";
    FitParams params;
    std::string topic_prior_name = "token_mass";
};

std::string default_out_dir() {
    if (const char* env = std::getenv("TOPEAX_OUT_DIR"); env && *env) return env;
    return ".";
}

void add_fit_options(CLI::App* cmd, CommonOptions& opt) {
    cmd->add_option("--corpus", opt.corpus_path, "JSON-lines corpus (text + optional label)")
        ->required();
    cmd->add_option("--embeddings", opt.embeddings_path, "TPXE document embedding matrix")
        ->required();
    cmd->add_option("--term-embeddings", opt.term_embeddings_path,
                    "TPXE term embedding matrix with a sidecar term list")
        ->required();
    cmd->add_option("--term-terms", opt.term_terms_path,
                    "term list for --term-embeddings (default: <path>.terms)");
    cmd->add_option("--out", opt.out_dir, "output directory (env TOPEAX_OUT_DIR, default .)");
    cmd->add_option("--perplexity", opt.params.perplexity, "t-SNE perplexity");
    cmd->add_option("--seed", opt.params.seed, "random seed");
    cmd->add_option("--alpha", opt.params.alpha, "Dirichlet smoothing for lexical importance");
    cmd->add_option("--radius", opt.params.neighbourhood_radius,
                    "peak detection neighbourhood radius in grid cells");
    cmd->add_option("--top-k", opt.params.top_k, "keywords per topic");
    cmd->add_option("--min-doc-freq", opt.params.min_doc_freq,
                    "drop terms appearing in fewer documents");
    cmd->add_option("--tsne-iters", opt.params.tsne_iterations, "t-SNE iterations");
    cmd->add_option("--learning-rate", opt.params.learning_rate,
                    "t-SNE learning rate (0 = auto)");
    cmd->add_option("--early-exaggeration", opt.params.early_exaggeration,
                    "t-SNE early exaggeration factor");
    cmd->add_option("--topic-prior", opt.topic_prior_name,
                    "p(z_k) estimate: token_mass or document_proportion")
        ->check(CLI::IsMember({"token_mass", "document_proportion"}));
    cmd->add_option("--scheme", opt.scheme_name,
                    "importance scheme for printed/exported keywords")
        ->check(CLI::IsMember({"semantic", "npmi", "combined", "centroid", "ctfidf"}));
}

void finalize_options(CommonOptions& opt) {
    if (opt.out_dir.empty()) opt.out_dir = default_out_dir();
    if (opt.term_terms_path.empty() && !opt.term_embeddings_path.empty())
        opt.term_terms_path = opt.term_embeddings_path + ".terms";
    opt.params.topic_prior = opt.topic_prior_name == "document_proportion"
                                 ? importance::TopicPrior::document_proportion
                                 : importance::TopicPrior::token_mass;
}

void require_file(const std::string& path, const std::string& what) {
    if (!fs::exists(path)) throw InputError(what + " not found: " + path);
}

importance::Scheme parse_scheme(const std::string& name) {
    auto scheme = importance::scheme_from_name(name);
    if (!scheme) throw InputError("unknown importance scheme: " + name);
    return *scheme;
}

struct FitInputs {
    Corpus corpus;
    DenseMatrix embeddings;
    WordVectorTable term_vectors;
};

// Loads and validates every referenced file before any compute starts.
FitInputs load_fit_inputs(const CommonOptions& opt) {
    require_file(opt.corpus_path, "corpus file");
    require_file(opt.embeddings_path, "embeddings file");
    require_file(opt.term_embeddings_path, "term-embeddings file");
    require_file(opt.term_terms_path, "term-embeddings sidecar term list");
    FitInputs in;
    in.corpus = load_corpus_jsonl(opt.corpus_path);
    in.embeddings = load_embedding_matrix(opt.embeddings_path);
    in.term_vectors = load_word_vectors(opt.term_embeddings_path, opt.term_terms_path);
    if (in.embeddings.rows() != in.corpus.documents.size())
        throw InputError("embedding rows (" + std::to_string(in.embeddings.rows()) +
                         ") do not match corpus size (" +
                         std::to_string(in.corpus.documents.size()) + ")");
    return in;
}

std::optional<WordVectorTable> maybe_load_vectors(const std::string& matrix_path,
                                                  std::string terms_path) {
    if (matrix_path.empty()) return std::nullopt;
    if (terms_path.empty()) terms_path = matrix_path + ".terms";
    require_file(matrix_path, "word-vector matrix");
    require_file(terms_path, "word-vector term list");
    return load_word_vectors(matrix_path, terms_path);
}

int run_fit(const CommonOptions& opt) {
    FitInputs in = load_fit_inputs(opt);
    TopeaxModel model = fit_topeax(in.corpus, in.embeddings, in.term_vectors, opt.params);

    fs::path out(opt.out_dir);
    save_model(model, out / "model.json");
    auto scheme = parse_scheme(opt.scheme_name);
    const auto& keywords = model.keywords.at(scheme);
    write_file_atomic(out / "keywords.csv", keywords_csv(keywords));

    std::cout << "Fitted " << model.n_topics() << " topics over " << model.n_documents()
              << " documents.\n\n"
              << format_topic_table(keywords) << "\nArtifacts written to " << out.string()
              << " (model.json, keywords.csv)\n";
    return kExitOk;
}

std::optional<LabelVector> gold_from_corpus(const Corpus& corpus) {
    if (!corpus.has_gold_labels()) return std::nullopt;
    return gold_label_vector(corpus);
}

int run_eval(const std::string& model_path, const std::string& corpus_path,
             const std::string& internal_path, const std::string& internal_terms,
             const std::string& external_path, const std::string& external_terms,
             const std::string& scheme_name, const std::string& report_path) {
    require_file(model_path, "model artifact");
    TopeaxModel model = load_model(model_path);

    std::optional<LabelVector> gold;
    if (!corpus_path.empty()) {
        require_file(corpus_path, "corpus file");
        Corpus corpus = load_corpus_jsonl(corpus_path);
        if (corpus.documents.size() != model.n_documents())
            throw InputError("corpus size (" + std::to_string(corpus.documents.size()) +
                             ") does not match the fitted model (" +
                             std::to_string(model.n_documents()) + " documents)");
        gold = gold_from_corpus(corpus);
    }
    auto internal = maybe_load_vectors(internal_path, internal_terms);
    auto external = maybe_load_vectors(external_path, external_terms);

    auto report = evaluate_fitted_model(model, gold, internal ? &*internal : nullptr,
                                        external ? &*external : nullptr,
                                        parse_scheme(scheme_name));
    std::string json = metrics::report_to_json(report);
    if (!report_path.empty()) write_file_atomic(report_path, json);
    std::cout << json;
    return kExitOk;
}

std::size_t bounded_draw(std::mt19937& rng, std::size_t bound) {
    return static_cast<std::size_t>(
        (static_cast<std::uint64_t>(rng()) * static_cast<std::uint64_t>(bound)) >> 32);
}

// First `m` entries of a seeded Fisher-Yates permutation, returned in
// ascending order so document order is preserved in the slice.
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m,
                                                    std::uint32_t seed) {
    std::vector<std::size_t> indices(n);
    for (std::size_t i = 0; i < n; ++i) indices[i] = i;
    std::mt19937 rng(seed);
    for (std::size_t i = 0; i < m; ++i) {
        std::size_t j = i + bounded_draw(rng, n - i);
        std::swap(indices[i], indices[j]);
    }
    indices.resize(m);
    std::sort(indices.begin(), indices.end());
    return indices;
}

std::string csv_cell(const std::optional<double>& v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", *v);
    return buf;
}

int run_sweep(const CommonOptions& opt, const std::string& parameter,
              const std::vector<std::string>& values, const std::string& internal_path,
              const std::string& external_path) {
    if (values.empty()) throw InputError("sweep needs at least one value");
    FitInputs in = load_fit_inputs(opt);
    auto internal = maybe_load_vectors(internal_path, "");
    auto external = maybe_load_vectors(external_path, "");
    auto gold_all = gold_from_corpus(in.corpus);
    auto scheme = parse_scheme(opt.scheme_name);

    std::ostringstream csv;
    csv << "parameter,value,n_topics,fmi,ami,diversity,coherence_internal,"
           "coherence_external,coherence_aggregate,interpretability\n";

    for (const auto& value : values) {
        FitParams params = opt.params;
        Corpus corpus;
        DenseMatrix embeddings;
        std::optional<LabelVector> gold;
        if (parameter == "perplexity") {
            try {
                params.perplexity = std::stod(value);
            } catch (const std::exception&) {
                throw InputError("invalid perplexity value: " + value);
            }
            corpus = in.corpus;
            embeddings = in.embeddings;
            gold = gold_all;
        } else if (parameter == "subsample") {
            std::size_t n = in.corpus.documents.size();
            std::size_t m = 0;
            if (value == "full") {
                m = n;
            } else {
                try {
                    long long parsed = std::stoll(value);
                    if (parsed <= 0) throw InputError("subsample size must be positive");
                    m = static_cast<std::size_t>(parsed);
                } catch (const InputError&) {
                    throw;
                } catch (const std::exception&) {
                    throw InputError("invalid subsample size: " + value);
                }
                if (m > n)
                    throw InputError("subsample size " + value + " exceeds corpus size " +
                                     std::to_string(n));
            }
            auto idx = sample_without_replacement(n, m, opt.params.seed);
            embeddings = DenseMatrix(m, in.embeddings.cols());
            for (std::size_t r = 0; r < m; ++r)
                for (std::size_t c = 0; c < in.embeddings.cols(); ++c)
                    embeddings(r, c) = in.embeddings(idx[r], c);
            corpus.documents.reserve(m);
            for (auto i : idx) corpus.documents.push_back(in.corpus.documents[i]);
            if (in.corpus.has_gold_labels()) {
                for (auto i : idx) corpus.gold_labels.push_back(in.corpus.gold_labels[i]);
                gold = gold_label_vector(corpus);
            }
        } else {
            throw InputError("unknown sweep parameter: " + parameter +
                             " (expected perplexity or subsample)");
        }

        TopeaxModel model = fit_topeax(corpus, embeddings, in.term_vectors, params);
        auto report = evaluate_fitted_model(model, gold, internal ? &*internal : nullptr,
                                            external ? &*external : nullptr, scheme);
        csv << parameter << ',' << value << ',' << report.n_topics_predicted << ','
            << csv_cell(report.fmi) << ',' << csv_cell(report.ami) << ','
            << csv_cell(report.diversity) << ',' << csv_cell(report.coherence_internal) << ','
            << csv_cell(report.coherence_external) << ','
            << csv_cell(report.coherence_aggregate) << ','
            << csv_cell(report.interpretability) << '\n';
        std::cerr << "sweep " << parameter << "=" << value << ": K="
                  << report.n_topics_predicted << "\n";
    }

    fs::path out(opt.out_dir);
    write_file_atomic(out / "sweep.csv", csv.str());
    std::cout << "Sweep table written to " << (out / "sweep.csv").string() << "\n";
    return kExitOk;
}

int run_plot(const std::string& model_path, std::string svg_path, const std::string& out_dir) {
    require_file(model_path, "model artifact");
    TopeaxModel model = load_model(model_path);
    if (svg_path.empty()) svg_path = (fs::path(out_dir) / "plot.svg").string();
    write_file_atomic(svg_path, render_model_svg(model));
    fs::path data_path = fs::path(svg_path).replace_extension(".json");
    write_file_atomic(data_path, plot_data_json(model));
    std::cout << "Wrote " << svg_path << " and " << data_path.string() << "\n";
    return kExitOk;
}

int run_topics(const std::string& model_path, const std::string& scheme_name,
               std::size_t top_k) {
    require_file(model_path, "model artifact");
    TopeaxModel model = load_model(model_path);
    auto scheme = parse_scheme(scheme_name);
    auto it = model.keywords.find(scheme);
    if (it == model.keywords.end())
        throw InputError(std::string("artifact lacks keywords for scheme ") + scheme_name);
    importance::TopicKeywords trimmed = it->second;
    if (top_k > 0)
        for (auto& topic : trimmed)
            if (topic.size() > top_k) topic.resize(top_k);
    std::cout << format_topic_table(trimmed);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Topeax: density-peak clustering topic model"};
    app.require_subcommand(1);

    CommonOptions fit_opt;
    auto* fit_cmd = app.add_subcommand("fit", "fit a model and write the artifact");
    add_fit_options(fit_cmd, fit_opt);

    std::string eval_model, eval_corpus, eval_internal, eval_internal_terms, eval_external,
        eval_external_terms, eval_scheme = "combined", eval_report;
    auto* eval_cmd = app.add_subcommand("eval", "compute metrics for a fitted artifact");
    eval_cmd->add_option("--model", eval_model, "model artifact JSON")->required();
    eval_cmd->add_option("--corpus", eval_corpus, "corpus with gold labels (optional)");
    eval_cmd->add_option("--internal-vectors", eval_internal,
                         "corpus-trained word vectors (TPXE + sidecar)");
    eval_cmd->add_option("--internal-terms", eval_internal_terms,
                         "term list for --internal-vectors");
    eval_cmd->add_option("--external-vectors", eval_external,
                         "external word vectors (TPXE + sidecar)");
    eval_cmd->add_option("--external-terms", eval_external_terms,
                         "term list for --external-vectors");
    eval_cmd->add_option("--scheme", eval_scheme, "keyword scheme to evaluate")
        ->check(CLI::IsMember({"semantic", "npmi", "combined", "centroid", "ctfidf"}));
    eval_cmd->add_option("--report", eval_report, "write the report JSON here");

    CommonOptions sweep_opt;
    std::string sweep_param;
    std::vector<std::string> sweep_values;
    std::string sweep_internal, sweep_external;
    auto* sweep_cmd = app.add_subcommand("sweep", "refit across parameter values");
    add_fit_options(sweep_cmd, sweep_opt);
    sweep_cmd->add_option("--param", sweep_param, "perplexity or subsample")->required();
    sweep_cmd->add_option("--values", sweep_values, "comma-separated sweep values")
        ->required()
        ->delimiter(',');
    sweep_cmd->add_option("--internal-vectors", sweep_internal,
                          "corpus-trained word vectors for coherence");
    sweep_cmd->add_option("--external-vectors", sweep_external,
                          "external word vectors for coherence");

    std::string plot_model, plot_svg, plot_out;
    auto* plot_cmd = app.add_subcommand("plot", "render the fitted model as SVG");
    plot_cmd->add_option("--model", plot_model, "model artifact JSON")->required();
    plot_cmd->add_option("--svg", plot_svg, "output SVG path");
    plot_cmd->add_option("--out", plot_out, "output directory when --svg is not given");

    std::string topics_model, topics_scheme = "combined";
    std::size_t topics_top_k = 0;
    auto* topics_cmd = app.add_subcommand("topics", "print the per-topic keyword table");
    topics_cmd->add_option("--model", topics_model, "model artifact JSON")->required();
    topics_cmd->add_option("--scheme", topics_scheme, "keyword scheme to print")
        ->check(CLI::IsMember({"semantic", "npmi", "combined", "centroid", "ctfidf"}));
    topics_cmd->add_option("--top-k", topics_top_k, "limit keywords per topic (0 = all stored)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (fit_cmd->parsed()) {
            finalize_options(fit_opt);
            return run_fit(fit_opt);
        }
        if (eval_cmd->parsed())
            return run_eval(eval_model, eval_corpus, eval_internal, eval_internal_terms,
                            eval_external, eval_external_terms, eval_scheme, eval_report);
        if (sweep_cmd->parsed()) {
            finalize_options(sweep_opt);
            return run_sweep(sweep_opt, sweep_param, sweep_values, sweep_internal,
                             sweep_external);
        }
        if (plot_cmd->parsed()) {
            if (plot_out.empty()) plot_out = default_out_dir();
            return run_plot(plot_model, plot_svg, plot_out);
        }
        if (topics_cmd->parsed()) return run_topics(topics_model, topics_scheme, topics_top_k);
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumeric;
    }
    return kExitInput;
}
