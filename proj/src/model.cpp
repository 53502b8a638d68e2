#include "topeax/model.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace topeax {

using nlohmann::json;

DenseMatrix align_term_embeddings(const Vocabulary& vocab, const WordVectorTable& table) {
    std::size_t dim = table.vectors.cols();
    DenseMatrix aligned(vocab.size(), dim, 0.0);
    std::vector<std::string> missing;
    for (std::size_t j = 0; j < vocab.size(); ++j) {
        auto it = table.index.find(vocab.terms[j]);
        if (it == table.index.end()) {
            missing.push_back(vocab.terms[j]);
            continue;
        }
        auto row = table.vectors.row(it->second);
        for (std::size_t f = 0; f < dim; ++f) aligned(j, f) = row[f];
    }
    if (!missing.empty()) {
        std::string msg = "term-embedding table misses " + std::to_string(missing.size()) +
                          " vocabulary terms, e.g.:";
        for (std::size_t i = 0; i < std::min<std::size_t>(missing.size(), 8); ++i)
            msg += " " + missing[i];
        throw InputError(msg);
    }
    return aligned;
}

namespace {

// Prefixes stage names onto module errors so a failed fit names where it
// stopped.
template <typename F>
auto run_stage(const char* stage, F&& f) {
    try {
        return f();
    } catch (const InputError& e) {
        throw InputError(std::string("[stage ") + stage + "] " + e.what());
    } catch (const NumericError& e) {
        throw NumericError(std::string("[stage ") + stage + "] " + e.what());
    }
}

}  // namespace

TopeaxModel fit_topeax(const Corpus& corpus, const DenseMatrix& embeddings,
                       const WordVectorTable& term_vectors, const FitParams& params) {
    if (embeddings.rows() != corpus.documents.size())
        throw InputError("embedding rows (" + std::to_string(embeddings.rows()) +
                         ") do not match document count (" +
                         std::to_string(corpus.documents.size()) + ")");

    Vocabulary vocab =
        run_stage("tokenize", [&] { return build_vocabulary(corpus, params.min_doc_freq); });
    DocTermCounts counts = run_stage("count", [&] { return count_matrix(corpus, vocab); });
    DenseMatrix term_embeddings =
        run_stage("align-terms", [&] { return align_term_embeddings(vocab, term_vectors); });

    tsne::TsneConfig tsne_config;
    tsne_config.perplexity = params.perplexity;
    tsne_config.n_iterations = params.tsne_iterations;
    tsne_config.early_exaggeration_factor = params.early_exaggeration;
    tsne_config.learning_rate = params.learning_rate;
    tsne_config.random_seed = params.seed;
    tsne::TsneResult reduced =
        run_stage("reduce", [&] { return tsne::tsne_fit(embeddings, tsne_config); });

    peax::PeaxResult clusters = run_stage(
        "cluster", [&] { return peax::peax_fit(reduced.coordinates, params.neighbourhood_radius); });

    TopeaxModel model;
    model.params = params;
    model.vocabulary = vocab.terms;
    model.reduced = std::move(reduced.coordinates);
    model.grid = std::move(clusters.grid);
    model.peaks = std::move(clusters.peaks);
    model.covariances = clusters.gmm.covariances;
    model.weights = clusters.gmm.weights;
    model.assignment = clusters.assignment;

    return run_stage("importance", [&] {
        DenseMatrix topics = importance::topic_vectors(embeddings, clusters.responsibilities);
        auto semantic = importance::semantic_importance(topics, term_embeddings, vocab);
        auto probs = importance::smoothed_probabilities(counts, model.assignment, params.alpha,
                                                        params.topic_prior);
        auto npmi = importance::npmi_importance(probs);
        auto combined = importance::combined_importance(npmi, semantic);
        auto centroid = importance::centroid_importance(embeddings, model.assignment,
                                                        term_embeddings, vocab);
        auto ctfidf = importance::ctfidf_importance(counts, model.assignment);

        std::size_t top_k = std::min(params.top_k, vocab.size());
        for (auto* table : {&semantic, &npmi, &combined, &centroid, &ctfidf}) {
            model.keywords[table->scheme] = importance::top_k_keywords(*table, vocab, top_k);
            model.importance_tables[table->scheme] = std::move(table->scores);
        }
        return std::move(model);
    });
}

namespace {

json matrix_to_json(const DenseMatrix& m) {
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"values", m.values()}};
}

DenseMatrix matrix_from_json(const json& j) {
    return DenseMatrix::from_values(j.at("rows").get<std::size_t>(),
                                    j.at("cols").get<std::size_t>(),
                                    j.at("values").get<std::vector<double>>());
}

const char* topic_prior_name(importance::TopicPrior p) {
    return p == importance::TopicPrior::token_mass ? "token_mass" : "document_proportion";
}

importance::TopicPrior topic_prior_from_name(const std::string& name) {
    if (name == "token_mass") return importance::TopicPrior::token_mass;
    if (name == "document_proportion") return importance::TopicPrior::document_proportion;
    throw InputError("unknown topic prior mode: " + name);
}

}  // namespace

void save_model(const TopeaxModel& model, const std::filesystem::path& path) {
    json j;
    j["schema_version"] = TopeaxModel::kSchemaVersion;
    j["params"] = {{"perplexity", model.params.perplexity},
                   {"tsne_iterations", model.params.tsne_iterations},
                   {"early_exaggeration", model.params.early_exaggeration},
                   {"learning_rate", model.params.learning_rate},
                   {"seed", model.params.seed},
                   {"alpha", model.params.alpha},
                   {"neighbourhood_radius", model.params.neighbourhood_radius},
                   {"top_k", model.params.top_k},
                   {"min_doc_freq", model.params.min_doc_freq},
                   {"topic_prior", topic_prior_name(model.params.topic_prior)}};
    j["vocabulary"] = model.vocabulary;
    j["reduced"] = matrix_to_json(model.reduced);
    if (model.grid) {
        j["grid"] = {{"x_coords", model.grid->x_coords},
                     {"y_coords", model.grid->y_coords},
                     {"density", matrix_to_json(model.grid->density)},
                     {"bandwidth", model.grid->bandwidth}};
    }
    json peaks = json::array();
    for (std::size_t k = 0; k < model.peaks.size(); ++k)
        peaks.push_back({{"x", model.peaks.coordinates[k][0]},
                         {"y", model.peaks.coordinates[k][1]},
                         {"density", model.peaks.densities[k]}});
    j["peaks"] = peaks;
    json covs = json::array();
    for (const auto& c : model.covariances)
        covs.push_back({{"xx", c.xx}, {"xy", c.xy}, {"yy", c.yy}});
    j["covariances"] = covs;
    j["weights"] = model.weights;
    j["assignment"] = {{"labels", model.assignment.labels},
                       {"n_clusters", model.assignment.n_clusters}};
    json tables = json::object();
    for (const auto& [scheme, scores] : model.importance_tables)
        tables[importance::scheme_name(scheme)] = matrix_to_json(scores);
    j["importance"] = tables;
    json keywords = json::object();
    for (const auto& [scheme, lists] : model.keywords) {
        json topics = json::array();
        for (const auto& topic : lists) {
            json entries = json::array();
            for (const auto& kw : topic)
                entries.push_back({{"term", kw.term}, {"score", kw.score}});
            topics.push_back(entries);
        }
        keywords[importance::scheme_name(scheme)] = topics;
    }
    j["keywords"] = keywords;
    write_file_atomic(path, j.dump());
}

TopeaxModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open model artifact: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw InputError(std::string("model artifact is not valid JSON: ") + e.what());
    }
    try {
        int version = j.at("schema_version").get<int>();
        if (version != TopeaxModel::kSchemaVersion)
            throw InputError("unsupported model schema version " + std::to_string(version) +
                             " (this build reads version " +
                             std::to_string(TopeaxModel::kSchemaVersion) + ")");

        TopeaxModel model;
        const json& p = j.at("params");
        model.params.perplexity = p.at("perplexity").get<double>();
        model.params.tsne_iterations = p.at("tsne_iterations").get<std::size_t>();
        model.params.early_exaggeration = p.at("early_exaggeration").get<double>();
        model.params.learning_rate = p.at("learning_rate").get<double>();
        model.params.seed = p.at("seed").get<std::uint32_t>();
        model.params.alpha = p.at("alpha").get<double>();
        model.params.neighbourhood_radius = p.at("neighbourhood_radius").get<int>();
        model.params.top_k = p.at("top_k").get<std::size_t>();
        model.params.min_doc_freq = p.at("min_doc_freq").get<std::size_t>();
        model.params.topic_prior = topic_prior_from_name(p.at("topic_prior").get<std::string>());

        model.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
        model.reduced = matrix_from_json(j.at("reduced"));
        if (j.contains("grid")) {
            peax::DensityGrid grid;
            grid.x_coords = j["grid"].at("x_coords").get<std::vector<double>>();
            grid.y_coords = j["grid"].at("y_coords").get<std::vector<double>>();
            grid.density = matrix_from_json(j["grid"].at("density"));
            auto bw = j["grid"].at("bandwidth").get<std::vector<double>>();
            if (bw.size() != 2) throw InputError("grid bandwidth must have 2 entries");
            grid.bandwidth = {bw[0], bw[1]};
            model.grid = std::move(grid);
        }
        for (const auto& pk : j.at("peaks")) {
            model.peaks.coordinates.push_back(
                {pk.at("x").get<double>(), pk.at("y").get<double>()});
            model.peaks.densities.push_back(pk.at("density").get<double>());
        }
        for (const auto& c : j.at("covariances"))
            model.covariances.push_back(peax::Cov2{c.at("xx").get<double>(),
                                                   c.at("xy").get<double>(),
                                                   c.at("yy").get<double>()});
        model.weights = j.at("weights").get<std::vector<double>>();
        model.assignment.labels = j.at("assignment").at("labels").get<std::vector<int>>();
        model.assignment.n_clusters = j.at("assignment").at("n_clusters").get<int>();
        for (const auto& [name, table] : j.at("importance").items()) {
            auto scheme = importance::scheme_from_name(name);
            if (!scheme) throw InputError("unknown importance scheme in artifact: " + name);
            model.importance_tables[*scheme] = matrix_from_json(table);
        }
        for (const auto& [name, topics] : j.at("keywords").items()) {
            auto scheme = importance::scheme_from_name(name);
            if (!scheme) throw InputError("unknown keyword scheme in artifact: " + name);
            importance::TopicKeywords lists;
            for (const auto& topic : topics) {
                std::vector<importance::Keyword> entries;
                for (const auto& kw : topic)
                    entries.push_back(
                        {kw.at("term").get<std::string>(), kw.at("score").get<double>()});
                lists.push_back(std::move(entries));
            }
            model.keywords[*scheme] = std::move(lists);
        }
        return model;
    } catch (const json::exception& e) {
        throw InputError(std::string("model artifact violates the schema: ") + e.what());
    }
}

namespace {

std::string format_score(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

std::string keywords_csv(const importance::TopicKeywords& keywords) {
    std::ostringstream os;
    os << "topic_id,rank,term,score\n";
    for (std::size_t k = 0; k < keywords.size(); ++k) {
        for (std::size_t r = 0; r < keywords[k].size(); ++r) {
            os << k << ',' << (r + 1) << ',' << keywords[k][r].term << ','
               << format_score(keywords[k][r].score) << '\n';
        }
    }
    return os.str();
}

std::string format_topic_table(const importance::TopicKeywords& keywords) {
    std::ostringstream os;
    os << "ID\tHighest Ranking\n";
    for (std::size_t k = 0; k < keywords.size(); ++k) {
        os << k << '\t';
        for (std::size_t r = 0; r < keywords[k].size(); ++r) {
            if (r > 0) os << ", ";
            os << keywords[k][r].term;
        }
        os << '\n';
    }
    return os.str();
}

metrics::MetricReport evaluate_fitted_model(const TopeaxModel& model,
                                            const std::optional<LabelVector>& gold,
                                            const WordVectorTable* internal_vectors,
                                            const WordVectorTable* external_vectors,
                                            importance::Scheme scheme) {
    auto it = model.keywords.find(scheme);
    if (it == model.keywords.end())
        throw InputError(std::string("model artifact lacks keywords for scheme ") +
                         importance::scheme_name(scheme));
    return metrics::evaluate_model(it->second, model.assignment, gold, internal_vectors,
                                   external_vectors);
}

}  // namespace topeax
