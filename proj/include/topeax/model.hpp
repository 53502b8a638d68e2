#ifndef TOPEAX_MODEL_HPP
#define TOPEAX_MODEL_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "topeax/importance.hpp"
#include "topeax/io.hpp"
#include "topeax/matrix.hpp"
#include "topeax/metrics.hpp"
#include "topeax/peax.hpp"
#include "topeax/text.hpp"
#include "topeax/tsne.hpp"

namespace topeax {

struct FitParams {
    double perplexity = 50.0;
    std::size_t tsne_iterations = 1000;
    double early_exaggeration = 12.0;
    double learning_rate = 0.0;  // <= 0: automatic
    std::uint32_t seed = 42;
    double alpha = 2.0;
    int neighbourhood_radius = peax::kDefaultNeighbourhoodRadius;
    std::size_t top_k = 10;
    std::size_t min_doc_freq = 1;
    importance::TopicPrior topic_prior = importance::TopicPrior::token_mass;
};

// Everything a fitted model needs for inspection, plotting and evaluation.
struct TopeaxModel {
    static constexpr int kSchemaVersion = 1;

    FitParams params;
    std::vector<std::string> vocabulary;
    DenseMatrix reduced;  // n x 2
    std::optional<peax::DensityGrid> grid;
    peax::PeakSet peaks;
    std::vector<peax::Cov2> covariances;
    std::vector<double> weights;
    LabelVector assignment;
    std::map<importance::Scheme, DenseMatrix> importance_tables;
    std::map<importance::Scheme, importance::TopicKeywords> keywords;

    std::size_t n_topics() const { return peaks.size(); }
    std::size_t n_documents() const { return reduced.rows(); }
};

// Full pipeline: tokenize, reduce, cluster, score terms, extract keywords.
// term_vectors must cover every vocabulary term; rows are looked up by name.
TopeaxModel fit_topeax(const Corpus& corpus, const DenseMatrix& embeddings,
                       const WordVectorTable& term_vectors, const FitParams& params);

// Reorders term vectors into vocabulary order, erroring on missing terms.
DenseMatrix align_term_embeddings(const Vocabulary& vocab, const WordVectorTable& table);

void save_model(const TopeaxModel& model, const std::filesystem::path& path);
TopeaxModel load_model(const std::filesystem::path& path);

// topic_id,rank,term,score with round-trip-exact score formatting.
std::string keywords_csv(const importance::TopicKeywords& keywords);

// The printable per-topic keyword table (one line per topic).
std::string format_topic_table(const importance::TopicKeywords& keywords);

metrics::MetricReport evaluate_fitted_model(const TopeaxModel& model,
                                            const std::optional<LabelVector>& gold,
                                            const WordVectorTable* internal_vectors,
                                            const WordVectorTable* external_vectors,
                                            importance::Scheme scheme = importance::Scheme::combined);

}  // namespace topeax

#endif  // TOPEAX_MODEL_HPP
