#ifndef TOPEAX_IMPORTANCE_HPP
#define TOPEAX_IMPORTANCE_HPP

#include <optional>
#include <string>
#include <vector>

#include "topeax/matrix.hpp"
#include "topeax/text.hpp"

namespace topeax::importance {

enum class Scheme { semantic, npmi, combined, centroid, ctfidf };

const char* scheme_name(Scheme s);
std::optional<Scheme> scheme_from_name(const std::string& name);
std::vector<Scheme> all_schemes();

struct ImportanceTable {
    Scheme scheme;
    DenseMatrix scores;  // K x V, columns follow vocabulary order
};

// How the topic prior p(z_k) entering the NPMI joint is estimated.
enum class TopicPrior { token_mass, document_proportion };

struct SmoothedProbabilities {
    std::vector<double> p_word;      // V marginals
    DenseMatrix p_word_given_topic;  // K x V conditionals
    std::vector<double> p_topic;     // K priors
    double alpha = 2.0;
};

// Responsibility-weighted averages of document embeddings, one row per topic,
// in the original embedding space.
DenseMatrix topic_vectors(const DenseMatrix& embeddings, const DenseMatrix& responsibilities);

// Cosine of each topic vector against each vocabulary term embedding.
// term_embeddings rows must follow vocabulary order.
ImportanceTable semantic_importance(const DenseMatrix& topic_vecs,
                                    const DenseMatrix& term_embeddings,
                                    const Vocabulary& vocab);

// Dirichlet-smoothed MAP estimates of the word marginals and per-cluster
// conditionals from hard assignments.
SmoothedProbabilities smoothed_probabilities(const DocTermCounts& counts,
                                             const LabelVector& labels, double alpha = 2.0,
                                             TopicPrior prior = TopicPrior::token_mass);

ImportanceTable npmi_importance(const SmoothedProbabilities& probs);

ImportanceTable combined_importance(const ImportanceTable& npmi_table,
                                    const ImportanceTable& semantic_table);

// Cluster-centroid cosine importance (hard assignments).
ImportanceTable centroid_importance(const DenseMatrix& embeddings, const LabelVector& labels,
                                    const DenseMatrix& term_embeddings, const Vocabulary& vocab);

// Class-based tf-idf over cluster pseudo-documents; natural logarithm.
ImportanceTable ctfidf_importance(const DocTermCounts& counts, const LabelVector& labels);

struct Keyword {
    std::string term;
    double score = 0.0;
    bool operator==(const Keyword&) const = default;
};

// keywords[k] holds topic k's terms in descending score order; score ties
// resolve lexicographically.
using TopicKeywords = std::vector<std::vector<Keyword>>;

TopicKeywords top_k_keywords(const ImportanceTable& table, const Vocabulary& vocab,
                             std::size_t k = 10);

}  // namespace topeax::importance

#endif  // TOPEAX_IMPORTANCE_HPP
