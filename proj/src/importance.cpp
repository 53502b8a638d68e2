#include "topeax/importance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace topeax::importance {

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::semantic: return "semantic";
        case Scheme::npmi: return "npmi";
        case Scheme::combined: return "combined";
        case Scheme::centroid: return "centroid";
        case Scheme::ctfidf: return "ctfidf";
    }
    return "unknown";
}

std::optional<Scheme> scheme_from_name(const std::string& name) {
    for (Scheme s : all_schemes())
        if (name == scheme_name(s)) return s;
    return std::nullopt;
}

std::vector<Scheme> all_schemes() {
    return {Scheme::semantic, Scheme::npmi, Scheme::combined, Scheme::centroid, Scheme::ctfidf};
}

DenseMatrix topic_vectors(const DenseMatrix& embeddings, const DenseMatrix& responsibilities) {
    std::size_t n = embeddings.rows();
    std::size_t dim = embeddings.cols();
    std::size_t k = responsibilities.rows();
    if (responsibilities.cols() != n)
        throw InputError("responsibility columns must match embedding rows");

    DenseMatrix topics(k, dim, 0.0);
    for (std::size_t c = 0; c < k; ++c) {
        double total = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            double r = responsibilities(c, d);
            total += r;
            for (std::size_t f = 0; f < dim; ++f) topics(c, f) += r * embeddings(d, f);
        }
        if (total <= 0.0)
            throw NumericError("topic " + std::to_string(c) +
                               " has zero total responsibility; cannot form a topic vector");
        for (std::size_t f = 0; f < dim; ++f) topics(c, f) /= total;
    }
    return topics;
}

namespace {

ImportanceTable cosine_table(Scheme scheme, const DenseMatrix& topic_vecs,
                             const DenseMatrix& term_embeddings, const Vocabulary& vocab) {
    std::size_t k = topic_vecs.rows();
    std::size_t v = term_embeddings.rows();
    if (vocab.size() != v)
        throw InputError("term-embedding rows (" + std::to_string(v) +
                         ") must match vocabulary size (" + std::to_string(vocab.size()) + ")");
    if (term_embeddings.cols() != topic_vecs.cols())
        throw InputError("term and topic embeddings have different dimensionality");

    std::vector<double> term_norms(v);
    for (std::size_t j = 0; j < v; ++j) {
        term_norms[j] = norm(term_embeddings.row(j));
        if (term_norms[j] == 0.0)
            throw NumericError("term embedding for \"" + vocab.terms[j] + "\" has zero norm");
    }

    ImportanceTable table{scheme, DenseMatrix(k, v, 0.0)};
    for (std::size_t c = 0; c < k; ++c) {
        double tn = norm(topic_vecs.row(c));
        if (tn == 0.0)
            throw NumericError("topic vector " + std::to_string(c) + " has zero norm");
        for (std::size_t j = 0; j < v; ++j) {
            double s = dot(topic_vecs.row(c), term_embeddings.row(j)) / (tn * term_norms[j]);
            table.scores(c, j) = std::clamp(s, -1.0, 1.0);
        }
    }
    return table;
}

}  // namespace

ImportanceTable semantic_importance(const DenseMatrix& topic_vecs,
                                    const DenseMatrix& term_embeddings,
                                    const Vocabulary& vocab) {
    return cosine_table(Scheme::semantic, topic_vecs, term_embeddings, vocab);
}

SmoothedProbabilities smoothed_probabilities(const DocTermCounts& counts,
                                             const LabelVector& labels, double alpha,
                                             TopicPrior prior) {
    if (alpha <= 0.0) throw InputError("smoothing alpha must be positive");
    if (labels.size() != counts.n_docs)
        throw InputError("label count does not match document count");
    std::size_t v = counts.n_terms;
    std::size_t k = static_cast<std::size_t>(labels.n_clusters);
    if (k == 0) throw InputError("labels declare zero clusters");

    std::vector<double> word_totals(v, 0.0);          // n_j
    DenseMatrix cluster_counts(k, v, 0.0);            // n_jt
    std::vector<double> cluster_mass(k, 0.0);
    std::vector<double> cluster_docs(k, 0.0);
    double total_mass = 0.0;
    for (std::size_t d = 0; d < counts.n_docs; ++d) {
        auto c = static_cast<std::size_t>(labels.labels[d]);
        cluster_docs[c] += 1.0;
        for (std::size_t j = 0; j < v; ++j) {
            double cnt = counts.at(d, j);
            if (cnt == 0.0) continue;
            word_totals[j] += cnt;
            cluster_counts(c, j) += cnt;
            cluster_mass[c] += cnt;
            total_mass += cnt;
        }
    }

    double n_alpha = static_cast<double>(v) * alpha;
    SmoothedProbabilities probs;
    probs.alpha = alpha;
    probs.p_word.resize(v);
    for (std::size_t j = 0; j < v; ++j)
        probs.p_word[j] = (word_totals[j] + alpha) / (n_alpha + total_mass);

    probs.p_word_given_topic = DenseMatrix(k, v, 0.0);
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < v; ++j)
            probs.p_word_given_topic(c, j) =
                (cluster_counts(c, j) + alpha) / (n_alpha + cluster_mass[c]);

    // The prior uses the same smoothed MAP form as the word estimates so that
    // empty clusters keep strictly positive mass.
    probs.p_topic.resize(k);
    double k_alpha = static_cast<double>(k) * alpha;
    for (std::size_t c = 0; c < k; ++c) {
        if (prior == TopicPrior::token_mass)
            probs.p_topic[c] = (cluster_mass[c] + alpha) / (k_alpha + total_mass);
        else
            probs.p_topic[c] =
                (cluster_docs[c] + alpha) / (k_alpha + static_cast<double>(counts.n_docs));
    }
    return probs;
}

ImportanceTable npmi_importance(const SmoothedProbabilities& probs) {
    std::size_t k = probs.p_word_given_topic.rows();
    std::size_t v = probs.p_word_given_topic.cols();
    if (probs.p_word.size() != v || probs.p_topic.size() != k)
        throw InputError("inconsistent smoothed probability shapes");

    ImportanceTable table{Scheme::npmi, DenseMatrix(k, v, 0.0)};
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t j = 0; j < v; ++j) {
            double conditional = probs.p_word_given_topic(c, j);
            double joint = conditional * probs.p_topic[c];
            if (joint >= 1.0)
                throw NumericError("joint probability >= 1 in NPMI; smoothed estimates are "
                                   "inconsistent");
            double pmi = std::log2(conditional / probs.p_word[j]);
            table.scores(c, j) = pmi / -std::log2(joint);
        }
    }
    return table;
}

ImportanceTable combined_importance(const ImportanceTable& npmi_table,
                                    const ImportanceTable& semantic_table) {
    const auto& a = npmi_table.scores;
    const auto& b = semantic_table.scores;
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw InputError("NPMI and semantic tables have mismatched shapes");
    ImportanceTable table{Scheme::combined, DenseMatrix(a.rows(), a.cols(), 0.0)};
    for (std::size_t i = 0; i < a.values().size(); ++i) {
        double lexical = (1.0 + a.values()[i]) / 2.0;
        double semantic = (1.0 + b.values()[i]) / 2.0;
        table.scores.values()[i] = std::sqrt(lexical * semantic);
    }
    return table;
}

ImportanceTable centroid_importance(const DenseMatrix& embeddings, const LabelVector& labels,
                                    const DenseMatrix& term_embeddings, const Vocabulary& vocab) {
    std::size_t n = embeddings.rows();
    std::size_t dim = embeddings.cols();
    if (labels.size() != n) throw InputError("label count does not match embedding rows");
    std::size_t k = static_cast<std::size_t>(labels.n_clusters);

    DenseMatrix centroids(k, dim, 0.0);
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t d = 0; d < n; ++d) {
        auto c = static_cast<std::size_t>(labels.labels[d]);
        ++sizes[c];
        for (std::size_t f = 0; f < dim; ++f) centroids(c, f) += embeddings(d, f);
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (sizes[c] == 0)
            throw InputError("cluster " + std::to_string(c) +
                             " has no documents; centroid importance is undefined");
        for (std::size_t f = 0; f < dim; ++f)
            centroids(c, f) /= static_cast<double>(sizes[c]);
    }
    auto table = cosine_table(Scheme::centroid, centroids, term_embeddings, vocab);
    return table;
}

ImportanceTable ctfidf_importance(const DocTermCounts& counts, const LabelVector& labels) {
    if (labels.size() != counts.n_docs)
        throw InputError("label count does not match document count");
    std::size_t v = counts.n_terms;
    std::size_t k = static_cast<std::size_t>(labels.n_clusters);
    if (k == 0) throw InputError("labels declare zero clusters");

    DenseMatrix cluster_counts(k, v, 0.0);  // c_kj
    std::vector<double> cluster_mass(k, 0.0);  // w_k
    for (std::size_t d = 0; d < counts.n_docs; ++d) {
        auto c = static_cast<std::size_t>(labels.labels[d]);
        for (std::size_t j = 0; j < v; ++j) {
            double cnt = counts.at(d, j);
            cluster_counts(c, j) += cnt;
            cluster_mass[c] += cnt;
        }
    }
    double grand_total = std::accumulate(cluster_mass.begin(), cluster_mass.end(), 0.0);
    for (std::size_t c = 0; c < k; ++c)
        if (cluster_mass[c] == 0.0)
            throw InputError("cluster " + std::to_string(c) +
                             " contains no tokens; c-TF-IDF is undefined");

    double avg_words_per_topic = grand_total / static_cast<double>(k);  // A
    ImportanceTable table{Scheme::ctfidf, DenseMatrix(k, v, 0.0)};
    for (std::size_t j = 0; j < v; ++j) {
        double term_total = 0.0;
        for (std::size_t c = 0; c < k; ++c) term_total += cluster_counts(c, j);
        // A term absent everywhere has tf = 0 in every cluster; skip it
        // rather than evaluating log(1 + A/0).
        if (term_total == 0.0) continue;
        double idf = std::log(1.0 + avg_words_per_topic / term_total);
        for (std::size_t c = 0; c < k; ++c)
            table.scores(c, j) = cluster_counts(c, j) / cluster_mass[c] * idf;
    }
    return table;
}

TopicKeywords top_k_keywords(const ImportanceTable& table, const Vocabulary& vocab,
                             std::size_t k) {
    std::size_t v = table.scores.cols();
    if (vocab.size() != v)
        throw InputError("importance table width does not match vocabulary size");
    if (k > v)
        throw InputError("requested " + std::to_string(k) + " keywords from a vocabulary of " +
                         std::to_string(v));

    TopicKeywords out(table.scores.rows());
    std::vector<std::size_t> order(v);
    for (std::size_t c = 0; c < table.scores.rows(); ++c) {
        std::iota(order.begin(), order.end(), 0);
        auto row = table.scores.row(c);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (row[a] != row[b]) return row[a] > row[b];
            return vocab.terms[a] < vocab.terms[b];
        });
        out[c].reserve(k);
        for (std::size_t r = 0; r < k; ++r)
            out[c].push_back({vocab.terms[order[r]], row[order[r]]});
    }
    return out;
}

}  // namespace topeax::importance
