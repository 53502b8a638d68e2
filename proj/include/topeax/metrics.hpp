#ifndef TOPEAX_METRICS_HPP
#define TOPEAX_METRICS_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "topeax/importance.hpp"
#include "topeax/io.hpp"
#include "topeax/text.hpp"

namespace topeax::metrics {

// Pair-counting statistics shared by the contingency-table implementation and
// the brute-force oracle used in tests: pairs co-clustered in a, in b, and in
// both.
struct PairCounts {
    std::uint64_t together_a = 0;
    std::uint64_t together_b = 0;
    std::uint64_t together_both = 0;
};

PairCounts pair_counts(const LabelVector& a, const LabelVector& b);
double fmi_from_pair_counts(const PairCounts& pc);

// Geometric mean of pairwise precision and recall, 0 when either labelling
// has no co-clustered pair.
double fowlkes_mallows(const LabelVector& a, const LabelVector& b);

// Fraction of distinct terms across all topics' keyword lists.
double topic_diversity(const importance::TopicKeywords& keywords);

// Mean over topics of the mean pairwise cosine among each topic's
// in-vocabulary keywords. Topics with fewer than two covered keywords are an
// error; dropped terms are reported in it.
double embedding_coherence(const importance::TopicKeywords& keywords,
                           const WordVectorTable& vectors);

struct AggregateScores {
    double coherence_aggregate = 0.0;
    double interpretability = 0.0;
};

// Negative coherences are clamped to zero before the geometric means.
AggregateScores aggregate_scores(double c_in, double c_ex, double diversity);

double topic_count_ape(std::size_t predicted_k, std::size_t gold_k);

// AMI with the hypergeometric expected-MI correction and arithmetic-mean
// normalizer.
double adjusted_mutual_information(const LabelVector& a, const LabelVector& b);

struct MetricReport {
    std::optional<double> fmi;
    std::optional<double> ami;
    double diversity = 0.0;
    std::optional<double> coherence_internal;
    std::optional<double> coherence_external;
    std::optional<double> coherence_aggregate;
    std::optional<double> interpretability;
    int n_topics_predicted = 0;
    std::optional<int> n_topics_gold;
    std::optional<double> ape_topic_count;
};

// Clustering metrics are null without gold labels; coherence metrics are null
// without the corresponding word-vector table.
MetricReport evaluate_model(const importance::TopicKeywords& keywords,
                            const LabelVector& predicted,
                            const std::optional<LabelVector>& gold,
                            const WordVectorTable* internal_vectors,
                            const WordVectorTable* external_vectors);

std::string report_to_json(const MetricReport& report);

}  // namespace topeax::metrics

#endif  // TOPEAX_METRICS_HPP
