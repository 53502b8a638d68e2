#include "topeax/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <json.hpp>

namespace topeax::metrics {

namespace {

std::uint64_t choose2(std::uint64_t x) { return x * (x - 1) / 2; }

struct Contingency {
    std::size_t ka = 0, kb = 0;
    std::uint64_t n = 0;
    std::vector<std::uint64_t> cells;   // ka x kb
    std::vector<std::uint64_t> row_sums;
    std::vector<std::uint64_t> col_sums;

    std::uint64_t at(std::size_t i, std::size_t j) const { return cells[i * kb + j]; }
};

Contingency contingency_table(const LabelVector& a, const LabelVector& b) {
    if (a.size() != b.size())
        throw InputError("label vectors have different lengths (" + std::to_string(a.size()) +
                         " vs " + std::to_string(b.size()) + ")");
    Contingency t;
    t.ka = static_cast<std::size_t>(std::max(a.n_clusters, 1));
    t.kb = static_cast<std::size_t>(std::max(b.n_clusters, 1));
    t.n = a.size();
    t.cells.assign(t.ka * t.kb, 0);
    t.row_sums.assign(t.ka, 0);
    t.col_sums.assign(t.kb, 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        auto ia = static_cast<std::size_t>(a.labels[i]);
        auto ib = static_cast<std::size_t>(b.labels[i]);
        if (ia >= t.ka || ib >= t.kb)
            throw InputError("label outside the declared cluster range");
        ++t.cells[ia * t.kb + ib];
        ++t.row_sums[ia];
        ++t.col_sums[ib];
    }
    return t;
}

}  // namespace

PairCounts pair_counts(const LabelVector& a, const LabelVector& b) {
    Contingency t = contingency_table(a, b);
    PairCounts pc;
    for (auto s : t.row_sums) pc.together_a += choose2(s);
    for (auto s : t.col_sums) pc.together_b += choose2(s);
    for (auto c : t.cells) pc.together_both += choose2(c);
    return pc;
}

double fmi_from_pair_counts(const PairCounts& pc) {
    if (pc.together_a == 0 || pc.together_b == 0) return 0.0;
    return static_cast<double>(pc.together_both) /
           std::sqrt(static_cast<double>(pc.together_a) * static_cast<double>(pc.together_b));
}

double fowlkes_mallows(const LabelVector& a, const LabelVector& b) {
    if (a.size() < 2) throw InputError("FMI needs at least 2 documents");
    return fmi_from_pair_counts(pair_counts(a, b));
}

double topic_diversity(const importance::TopicKeywords& keywords) {
    if (keywords.empty()) throw InputError("diversity of an empty topic list is undefined");
    std::size_t per_topic = keywords.front().size();
    if (per_topic == 0) throw InputError("topics carry no keywords");
    std::set<std::string> distinct;
    for (const auto& topic : keywords) {
        if (topic.size() != per_topic)
            throw InputError("all topics must carry the same number of keywords");
        for (const auto& kw : topic) distinct.insert(kw.term);
    }
    return static_cast<double>(distinct.size()) /
           static_cast<double>(keywords.size() * per_topic);
}

double embedding_coherence(const importance::TopicKeywords& keywords,
                           const WordVectorTable& vectors) {
    if (keywords.empty()) throw InputError("coherence of an empty topic list is undefined");
    double total = 0.0;
    for (std::size_t k = 0; k < keywords.size(); ++k) {
        std::vector<std::span<const double>> covered;
        std::vector<std::string> missing;
        for (const auto& kw : keywords[k]) {
            if (auto vec = vectors.find(kw.term))
                covered.push_back(*vec);
            else
                missing.push_back(kw.term);
        }
        if (covered.size() < 2) {
            std::string msg = "topic " + std::to_string(k) +
                              " has fewer than 2 keywords covered by the word-vector table";
            if (!missing.empty()) {
                msg += "; missing terms:";
                for (const auto& term : missing) msg += " " + term;
            }
            throw InputError(msg);
        }
        double sum = 0.0;
        std::size_t pairs = 0;
        for (std::size_t i = 0; i < covered.size(); ++i) {
            for (std::size_t j = i + 1; j < covered.size(); ++j) {
                sum += cosine_similarity(covered[i], covered[j]);
                ++pairs;
            }
        }
        total += sum / static_cast<double>(pairs);
    }
    return total / static_cast<double>(keywords.size());
}

AggregateScores aggregate_scores(double c_in, double c_ex, double diversity) {
    c_in = std::max(c_in, 0.0);
    c_ex = std::max(c_ex, 0.0);
    AggregateScores s;
    s.coherence_aggregate = std::sqrt(c_in * c_ex);
    s.interpretability = std::sqrt(s.coherence_aggregate * diversity);
    return s;
}

double topic_count_ape(std::size_t predicted_k, std::size_t gold_k) {
    if (gold_k == 0) throw InputError("gold topic count must be at least 1");
    double diff = std::abs(static_cast<double>(predicted_k) - static_cast<double>(gold_k));
    return 100.0 * diff / static_cast<double>(gold_k);
}

namespace {

double entropy_nats(const std::vector<std::uint64_t>& sizes, std::uint64_t n) {
    double h = 0.0;
    for (auto s : sizes) {
        if (s == 0) continue;
        double p = static_cast<double>(s) / static_cast<double>(n);
        h -= p * std::log(p);
    }
    return h;
}

double mutual_information_nats(const Contingency& t) {
    double mi = 0.0;
    double n = static_cast<double>(t.n);
    for (std::size_t i = 0; i < t.ka; ++i) {
        for (std::size_t j = 0; j < t.kb; ++j) {
            std::uint64_t c = t.at(i, j);
            if (c == 0) continue;
            double pij = static_cast<double>(c) / n;
            mi += pij * std::log(n * static_cast<double>(c) /
                                 (static_cast<double>(t.row_sums[i]) *
                                  static_cast<double>(t.col_sums[j])));
        }
    }
    return mi;
}

// Expected MI under the hypergeometric model of random labellings with fixed
// marginals.
double expected_mutual_information_nats(const Contingency& t) {
    double n = static_cast<double>(t.n);
    double log_n_fact = std::lgamma(n + 1.0);
    double emi = 0.0;
    for (std::size_t i = 0; i < t.ka; ++i) {
        double a = static_cast<double>(t.row_sums[i]);
        if (a == 0.0) continue;
        for (std::size_t j = 0; j < t.kb; ++j) {
            double b = static_cast<double>(t.col_sums[j]);
            if (b == 0.0) continue;
            double lo = std::max(1.0, a + b - n);
            double hi = std::min(a, b);
            for (double nij = lo; nij <= hi; nij += 1.0) {
                double log_term = std::lgamma(a + 1.0) + std::lgamma(b + 1.0) +
                                  std::lgamma(n - a + 1.0) + std::lgamma(n - b + 1.0) -
                                  log_n_fact - std::lgamma(nij + 1.0) -
                                  std::lgamma(a - nij + 1.0) - std::lgamma(b - nij + 1.0) -
                                  std::lgamma(n - a - b + nij + 1.0);
                emi += (nij / n) * std::log(n * nij / (a * b)) * std::exp(log_term);
            }
        }
    }
    return emi;
}

}  // namespace

double adjusted_mutual_information(const LabelVector& a, const LabelVector& b) {
    Contingency t = contingency_table(a, b);
    if (t.n == 0) throw InputError("AMI of empty labellings is undefined");

    auto occupied = [](const std::vector<std::uint64_t>& sums) {
        std::size_t k = 0;
        for (auto s : sums)
            if (s > 0) ++k;
        return k;
    };
    std::size_t ka = occupied(t.row_sums);
    std::size_t kb = occupied(t.col_sums);
    // Two trivial partitions are identical by construction.
    if ((ka == 1 && kb == 1) || (ka == t.n && kb == t.n)) return 1.0;

    double mi = mutual_information_nats(t);
    double emi = expected_mutual_information_nats(t);
    double h_a = entropy_nats(t.row_sums, t.n);
    double h_b = entropy_nats(t.col_sums, t.n);
    double normalizer = 0.5 * (h_a + h_b);

    double denominator = normalizer - emi;
    constexpr double kEps = 2.220446049250313e-16;
    if (denominator < 0.0)
        denominator = std::min(denominator, -kEps);
    else
        denominator = std::max(denominator, kEps);
    return (mi - emi) / denominator;
}

MetricReport evaluate_model(const importance::TopicKeywords& keywords,
                            const LabelVector& predicted,
                            const std::optional<LabelVector>& gold,
                            const WordVectorTable* internal_vectors,
                            const WordVectorTable* external_vectors) {
    MetricReport report;
    report.n_topics_predicted = static_cast<int>(keywords.size());
    report.diversity = topic_diversity(keywords);

    if (gold) {
        if (gold->size() != predicted.size())
            throw InputError("gold labels and predicted labels have different lengths");
        report.fmi = fowlkes_mallows(predicted, *gold);
        report.ami = adjusted_mutual_information(predicted, *gold);
        report.n_topics_gold = gold->n_clusters;
        report.ape_topic_count =
            topic_count_ape(keywords.size(), static_cast<std::size_t>(gold->n_clusters));
    }

    if (internal_vectors)
        report.coherence_internal = embedding_coherence(keywords, *internal_vectors);
    if (external_vectors)
        report.coherence_external = embedding_coherence(keywords, *external_vectors);
    if (report.coherence_internal && report.coherence_external) {
        auto agg = aggregate_scores(*report.coherence_internal, *report.coherence_external,
                                    report.diversity);
        report.coherence_aggregate = agg.coherence_aggregate;
        report.interpretability = agg.interpretability;
    }
    return report;
}

std::string report_to_json(const MetricReport& report) {
    nlohmann::json j;
    auto put = [&j](const char* key, const auto& value) {
        if (value)
            j[key] = *value;
        else
            j[key] = nullptr;
    };
    put("fmi", report.fmi);
    put("ami", report.ami);
    j["diversity"] = report.diversity;
    put("coherence_internal", report.coherence_internal);
    put("coherence_external", report.coherence_external);
    put("coherence_aggregate", report.coherence_aggregate);
    put("interpretability", report.interpretability);
    j["n_topics_predicted"] = report.n_topics_predicted;
    put("n_topics_gold", report.n_topics_gold);
    put("ape_topic_count", report.ape_topic_count);
    return j.dump(2) + "\n";
}

}  // namespace topeax::metrics
