#ifndef TOPEAX_TEXT_HPP
#define TOPEAX_TEXT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "topeax/errors.hpp"

namespace topeax {

struct Corpus {
    std::vector<std::string> documents;
    // Raw gold label identifiers, one per document when present; empty when
    // the corpus carries no labels.
    std::vector<std::string> gold_labels;

    bool has_gold_labels() const { return !gold_labels.empty(); }
};

// Dense cluster ids in 0..n_clusters-1.
struct LabelVector {
    std::vector<int> labels;
    int n_clusters = 0;

    std::size_t size() const { return labels.size(); }
};

// Maps the corpus' raw gold identifiers onto dense ids. Distinct identifiers
// are numbered in lexicographic order so the mapping is reproducible.
LabelVector gold_label_vector(const Corpus& corpus);

// Lowercases and splits on maximal runs of non-alphanumeric characters.
// Digit-containing tokens are kept; no stop-word or frequency filtering
// happens here.
std::vector<std::string> tokenize(const std::string& text);

struct Vocabulary {
    std::vector<std::string> terms;  // lexicographically sorted, unique
    std::unordered_map<std::string, std::size_t> index;

    std::size_t size() const { return terms.size(); }
    std::optional<std::size_t> find(const std::string& term) const {
        auto it = index.find(term);
        if (it == index.end()) return std::nullopt;
        return it->second;
    }
};

Vocabulary build_vocabulary(const Corpus& corpus, std::size_t min_doc_freq = 1);

// documents x vocabulary occurrence counts.
struct DocTermCounts {
    std::size_t n_docs = 0;
    std::size_t n_terms = 0;
    std::vector<std::uint32_t> counts;  // row-major

    std::uint32_t at(std::size_t d, std::size_t j) const { return counts[d * n_terms + j]; }
};

// Out-of-vocabulary tokens are skipped.
DocTermCounts count_matrix(const Corpus& corpus, const Vocabulary& vocab);

}  // namespace topeax

#endif  // TOPEAX_TEXT_HPP
