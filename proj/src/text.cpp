#include "topeax/text.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace topeax {

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : text) {
        // ASCII-only classification keeps the rule locale-independent; bytes
        // above 0x7F are treated as separators.
        bool alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        if (alnum) {
            current.push_back(static_cast<char>(
                (c >= 'A' && c <= 'Z') ? c - 'A' + 'a' : c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

LabelVector gold_label_vector(const Corpus& corpus) {
    if (!corpus.has_gold_labels())
        throw InputError("corpus has no gold labels");
    if (corpus.gold_labels.size() != corpus.documents.size())
        throw InputError("gold label count does not match document count");

    std::set<std::string> distinct(corpus.gold_labels.begin(), corpus.gold_labels.end());
    std::unordered_map<std::string, int> id;
    int next = 0;
    for (const auto& name : distinct) id[name] = next++;

    LabelVector out;
    out.n_clusters = next;
    out.labels.reserve(corpus.gold_labels.size());
    for (const auto& name : corpus.gold_labels) out.labels.push_back(id[name]);
    return out;
}

Vocabulary build_vocabulary(const Corpus& corpus, std::size_t min_doc_freq) {
    if (corpus.documents.empty())
        throw InputError("cannot build a vocabulary from an empty corpus");

    std::map<std::string, std::size_t> doc_freq;
    for (const auto& doc : corpus.documents) {
        std::set<std::string> seen;
        for (auto& tok : tokenize(doc)) seen.insert(std::move(tok));
        for (const auto& tok : seen) ++doc_freq[tok];
    }

    Vocabulary vocab;
    for (const auto& [term, freq] : doc_freq) {
        if (freq >= min_doc_freq) vocab.terms.push_back(term);
    }
    if (vocab.terms.empty())
        throw InputError("corpus yields an empty vocabulary (no tokens met min_doc_freq=" +
                         std::to_string(min_doc_freq) + ")");
    // std::map iteration is already lexicographic, so terms are sorted.
    vocab.index.reserve(vocab.terms.size());
    for (std::size_t j = 0; j < vocab.terms.size(); ++j) vocab.index[vocab.terms[j]] = j;
    return vocab;
}

DocTermCounts count_matrix(const Corpus& corpus, const Vocabulary& vocab) {
    DocTermCounts out;
    out.n_docs = corpus.documents.size();
    out.n_terms = vocab.size();
    out.counts.assign(out.n_docs * out.n_terms, 0);
    for (std::size_t d = 0; d < out.n_docs; ++d) {
        for (const auto& tok : tokenize(corpus.documents[d])) {
            if (auto j = vocab.find(tok)) ++out.counts[d * out.n_terms + *j];
        }
    }
    return out;
}

}  // namespace topeax
