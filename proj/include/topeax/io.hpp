#ifndef TOPEAX_IO_HPP
#define TOPEAX_IO_HPP

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "topeax/matrix.hpp"
#include "topeax/text.hpp"

namespace topeax {

// Embedding matrix file layout ("TPXE"):
//   bytes 0..3    magic "TPXE"
//   bytes 4..7    format version, u32 little-endian (currently 1)
//   bytes 8..11   rows, u32 little-endian
//   bytes 12..15  cols, u32 little-endian
//   then rows*cols IEEE-754 binary32 little-endian values, row-major.
// Values are widened to doubles on load. Non-finite payload values are
// rejected.
DenseMatrix load_embedding_matrix(const std::filesystem::path& path);
void save_embedding_matrix(const DenseMatrix& m, const std::filesystem::path& path);

// JSON-lines corpus: one object per line with a required "text" field and an
// optional "label" (string or integer). Label presence must be consistent
// across all lines. Blank lines are skipped.
Corpus load_corpus_jsonl(const std::filesystem::path& path);
void save_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path);

// Word vectors for coherence evaluation: a TPXE matrix plus a sidecar
// newline-delimited term list with exactly one term per matrix row.
struct WordVectorTable {
    std::vector<std::string> terms;
    DenseMatrix vectors;
    std::unordered_map<std::string, std::size_t> index;

    std::optional<std::span<const double>> find(const std::string& term) const {
        auto it = index.find(term);
        if (it == index.end()) return std::nullopt;
        return vectors.row(it->second);
    }
};

WordVectorTable load_word_vectors(const std::filesystem::path& matrix_path,
                                  const std::filesystem::path& terms_path);
void save_term_list(const std::vector<std::string>& terms,
                    const std::filesystem::path& path);
std::vector<std::string> load_term_list(const std::filesystem::path& path);

// Writes to a temporary sibling file and renames into place, so a failed run
// never leaves a partial artifact behind.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace topeax

#endif  // TOPEAX_IO_HPP
