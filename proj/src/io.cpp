#include "topeax/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace topeax {

namespace {

constexpr char kMagic[4] = {'T', 'P', 'X', 'E'};
constexpr std::uint32_t kFormatVersion = 1;

std::uint32_t read_u32_le(const unsigned char* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void write_u32_le(std::ostream& os, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

float f32_from_le(const unsigned char* p) {
    std::uint32_t bits = read_u32_le(p);
    return std::bit_cast<float>(bits);
}

void write_f32_le(std::ostream& os, float f) {
    write_u32_le(os, std::bit_cast<std::uint32_t>(f));
}

}  // namespace

DenseMatrix load_embedding_matrix(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open embedding matrix file: " + path.string());

    unsigned char header[16];
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    if (in.gcount() != sizeof(header))
        throw InputError("embedding matrix file too short for header: " + path.string());
    if (std::memcmp(header, kMagic, 4) != 0)
        throw InputError("bad magic bytes (expected TPXE): " + path.string());
    std::uint32_t version = read_u32_le(header + 4);
    if (version != kFormatVersion)
        throw InputError("unsupported TPXE format version " + std::to_string(version) +
                         " in " + path.string());
    std::uint32_t rows = read_u32_le(header + 8);
    std::uint32_t cols = read_u32_le(header + 12);

    std::size_t n_values = static_cast<std::size_t>(rows) * cols;
    std::vector<unsigned char> payload(n_values * 4);
    if (!payload.empty()) {
        in.read(reinterpret_cast<char*>(payload.data()),
                static_cast<std::streamsize>(payload.size()));
        if (static_cast<std::size_t>(in.gcount()) != payload.size())
            throw InputError("truncated TPXE payload in " + path.string() + ": expected " +
                             std::to_string(n_values) + " values, file ends early");
    }
    // Trailing bytes beyond the declared payload are a size mismatch too.
    char extra;
    if (in.read(&extra, 1); in.gcount() != 0)
        throw InputError("TPXE payload larger than declared dimensions in " + path.string());

    std::vector<double> values(n_values);
    for (std::size_t i = 0; i < n_values; ++i) {
        double v = static_cast<double>(f32_from_le(payload.data() + i * 4));
        if (!std::isfinite(v))
            throw InputError("non-finite value at index " + std::to_string(i) + " in " +
                             path.string());
        values[i] = v;
    }
    return DenseMatrix::from_values(rows, cols, std::move(values));
}

void save_embedding_matrix(const DenseMatrix& m, const std::filesystem::path& path) {
    std::ostringstream os(std::ios::binary);
    os.write(kMagic, 4);
    write_u32_le(os, kFormatVersion);
    write_u32_le(os, static_cast<std::uint32_t>(m.rows()));
    write_u32_le(os, static_cast<std::uint32_t>(m.cols()));
    for (double v : m.values()) write_f32_le(os, static_cast<float>(v));
    write_file_atomic(path, os.str());
}

Corpus load_corpus_jsonl(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open corpus file: " + path.string());

    Corpus corpus;
    std::string line;
    std::size_t line_no = 0;
    bool saw_label = false, saw_unlabelled = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw InputError("corpus line " + std::to_string(line_no) +
                             " is not valid JSON: " + e.what());
        }
        if (!obj.is_object() || !obj.contains("text") || !obj["text"].is_string())
            throw InputError("corpus line " + std::to_string(line_no) +
                             " lacks a string \"text\" field");
        corpus.documents.push_back(obj["text"].get<std::string>());
        if (obj.contains("label") && !obj["label"].is_null()) {
            const auto& lab = obj["label"];
            std::string value;
            if (lab.is_string())
                value = lab.get<std::string>();
            else if (lab.is_number_integer())
                value = std::to_string(lab.get<long long>());
            else
                throw InputError("corpus line " + std::to_string(line_no) +
                                 ": \"label\" must be a string or integer");
            corpus.gold_labels.push_back(value);
            saw_label = true;
        } else {
            saw_unlabelled = true;
        }
    }
    if (saw_label && saw_unlabelled)
        throw InputError("corpus mixes labelled and unlabelled documents: " + path.string());
    if (corpus.documents.empty())
        throw InputError("corpus contains no documents: " + path.string());
    return corpus;
}

void save_corpus_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
    std::ostringstream os;
    for (std::size_t d = 0; d < corpus.documents.size(); ++d) {
        nlohmann::json obj;
        obj["text"] = corpus.documents[d];
        if (corpus.has_gold_labels()) obj["label"] = corpus.gold_labels[d];
        os << obj.dump() << '\n';
    }
    write_file_atomic(path, os.str());
}

WordVectorTable load_word_vectors(const std::filesystem::path& matrix_path,
                                  const std::filesystem::path& terms_path) {
    WordVectorTable table;
    table.vectors = load_embedding_matrix(matrix_path);
    table.terms = load_term_list(terms_path);
    if (table.terms.size() != table.vectors.rows())
        throw InputError("word-vector term list length (" + std::to_string(table.terms.size()) +
                         ") does not match matrix rows (" +
                         std::to_string(table.vectors.rows()) + ")");
    table.index.reserve(table.terms.size());
    for (std::size_t i = 0; i < table.terms.size(); ++i) {
        auto [it, inserted] = table.index.emplace(table.terms[i], i);
        if (!inserted)
            throw InputError("duplicate term in word-vector table: " + table.terms[i]);
    }
    return table;
}

std::vector<std::string> load_term_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open term list file: " + path.string());
    std::vector<std::string> terms;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        terms.push_back(line);
    }
    return terms;
}

void save_term_list(const std::vector<std::string>& terms, const std::filesystem::path& path) {
    std::ostringstream os;
    for (const auto& t : terms) os << t << '\n';
    write_file_atomic(path, os.str());
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    auto dir = path.parent_path();
    if (!dir.empty()) std::filesystem::create_directories(dir);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw InputError("cannot write to " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw InputError("failed writing " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw InputError("cannot move " + tmp.string() + " into place: " + ec.message());
    }
}

}  // namespace topeax
