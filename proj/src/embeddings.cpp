#include "tagseek/embeddings.hpp"

#include "tagseek/error.hpp"
#include "text.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>

namespace tagseek {

EmbeddingTable::EmbeddingTable(std::size_t dimension,
                               std::vector<std::pair<std::string, Eigen::VectorXd>> entries)
    : dimension_(dimension) {
    if (dimension_ == 0) throw LoadError("embedding dimension must be positive");
    words_.reserve(entries.size());
    vectors_.reserve(entries.size());
    for (auto& [word, vec] : entries) {
        if (static_cast<std::size_t>(vec.size()) != dimension_)
            throw LoadError("dimension mismatch for word '" + word + "'");
        if (!vec.allFinite()) throw LoadError("non-finite component for word '" + word + "'");
        std::string key = text::fold_case(word);
        if (index_.contains(key)) continue;
        index_.emplace(key, words_.size());
        words_.push_back(std::move(key));
        vectors_.push_back(std::move(vec));
    }
}

const Eigen::VectorXd* EmbeddingTable::find(std::string_view word) const {
    auto it = index_.find(text::fold_case(word));
    return it == index_.end() ? nullptr : &vectors_[it->second];
}

EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::optional<std::size_t> expected_dim) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open embedding file: " + path.string());

    std::vector<std::pair<std::string, Eigen::VectorXd>> entries;
    std::size_t dim = expected_dim.value_or(0);
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string_view> fields;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        text::split_whitespace(line, fields);
        if (fields.empty()) continue;
        const std::size_t n = fields.size() - 1;
        if (n == 0) throw LoadError("no vector components at line " + std::to_string(line_no));
        if (dim == 0) dim = n;
        if (n != dim)
            throw LoadError("dimension mismatch at line " + std::to_string(line_no) + ": expected " +
                            std::to_string(dim) + ", got " + std::to_string(n));
        Eigen::VectorXd vec(static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < dim; ++i) {
            auto parsed = text::parse_double(fields[i + 1]);
            if (!parsed || !std::isfinite(*parsed))
                throw LoadError("unparsable float '" + std::string(fields[i + 1]) + "' at line " +
                                std::to_string(line_no));
            vec[static_cast<Eigen::Index>(i)] = *parsed;
        }
        entries.emplace_back(std::string(fields[0]), std::move(vec));
    }
    if (entries.empty()) throw LoadError("empty embedding file: " + path.string());
    return EmbeddingTable(dim, std::move(entries));
}

void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write embedding file: " + path.string());
    for (const auto& word : table.words()) {
        out << word;
        for (double x : *table.find(word)) out << ' ' << text::format_double(x);
        out << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

std::vector<std::string> tokenize_tag(std::string_view tag) {
    std::vector<std::string> words;
    std::string current;
    text::for_each_code_point(tag, [&](char32_t cp) {
        if (text::is_alpha(cp)) {
            text::append_utf8(current, text::to_lower(cp));
        } else if (!current.empty()) {
            words.push_back(std::move(current));
            current.clear();
        }
    });
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

TagEmbedding embed_tag(std::string_view tag, const EmbeddingTable& table) {
    TagEmbedding out;
    out.tag = std::string(tag);
    out.vector = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.dimension()));
    const auto words = tokenize_tag(tag);
    out.word_count = words.size();
    std::size_t found = 0;
    for (const auto& w : words) {
        if (const auto* v = table.find(w)) {
            out.vector += *v;
            ++found;
        } else {
            ++out.oov_count;
        }
    }
    if (found > 0) out.vector /= static_cast<double>(found);
    return out;
}

EmbeddingCoverage embedding_coverage(const std::vector<std::string>& tags, const EmbeddingTable& table) {
    EmbeddingCoverage c;
    c.tags = tags.size();
    for (const auto& t : tags) {
        const auto words = tokenize_tag(t);
        if (std::any_of(words.begin(), words.end(), [&](const std::string& w) { return table.contains(w); }))
            ++c.covered;
    }
    return c;
}

const TagEmbedding& TagEmbedder::operator()(const std::string& tag) {
    auto it = cache_.find(tag);
    if (it == cache_.end()) it = cache_.emplace(tag, embed_tag(tag, *table_)).first;
    return it->second;
}

} // namespace tagseek
