#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace tagseek {

/// Word -> vector map loaded from a GloVe-style text file. Keys are lowercase;
/// lookups fold case. Immutable once constructed.
class EmbeddingTable {
public:
    EmbeddingTable() = default;

    /// Builds a table from (word, vector) pairs. All vectors must share a length
    /// and be finite; the first occurrence of a word wins.
    EmbeddingTable(std::size_t dimension,
                   std::vector<std::pair<std::string, Eigen::VectorXd>> entries);

    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return words_.size(); }

    /// nullptr when the word is not in the vocabulary.
    const Eigen::VectorXd* find(std::string_view word) const;
    bool contains(std::string_view word) const { return find(word) != nullptr; }

    /// Words in load order.
    const std::vector<std::string>& words() const { return words_; }

private:
    std::size_t dimension_ = 0;
    std::vector<std::string> words_;
    std::vector<Eigen::VectorXd> vectors_;
    std::unordered_map<std::string, std::size_t> index_;
};

struct TagEmbedding {
    std::string tag;
    Eigen::VectorXd vector;
    std::size_t oov_count = 0;
    std::size_t word_count = 0;
};

/// Reads the whitespace-separated text format: `word f1 f2 ... fd` per line.
/// Throws LoadError naming the offending line.
EmbeddingTable load_embeddings(const std::filesystem::path& path,
                               std::optional<std::size_t> expected_dim = std::nullopt);

/// Writes the table in the same text format, shortest round-trip decimal.
void save_embeddings(const EmbeddingTable& table, const std::filesystem::path& path);

/// Maximal runs of alphabetic code points, lowercased. Everything else separates.
std::vector<std::string> tokenize_tag(std::string_view tag);

/// Mean of the in-vocabulary word vectors of the tag; zero vector when none is found.
TagEmbedding embed_tag(std::string_view tag, const EmbeddingTable& table);

struct EmbeddingCoverage {
    std::size_t tags = 0;
    std::size_t covered = 0;  // tags with at least one in-vocabulary word

    double fraction() const { return tags == 0 ? 1.0 : static_cast<double>(covered) / static_cast<double>(tags); }
};

EmbeddingCoverage embedding_coverage(const std::vector<std::string>& tags, const EmbeddingTable& table);

/// Per-trial memo of embed_tag. Not thread-safe; one per trial.
class TagEmbedder {
public:
    explicit TagEmbedder(const EmbeddingTable& table) : table_(&table) {}

    const TagEmbedding& operator()(const std::string& tag);
    std::size_t dimension() const { return table_->dimension(); }
    const EmbeddingTable& table() const { return *table_; }

private:
    const EmbeddingTable* table_;
    std::unordered_map<std::string, TagEmbedding> cache_;
};

} // namespace tagseek
