#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace tagseek {

/// One database item. Carries either a feature vector or a stored score.
struct ItemRecord {
    std::string id;
    std::vector<std::string> tags;  // distinct, in source order
    Eigen::VectorXd features;       // empty for score-only corpora
    std::optional<double> score;
};

/// Immutable item collection plus the inverted tag index over it.
class Corpus {
public:
    Corpus() = default;
    /// Validates and indexes. Throws LoadError on duplicate ids, empty tag sets,
    /// inconsistent feature lengths or mixed feature/score records.
    explicit Corpus(std::vector<ItemRecord> items);

    const std::vector<ItemRecord>& items() const { return items_; }
    std::size_t size() const { return items_.size(); }
    const ItemRecord& operator[](std::size_t i) const { return items_[i]; }

    /// Item indices carrying `tag`, ascending; nullptr for unknown tags.
    const std::vector<std::size_t>* items_with(const std::string& tag) const;
    /// The tag universe, sorted.
    const std::vector<std::string>& tags() const { return tags_; }

    std::size_t feature_dim() const { return feature_dim_; }
    bool has_scores() const { return has_scores_; }
    /// Largest tag-set size of any item.
    std::size_t max_tags_per_item() const { return max_tags_; }
    std::size_t tag_occurrences() const { return occurrences_; }
    std::optional<std::size_t> find_item(const std::string& id) const;

private:
    std::vector<ItemRecord> items_;
    std::unordered_map<std::string, std::vector<std::size_t>> tag_index_;
    std::unordered_map<std::string, std::size_t> id_index_;
    std::vector<std::string> tags_;
    std::size_t feature_dim_ = 0;
    bool has_scores_ = false;
    std::size_t max_tags_ = 0;
    std::size_t occurrences_ = 0;
};

struct Diagnostic {
    std::size_t line = 0;
    std::string message;
    std::string to_string() const { return "line " + std::to_string(line) + ": " + message; }
};

/// Result of a full validation pass over a corpus file: every violation, not
/// just the first.
struct CorpusScan {
    std::vector<Diagnostic> diagnostics;
    std::shared_ptr<const Corpus> corpus;  // set iff diagnostics is empty
};

CorpusScan scan_corpus(const std::filesystem::path& path);

/// Throws LoadError carrying the first diagnostic.
std::shared_ptr<const Corpus> load_corpus(const std::filesystem::path& path);

void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

} // namespace tagseek
