#pragma once

#include "tagseek/corpus.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

namespace tagseek {

/// One oracle reply: an item and its full tag set.
struct QueryResult {
    ItemRecord item;
};

/// Tag-search oracle. `std::nullopt` is the exhausted signal (unknown tag or
/// no unreturned items left); every call counts against the budget.
class Oracle {
public:
    virtual ~Oracle() = default;
    virtual std::optional<QueryResult> query(const std::string& tag) = 0;
    virtual std::size_t call_count() const = 0;
};

/// In-process oracle over a corpus. Samples uniformly without replacement per tag.
/// Single caller only.
class OracleSession final : public Oracle {
public:
    OracleSession(std::shared_ptr<const Corpus> corpus, std::uint64_t seed);

    std::optional<QueryResult> query(const std::string& tag) override;
    std::size_t call_count() const override { return calls_; }

    /// Index into the corpus rather than a copy of the record.
    std::optional<std::size_t> query_index(const std::string& tag);

    const Corpus& corpus() const { return *corpus_; }

private:
    std::shared_ptr<const Corpus> corpus_;
    std::mt19937_64 rng_;
    std::unordered_map<std::string, std::vector<std::size_t>> remaining_;
    std::size_t calls_ = 0;
};

} // namespace tagseek
