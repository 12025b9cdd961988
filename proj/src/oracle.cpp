#include "tagseek/oracle.hpp"

namespace tagseek {

OracleSession::OracleSession(std::shared_ptr<const Corpus> corpus, std::uint64_t seed)
    : corpus_(std::move(corpus)), rng_(seed) {}

std::optional<std::size_t> OracleSession::query_index(const std::string& tag) {
    ++calls_;
    auto it = remaining_.find(tag);
    if (it == remaining_.end()) {
        const auto* items = corpus_->items_with(tag);
        if (!items) return std::nullopt;
        it = remaining_.emplace(tag, *items).first;
    }
    auto& pool = it->second;
    if (pool.empty()) return std::nullopt;
    std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
    const std::size_t k = pick(rng_);
    const std::size_t index = pool[k];
    pool[k] = pool.back();
    pool.pop_back();
    return index;
}

std::optional<QueryResult> OracleSession::query(const std::string& tag) {
    auto index = query_index(tag);
    if (!index) return std::nullopt;
    return QueryResult{(*corpus_)[*index]};
}

} // namespace tagseek
