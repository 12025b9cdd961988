#pragma once

#include "tagseek/embeddings.hpp"
#include "tagseek/linucb.hpp"
#include "tagseek/oracle.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace tagseek {

enum class PolicyKind { random, egreedy, ucb, ada_egreedy, ada_ucb, tiara, tiara_s };

/// Policy name plus its hyperparameters. Unset values take per-policy defaults:
/// alpha 0.01 and lambda 1 for the LinUCB policies, alpha 1 for UCB, epsilon 0.1.
struct PolicySpec {
    PolicyKind kind = PolicyKind::tiara;
    std::optional<double> alpha;
    std::optional<double> lambda;
    std::optional<double> epsilon;

    double alpha_or_default() const;
    double lambda_or_default() const;
    double epsilon_or_default() const;
    /// Throws PolicyError on out-of-range parameters.
    void validate() const;
};

std::string_view policy_name(PolicyKind kind);
/// Throws PolicyError listing the valid names.
PolicyKind parse_policy_name(std::string_view name);
const std::vector<std::string>& policy_names();

struct TagScore {
    std::string tag;
    double score = 0.0;
};

struct PolicyDecision {
    std::string tag;
    std::vector<TagScore> scores;  // every non-exhausted candidate at decision time
};

/// Index of the best score; ties go to the lexicographically smallest tag.
/// Returns scores.size() when empty.
std::size_t argmax_tag(std::span<const TagScore> scores);

/// Sorted by score descending, ties by tag ascending.
void sort_scores(std::vector<TagScore>& scores);

/// Candidate pool: insertion-ordered, duplicate-free, with an exhausted subset.
class TagPool {
public:
    TagPool() = default;
    explicit TagPool(std::span<const std::string> tags);

    bool insert(const std::string& tag);
    void mark_exhausted(const std::string& tag);
    bool contains(const std::string& tag) const { return members_.contains(tag); }
    bool is_exhausted(const std::string& tag) const { return exhausted_.contains(tag); }

    const std::vector<std::string>& tags() const { return tags_; }
    std::size_t size() const { return tags_.size(); }
    std::vector<std::string> active() const;
    std::size_t exhausted_count() const { return exhausted_.size(); }

private:
    std::vector<std::string> tags_;
    std::unordered_set<std::string> members_;
    std::unordered_set<std::string> exhausted_;
};

/// A retrieval policy: pick a tag, then learn from the oracle's reply.
/// Single-trial state; not thread-safe.
class Policy {
public:
    virtual ~Policy() = default;

    virtual PolicyKind kind() const = 0;
    /// Throws PolicyError("all candidates exhausted") when nothing is left.
    virtual PolicyDecision select() = 0;
    /// `result` is nullopt when the oracle signalled exhaustion; `reward` is the
    /// black-box value of the returned item.
    virtual void observe(const std::string& chosen, const std::optional<QueryResult>& result,
                         std::optional<double> reward) = 0;
    /// Current score of every non-exhausted candidate, in pool order.
    virtual std::vector<TagScore> tag_scores() = 0;

    virtual const TagPool& pool() const = 0;
};

/// LinUCB over tag embeddings. With multi_tag every returned tag becomes a
/// training example (Tiara); otherwise only the queried tag does (Tiara-S).
/// Both grow the pool with returned tags.
class LinUcbPolicy final : public Policy {
public:
    LinUcbPolicy(std::span<const std::string> initial_tags, const EmbeddingTable& table, double lambda,
                 double alpha, bool multi_tag);

    PolicyKind kind() const override { return multi_tag_ ? PolicyKind::tiara : PolicyKind::tiara_s; }
    PolicyDecision select() override;
    void observe(const std::string& chosen, const std::optional<QueryResult>& result,
                 std::optional<double> reward) override;
    std::vector<TagScore> tag_scores() override;
    const TagPool& pool() const override { return pool_; }

    const LinUcbState<double>& state() const { return state_; }

private:
    TagPool pool_;
    TagEmbedder embedder_;
    LinUcbState<double> state_;
    bool multi_tag_;
};

/// Empirical-mean policies: Random, epsilon-greedy and UCB, each optionally
/// adaptive (pool grows with returned tags). Unvisited tags score +infinity.
class MeanRewardPolicy final : public Policy {
public:
    MeanRewardPolicy(PolicyKind kind, std::span<const std::string> initial_tags, double alpha, double epsilon,
                     std::uint64_t seed);

    PolicyKind kind() const override { return kind_; }
    PolicyDecision select() override;
    void observe(const std::string& chosen, const std::optional<QueryResult>& result,
                 std::optional<double> reward) override;
    std::vector<TagScore> tag_scores() override;
    const TagPool& pool() const override { return pool_; }

    std::size_t visits(const std::string& tag) const;
    double mean_reward(const std::string& tag) const;

private:
    struct Stats {
        std::size_t n = 0;
        double sum = 0.0;
    };
    double score_of(const std::string& tag) const;
    bool adaptive() const;

    PolicyKind kind_;
    TagPool pool_;
    double alpha_;
    double epsilon_;
    std::mt19937_64 rng_;
    std::unordered_map<std::string, Stats> stats_;
};

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, std::span<const std::string> initial_tags,
                                    const EmbeddingTable& table, std::uint64_t seed);

} // namespace tagseek
