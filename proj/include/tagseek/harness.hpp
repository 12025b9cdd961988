#pragma once

#include "tagseek/blackbox.hpp"
#include "tagseek/corpus.hpp"
#include "tagseek/embeddings.hpp"
#include "tagseek/oracle.hpp"
#include "tagseek/policy.hpp"

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace tagseek {

struct StepRecord {
    std::size_t step = 0;  // 1-based
    std::string tag;
    std::optional<std::string> item_id;  // nullopt: exhausted
    std::optional<double> reward;
    std::optional<double> best_so_far;  // nullopt until the first item arrives

    bool operator==(const StepRecord&) const = default;
};

struct TrialResult {
    std::uint64_t seed = 0;
    std::string policy;
    std::vector<std::string> initial_tags;
    std::vector<StepRecord> steps;
    std::optional<std::string> best_item;
    std::optional<double> best_score;
    std::vector<TagScore> tag_scores;  // final snapshot, best first
    std::size_t oracle_calls = 0;
    std::size_t f_evaluations = 0;  // distinct items scored
    bool truncated = false;
    std::string truncation_reason;
    double wall_seconds = 0.0;

    /// Field-for-field equality, wall time excluded.
    bool same_outcome(const TrialResult& other) const;
};

struct TrialOptions {
    std::size_t budget = 500;
    /// When false, exhausted replies are logged but do not use up the budget.
    bool exhausted_consumes_budget = true;
};

/// The budgeted select -> query -> evaluate -> update loop. Black-box values are
/// memoized per item id, so `f` is called at most once per distinct item.
TrialResult run_trial(Oracle& oracle, BlackBox& f, Policy& policy, const TrialOptions& options);

/// Where a trial's items come from. `remote_url` non-empty selects the HTTP
/// oracle; the corpus then only serves initial-tag sampling.
struct Environment {
    std::shared_ptr<const Corpus> corpus;
    std::shared_ptr<const EmbeddingTable> embeddings;
    std::optional<BlackBox> scorer;
    std::string remote_url;
};

struct RunConfig {
    std::size_t budget = 500;
    std::size_t n_initial_tags = 100;
    std::vector<std::string> initial_tags;  // explicit list overrides sampling
    std::uint64_t seed = 0;
    std::size_t n_seeds = 1;
    std::size_t jobs = 1;
    PolicySpec policy;
    bool exhausted_consumes_budget = true;
    /// Parameter name (alpha, lambda, epsilon) -> values; points are the
    /// Cartesian product in the listed order.
    std::vector<std::pair<std::string, std::vector<double>>> sweep;

    /// Throws Error on B == 0, zero seeds, and the like.
    void validate() const;
};

/// Uniform without replacement from the corpus tag universe, in draw order.
std::vector<std::string> choose_initial_tags(const Corpus& corpus, std::size_t n, std::uint64_t seed);

/// One seeded trial. Seeds for oracle, policy and initial tags are derived
/// from `seed`.
TrialResult run_trial(const Environment& env, const RunConfig& config, std::uint64_t seed);

struct TrialFailure {
    std::uint64_t seed = 0;
    std::string error;
};

struct AggregateResult {
    std::string policy;
    std::vector<TrialResult> trials;  // successful trials in seed order
    std::vector<TrialFailure> failures;
    double mean = 0.0;  // of final best score, population sd
    double sd = 0.0;
    std::vector<std::optional<double>> curve_mean;  // per step, best-so-far
    std::vector<std::optional<double>> curve_sd;
};

/// Reduces finished trials. Truncated trials carry their last best-so-far forward.
AggregateResult aggregate(std::string policy, std::vector<TrialResult> trials, std::vector<TrialFailure> failures);

/// Seeds seed, seed+1, ..., seed+n_seeds-1, up to `jobs` at a time.
AggregateResult run_aggregate(const Environment& env, const RunConfig& config);

struct SweepPoint {
    std::vector<std::pair<std::string, double>> params;
    std::optional<AggregateResult> result;
    std::string error;  // set when the point is invalid
};

std::vector<SweepPoint> run_sweep(const Environment& env, const RunConfig& config);

/// Top-k tags by final score; the whole pool when top_k exceeds it.
std::vector<TagScore> export_tag_scores(const TrialResult& trial, std::size_t top_k);

// File outputs. CSV floats use shortest round-trip formatting.
void write_trial_log(const TrialResult& trial, const std::filesystem::path& path);
void write_curve_csv(const AggregateResult& agg, const std::filesystem::path& path);
void write_summary_csv(const std::vector<AggregateResult>& rows, const std::filesystem::path& path);
void write_tag_scores_csv(const std::vector<TagScore>& scores, const std::filesystem::path& path);
void write_sweep_csv(const std::vector<SweepPoint>& points, const std::filesystem::path& path);

} // namespace tagseek
