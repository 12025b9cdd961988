#include "tagseek/policy.hpp"

#include "tagseek/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tagseek {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_linucb(PolicyKind k) { return k == PolicyKind::tiara || k == PolicyKind::tiara_s; }
bool is_ucb(PolicyKind k) { return k == PolicyKind::ucb || k == PolicyKind::ada_ucb; }
bool is_egreedy(PolicyKind k) { return k == PolicyKind::egreedy || k == PolicyKind::ada_egreedy; }

PolicyDecision decide(std::vector<TagScore> scores) {
    const std::size_t best = argmax_tag(scores);
    if (best == scores.size()) throw PolicyError("all candidates exhausted");
    PolicyDecision d;
    d.tag = scores[best].tag;
    d.scores = std::move(scores);
    return d;
}

} // namespace

double PolicySpec::alpha_or_default() const {
    if (alpha) return *alpha;
    return is_linucb(kind) ? 0.01 : 1.0;
}
double PolicySpec::lambda_or_default() const { return lambda.value_or(1.0); }
double PolicySpec::epsilon_or_default() const { return epsilon.value_or(0.1); }

void PolicySpec::validate() const {
    const double a = alpha_or_default();
    const double l = lambda_or_default();
    const double e = epsilon_or_default();
    if (!std::isfinite(a) || a < 0.0) throw PolicyError("alpha must be finite and non-negative");
    if (!std::isfinite(l) || l <= 0.0) throw PolicyError("lambda must be finite and positive");
    if (!(e >= 0.0 && e <= 1.0)) throw PolicyError("epsilon must lie in [0, 1]");
}

std::string_view policy_name(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::random: return "random";
    case PolicyKind::egreedy: return "egreedy";
    case PolicyKind::ucb: return "ucb";
    case PolicyKind::ada_egreedy: return "ada-egreedy";
    case PolicyKind::ada_ucb: return "ada-ucb";
    case PolicyKind::tiara: return "tiara";
    case PolicyKind::tiara_s: return "tiara-s";
    }
    return "unknown";
}

const std::vector<std::string>& policy_names() {
    static const std::vector<std::string> names = {"random", "egreedy", "ucb", "ada-egreedy",
                                                   "ada-ucb", "tiara", "tiara-s"};
    return names;
}

PolicyKind parse_policy_name(std::string_view name) {
    for (auto k : {PolicyKind::random, PolicyKind::egreedy, PolicyKind::ucb, PolicyKind::ada_egreedy,
                   PolicyKind::ada_ucb, PolicyKind::tiara, PolicyKind::tiara_s})
        if (policy_name(k) == name) return k;
    std::string msg = "unknown policy '" + std::string(name) + "'; valid names:";
    for (const auto& n : policy_names()) msg += " " + n;
    throw PolicyError(msg);
}

std::size_t argmax_tag(std::span<const TagScore> scores) {
    std::size_t best = scores.size();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (best == scores.size() || scores[i].score > scores[best].score ||
            (scores[i].score == scores[best].score && scores[i].tag < scores[best].tag))
            best = i;
    }
    return best;
}

void sort_scores(std::vector<TagScore>& scores) {
    std::sort(scores.begin(), scores.end(), [](const TagScore& a, const TagScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.tag < b.tag;
    });
}

TagPool::TagPool(std::span<const std::string> tags) {
    for (const auto& t : tags) insert(t);
}

bool TagPool::insert(const std::string& tag) {
    if (!members_.insert(tag).second) return false;
    tags_.push_back(tag);
    return true;
}

void TagPool::mark_exhausted(const std::string& tag) {
    insert(tag);
    exhausted_.insert(tag);
}

std::vector<std::string> TagPool::active() const {
    std::vector<std::string> out;
    out.reserve(tags_.size() - exhausted_.size());
    for (const auto& t : tags_)
        if (!exhausted_.contains(t)) out.push_back(t);
    return out;
}

// --- LinUCB ---------------------------------------------------------------

LinUcbPolicy::LinUcbPolicy(std::span<const std::string> initial_tags, const EmbeddingTable& table, double lambda,
                           double alpha, bool multi_tag)
    : pool_(initial_tags),
      embedder_(table),
      state_(static_cast<Eigen::Index>(table.dimension()), lambda, alpha),
      multi_tag_(multi_tag) {}

std::vector<TagScore> LinUcbPolicy::tag_scores() {
    std::vector<TagScore> scores;
    scores.reserve(pool_.size());
    for (const auto& t : pool_.tags()) {
        if (pool_.is_exhausted(t)) continue;
        scores.push_back({t, state_.score(embedder_(t).vector)});
    }
    return scores;
}

PolicyDecision LinUcbPolicy::select() { return decide(tag_scores()); }

void LinUcbPolicy::observe(const std::string& chosen, const std::optional<QueryResult>& result,
                           std::optional<double> reward) {
    if (!result) {
        pool_.mark_exhausted(chosen);
        return;
    }
    if (!reward) throw PolicyError("observe: a returned item needs a reward");
    if (multi_tag_) {
        std::unordered_set<std::string> seen;
        for (const auto& t : result->item.tags) {
            if (!seen.insert(t).second) continue;
            state_.update(embedder_(t).vector, *reward);
            pool_.insert(t);
        }
    } else {
        state_.update(embedder_(chosen).vector, *reward);
        for (const auto& t : result->item.tags) pool_.insert(t);
    }
}

// --- empirical-mean policies ----------------------------------------------

MeanRewardPolicy::MeanRewardPolicy(PolicyKind kind, std::span<const std::string> initial_tags, double alpha,
                                   double epsilon, std::uint64_t seed)
    : kind_(kind), pool_(initial_tags), alpha_(alpha), epsilon_(epsilon), rng_(seed) {
    if (is_linucb(kind)) throw PolicyError("MeanRewardPolicy cannot run a LinUCB policy");
}

bool MeanRewardPolicy::adaptive() const { return kind_ == PolicyKind::ada_egreedy || kind_ == PolicyKind::ada_ucb; }

std::size_t MeanRewardPolicy::visits(const std::string& tag) const {
    auto it = stats_.find(tag);
    return it == stats_.end() ? 0 : it->second.n;
}

double MeanRewardPolicy::mean_reward(const std::string& tag) const {
    auto it = stats_.find(tag);
    if (it == stats_.end() || it->second.n == 0) return kInf;
    return it->second.sum / static_cast<double>(it->second.n);
}

double MeanRewardPolicy::score_of(const std::string& tag) const {
    const std::size_t n = visits(tag);
    if (n == 0) return kInf;
    const double mean = mean_reward(tag);
    if (is_ucb(kind_)) return mean + alpha_ * std::sqrt(1.0 / static_cast<double>(n));
    return mean;
}

std::vector<TagScore> MeanRewardPolicy::tag_scores() {
    std::vector<TagScore> scores;
    scores.reserve(pool_.size());
    for (const auto& t : pool_.tags())
        if (!pool_.is_exhausted(t)) scores.push_back({t, score_of(t)});
    return scores;
}

PolicyDecision MeanRewardPolicy::select() {
    auto scores = tag_scores();
    if (scores.empty()) throw PolicyError("all candidates exhausted");
    bool explore = kind_ == PolicyKind::random;
    if (is_egreedy(kind_)) explore = std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < epsilon_;
    if (!explore) return decide(std::move(scores));
    std::uniform_int_distribution<std::size_t> pick(0, scores.size() - 1);
    PolicyDecision d;
    d.tag = scores[pick(rng_)].tag;
    d.scores = std::move(scores);
    return d;
}

void MeanRewardPolicy::observe(const std::string& chosen, const std::optional<QueryResult>& result,
                               std::optional<double> reward) {
    if (!result) {
        pool_.mark_exhausted(chosen);
        return;
    }
    if (!reward) throw PolicyError("observe: a returned item needs a reward");
    auto& s = stats_[chosen];
    ++s.n;
    s.sum += *reward;
    if (adaptive())
        for (const auto& t : result->item.tags) pool_.insert(t);
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, std::span<const std::string> initial_tags,
                                    const EmbeddingTable& table, std::uint64_t seed) {
    spec.validate();
    if (initial_tags.empty()) throw PolicyError("a policy needs at least one initial tag");
    switch (spec.kind) {
    case PolicyKind::tiara:
    case PolicyKind::tiara_s:
        return std::make_unique<LinUcbPolicy>(initial_tags, table, spec.lambda_or_default(), spec.alpha_or_default(),
                                              spec.kind == PolicyKind::tiara);
    default:
        return std::make_unique<MeanRewardPolicy>(spec.kind, initial_tags, spec.alpha_or_default(),
                                                  spec.epsilon_or_default(), seed);
    }
}

} // namespace tagseek
