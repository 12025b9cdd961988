#include "tagseek/harness.hpp"

#include "tagseek/error.hpp"
#include "tagseek/net.hpp"
#include "tagseek/rng.hpp"
#include "text.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <thread>
#include <unordered_map>

namespace tagseek {

using nlohmann::json;

bool TrialResult::same_outcome(const TrialResult& o) const {
    auto scores_equal = [](const std::vector<TagScore>& a, const std::vector<TagScore>& b) {
        return std::equal(a.begin(), a.end(), b.begin(), b.end(), [](const TagScore& x, const TagScore& y) {
            return x.tag == y.tag && (x.score == y.score || (std::isnan(x.score) && std::isnan(y.score)));
        });
    };
    return seed == o.seed && policy == o.policy && initial_tags == o.initial_tags && steps == o.steps &&
           best_item == o.best_item && best_score == o.best_score && scores_equal(tag_scores, o.tag_scores) &&
           oracle_calls == o.oracle_calls && f_evaluations == o.f_evaluations && truncated == o.truncated &&
           truncation_reason == o.truncation_reason;
}

TrialResult run_trial(Oracle& oracle, BlackBox& f, Policy& policy, const TrialOptions& options) {
    if (options.budget == 0) throw Error("budget must be at least 1");
    const auto started = std::chrono::steady_clock::now();
    TrialResult result;
    result.policy = std::string(policy_name(policy.kind()));

    const std::size_t calls_before = oracle.call_count();
    const std::size_t evals_before = f.eval_count();
    std::unordered_map<std::string, double> score_cache;
    std::size_t spent = 0;
    while (spent < options.budget) {
        PolicyDecision decision;
        try {
            decision = policy.select();
        } catch (const PolicyError& e) {
            result.truncated = true;
            result.truncation_reason = e.what();
            break;
        }
        StepRecord rec;
        rec.step = result.steps.size() + 1;
        rec.tag = decision.tag;
        auto reply = oracle.query(decision.tag);
        std::optional<double> reward;
        if (reply) {
            auto [it, fresh] = score_cache.try_emplace(reply->item.id, 0.0);
            if (fresh) it->second = f(reply->item);
            reward = it->second;
            rec.item_id = reply->item.id;
            rec.reward = reward;
            if (!result.best_score || *reward > *result.best_score) {
                result.best_score = reward;
                result.best_item = reply->item.id;
            }
            ++spent;
        } else if (options.exhausted_consumes_budget) {
            ++spent;
        }
        rec.best_so_far = result.best_score;
        policy.observe(decision.tag, reply, reward);
        result.steps.push_back(std::move(rec));
    }

    result.tag_scores = policy.tag_scores();
    sort_scores(result.tag_scores);
    result.oracle_calls = oracle.call_count() - calls_before;
    result.f_evaluations = f.eval_count() - evals_before;
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
}

void RunConfig::validate() const {
    if (budget == 0) throw Error("budget must be at least 1");
    if (n_seeds == 0) throw Error("seeds must be at least 1");
    if (jobs == 0) throw Error("jobs must be at least 1");
    if (initial_tags.empty() && n_initial_tags == 0) throw Error("n_initial_tags must be at least 1");
    policy.validate();
    for (const auto& [name, values] : sweep) {
        if (name != "alpha" && name != "lambda" && name != "epsilon")
            throw Error("unsupported sweep parameter '" + name + "' (expected alpha, lambda, epsilon)");
        if (values.empty()) throw Error("sweep parameter '" + name + "' has no values");
    }
}

std::vector<std::string> choose_initial_tags(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
    std::vector<std::string> universe = corpus.tags();
    n = std::min(n, universe.size());
    std::mt19937_64 rng(seed);
    // Partial Fisher-Yates.
    for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, universe.size() - 1);
        std::swap(universe[i], universe[pick(rng)]);
    }
    universe.resize(n);
    return universe;
}

TrialResult run_trial(const Environment& env, const RunConfig& config, std::uint64_t seed) {
    config.validate();
    if (!env.embeddings) throw Error("environment has no embedding table");
    if (!env.scorer) throw Error("environment has no scorer");

    std::vector<std::string> initial = config.initial_tags;
    if (initial.empty()) {
        if (!env.corpus) throw Error("initial tags must be listed explicitly when no corpus is available");
        initial = choose_initial_tags(*env.corpus, config.n_initial_tags, derive_seed(seed, SeedStream::initial_tags));
    }

    std::unique_ptr<Oracle> oracle;
    if (!env.remote_url.empty()) {
        oracle = std::make_unique<RemoteOracle>(env.remote_url, derive_seed(seed, SeedStream::oracle));
    } else {
        if (!env.corpus) throw Error("environment has neither a corpus nor a remote oracle");
        oracle = std::make_unique<OracleSession>(env.corpus, derive_seed(seed, SeedStream::oracle));
    }
    BlackBox f = *env.scorer;
    auto policy = make_policy(config.policy, initial, *env.embeddings, derive_seed(seed, SeedStream::policy));

    TrialResult result = run_trial(*oracle, f, *policy,
                                   TrialOptions{config.budget, config.exhausted_consumes_budget});
    result.seed = seed;
    result.initial_tags = std::move(initial);
    return result;
}

AggregateResult aggregate(std::string policy, std::vector<TrialResult> trials, std::vector<TrialFailure> failures) {
    AggregateResult agg;
    agg.policy = std::move(policy);
    agg.failures = std::move(failures);

    std::vector<double> finals;
    for (const auto& t : trials)
        if (t.best_score) finals.push_back(*t.best_score);
    if (finals.empty()) {
        agg.mean = agg.sd = std::numeric_limits<double>::quiet_NaN();
    } else {
        double sum = 0.0;
        for (double x : finals) sum += x;
        agg.mean = sum / static_cast<double>(finals.size());
        double ss = 0.0;
        for (double x : finals) ss += (x - agg.mean) * (x - agg.mean);
        agg.sd = std::sqrt(ss / static_cast<double>(finals.size()));
    }

    std::size_t length = 0;
    for (const auto& t : trials) length = std::max(length, t.steps.size());
    agg.curve_mean.assign(length, std::nullopt);
    agg.curve_sd.assign(length, std::nullopt);
    std::vector<double> column;
    for (std::size_t i = 0; i < length; ++i) {
        column.clear();
        for (const auto& t : trials) {
            if (t.steps.empty()) continue;
            const auto& v = t.steps[std::min(i, t.steps.size() - 1)].best_so_far;
            if (v) column.push_back(*v);
        }
        if (column.empty()) continue;
        double sum = 0.0;
        for (double x : column) sum += x;
        const double mean = sum / static_cast<double>(column.size());
        double ss = 0.0;
        for (double x : column) ss += (x - mean) * (x - mean);
        agg.curve_mean[i] = mean;
        agg.curve_sd[i] = std::sqrt(ss / static_cast<double>(column.size()));
    }
    agg.trials = std::move(trials);
    return agg;
}

AggregateResult run_aggregate(const Environment& env, const RunConfig& config) {
    config.validate();
    const std::size_t n = config.n_seeds;
    std::vector<std::optional<TrialResult>> results(n);
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                results[i] = run_trial(env, config, config.seed + i);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const std::size_t jobs = std::min(config.jobs, n);
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t j = 0; j < jobs; ++j) pool.emplace_back(worker);
    }

    std::vector<TrialResult> trials;
    std::vector<TrialFailure> failures;
    for (std::size_t i = 0; i < n; ++i) {
        if (results[i]) {
            trials.push_back(std::move(*results[i]));
        } else {
            failures.push_back({config.seed + i, errors[i]});
        }
    }
    return aggregate(std::string(policy_name(config.policy.kind)), std::move(trials), std::move(failures));
}

std::vector<SweepPoint> run_sweep(const Environment& env, const RunConfig& config) {
    if (config.sweep.empty()) throw Error("sweep grid is empty");
    std::vector<std::vector<std::pair<std::string, double>>> grid{{}};
    for (const auto& [name, values] : config.sweep) {
        std::vector<std::vector<std::pair<std::string, double>>> next;
        for (const auto& partial : grid)
            for (double v : values) {
                auto p = partial;
                p.emplace_back(name, v);
                next.push_back(std::move(p));
            }
        grid = std::move(next);
    }

    std::vector<SweepPoint> points;
    for (auto& params : grid) {
        SweepPoint point;
        point.params = params;
        RunConfig c = config;
        c.sweep.clear();
        for (const auto& [name, v] : params) {
            if (name == "alpha") c.policy.alpha = v;
            else if (name == "lambda") c.policy.lambda = v;
            else if (name == "epsilon") c.policy.epsilon = v;
            else point.error = "unsupported sweep parameter '" + name + "'";
        }
        if (point.error.empty()) {
            try {
                c.validate();
                point.result = run_aggregate(env, c);
            } catch (const std::exception& e) {
                point.error = e.what();
            }
        }
        points.push_back(std::move(point));
    }
    return points;
}

std::vector<TagScore> export_tag_scores(const TrialResult& trial, std::size_t top_k) {
    std::vector<TagScore> scores = trial.tag_scores;
    sort_scores(scores);
    if (scores.size() > top_k) scores.resize(top_k);
    return scores;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    return out;
}

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return text::format_double(x);
}

std::string fmt(const std::optional<double>& x) { return x ? fmt(*x) : std::string(); }

// CSV field quoting per RFC 4180.
std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

} // namespace

void write_trial_log(const TrialResult& trial, const std::filesystem::path& path) {
    auto out = open_output(path);
    for (const auto& s : trial.steps) {
        json j;
        j["step"] = s.step;
        j["tag"] = s.tag;
        j["exhausted"] = !s.item_id.has_value();
        j["item"] = s.item_id ? json(*s.item_id) : json(nullptr);
        j["reward"] = s.reward ? json(*s.reward) : json(nullptr);
        j["best"] = s.best_so_far ? json(*s.best_so_far) : json(nullptr);
        out << j.dump() << '\n';
    }
    if (trial.truncated) {
        json j;
        j["truncated"] = true;
        j["steps_completed"] = trial.steps.size();
        j["reason"] = trial.truncation_reason;
        out << j.dump() << '\n';
    }
}

void write_curve_csv(const AggregateResult& agg, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "step,mean_best,sd_best\n";
    for (std::size_t i = 0; i < agg.curve_mean.size(); ++i)
        out << (i + 1) << ',' << fmt(agg.curve_mean[i]) << ',' << fmt(agg.curve_sd[i]) << '\n';
}

void write_summary_csv(const std::vector<AggregateResult>& rows, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "policy,trials,failed,mean,sd\n";
    for (const auto& r : rows)
        out << csv_field(r.policy) << ',' << r.trials.size() << ',' << r.failures.size() << ',' << fmt(r.mean) << ','
            << fmt(r.sd) << '\n';
}

void write_tag_scores_csv(const std::vector<TagScore>& scores, const std::filesystem::path& path) {
    auto out = open_output(path);
    out << "tag,score\n";
    for (const auto& s : scores) out << csv_field(s.tag) << ',' << fmt(s.score) << '\n';
}

void write_sweep_csv(const std::vector<SweepPoint>& points, const std::filesystem::path& path) {
    auto out = open_output(path);
    if (points.empty()) return;
    for (const auto& [name, _] : points.front().params) out << name << ',';
    out << "trials,failed,mean,sd,error\n";
    for (const auto& p : points) {
        for (const auto& [_, v] : p.params) out << fmt(v) << ',';
        if (p.result) {
            out << p.result->trials.size() << ',' << p.result->failures.size() << ',' << fmt(p.result->mean) << ','
                << fmt(p.result->sd) << ",\n";
        } else {
            out << "0,0,,," << csv_field(p.error) << '\n';
        }
    }
}

} // namespace tagseek
