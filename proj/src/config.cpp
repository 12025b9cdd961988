#include "tagseek/config.hpp"

#include "tagseek/error.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace tagseek {

using ojson = nlohmann::ordered_json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path fp(p);
    if (fp.empty() || fp.is_absolute()) return fp;
    return (base / fp).lexically_normal();
}

template <typename T>
T get(const ojson& j, const char* key) {
    try {
        return j.at(key).get<T>();
    } catch (const ojson::exception& e) {
        throw LoadError(std::string("config key '") + key + "': " + e.what());
    }
}

std::size_t get_count(const ojson& j, const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw LoadError(std::string("config key '") + key + "' must be a non-negative integer");
    return v.get<std::size_t>();
}

} // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    ojson j;
    try {
        j = ojson::parse(json_text);
    } catch (const ojson::exception& e) {
        throw LoadError(std::string("invalid config JSON: ") + e.what());
    }
    if (!j.is_object()) throw LoadError("config must be a JSON object");

    static const std::set<std::string> known = {"corpus", "embeddings", "scorer", "remote", "out",
                                                "budget", "n_initial_tags", "initial_tags", "seed", "seeds",
                                                "jobs", "exhausted_consumes_budget", "policy", "sweep"};
    for (const auto& [key, _] : j.items())
        if (!known.contains(key)) throw LoadError("unknown config key '" + key + "'");

    ExperimentConfig c;
    auto& r = c.run;
    if (j.contains("corpus")) c.corpus = resolve(base_dir, get<std::string>(j, "corpus"));
    if (j.contains("embeddings")) c.embeddings = resolve(base_dir, get<std::string>(j, "embeddings"));
    if (j.contains("scorer")) c.scorer = resolve(base_dir, get<std::string>(j, "scorer"));
    if (j.contains("out")) c.out = resolve(base_dir, get<std::string>(j, "out"));
    if (j.contains("remote")) c.remote = get<std::string>(j, "remote");
    if (j.contains("budget")) r.budget = get_count(j, "budget");
    if (j.contains("n_initial_tags")) r.n_initial_tags = get_count(j, "n_initial_tags");
    if (j.contains("initial_tags")) r.initial_tags = get<std::vector<std::string>>(j, "initial_tags");
    if (j.contains("seed")) r.seed = get<std::uint64_t>(j, "seed");
    if (j.contains("seeds")) r.n_seeds = get_count(j, "seeds");
    if (j.contains("jobs")) r.jobs = get_count(j, "jobs");
    if (j.contains("exhausted_consumes_budget"))
        r.exhausted_consumes_budget = get<bool>(j, "exhausted_consumes_budget");
    if (j.contains("policy")) {
        const auto& p = j["policy"];
        if (p.is_string()) {
            r.policy.kind = parse_policy_name(p.get<std::string>());
        } else if (p.is_object()) {
            for (const auto& [key, _] : p.items())
                if (key != "name" && key != "alpha" && key != "lambda" && key != "epsilon")
                    throw LoadError("unknown policy key '" + key + "'");
            if (p.contains("name")) r.policy.kind = parse_policy_name(get<std::string>(p, "name"));
            if (p.contains("alpha")) r.policy.alpha = get<double>(p, "alpha");
            if (p.contains("lambda")) r.policy.lambda = get<double>(p, "lambda");
            if (p.contains("epsilon")) r.policy.epsilon = get<double>(p, "epsilon");
        } else {
            throw LoadError("config key 'policy' must be a name or an object");
        }
    }
    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        if (!s.is_object()) throw LoadError("config key 'sweep' must map parameter names to value lists");
        for (const auto& [name, values] : s.items()) {
            try {
                r.sweep.emplace_back(name, values.get<std::vector<double>>());
            } catch (const ojson::exception& e) {
                throw LoadError("sweep parameter '" + name + "': " + e.what());
            }
        }
    }
    return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open config: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    auto base = path.parent_path();
    if (base.empty()) base = ".";
    return parse_experiment_config(ss.str(), std::filesystem::absolute(base));
}

std::string ExperimentConfig::to_json() const {
    ojson j;
    if (!corpus.empty()) j["corpus"] = corpus.string();
    if (!embeddings.empty()) j["embeddings"] = embeddings.string();
    if (!scorer.empty()) j["scorer"] = scorer.string();
    if (!remote.empty()) j["remote"] = remote;
    if (!out.empty()) j["out"] = out.string();
    j["budget"] = run.budget;
    j["n_initial_tags"] = run.n_initial_tags;
    if (!run.initial_tags.empty()) j["initial_tags"] = run.initial_tags;
    j["seed"] = run.seed;
    j["seeds"] = run.n_seeds;
    j["jobs"] = run.jobs;
    j["exhausted_consumes_budget"] = run.exhausted_consumes_budget;
    ojson p;
    p["name"] = std::string(policy_name(run.policy.kind));
    p["alpha"] = run.policy.alpha_or_default();
    p["lambda"] = run.policy.lambda_or_default();
    p["epsilon"] = run.policy.epsilon_or_default();
    j["policy"] = p;
    if (!run.sweep.empty()) {
        ojson s = ojson::object();
        for (const auto& [name, values] : run.sweep) s[name] = values;
        j["sweep"] = s;
    }
    return j.dump(2) + "\n";
}

Environment load_environment(const ExperimentConfig& config) {
    Environment env;
    if (config.embeddings.empty()) throw LoadError("no embedding file given");
    env.embeddings = std::make_shared<const EmbeddingTable>(load_embeddings(config.embeddings));
    if (!config.corpus.empty()) env.corpus = load_corpus(config.corpus);
    env.remote_url = config.remote;
    if (!config.scorer.empty()) {
        env.scorer = load_scorer(config.scorer, env.corpus.get());
    } else if (env.corpus && env.corpus->has_scores()) {
        env.scorer = stored_scores(*env.corpus);
    } else {
        throw LoadError("no scorer given and the corpus carries no stored scores");
    }
    if (!env.corpus && env.remote_url.empty()) throw LoadError("no corpus file or remote oracle given");
    if (env.corpus && !env.corpus->has_scores() && env.scorer->kind() != ScorerKind::table_lookup) {
        const auto want = static_cast<std::size_t>(env.scorer->weights().size());
        if (want != env.corpus->feature_dim())
            throw LoadError("dimension mismatch: scorer expects " + std::to_string(want) +
                            " features, corpus has " + std::to_string(env.corpus->feature_dim()));
    }
    return env;
}

} // namespace tagseek
