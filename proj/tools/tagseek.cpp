#include "tagseek/config.hpp"
#include "tagseek/error.hpp"
#include "tagseek/harness.hpp"
#include "tagseek/net.hpp"
#include "tagseek/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <charconv>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace tagseek;

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

// Flags shared by run, sweep and export-scores. Unset flags leave config values alone.
struct RunFlags {
    std::string config;
    std::string corpus, embeddings, scorer, remote, out;
    std::string policy;
    double alpha = 0, lambda = 0, epsilon = 0;
    std::size_t budget = 0, seeds = 0, n_initial_tags = 0, jobs = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> initial_tags;
    std::vector<std::string> grid;
    std::size_t top_k = 0;
    std::map<std::string, CLI::Option*> opts;

    void add(CLI::App* app, bool with_sweep) {
        opts["config"] = app->add_option("--config", config, "experiment config (JSON)")->check(CLI::ExistingFile);
        opts["corpus"] = app->add_option("--corpus", corpus, "corpus file (JSON lines)");
        opts["embeddings"] = app->add_option("--embeddings", embeddings, "word embedding file");
        opts["scorer"] = app->add_option("--scorer", scorer, "scorer config (JSON)");
        opts["remote"] = app->add_option("--remote", remote, "remote oracle URL");
        opts["out"] = app->add_option("--out", out, "output directory");
        opts["policy"] = app->add_option("--policy", policy, "policy name");
        opts["alpha"] = app->add_option("--alpha", alpha, "exploration coefficient");
        opts["lambda"] = app->add_option("--lambda", lambda, "regularization coefficient");
        opts["epsilon"] = app->add_option("--epsilon", epsilon, "exploration rate for epsilon-greedy");
        opts["budget"] = app->add_option("--budget", budget, "oracle calls per trial");
        opts["seeds"] = app->add_option("--seeds", seeds, "number of trials");
        opts["seed"] = app->add_option("--seed", seed, "base seed");
        opts["n_initial_tags"] = app->add_option("--n-initial-tags", n_initial_tags, "initially known tags");
        opts["initial_tags"] = app->add_option("--initial-tags", initial_tags, "explicit initial tags");
        opts["jobs"] = app->add_option("--jobs", jobs, "trials run in parallel");
        opts["top_k"] = app->add_option("--top-k", top_k, "rows in tag_scores.csv (default: whole pool)");
        if (with_sweep)
            opts["grid"] = app->add_option("--grid", grid, "sweep axis, e.g. alpha=0.001,0.01,0.1");
    }

    bool given(const std::string& name) const {
        auto it = opts.find(name);
        return it != opts.end() && it->second->count() > 0;
    }

    ExperimentConfig resolve() const {
        ExperimentConfig c;
        if (given("config")) c = load_experiment_config(config);
        auto& r = c.run;
        if (given("corpus")) c.corpus = corpus;
        if (given("embeddings")) c.embeddings = embeddings;
        if (given("scorer")) c.scorer = scorer;
        if (given("remote")) c.remote = remote;
        if (given("out")) c.out = out;
        if (given("policy")) r.policy.kind = parse_policy_name(policy);
        if (given("alpha")) r.policy.alpha = alpha;
        if (given("lambda")) r.policy.lambda = lambda;
        if (given("epsilon")) r.policy.epsilon = epsilon;
        if (given("budget")) r.budget = budget;
        if (given("seeds")) r.n_seeds = seeds;
        if (given("seed")) r.seed = seed;
        if (given("n_initial_tags")) r.n_initial_tags = n_initial_tags;
        if (given("initial_tags")) r.initial_tags = initial_tags;
        if (given("jobs")) r.jobs = jobs;
        if (given("grid")) {
            r.sweep.clear();
            for (const auto& axis : grid) r.sweep.push_back(parse_axis(axis));
        }
        for (auto* p : {&c.corpus, &c.embeddings, &c.scorer})
            if (!p->empty()) *p = fs::absolute(*p).lexically_normal();
        return c;
    }

    static std::pair<std::string, std::vector<double>> parse_axis(const std::string& text) {
        const auto eq = text.find('=');
        if (eq == std::string::npos || eq == 0) throw Error("sweep axis '" + text + "' is not name=v1,v2,...");
        std::pair<std::string, std::vector<double>> axis{text.substr(0, eq), {}};
        std::stringstream ss(text.substr(eq + 1));
        for (std::string item; std::getline(ss, item, ',');) {
            std::size_t used = 0;
            double v = 0;
            try {
                v = std::stod(item, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != item.size()) throw Error("sweep value '" + item + "' is not a number");
            axis.second.push_back(v);
        }
        return axis;
    }
};

fs::path prepare_out(const ExperimentConfig& c) {
    fs::create_directories(c.out);
    ExperimentConfig echo = c;
    echo.out.clear();
    std::ofstream(c.out / "config.json") << echo.to_json();
    return c.out;
}

std::string shortest(double x) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

std::size_t top_k_or_all(const RunFlags& f) { return f.given("top_k") ? f.top_k : std::numeric_limits<std::size_t>::max(); }

int report_failures(const AggregateResult& agg) {
    for (const auto& fail : agg.failures) std::cerr << "error: trial seed " << fail.seed << ": " << fail.error << '\n';
    for (const auto& t : agg.trials)
        if (t.truncated)
            std::cerr << "note: trial seed " << t.seed << " stopped after " << t.steps.size()
                      << " steps: " << t.truncation_reason << '\n';
    return agg.failures.empty() ? 0 : 1;
}

int cmd_run(const RunFlags& flags) {
    auto c = flags.resolve();
    c.run.sweep.clear();
    c.run.validate();
    auto env = load_environment(c);
    std::cerr << "running " << policy_name(c.run.policy.kind) << ": " << c.run.n_seeds << " trial(s), budget "
              << c.run.budget << '\n';
    auto agg = run_aggregate(env, c.run);
    const auto out = prepare_out(c);
    for (const auto& t : agg.trials) write_trial_log(t, out / ("trial_" + std::to_string(t.seed) + ".jsonl"));
    write_curve_csv(agg, out / "curve.csv");
    write_summary_csv({agg}, out / "summary.csv");
    if (!agg.trials.empty() && agg.trials.front().seed == c.run.seed)
        write_tag_scores_csv(export_tag_scores(agg.trials.front(), top_k_or_all(flags)), out / "tag_scores.csv");
    std::cerr << policy_name(c.run.policy.kind) << ": mean " << agg.mean << " sd " << agg.sd << " over "
              << agg.trials.size() << " trial(s)\n";
    return report_failures(agg);
}

int cmd_sweep(const RunFlags& flags) {
    auto c = flags.resolve();
    c.run.validate();
    if (c.run.sweep.empty()) throw Error("sweep needs a grid (--grid or the config's 'sweep' key)");
    auto env = load_environment(c);
    auto points = run_sweep(env, c.run);
    const auto out = prepare_out(c);
    write_sweep_csv(points, out / "sweep.csv");
    int status = 0;
    for (const auto& p : points) {
        std::string label;
        for (const auto& [name, v] : p.params) label += name + "=" + std::to_string(v) + " ";
        if (!p.result) {
            std::cerr << "error: " << label << ": " << p.error << '\n';
            status = 1;
            continue;
        }
        std::cerr << label << "mean " << p.result->mean << " sd " << p.result->sd << '\n';
        status |= report_failures(*p.result);
    }
    return status;
}

int cmd_export(const RunFlags& flags) {
    auto c = flags.resolve();
    c.run.sweep.clear();
    c.run.n_seeds = 1;
    c.run.validate();
    auto env = load_environment(c);
    auto trial = run_trial(env, c.run, c.run.seed);
    const auto out = prepare_out(c);
    write_tag_scores_csv(export_tag_scores(trial, top_k_or_all(flags)), out / "tag_scores.csv");
    std::cerr << "exported " << std::min(top_k_or_all(flags), trial.tag_scores.size()) << " tag score(s)\n";
    return 0;
}

struct ValidateFlags {
    std::string corpus, embeddings;
};

int cmd_validate(const ValidateFlags& f) {
    if (f.corpus.empty() && f.embeddings.empty()) throw Error("validate needs --corpus and/or --embeddings");
    int status = 0;
    std::optional<EmbeddingTable> table;
    if (!f.embeddings.empty()) {
        try {
            table = load_embeddings(f.embeddings);
            std::cout << "vocabulary: " << table->size() << "\nembedding_dim: " << table->dimension() << '\n';
        } catch (const LoadError& e) {
            std::cerr << f.embeddings << ": " << e.what() << '\n';
            status = 1;
        }
    }
    if (!f.corpus.empty()) {
        auto scan = scan_corpus(f.corpus);
        for (const auto& d : scan.diagnostics) std::cerr << f.corpus << ": " << d.to_string() << '\n';
        std::cout << "violations: " << scan.diagnostics.size() << '\n';
        if (!scan.diagnostics.empty()) status = 1;
        if (scan.corpus) {
            const auto& corpus = *scan.corpus;
            std::cout << "items: " << corpus.size() << "\ntags: " << corpus.tags().size()
                      << "\nfeature_dim: " << corpus.feature_dim() << "\nT_max: " << corpus.max_tags_per_item()
                      << '\n';
            if (table) {
                const auto cov = embedding_coverage(corpus.tags(), *table);
                std::cout << "coverage: " << shortest(cov.fraction()) << " (" << cov.covered << '/' << cov.tags << ")\n";
            }
        }
    }
    return status;
}

struct ServeFlags {
    std::string corpus, host = "127.0.0.1";
    int port = 8080;
    std::size_t max_calls = 3600;
    long long window_ms = 3600 * 1000;
};

int cmd_serve(const ServeFlags& f) {
    auto corpus = load_corpus(f.corpus);
    OracleServer server(corpus, RateLimit{f.max_calls, std::chrono::milliseconds(f.window_ms)});
    const int port = server.bind(f.host, f.port);
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.start();
    std::cerr << "listening on http://" << f.host << ':' << port << std::endl;
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(50));
    server.stop();
    std::cerr << "stopped after " << server.granted_calls() << " call(s), " << server.throttled_calls()
              << " throttled\n";
    return 0;
}

struct SynthFlags {
    SyntheticOptions opt;
    std::string out = "synth";
};

int cmd_synth(const SynthFlags& f) {
    auto env = make_synthetic_env(f.opt);
    const fs::path out = f.out;
    fs::create_directories(out);
    save_corpus(*env.corpus, out / "corpus.jsonl");
    save_embeddings(*env.embeddings, out / "embeddings.txt");
    save_scorer(env.scorer, out / "scorer.json");
    nlohmann::ordered_json j;
    j["n_items"] = f.opt.n_items;
    j["n_tags"] = f.opt.n_tags;
    j["dim"] = f.opt.dim;
    j["seed"] = f.opt.seed;
    j["noise_sd"] = f.opt.noise_sd;
    j["max_tags"] = f.opt.max_tags;
    j["planted_item"] = env.planted_id;
    std::ofstream(out / "config.json") << j.dump(2) << '\n';
    std::cerr << "wrote " << env.corpus->size() << " items, " << env.embeddings->size() << " words to " << out.string()
              << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"tagseek: budgeted black-box retrieval through tag search"};
    app.require_subcommand(1);

    RunFlags run_flags, sweep_flags, export_flags;
    auto* run = app.add_subcommand("run", "run seeded trials of one policy");
    run_flags.add(run, false);
    auto* sweep = app.add_subcommand("sweep", "run a hyperparameter grid");
    sweep_flags.add(sweep, true);
    auto* exp = app.add_subcommand("export-scores", "run one trial and write its final tag scores");
    export_flags.add(exp, false);

    ValidateFlags validate_flags;
    auto* validate = app.add_subcommand("validate", "check a corpus and/or embedding file");
    validate->add_option("--corpus", validate_flags.corpus, "corpus file (JSON lines)");
    validate->add_option("--embeddings", validate_flags.embeddings, "word embedding file");

    ServeFlags serve_flags;
    auto* serve = app.add_subcommand("serve", "serve a corpus as an HTTP tag-search oracle");
    serve->add_option("--corpus", serve_flags.corpus, "corpus file (JSON lines)")->required();
    serve->add_option("--host", serve_flags.host, "bind address")->capture_default_str();
    serve->add_option("--port", serve_flags.port, "port (0 picks a free one)")->capture_default_str();
    serve->add_option("--max-calls", serve_flags.max_calls, "calls per session per window")->capture_default_str();
    serve->add_option("--window-ms", serve_flags.window_ms, "rate-limit window in milliseconds")->capture_default_str();

    SynthFlags synth_flags;
    auto* synth = app.add_subcommand("synth", "write a synthetic planted-linear environment");
    synth->add_option("--out", synth_flags.out, "output directory")->capture_default_str();
    synth->add_option("--n-items", synth_flags.opt.n_items)->capture_default_str();
    synth->add_option("--n-tags", synth_flags.opt.n_tags)->capture_default_str();
    synth->add_option("--dim", synth_flags.opt.dim)->capture_default_str();
    synth->add_option("--seed", synth_flags.opt.seed)->capture_default_str();
    synth->add_option("--noise-sd", synth_flags.opt.noise_sd)->capture_default_str();
    synth->add_option("--max-tags", synth_flags.opt.max_tags)->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(run_flags);
        if (sweep->parsed()) return cmd_sweep(sweep_flags);
        if (exp->parsed()) return cmd_export(export_flags);
        if (validate->parsed()) return cmd_validate(validate_flags);
        if (serve->parsed()) return cmd_serve(serve_flags);
        if (synth->parsed()) return cmd_synth(synth_flags);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
