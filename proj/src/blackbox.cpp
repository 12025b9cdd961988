#include "tagseek/blackbox.hpp"

#include "tagseek/corpus.hpp"
#include "tagseek/error.hpp"
#include "text.hpp"

#include <json.hpp>

#include <cmath>
#include <map>
#include <fstream>

namespace tagseek {

using nlohmann::json;

BlackBox BlackBox::linear(Eigen::VectorXd weights) {
    if (weights.size() == 0 || !weights.allFinite()) throw EvalError("linear scorer needs finite weights");
    auto p = std::make_shared<Params>();
    p->kind = ScorerKind::linear;
    p->vec = std::move(weights);
    return BlackBox(std::move(p));
}

BlackBox BlackBox::gaussian_kernel(Eigen::VectorXd source, double sigma) {
    if (source.size() == 0 || !source.allFinite()) throw EvalError("kernel scorer needs a finite source vector");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) throw EvalError("kernel bandwidth must be positive");
    auto p = std::make_shared<Params>();
    p->kind = ScorerKind::gaussian_kernel;
    p->vec = std::move(source);
    p->sigma = sigma;
    return BlackBox(std::move(p));
}

BlackBox BlackBox::table_lookup(std::unordered_map<std::string, double> scores) {
    auto p = std::make_shared<Params>();
    p->kind = ScorerKind::table_lookup;
    p->table = std::move(scores);
    return BlackBox(std::move(p));
}

double BlackBox::peek(const ItemRecord& item) const {
    const auto& p = *params_;
    switch (p.kind) {
    case ScorerKind::linear:
        if (item.features.size() != p.vec.size())
            throw EvalError("feature dimension mismatch for item " + item.id + ": expected " +
                            std::to_string(p.vec.size()) + ", got " + std::to_string(item.features.size()));
        return p.vec.dot(item.features);
    case ScorerKind::gaussian_kernel:
        if (item.features.size() != p.vec.size())
            throw EvalError("feature dimension mismatch for item " + item.id + ": expected " +
                            std::to_string(p.vec.size()) + ", got " + std::to_string(item.features.size()));
        return std::exp(-(p.vec - item.features).squaredNorm() / (p.sigma * p.sigma));
    case ScorerKind::table_lookup: {
        auto it = p.table.find(item.id);
        if (it == p.table.end()) throw EvalError("no stored score for item " + item.id);
        return it->second;
    }
    }
    throw EvalError("unknown scorer kind");
}

double BlackBox::operator()(const ItemRecord& item) {
    const double value = peek(item);
    ++evals_;
    return value;
}

std::string to_string(ScorerKind kind) {
    switch (kind) {
    case ScorerKind::linear: return "linear";
    case ScorerKind::gaussian_kernel: return "gaussian_kernel";
    case ScorerKind::table_lookup: return "table_lookup";
    }
    return "unknown";
}

namespace {

Eigen::VectorXd vector_from_json(const json& j, const std::string& what) {
    if (!j.is_array() || j.empty()) throw LoadError(what + " must be a non-empty number array");
    Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw LoadError(what + " contains a non-number");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Eigen::VectorXd vector_from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open weight file: " + path.string());
    std::vector<double> values;
    std::string token;
    while (in >> token) {
        auto x = text::parse_double(token);
        if (!x) throw LoadError("unparsable float '" + token + "' in " + path.string());
        values.push_back(*x);
    }
    if (values.empty()) throw LoadError("empty weight file: " + path.string());
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

} // namespace

BlackBox stored_scores(const Corpus& corpus) {
    if (!corpus.has_scores()) throw LoadError("corpus carries features, not stored scores");
    std::unordered_map<std::string, double> table;
    for (const auto& item : corpus.items()) table.emplace(item.id, *item.score);
    return BlackBox::table_lookup(std::move(table));
}

BlackBox load_scorer(const std::filesystem::path& path, const Corpus* corpus) {
    std::ifstream in(path);
    if (!in) throw LoadError("cannot open scorer config: " + path.string());
    json cfg;
    try {
        cfg = json::parse(in);
    } catch (const json::exception& e) {
        throw LoadError("invalid scorer config " + path.string() + ": " + e.what());
    }
    const auto base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };
    const std::string kind = cfg.value("kind", "");
    try {
        if (kind == "linear") {
            if (cfg.contains("weights")) return BlackBox::linear(vector_from_json(cfg["weights"], "weights"));
            if (cfg.contains("weights_file"))
                return BlackBox::linear(vector_from_file(resolve(cfg["weights_file"].get<std::string>())));
            throw LoadError("linear scorer needs weights or weights_file");
        }
        if (kind == "gaussian_kernel") {
            if (!cfg.contains("sigma") || !cfg["sigma"].is_number()) throw LoadError("kernel scorer needs sigma");
            const double sigma = cfg["sigma"].get<double>();
            if (cfg.contains("source")) return BlackBox::gaussian_kernel(vector_from_json(cfg["source"], "source"), sigma);
            if (cfg.contains("source_file"))
                return BlackBox::gaussian_kernel(vector_from_file(resolve(cfg["source_file"].get<std::string>())), sigma);
            if (cfg.contains("source_item")) {
                if (!corpus) throw LoadError("source_item needs a corpus");
                const auto id = cfg["source_item"].get<std::string>();
                auto idx = corpus->find_item(id);
                if (!idx) throw LoadError("source_item not in corpus: " + id);
                return BlackBox::gaussian_kernel((*corpus)[*idx].features, sigma);
            }
            throw LoadError("kernel scorer needs source, source_file or source_item");
        }
        if (kind == "table_lookup") {
            if (cfg.contains("scores")) {
                std::unordered_map<std::string, double> table;
                for (const auto& [id, v] : cfg["scores"].items()) table.emplace(id, v.get<double>());
                return BlackBox::table_lookup(std::move(table));
            }
            if (!corpus) throw LoadError("table_lookup without inline scores needs a corpus");
            return stored_scores(*corpus);
        }
    } catch (const EvalError& e) {
        throw LoadError(std::string("invalid scorer config: ") + e.what());
    } catch (const json::exception& e) {
        throw LoadError("invalid scorer config " + path.string() + ": " + e.what());
    }
    throw LoadError("unknown scorer kind '" + kind + "' (expected linear, gaussian_kernel, table_lookup)");
}

void save_scorer(const BlackBox& f, const std::filesystem::path& path) {
    json cfg;
    cfg["kind"] = to_string(f.kind());
    switch (f.kind()) {
    case ScorerKind::linear:
        cfg["weights"] = std::vector<double>(f.weights().begin(), f.weights().end());
        break;
    case ScorerKind::gaussian_kernel:
        cfg["sigma"] = f.sigma();
        cfg["source"] = std::vector<double>(f.source().begin(), f.source().end());
        break;
    case ScorerKind::table_lookup: {
        // std::map for a stable key order in the file.
        std::map<std::string, double> sorted(f.table().begin(), f.table().end());
        cfg["scores"] = sorted;
        break;
    }
    }
    std::ofstream out(path);
    if (!out) throw Error("cannot write scorer config: " + path.string());
    out << cfg.dump(2) << '\n';
}

} // namespace tagseek
