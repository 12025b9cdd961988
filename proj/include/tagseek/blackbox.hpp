#pragma once

#include "tagseek/corpus.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>

namespace tagseek {

class Corpus;

enum class ScorerKind { linear, gaussian_kernel, table_lookup };

/// The user's objective over items. Copies share parameters but each copy has
/// its own evaluation counter, so hand one copy to each trial.
class BlackBox {
public:
    static BlackBox linear(Eigen::VectorXd weights);
    /// exp(-||source - x||^2 / sigma^2)
    static BlackBox gaussian_kernel(Eigen::VectorXd source, double sigma);
    static BlackBox table_lookup(std::unordered_map<std::string, double> scores);

    /// Throws EvalError on a dimension mismatch or unknown id.
    double operator()(const ItemRecord& item);
    /// Same as operator() but does not touch the counter.
    double peek(const ItemRecord& item) const;

    std::size_t eval_count() const { return evals_; }
    ScorerKind kind() const { return params_->kind; }
    const Eigen::VectorXd& weights() const { return params_->vec; }
    const Eigen::VectorXd& source() const { return params_->vec; }
    double sigma() const { return params_->sigma; }
    const std::unordered_map<std::string, double>& table() const { return params_->table; }

private:
    struct Params {
        ScorerKind kind = ScorerKind::linear;
        Eigen::VectorXd vec;
        double sigma = 1.0;
        std::unordered_map<std::string, double> table;
    };
    explicit BlackBox(std::shared_ptr<const Params> p) : params_(std::move(p)) {}

    std::shared_ptr<const Params> params_;
    std::size_t evals_ = 0;
};

std::string to_string(ScorerKind kind);

/// Reads a JSON scorer config. Relative file paths inside it resolve against
/// the config's directory; `corpus` supplies source items and stored scores.
BlackBox load_scorer(const std::filesystem::path& path, const Corpus* corpus);

/// Writes a self-contained JSON scorer config (parameters inline).
void save_scorer(const BlackBox& f, const std::filesystem::path& path);

/// Scorer for a score-carrying corpus: table lookup over the stored scores.
BlackBox stored_scores(const Corpus& corpus);

} // namespace tagseek
