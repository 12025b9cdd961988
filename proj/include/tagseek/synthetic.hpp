#pragma once

#include "tagseek/blackbox.hpp"
#include "tagseek/corpus.hpp"
#include "tagseek/embeddings.hpp"

#include <cstdint>
#include <memory>
#include <string>

namespace tagseek {

struct SyntheticOptions {
    std::size_t n_items = 1000;
    std::size_t n_tags = 200;
    std::size_t dim = 16;
    std::uint64_t seed = 0;
    double noise_sd = 0.05;
    /// Items carry between 2 and max_tags tags.
    std::size_t max_tags = 8;
    /// Norm of the hidden weight vector of the linear scorer.
    double signal_scale = 10.0;
    /// Probability that an extra tag is drawn from the anchor tag's neighbourhood
    /// instead of uniformly.
    double cohesion = 0.7;
    std::size_t neighbourhood = 10;
};

/// A planted-linear environment: random unit word vectors, items whose features
/// are the mean of their tags' vectors plus noise, and a linear scorer. One extra
/// item built from the best-aligned tags holds the global optimum.
struct SyntheticEnv {
    std::shared_ptr<const Corpus> corpus;
    BlackBox scorer;
    std::shared_ptr<const EmbeddingTable> embeddings;
    std::string planted_id;
};

/// Fully determined by `options.seed`. Throws std::invalid_argument on bad sizes.
SyntheticEnv make_synthetic_env(const SyntheticOptions& options);

/// Deterministic alphabetic name for the i-th synthetic word ("ba", "be", ...).
std::string synthetic_word(std::size_t i);

} // namespace tagseek
