#include "tagseek/synthetic.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <unordered_set>

namespace tagseek {

std::string synthetic_word(std::size_t i) {
    static constexpr const char* consonants = "bdfghjklmnprstvz";  // 16
    static constexpr const char* vowels = "aeiou";                   // 5
    std::string word;
    std::size_t syllables = 0;
    do {
        const std::size_t s = i % 80;
        word.push_back(consonants[s / 5]);
        word.push_back(vowels[s % 5]);
        i /= 80;
        ++syllables;
    } while (i > 0 || syllables < 2);
    return word;
}

namespace {

std::string item_id(std::size_t i, std::size_t n) {
    std::string digits = std::to_string(i);
    const std::size_t width = std::to_string(n - 1).size();
    return "item" + std::string(width - digits.size(), '0') + digits;
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd v(static_cast<Eigen::Index>(dim));
    do {
        for (auto& x : v) x = normal(rng);
    } while (v.norm() < 1e-12);
    return v.normalized();
}

} // namespace

SyntheticEnv make_synthetic_env(const SyntheticOptions& opt) {
    if (opt.n_items < 2 || opt.n_tags < 2 || opt.dim == 0)
        throw std::invalid_argument("synthetic env needs n_items >= 2, n_tags >= 2, dim >= 1");
    if (opt.max_tags < 2) throw std::invalid_argument("max_tags must be at least 2");
    if (!(opt.noise_sd >= 0.0)) throw std::invalid_argument("noise_sd must be non-negative");
    if (!(opt.cohesion >= 0.0 && opt.cohesion <= 1.0)) throw std::invalid_argument("cohesion must lie in [0, 1]");

    std::mt19937_64 rng(opt.seed);
    const auto dim = static_cast<Eigen::Index>(opt.dim);

    std::vector<std::pair<std::string, Eigen::VectorXd>> words;
    Eigen::MatrixXd vectors(dim, static_cast<Eigen::Index>(opt.n_tags));
    for (std::size_t t = 0; t < opt.n_tags; ++t) {
        vectors.col(static_cast<Eigen::Index>(t)) = random_unit(rng, opt.dim);
        words.emplace_back(synthetic_word(t), vectors.col(static_cast<Eigen::Index>(t)));
    }
    const Eigen::VectorXd weights = random_unit(rng, opt.dim) * opt.signal_scale;

    // Nearest neighbours by cosine (vectors are unit norm).
    const std::size_t n_neigh = std::min(opt.neighbourhood, opt.n_tags - 1);
    const Eigen::MatrixXd gram = vectors.transpose() * vectors;
    std::vector<std::vector<std::size_t>> neighbours(opt.n_tags);
    for (std::size_t t = 0; t < opt.n_tags; ++t) {
        std::vector<std::size_t> order(opt.n_tags);
        std::iota(order.begin(), order.end(), 0);
        const auto row = gram.row(static_cast<Eigen::Index>(t));
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return row[static_cast<Eigen::Index>(a)] > row[static_cast<Eigen::Index>(b)];
        });
        for (std::size_t k : order) {
            if (k == t) continue;
            neighbours[t].push_back(k);
            if (neighbours[t].size() == n_neigh) break;
        }
    }

    const std::size_t max_tags = std::min(opt.max_tags, opt.n_tags);
    std::uniform_int_distribution<std::size_t> any_tag(0, opt.n_tags - 1);
    std::uniform_int_distribution<std::size_t> tag_count(2, max_tags);
    std::uniform_int_distribution<std::size_t> any_neighbour(0, n_neigh - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> noise(0.0, 1.0);

    auto features_of = [&](const std::vector<std::size_t>& tags) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(dim);
        for (std::size_t t : tags) x += vectors.col(static_cast<Eigen::Index>(t));
        x /= static_cast<double>(tags.size());
        if (opt.noise_sd > 0.0)
            for (auto& c : x) c += opt.noise_sd * noise(rng);
        return x;
    };

    const std::size_t n_random = opt.n_items - 1;
    std::vector<std::vector<std::size_t>> item_tags(n_random);
    std::vector<Eigen::VectorXd> item_features(n_random);
    for (std::size_t i = 0; i < n_random; ++i) {
        const std::size_t anchor = any_tag(rng);
        const std::size_t k = tag_count(rng);
        std::vector<std::size_t> tags{anchor};
        for (std::size_t attempt = 0; tags.size() < k && attempt < 8 * k; ++attempt) {
            const std::size_t t = unit(rng) < opt.cohesion ? neighbours[anchor][any_neighbour(rng)] : any_tag(rng);
            if (std::find(tags.begin(), tags.end(), t) == tags.end()) tags.push_back(t);
        }
        item_features[i] = features_of(tags);
        item_tags[i] = std::move(tags);
    }

    // Planted optimum: the best-aligned tags, nudged along the weight direction
    // until it beats every other item.
    std::vector<std::size_t> by_projection(opt.n_tags);
    std::iota(by_projection.begin(), by_projection.end(), 0);
    const Eigen::VectorXd projection = vectors.transpose() * weights;
    std::stable_sort(by_projection.begin(), by_projection.end(),
                     [&](std::size_t a, std::size_t b) { return projection[a] > projection[b]; });
    std::vector<std::size_t> planted_tags(by_projection.begin(),
                                          by_projection.begin() + static_cast<std::ptrdiff_t>(std::max<std::size_t>(2, max_tags / 2)));
    Eigen::VectorXd planted_features = features_of(planted_tags);
    double best_other = -std::numeric_limits<double>::infinity();
    for (const auto& x : item_features) best_other = std::max(best_other, weights.dot(x));
    const double planted_score = weights.dot(planted_features);
    const double margin = 0.05 * opt.signal_scale;
    if (planted_score < best_other + margin)
        planted_features += weights.normalized() * ((best_other + margin - planted_score) / weights.norm());

    std::uniform_int_distribution<std::size_t> slot(0, n_random);
    const std::size_t planted_slot = slot(rng);
    item_tags.insert(item_tags.begin() + static_cast<std::ptrdiff_t>(planted_slot), planted_tags);
    item_features.insert(item_features.begin() + static_cast<std::ptrdiff_t>(planted_slot), planted_features);

    std::vector<ItemRecord> items(opt.n_items);
    for (std::size_t i = 0; i < opt.n_items; ++i) {
        items[i].id = item_id(i, opt.n_items);
        for (std::size_t t : item_tags[i]) items[i].tags.push_back(words[t].first);
        items[i].features = std::move(item_features[i]);
    }

    SyntheticEnv env{std::make_shared<const Corpus>(std::move(items)), BlackBox::linear(weights),
                     std::make_shared<const EmbeddingTable>(opt.dim, std::move(words)),
                     item_id(planted_slot, opt.n_items)};
    return env;
}

} // namespace tagseek
