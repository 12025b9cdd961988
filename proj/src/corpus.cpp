#include "tagseek/corpus.hpp"

#include "tagseek/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_set>

namespace tagseek {

using nlohmann::json;

namespace {

void dedupe_in_place(std::vector<std::string>& tags) {
    std::unordered_set<std::string> seen;
    std::erase_if(tags, [&](const std::string& t) { return !seen.insert(t).second; });
}

// Record-level checks shared by the file scanner and the in-memory constructor.
// Returns an error message, or an empty string when the record is consistent
// with the corpus seen so far.
class Validator {
public:
    std::string check(const ItemRecord& item) {
        if (item.id.empty()) return "empty id";
        if (item.tags.empty()) return "empty tag set: " + item.id;
        for (const auto& t : item.tags)
            if (t.empty()) return "empty tag string: " + item.id;
        const bool has_features = item.features.size() > 0;
        if (has_features == item.score.has_value())
            return "exactly one of features or score required: " + item.id;
        if (has_features && !item.features.allFinite()) return "non-finite feature: " + item.id;
        if (item.score && !std::isfinite(*item.score)) return "non-finite score: " + item.id;
        if (!ids_.insert(item.id).second) return "duplicate id: " + item.id;
        if (!kind_) {
            kind_ = has_features ? 1 : 2;
            dim_ = static_cast<std::size_t>(item.features.size());
        } else if (*kind_ != (has_features ? 1 : 2)) {
            return "mixed feature and score records: " + item.id;
        } else if (has_features && static_cast<std::size_t>(item.features.size()) != dim_) {
            return "inconsistent feature length: " + item.id + " (expected " + std::to_string(dim_) +
                   ", got " + std::to_string(item.features.size()) + ")";
        }
        return {};
    }

private:
    std::unordered_set<std::string> ids_;
    std::optional<int> kind_;
    std::size_t dim_ = 0;
};

std::string parse_record(const json& j, ItemRecord& out) {
    if (!j.is_object()) return "record is not a JSON object";
    auto id = j.find("id");
    if (id == j.end() || !id->is_string()) return "missing or non-string id";
    out.id = id->get<std::string>();
    auto tags = j.find("tags");
    if (tags == j.end() || !tags->is_array()) return "tags must be an array of strings: " + out.id;
    for (const auto& t : *tags) {
        if (!t.is_string()) return "tags must be an array of strings: " + out.id;
        out.tags.push_back(t.get<std::string>());
    }
    dedupe_in_place(out.tags);
    auto features = j.find("features");
    auto score = j.find("score");
    if ((features != j.end()) == (score != j.end()))
        return "exactly one of features or score required: " + out.id;
    if (features != j.end()) {
        if (!features->is_array() || features->empty()) return "features must be a non-empty number array: " + out.id;
        out.features.resize(static_cast<Eigen::Index>(features->size()));
        Eigen::Index k = 0;
        for (const auto& x : *features) {
            if (!x.is_number()) return "non-numeric feature: " + out.id;
            out.features[k++] = x.get<double>();
        }
    } else {
        if (!score->is_number()) return "non-numeric score: " + out.id;
        out.score = score->get<double>();
    }
    return {};
}

} // namespace

Corpus::Corpus(std::vector<ItemRecord> items) : items_(std::move(items)) {
    if (items_.empty()) throw LoadError("empty corpus");
    Validator validator;
    for (auto& item : items_) {
        dedupe_in_place(item.tags);
        if (auto msg = validator.check(item); !msg.empty()) throw LoadError(msg);
    }
    has_scores_ = items_.front().score.has_value();
    feature_dim_ = has_scores_ ? 0 : static_cast<std::size_t>(items_.front().features.size());
    for (std::size_t i = 0; i < items_.size(); ++i) {
        id_index_.emplace(items_[i].id, i);
        max_tags_ = std::max(max_tags_, items_[i].tags.size());
        occurrences_ += items_[i].tags.size();
        for (const auto& t : items_[i].tags) tag_index_[t].push_back(i);
    }
    tags_.reserve(tag_index_.size());
    for (const auto& [t, _] : tag_index_) tags_.push_back(t);
    std::sort(tags_.begin(), tags_.end());
}

const std::vector<std::size_t>* Corpus::items_with(const std::string& tag) const {
    auto it = tag_index_.find(tag);
    return it == tag_index_.end() ? nullptr : &it->second;
}

std::optional<std::size_t> Corpus::find_item(const std::string& id) const {
    auto it = id_index_.find(id);
    if (it == id_index_.end()) return std::nullopt;
    return it->second;
}

CorpusScan scan_corpus(const std::filesystem::path& path) {
    CorpusScan scan;
    std::ifstream in(path);
    if (!in) {
        scan.diagnostics.push_back({0, "cannot open corpus file: " + path.string()});
        return scan;
    }
    std::vector<ItemRecord> items;
    Validator validator;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ItemRecord item;
        std::string msg;
        try {
            msg = parse_record(json::parse(line), item);
        } catch (const json::exception& e) {
            msg = std::string("invalid JSON: ") + e.what();
        }
        if (msg.empty()) msg = validator.check(item);
        if (!msg.empty()) {
            scan.diagnostics.push_back({line_no, std::move(msg)});
            continue;
        }
        items.push_back(std::move(item));
    }
    if (items.empty() && scan.diagnostics.empty()) scan.diagnostics.push_back({line_no, "empty corpus"});
    if (scan.diagnostics.empty()) scan.corpus = std::make_shared<const Corpus>(std::move(items));
    return scan;
}

std::shared_ptr<const Corpus> load_corpus(const std::filesystem::path& path) {
    auto scan = scan_corpus(path);
    if (!scan.diagnostics.empty()) throw LoadError(scan.diagnostics.front().to_string());
    return scan.corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write corpus file: " + path.string());
    for (const auto& item : corpus.items()) {
        json j;
        j["id"] = item.id;
        j["tags"] = item.tags;
        if (item.score) {
            j["score"] = *item.score;
        } else {
            j["features"] = std::vector<double>(item.features.begin(), item.features.end());
        }
        out << j.dump() << '\n';
    }
    if (!out) throw Error("write failed: " + path.string());
}

} // namespace tagseek
