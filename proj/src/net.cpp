#include "tagseek/net.hpp"

#include "tagseek/error.hpp"

#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <thread>

namespace tagseek {

using nlohmann::json;

RateLimiter::Verdict RateLimiter::acquire(const std::string& key, Clock::time_point now) {
    std::lock_guard lock(mutex_);
    auto [it, fresh] = windows_.try_emplace(key, Window{now, 0});
    auto& w = it->second;
    if (now - w.start >= limit_.window) {
        // Align to the window grid so a burst cannot straddle two windows.
        const auto elapsed = now - w.start;
        w.start += (elapsed / limit_.window) * limit_.window;
        w.used = 0;
    }
    if (w.used < limit_.max_calls) {
        ++w.used;
        return {true, std::chrono::milliseconds(0)};
    }
    auto wait = std::chrono::ceil<std::chrono::milliseconds>(w.start + limit_.window - now);
    return {false, std::max(wait, std::chrono::milliseconds(1))};
}

std::string encode_reply(const std::optional<QueryResult>& reply) {
    json j;
    j["v"] = kWireVersion;
    if (!reply) {
        j["exhausted"] = true;
        return j.dump();
    }
    const auto& item = reply->item;
    j["item_id"] = item.id;
    j["tags"] = item.tags;
    if (item.score) {
        j["score"] = *item.score;
    } else {
        j["features"] = std::vector<double>(item.features.begin(), item.features.end());
    }
    return j.dump();
}

std::optional<QueryResult> decode_reply(const std::string& body, const std::string& queried_tag) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("reply is not JSON: ") + e.what());
    }
    if (!j.is_object()) throw ProtocolError("reply is not a JSON object");
    if (!j.contains("v") || j["v"] != kWireVersion) throw ProtocolError("unsupported wire version");
    if (j.value("exhausted", false)) return std::nullopt;
    try {
        QueryResult r;
        r.item.id = j.at("item_id").get<std::string>();
        r.item.tags = j.at("tags").get<std::vector<std::string>>();
        if (r.item.tags.empty()) throw ProtocolError("reply carries an empty tag list");
        if (std::find(r.item.tags.begin(), r.item.tags.end(), queried_tag) == r.item.tags.end())
            throw ProtocolError("reply for tag '" + queried_tag + "' does not carry that tag");
        if (j.contains("features")) {
            const auto values = j["features"].get<std::vector<double>>();
            r.item.features = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
        } else if (j.contains("score")) {
            r.item.score = j["score"].get<double>();
        } else {
            throw ProtocolError("reply carries neither features nor score");
        }
        return r;
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed reply: ") + e.what());
    }
}

// --- server ----------------------------------------------------------------

struct OracleServer::Impl {
    struct Session {
        explicit Session(std::shared_ptr<const Corpus> c, std::uint64_t seed) : oracle(std::move(c), seed) {}
        OracleSession oracle;
        std::mutex mutex;
    };

    Impl(std::shared_ptr<const Corpus> c, RateLimit limit) : corpus(std::move(c)), limiter(limit) {}

    std::shared_ptr<const Corpus> corpus;
    RateLimiter limiter;
    httplib::Server server;
    std::mutex sessions_mutex;
    std::unordered_map<std::string, std::unique_ptr<Session>> sessions;
    std::size_t next_session = 1;
    std::atomic<std::size_t> granted{0};
    std::atomic<std::size_t> throttled{0};
    std::thread thread;

    static void reply_error(httplib::Response& res, int status, const std::string& message) {
        json j;
        j["v"] = kWireVersion;
        j["error"] = message;
        res.status = status;
        res.set_content(j.dump(), "application/json");
    }

    Session* find_session(const std::string& id) {
        std::lock_guard lock(sessions_mutex);
        auto it = sessions.find(id);
        return it == sessions.end() ? nullptr : it->second.get();
    }

    void install_routes() {
        server.set_tcp_nodelay(true);
        server.set_keep_alive_timeout(1);
        server.Post("/session", [this](const httplib::Request& req, httplib::Response& res) {
            std::uint64_t seed = 0;
            if (!req.body.empty()) {
                json body;
                try {
                    body = json::parse(req.body);
                    if (body.contains("seed")) seed = body["seed"].get<std::uint64_t>();
                } catch (const json::exception& e) {
                    reply_error(res, 400, std::string("malformed session request: ") + e.what());
                    return;
                }
            }
            std::string id;
            {
                std::lock_guard lock(sessions_mutex);
                id = "s" + std::to_string(next_session++);
                sessions.emplace(id, std::make_unique<Session>(corpus, seed));
            }
            json j;
            j["v"] = kWireVersion;
            j["session"] = id;
            res.set_content(j.dump(), "application/json");
        });

        server.Get("/query", [this](const httplib::Request& req, httplib::Response& res) {
            if (!req.has_param("tag") || !req.has_param("session")) {
                reply_error(res, 400, "query needs 'tag' and 'session' parameters");
                return;
            }
            const auto tag = req.get_param_value("tag");
            const auto sid = req.get_param_value("session");
            Session* session = find_session(sid);
            if (!session) {
                reply_error(res, 404, "unknown session '" + sid + "'");
                return;
            }
            const auto verdict = limiter.acquire(sid);
            if (!verdict.granted) {
                ++throttled;
                json j;
                j["v"] = kWireVersion;
                j["error"] = "rate limited";
                j["retry_after_ms"] = verdict.retry_after.count();
                res.status = 429;
                res.set_header("Retry-After", std::to_string((verdict.retry_after.count() + 999) / 1000));
                res.set_content(j.dump(), "application/json");
                return;
            }
            ++granted;
            std::optional<QueryResult> reply;
            {
                std::lock_guard lock(session->mutex);
                reply = session->oracle.query(tag);
            }
            res.set_content(encode_reply(reply), "application/json");
        });

        server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
            json j;
            j["v"] = kWireVersion;
            j["items"] = corpus->size();
            j["tags"] = corpus->tags().size();
            j["feature_dim"] = corpus->feature_dim();
            j["max_tags"] = corpus->max_tags_per_item();
            {
                std::lock_guard lock(sessions_mutex);
                j["sessions"] = sessions.size();
            }
            res.set_content(j.dump(), "application/json");
        });

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) reply_error(res, res.status, httplib::status_message(res.status));
        });
        server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
            std::string what = "internal error";
            try {
                if (ep) std::rethrow_exception(ep);
            } catch (const std::exception& e) {
                what = e.what();
            } catch (...) {
            }
            reply_error(res, 500, what);
        });
    }
};

OracleServer::OracleServer(std::shared_ptr<const Corpus> corpus, RateLimit limit)
    : impl_(std::make_unique<Impl>(std::move(corpus), limit)) {
    if (limit.max_calls == 0) throw Error("rate limit max_calls must be positive");
    if (limit.window.count() <= 0) throw Error("rate limit window must be positive");
    impl_->install_routes();
}

OracleServer::~OracleServer() { stop(); }

int OracleServer::bind(const std::string& host, int port) {
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    if (bound < 0) throw TransportError("cannot bind " + host + ":" + std::to_string(port));
    return bound;
}

void OracleServer::start() {
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void OracleServer::listen() { impl_->server.listen_after_bind(); }

void OracleServer::stop() {
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

std::size_t OracleServer::granted_calls() const { return impl_->granted.load(); }
std::size_t OracleServer::throttled_calls() const { return impl_->throttled.load(); }

// --- client ----------------------------------------------------------------

struct RemoteOracle::Impl {
    Impl(const std::string& url, const ClientOptions& opt) : client(url), options(opt) {
        if (!client.is_valid()) throw TransportError("invalid oracle URL: " + url);
        client.set_connection_timeout(options.connect_timeout);
        client.set_read_timeout(options.read_timeout);
        client.set_keep_alive(true);
        client.set_tcp_nodelay(true);
    }

    template <typename Send>
    httplib::Result send_with_retries(Send&& send, const std::string& what) {
        for (int attempt = 0;; ++attempt) {
            auto res = send();
            if (res) return res;
            if (attempt >= options.transport_retries)
                throw TransportError(what + " failed: " + httplib::to_string(res.error()));
            std::this_thread::sleep_for(std::chrono::milliseconds(50) * (1 << attempt));
        }
    }

    httplib::Client client;
    ClientOptions options;
};

RemoteOracle::RemoteOracle(const std::string& base_url, std::uint64_t seed, ClientOptions options)
    : impl_(std::make_unique<Impl>(base_url, options)) {
    json body;
    body["seed"] = seed;
    auto res = impl_->send_with_retries(
        [&] { return impl_->client.Post("/session", body.dump(), "application/json"); }, "session request");
    if (res->status != 200) throw ProtocolError("session request rejected with status " + std::to_string(res->status));
    try {
        auto j = json::parse(res->body);
        session_ = j.at("session").get<std::string>();
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed session reply: ") + e.what());
    }
}

RemoteOracle::~RemoteOracle() = default;

std::optional<QueryResult> RemoteOracle::query(const std::string& tag) {
    const httplib::Params params{{"tag", tag}, {"session", session_}};
    for (std::size_t waits = 0;; ++waits) {
        auto res = impl_->send_with_retries([&] { return impl_->client.Get("/query", params, httplib::Headers{}); },
                                            "query");
        if (res->status == 200) {
            auto reply = decode_reply(res->body, tag);
            ++calls_;
            return reply;
        }
        if (res->status == 429) {
            ++throttled_;
            if (waits >= impl_->options.max_throttle_waits) throw TransportError("query throttled too many times");
            long long wait_ms = 1000;
            try {
                wait_ms = json::parse(res->body).at("retry_after_ms").get<long long>();
            } catch (const json::exception&) {
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(std::max(1LL, wait_ms)));
            continue;
        }
        std::string message = "status " + std::to_string(res->status);
        try {
            message += ": " + json::parse(res->body).at("error").get<std::string>();
        } catch (const json::exception&) {
        }
        if (res->status == 404 || res->status == 400) throw ProtocolError("query rejected, " + message);
        throw TransportError("query failed, " + message);
    }
}

HealthInfo fetch_health(const std::string& base_url) {
    httplib::Client client(base_url);
    if (!client.is_valid()) throw TransportError("invalid oracle URL: " + base_url);
    client.set_connection_timeout(std::chrono::seconds(2));
    auto res = client.Get("/health");
    if (!res) throw TransportError("health request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw ProtocolError("health request returned status " + std::to_string(res->status));
    try {
        auto j = json::parse(res->body);
        return HealthInfo{j.at("items").get<std::size_t>(), j.at("tags").get<std::size_t>(),
                          j.at("feature_dim").get<std::size_t>(), j.at("max_tags").get<std::size_t>()};
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed health reply: ") + e.what());
    }
}

} // namespace tagseek
