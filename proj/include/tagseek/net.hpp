#pragma once

#include "tagseek/corpus.hpp"
#include "tagseek/oracle.hpp"

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

namespace tagseek {

inline constexpr int kWireVersion = 1;

struct RateLimit {
    std::size_t max_calls = 3600;
    std::chrono::milliseconds window{std::chrono::hours(1)};
};

/// Fixed-window limiter keyed by session. Thread-safe.
class RateLimiter {
public:
    using Clock = std::chrono::steady_clock;

    struct Verdict {
        bool granted = false;
        std::chrono::milliseconds retry_after{0};
    };

    explicit RateLimiter(RateLimit limit) : limit_(limit) {}

    Verdict acquire(const std::string& key, Clock::time_point now = Clock::now());
    const RateLimit& limit() const { return limit_; }

private:
    struct Window {
        Clock::time_point start;
        std::size_t used = 0;
    };
    RateLimit limit_;
    std::mutex mutex_;
    std::unordered_map<std::string, Window> windows_;
};

// Wire format: {"v":1,"item_id":...,"tags":[...],"features":[...]|"score":x}
// or {"v":1,"exhausted":true}.
std::string encode_reply(const std::optional<QueryResult>& reply);
/// Throws ProtocolError on a malformed reply or one whose tag list does not
/// contain `queried_tag`.
std::optional<QueryResult> decode_reply(const std::string& body, const std::string& queried_tag);

struct HealthInfo {
    std::size_t items = 0;
    std::size_t tags = 0;
    std::size_t feature_dim = 0;
    std::size_t max_tags = 0;
};

/// HTTP front end over in-process oracle sessions:
///   POST /session   {"seed": n}            -> {"v":1,"session":"s1"}
///   GET  /query?tag=<t>&session=<s>        -> reply | 400 | 404 | 429
///   GET  /health                           -> corpus statistics
class OracleServer {
public:
    OracleServer(std::shared_ptr<const Corpus> corpus, RateLimit limit);
    ~OracleServer();
    OracleServer(const OracleServer&) = delete;
    OracleServer& operator=(const OracleServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves on a background thread (after bind).
    void start();
    /// Serves on the calling thread until stop() (after bind).
    void listen();
    void stop();

    std::size_t granted_calls() const;
    std::size_t throttled_calls() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct ClientOptions {
    int transport_retries = 3;
    std::chrono::milliseconds connect_timeout{2000};
    std::chrono::milliseconds read_timeout{10000};
    /// Upper bound on consecutive throttled replies for one query.
    std::size_t max_throttle_waits = 100000;
};

/// Oracle backed by a remote OracleServer session. Throttled replies are retried
/// after the advised delay and do not count as calls.
class RemoteOracle final : public Oracle {
public:
    /// Opens a session seeded with `seed`. Throws TransportError if unreachable.
    RemoteOracle(const std::string& base_url, std::uint64_t seed, ClientOptions options = {});
    ~RemoteOracle() override;

    std::optional<QueryResult> query(const std::string& tag) override;
    std::size_t call_count() const override { return calls_; }
    std::size_t throttled_count() const { return throttled_; }
    const std::string& session_id() const { return session_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::string session_;
    std::size_t calls_ = 0;
    std::size_t throttled_ = 0;
};

HealthInfo fetch_health(const std::string& base_url);

} // namespace tagseek
