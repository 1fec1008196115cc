#pragma once

// HTTP front of the scanner. One mutex serializes every command (feed events,
// expiry sweeps, placements, settlements) so requests see a consistent state
// and read their own writes.

#include "valuebet/feed.hpp"
#include "valuebet/scanner.hpp"

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace valuebet {

struct ServiceConfig {
    StrategyConfig strategy;
    std::string bind_host = "127.0.0.1";
    int bind_port = 8080;
    std::string store_path;  ///< journal file; empty keeps state in memory only
    std::string audit_log;   ///< decision log (JSON lines); empty disables it
    std::string feed_games;  ///< closing-odds CSV with game metadata
    std::string feed_quotes; ///< quote stream (JSON lines) to replay
    double feed_speedup = 0.0; ///< 0 replays without pauses
    Seconds feed_silence{300};
    Seconds sweep_interval{10};
    std::string currency = "units";
    /// Take "now" from the latest feed event rather than the wall clock.
    bool replay_clock = true;

    void validate() const
    {
        strategy.validate();
        if (bind_port < 0 || bind_port > 65535)
            throw Error(ErrorCode::InvalidConfig, "bind_port out of range");
        if (!(feed_speedup >= 0.0))
            throw Error(ErrorCode::InvalidConfig, "feed_speedup must be >= 0");
        if (feed_silence.count() <= 0 || sweep_interval.count() <= 0)
            throw Error(ErrorCode::InvalidConfig, "feed_silence_s and sweep_interval_s must be positive");
    }
};

namespace detail {

template <typename T>
T config_value(const nlohmann::json& v, const std::string& key)
{
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::InvalidConfig, "config key '" + key + "' has the wrong type");
    }
}

inline double env_double(const std::string& name, const std::string& text)
{
    auto v = csv::parse_double(text);
    if (!v)
        throw Error(ErrorCode::InvalidConfig, name + " is not a number: " + text);
    return *v;
}

inline long env_long(const std::string& name, const std::string& text)
{
    long out = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw Error(ErrorCode::InvalidConfig, name + " is not an integer: " + text);
    return out;
}

} // namespace detail

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

inline EnvLookup process_env()
{
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str()))
            return std::string(v);
        return std::nullopt;
    };
}

/// Keys: alpha, stake, min_quotes, window_open_s, window_close_s, bind_host,
/// bind_port, store_path, audit_log, feed_games, feed_quotes, feed_speedup,
/// feed_silence_s, sweep_interval_s, currency, replay_clock. Unknown keys are
/// rejected.
inline ServiceConfig service_config_from_json(const nlohmann::json& j)
{
    if (!j.is_object())
        throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
    ServiceConfig c;
    for (const auto& [key, v] : j.items()) {
        using detail::config_value;
        if (key == "alpha")
            c.strategy.alpha = config_value<double>(v, key);
        else if (key == "stake")
            c.strategy.stake = config_value<double>(v, key);
        else if (key == "min_quotes")
            c.strategy.min_quotes = config_value<std::size_t>(v, key);
        else if (key == "window_open_s")
            c.strategy.window_open = Seconds{config_value<long>(v, key)};
        else if (key == "window_close_s")
            c.strategy.window_close = Seconds{config_value<long>(v, key)};
        else if (key == "bind_host")
            c.bind_host = config_value<std::string>(v, key);
        else if (key == "bind_port")
            c.bind_port = config_value<int>(v, key);
        else if (key == "store_path")
            c.store_path = config_value<std::string>(v, key);
        else if (key == "audit_log")
            c.audit_log = config_value<std::string>(v, key);
        else if (key == "feed_games")
            c.feed_games = config_value<std::string>(v, key);
        else if (key == "feed_quotes")
            c.feed_quotes = config_value<std::string>(v, key);
        else if (key == "feed_speedup")
            c.feed_speedup = config_value<double>(v, key);
        else if (key == "feed_silence_s")
            c.feed_silence = Seconds{config_value<long>(v, key)};
        else if (key == "sweep_interval_s")
            c.sweep_interval = Seconds{config_value<long>(v, key)};
        else if (key == "currency")
            c.currency = config_value<std::string>(v, key);
        else if (key == "replay_clock")
            c.replay_clock = config_value<bool>(v, key);
        else
            throw Error(ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
    }
    return c;
}

/// VALUEBET_<KEY> environment variables override file values.
inline void apply_env_overrides(ServiceConfig& c, const EnvLookup& env)
{
    using detail::env_double;
    using detail::env_long;
    auto get = [&](const char* name) { return env(name); };
    if (auto v = get("VALUEBET_ALPHA"))
        c.strategy.alpha = env_double("VALUEBET_ALPHA", *v);
    if (auto v = get("VALUEBET_STAKE"))
        c.strategy.stake = env_double("VALUEBET_STAKE", *v);
    if (auto v = get("VALUEBET_MIN_QUOTES"))
        c.strategy.min_quotes = static_cast<std::size_t>(env_long("VALUEBET_MIN_QUOTES", *v));
    if (auto v = get("VALUEBET_WINDOW_OPEN_S"))
        c.strategy.window_open = Seconds{env_long("VALUEBET_WINDOW_OPEN_S", *v)};
    if (auto v = get("VALUEBET_WINDOW_CLOSE_S"))
        c.strategy.window_close = Seconds{env_long("VALUEBET_WINDOW_CLOSE_S", *v)};
    if (auto v = get("VALUEBET_BIND_HOST"))
        c.bind_host = *v;
    if (auto v = get("VALUEBET_BIND_PORT"))
        c.bind_port = static_cast<int>(env_long("VALUEBET_BIND_PORT", *v));
    if (auto v = get("VALUEBET_STORE"))
        c.store_path = *v;
    if (auto v = get("VALUEBET_AUDIT_LOG"))
        c.audit_log = *v;
    if (auto v = get("VALUEBET_FEED_GAMES"))
        c.feed_games = *v;
    if (auto v = get("VALUEBET_FEED_QUOTES"))
        c.feed_quotes = *v;
    if (auto v = get("VALUEBET_FEED_SPEEDUP"))
        c.feed_speedup = env_double("VALUEBET_FEED_SPEEDUP", *v);
    if (auto v = get("VALUEBET_FEED_SILENCE_S"))
        c.feed_silence = Seconds{env_long("VALUEBET_FEED_SILENCE_S", *v)};
    if (auto v = get("VALUEBET_CURRENCY"))
        c.currency = *v;
}

/// Reads the optional config file, applies environment overrides, validates.
inline ServiceConfig load_service_config(const std::string& path, const EnvLookup& env = process_env())
{
    ServiceConfig c;
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in)
            throw Error(ErrorCode::InvalidConfig, "cannot open config " + path);
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::InvalidConfig, std::string("config is not valid JSON: ") + e.what());
        }
        c = service_config_from_json(j);
    }
    apply_env_overrides(c, env);
    c.validate();
    return c;
}

inline int http_status(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::AlreadyPlaced:
    case ErrorCode::AlreadySettled:
    case ErrorCode::RecommendationExpired: return 409;
    case ErrorCode::StoreError: return 500;
    default: return 400;
    }
}

class ScannerService {
public:
    using WallClock = std::function<Timestamp()>;

    ScannerService(ServiceConfig config, const Dataset& catalog, WallClock wall = {})
        : config_(std::move(config)), wall_(wall ? std::move(wall) : default_wall_clock())
    {
        config_.validate();
        if (!config_.audit_log.empty()) {
            audit_out_.open(config_.audit_log, std::ios::app);
            if (!audit_out_)
                throw Error(ErrorCode::StoreError, "cannot open audit log " + config_.audit_log);
        }
        std::shared_ptr<Journal> journal;
        if (!config_.store_path.empty())
            journal = std::make_shared<Journal>(config_.store_path);
        Scanner::AuditSink sink;
        if (audit_out_.is_open())
            sink = [this](const nlohmann::ordered_json& rec) { audit_out_ << rec.dump() << '\n' << std::flush; };
        scanner_ = std::make_unique<Scanner>(config_.strategy, std::move(journal), std::move(sink));
        scanner_->load_games(catalog);
        last_event_wall_ = std::chrono::steady_clock::now();
    }

    ScannerService(const ScannerService&) = delete;
    ScannerService& operator=(const ScannerService&) = delete;

    ~ScannerService() { stop(); }

    const ServiceConfig& config() const noexcept { return config_; }

    /// A replay sleeper that returns early when the service stops.
    ReplayFeed::Sleeper interruptible_sleeper()
    {
        return [this](std::chrono::duration<double> d) {
            std::unique_lock lk(wait_mutex_);
            wait_cv_.wait_for(lk, d, [this] { return stopping_.load(); });
        };
    }

    void attach_feed(std::unique_ptr<FeedAdapter> feed) { feed_ = std::move(feed); }

    /// Starts the feed consumer (if a feed is attached) and the expiry sweep.
    void start()
    {
        stopping_ = false;
        if (feed_)
            feed_thread_ = std::thread([this] { run_feed(); });
        sweep_thread_ = std::thread([this] { run_sweep(); });
    }

    void stop()
    {
        stopping_ = true;
        wait_cv_.notify_all();
        if (feed_thread_.joinable())
            feed_thread_.join();
        if (sweep_thread_.joinable())
            sweep_thread_.join();
    }

    /// Applies one event synchronously, as the feed thread would.
    void ingest(const QuoteEvent& ev)
    {
        std::lock_guard lk(mutex_);
        scanner_->on_quote(ev);
        scanner_->scan_tick(config_.replay_clock ? ev.observed_at : wall_());
        last_event_wall_ = std::chrono::steady_clock::now();
    }

    /// Runs the expiry sweep once at the current clock.
    void sweep()
    {
        std::lock_guard lk(mutex_);
        scanner_->scan_tick(now_locked());
    }

    bool feed_finished() const noexcept { return feed_finished_; }

    /// Read access under the command lock.
    template <typename F>
    auto with_scanner(F&& f)
    {
        std::lock_guard lk(mutex_);
        return f(*scanner_);
    }

    void install(httplib::Server& server)
    {
        server.Get("/recommendations", [this](const httplib::Request& req, httplib::Response& res) {
            respond(res, [&] { return get_recommendations(req); });
        });
        server.Post("/bets", [this](const httplib::Request& req, httplib::Response& res) {
            respond(res, [&] { return post_bet(req); });
        });
        server.Post(R"(/bets/(\d+)/settle)", [this](const httplib::Request& req, httplib::Response& res) {
            respond(res, [&] { return post_settle(req); });
        });
        server.Get("/ledger", [this](const httplib::Request& req, httplib::Response& res) {
            respond(res, [&] { return get_ledger(req); });
        });
        server.Get("/stats", [this](const httplib::Request&, httplib::Response& res) {
            respond(res, [&] { return get_stats(); });
        });
        server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
            respond(res, [&] { return get_health(); });
        });
    }

private:
    struct Reply {
        int status = 200;
        nlohmann::ordered_json body;
    };

    struct BadRequest : std::runtime_error {
        std::string code;
        BadRequest(std::string c, const std::string& msg) : std::runtime_error(msg), code(std::move(c)) {}
    };

    static WallClock default_wall_clock()
    {
        return [] { return std::chrono::time_point_cast<Seconds>(std::chrono::system_clock::now()); };
    }

    Timestamp now_locked() const
    {
        if (config_.replay_clock)
            if (auto t = scanner_->last_event_time())
                return *t;
        return wall_();
    }

    template <typename F>
    static void respond(httplib::Response& res, F&& f)
    {
        Reply r;
        try {
            r = f();
        } catch (const BadRequest& e) {
            r.status = 400;
            r.body = {{"error", e.code}, {"message", e.what()}};
        } catch (const Error& e) {
            r.status = http_status(e.code());
            r.body = {{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
        } catch (const std::exception& e) {
            r.status = 500;
            r.body = {{"error", "InternalError"}, {"message", e.what()}};
        }
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    }

    static nlohmann::json parse_body(const httplib::Request& req)
    {
        try {
            auto j = nlohmann::json::parse(req.body);
            if (!j.is_object())
                throw BadRequest("ValidationError", "request body must be a JSON object");
            return j;
        } catch (const nlohmann::json::parse_error&) {
            throw BadRequest("ValidationError", "request body is not valid JSON");
        }
    }

    template <typename T>
    static std::optional<T> field(const nlohmann::json& j, const char* key)
    {
        auto it = j.find(key);
        if (it == j.end() || it->is_null())
            return std::nullopt;
        try {
            return it->get<T>();
        } catch (const nlohmann::json::exception&) {
            throw BadRequest("ValidationError", std::string("field '") + key + "' has the wrong type");
        }
    }

    Reply get_recommendations(const httplib::Request& req)
    {
        std::optional<RecStatus> status = RecStatus::Pending;
        if (req.has_param("status")) {
            auto s = req.get_param_value("status");
            if (s == "all")
                status.reset();
            else if (auto parsed = parse_rec_status(s))
                status = parsed;
            else
                throw BadRequest("ValidationError", "unknown status '" + s + "'");
        }
        std::lock_guard lk(mutex_);
        nlohmann::ordered_json list = nlohmann::ordered_json::array();
        for (const auto& r : scanner_->recommendations(status))
            list.push_back(to_json(r));
        return {200, {{"as_of", format_timestamp(now_locked())}, {"recommendations", std::move(list)}}};
    }

    Reply post_bet(const httplib::Request& req)
    {
        auto body = parse_body(req);
        auto rec_id = field<std::uint64_t>(body, "recommendation_id");
        if (!rec_id)
            throw BadRequest("ValidationError", "recommendation_id is required");
        auto mode_text = field<std::string>(body, "mode").value_or("paper");
        auto mode = parse_bet_mode(mode_text);
        if (!mode)
            throw BadRequest("ValidationError", "mode must be paper or real");
        std::lock_guard lk(mutex_);
        const double requested = field<double>(body, "requested_stake").value_or(config_.strategy.stake);
        const double accepted = field<double>(body, "accepted_stake").value_or(requested);
        const auto& e = scanner_->place_bet(*rec_id, *mode, requested, accepted,
                                            field<std::string>(body, "note").value_or(""), now_locked());
        return {201, to_json(e)};
    }

    Reply post_settle(const httplib::Request& req)
    {
        const auto id = std::stoull(req.matches[1].str());
        auto body = parse_body(req);
        auto text = field<std::string>(body, "result");
        std::optional<Settlement> result;
        if (text)
            result = parse_settlement(*text);
        if (!result || *result == Settlement::Open)
            throw BadRequest("ValidationError", "result must be won, lost or void");
        std::lock_guard lk(mutex_);
        const auto& e = scanner_->settle_bet(id, *result, now_locked());
        return {200, {{"entry", to_json(e)}, {"stats", stats_json()}}};
    }

    Reply get_ledger(const httplib::Request& req)
    {
        auto bound = [&](const char* key) -> std::optional<Timestamp> {
            if (!req.has_param(key))
                return std::nullopt;
            auto t = parse_timestamp(req.get_param_value(key));
            if (!t)
                throw BadRequest("ValidationError", std::string("'") + key + "' is not an ISO-8601 timestamp");
            return t;
        };
        auto from = bound("from");
        auto to = bound("to");
        std::lock_guard lk(mutex_);
        nlohmann::ordered_json list = nlohmann::ordered_json::array();
        for (const auto& e : scanner_->ledger(from, to))
            list.push_back(to_json(e));
        return {200, {{"entries", std::move(list)}}};
    }

    nlohmann::ordered_json stats_json() const
    {
        auto j = to_json(scanner_->stats());
        j["currency"] = config_.currency;
        return j;
    }

    Reply get_stats()
    {
        std::lock_guard lk(mutex_);
        return {200, stats_json()};
    }

    Reply get_health()
    {
        std::lock_guard lk(mutex_);
        const auto silent = std::chrono::duration_cast<Seconds>(std::chrono::steady_clock::now() - last_event_wall_);
        std::string status = "ok";
        if (feed_finished_)
            status = "finished";
        else if (silent > config_.feed_silence)
            status = "stalled";
        nlohmann::ordered_json j;
        j["status"] = status;
        j["feed_attached"] = feed_ != nullptr;
        j["events_processed"] = scanner_->events_processed();
        j["orphan_quotes"] = scanner_->orphan_quotes();
        j["seconds_since_event"] = silent.count();
        auto last = scanner_->last_event_time();
        j["last_event_at"] = last ? nlohmann::ordered_json(format_timestamp(*last)) : nlohmann::ordered_json(nullptr);
        j["now"] = format_timestamp(now_locked());
        return {200, j};
    }

    void run_feed()
    {
        while (!stopping_) {
            auto ev = feed_->next();
            if (!ev)
                break;
            if (stopping_)
                return;
            ingest(*ev);
        }
        if (!stopping_) {
            std::lock_guard lk(mutex_);
            feed_finished_ = true;
        }
    }

    void run_sweep()
    {
        std::unique_lock lk(wait_mutex_);
        while (!stopping_) {
            if (wait_cv_.wait_for(lk, config_.sweep_interval, [this] { return stopping_.load(); }))
                break;
            lk.unlock();
            sweep();
            lk.lock();
        }
    }

    ServiceConfig config_;
    WallClock wall_;
    std::ofstream audit_out_;
    std::unique_ptr<Scanner> scanner_;
    std::unique_ptr<FeedAdapter> feed_;
    mutable std::mutex mutex_;
    std::chrono::steady_clock::time_point last_event_wall_;
    std::atomic<bool> feed_finished_{false};
    std::atomic<bool> stopping_{false};
    std::mutex wait_mutex_;
    std::condition_variable wait_cv_;
    std::thread feed_thread_;
    std::thread sweep_thread_;
};

} // namespace valuebet
