#pragma once

// Live value-bet scanner. Consumes quote events, keeps each bookmaker's latest
// price, raises recommendations for qualifying (game, outcome) pairs inside
// the betting window and keeps the operator's bet ledger.
//
// Not thread-safe; the service serializes every command through one lock.

#include "valuebet/core_model.hpp"
#include "valuebet/market_data.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <array>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace valuebet {

enum class RecStatus { Pending, Placed, Expired, Superseded };
enum class BetMode { Paper, Real };
enum class Settlement { Open, Won, Lost, Void };

constexpr std::string_view to_string(RecStatus s) noexcept
{
    switch (s) {
    case RecStatus::Pending: return "pending";
    case RecStatus::Placed: return "placed";
    case RecStatus::Expired: return "expired";
    case RecStatus::Superseded: return "superseded";
    }
    return "?";
}

constexpr std::string_view to_string(BetMode m) noexcept { return m == BetMode::Paper ? "paper" : "real"; }

constexpr std::string_view to_string(Settlement s) noexcept
{
    switch (s) {
    case Settlement::Open: return "open";
    case Settlement::Won: return "won";
    case Settlement::Lost: return "lost";
    case Settlement::Void: return "void";
    }
    return "?";
}

inline std::optional<RecStatus> parse_rec_status(std::string_view s)
{
    for (auto v : {RecStatus::Pending, RecStatus::Placed, RecStatus::Expired, RecStatus::Superseded})
        if (to_string(v) == s)
            return v;
    return std::nullopt;
}

inline std::optional<BetMode> parse_bet_mode(std::string_view s)
{
    if (s == "paper")
        return BetMode::Paper;
    if (s == "real")
        return BetMode::Real;
    return std::nullopt;
}

inline std::optional<Settlement> parse_settlement(std::string_view s)
{
    for (auto v : {Settlement::Open, Settlement::Won, Settlement::Lost, Settlement::Void})
        if (to_string(v) == s)
            return v;
    return std::nullopt;
}

struct Recommendation {
    std::uint64_t id = 0;
    std::string game_id;
    std::string home_team;
    std::string away_team;
    std::string league;
    Outcome outcome = Outcome::HomeWin;
    double best_odds = 0.0;
    std::string best_bookmaker;
    double mean_odds = 0.0;
    double median_odds = 0.0;
    double p_cons = 0.0;
    double threshold = 0.0;
    std::size_t n_quotes = 0;
    Timestamp kickoff{};
    Seconds time_to_match{}; ///< as of the last refresh
    Timestamp created_at{};
    Timestamp updated_at{};
    RecStatus status = RecStatus::Pending;

    double edge(double alpha) const { return (p_cons - alpha) * best_odds - 1.0; }
};

struct LedgerEntry {
    std::uint64_t id = 0;
    std::uint64_t recommendation_id = 0;
    std::string game_id;
    Outcome outcome = Outcome::HomeWin;
    std::string bookmaker;
    Timestamp placed_at{};
    BetMode mode = BetMode::Paper;
    double requested_stake = 0.0;
    double accepted_stake = 0.0;
    double odds = 0.0;
    Settlement settlement = Settlement::Open;
    double profit = 0.0;
    std::optional<std::string> limit_event;
    std::string note;
    std::optional<Timestamp> settled_at;
};

/// Won/Lost entries count as bets; Open and Void entries contribute nothing
/// except to their own counters.
struct LedgerStats {
    std::size_t total_bets = 0;
    double total_profit = 0.0;
    double accuracy = 0.0;
    double mean_odds = 0.0;
    double total_staked = 0.0;
    std::size_t open_bets = 0;
    std::size_t void_bets = 0;
};

inline LedgerStats compute_stats(std::span<const LedgerEntry> entries)
{
    LedgerStats s;
    std::size_t won = 0;
    double odds_sum = 0.0;
    for (const auto& e : entries) {
        switch (e.settlement) {
        case Settlement::Open: ++s.open_bets; break;
        case Settlement::Void: ++s.void_bets; break;
        case Settlement::Won:
        case Settlement::Lost:
            ++s.total_bets;
            won += e.settlement == Settlement::Won ? 1 : 0;
            s.total_profit += e.profit;
            s.total_staked += e.accepted_stake;
            odds_sum += e.odds;
            break;
        }
    }
    if (s.total_bets > 0) {
        s.accuracy = static_cast<double>(won) / static_cast<double>(s.total_bets);
        s.mean_odds = odds_sum / static_cast<double>(s.total_bets);
    }
    return s;
}

// --- JSON forms shared by the journal and the HTTP API ----------------------

inline nlohmann::ordered_json to_json(const Recommendation& r)
{
    nlohmann::ordered_json j;
    j["id"] = r.id;
    j["game_id"] = r.game_id;
    j["home_team"] = r.home_team;
    j["away_team"] = r.away_team;
    j["league"] = r.league;
    j["outcome"] = std::string(outcome_code(r.outcome));
    j["best_odds"] = r.best_odds;
    j["best_bookmaker"] = r.best_bookmaker;
    j["mean_odds"] = r.mean_odds;
    j["median_odds"] = r.median_odds;
    j["p_cons"] = r.p_cons;
    j["threshold"] = r.threshold;
    j["n_quotes"] = r.n_quotes;
    j["kickoff"] = format_timestamp(r.kickoff);
    j["time_to_match_s"] = r.time_to_match.count();
    j["created_at"] = format_timestamp(r.created_at);
    j["updated_at"] = format_timestamp(r.updated_at);
    j["status"] = std::string(to_string(r.status));
    return j;
}

inline Recommendation recommendation_from_json(const nlohmann::json& j)
{
    Recommendation r;
    r.id = j.at("id").get<std::uint64_t>();
    r.game_id = j.at("game_id").get<std::string>();
    r.home_team = j.at("home_team").get<std::string>();
    r.away_team = j.at("away_team").get<std::string>();
    r.league = j.at("league").get<std::string>();
    r.outcome = parse_outcome_code(j.at("outcome").get<std::string>()).value();
    r.best_odds = j.at("best_odds").get<double>();
    r.best_bookmaker = j.at("best_bookmaker").get<std::string>();
    r.mean_odds = j.at("mean_odds").get<double>();
    r.median_odds = j.at("median_odds").get<double>();
    r.p_cons = j.at("p_cons").get<double>();
    r.threshold = j.at("threshold").get<double>();
    r.n_quotes = j.at("n_quotes").get<std::size_t>();
    r.kickoff = parse_timestamp_or_throw(j.at("kickoff").get<std::string>());
    r.time_to_match = Seconds{j.at("time_to_match_s").get<long>()};
    r.created_at = parse_timestamp_or_throw(j.at("created_at").get<std::string>());
    r.updated_at = parse_timestamp_or_throw(j.at("updated_at").get<std::string>());
    r.status = parse_rec_status(j.at("status").get<std::string>()).value();
    return r;
}

inline nlohmann::ordered_json to_json(const LedgerEntry& e)
{
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["recommendation_id"] = e.recommendation_id;
    j["game_id"] = e.game_id;
    j["outcome"] = std::string(outcome_code(e.outcome));
    j["bookmaker"] = e.bookmaker;
    j["placed_at"] = format_timestamp(e.placed_at);
    j["mode"] = std::string(to_string(e.mode));
    j["requested_stake"] = e.requested_stake;
    j["accepted_stake"] = e.accepted_stake;
    j["odds"] = e.odds;
    j["settlement"] = std::string(to_string(e.settlement));
    j["profit"] = e.profit;
    j["limit_event"] = e.limit_event ? nlohmann::ordered_json(*e.limit_event) : nlohmann::ordered_json(nullptr);
    j["note"] = e.note;
    j["settled_at"] = e.settled_at ? nlohmann::ordered_json(format_timestamp(*e.settled_at))
                                   : nlohmann::ordered_json(nullptr);
    return j;
}

inline LedgerEntry ledger_entry_from_json(const nlohmann::json& j)
{
    LedgerEntry e;
    e.id = j.at("id").get<std::uint64_t>();
    e.recommendation_id = j.at("recommendation_id").get<std::uint64_t>();
    e.game_id = j.at("game_id").get<std::string>();
    e.outcome = parse_outcome_code(j.at("outcome").get<std::string>()).value();
    e.bookmaker = j.at("bookmaker").get<std::string>();
    e.placed_at = parse_timestamp_or_throw(j.at("placed_at").get<std::string>());
    e.mode = parse_bet_mode(j.at("mode").get<std::string>()).value();
    e.requested_stake = j.at("requested_stake").get<double>();
    e.accepted_stake = j.at("accepted_stake").get<double>();
    e.odds = j.at("odds").get<double>();
    e.settlement = parse_settlement(j.at("settlement").get<std::string>()).value();
    e.profit = j.at("profit").get<double>();
    if (!j.at("limit_event").is_null())
        e.limit_event = j.at("limit_event").get<std::string>();
    e.note = j.at("note").get<std::string>();
    if (!j.at("settled_at").is_null())
        e.settled_at = parse_timestamp_or_throw(j.at("settled_at").get<std::string>());
    return e;
}

inline nlohmann::ordered_json to_json(const LedgerStats& s)
{
    nlohmann::ordered_json j;
    j["total_bets"] = s.total_bets;
    j["total_profit"] = s.total_profit;
    j["accuracy"] = s.accuracy;
    j["mean_odds"] = s.mean_odds;
    j["total_staked"] = s.total_staked;
    j["open_bets"] = s.open_bets;
    j["void_bets"] = s.void_bets;
    return j;
}

/// Append-only JSON-lines journal. Each record is written and fsync'ed before
/// the in-memory state changes; replaying the file reproduces the state. A
/// torn final line (crash mid-write) is ignored on load.
class Journal {
public:
    explicit Journal(std::string path) : path_(std::move(path))
    {
        fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
        if (fd_ < 0)
            throw Error(ErrorCode::StoreError, "cannot open journal " + path_ + ": " + std::strerror(errno));
        drop_torn_tail();
    }

    Journal(const Journal&) = delete;
    Journal& operator=(const Journal&) = delete;

    ~Journal()
    {
        if (fd_ >= 0)
            ::close(fd_);
    }

    std::vector<nlohmann::json> load() const
    {
        std::vector<nlohmann::json> out;
        std::ifstream in(path_);
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            try {
                out.push_back(nlohmann::json::parse(line));
            } catch (const nlohmann::json::parse_error&) {
                if (in.peek() == std::char_traits<char>::eof())
                    break;
                throw Error(ErrorCode::StoreError, "corrupt journal record in " + path_);
            }
        }
        return out;
    }

    void append(const nlohmann::ordered_json& record)
    {
        std::string line = record.dump() + "\n";
        const char* p = line.data();
        std::size_t left = line.size();
        while (left > 0) {
            auto n = ::write(fd_, p, left);
            if (n < 0) {
                if (errno == EINTR)
                    continue;
                throw Error(ErrorCode::StoreError, "journal write failed: " + std::string(std::strerror(errno)));
            }
            p += n;
            left -= static_cast<std::size_t>(n);
        }
        if (::fsync(fd_) != 0)
            throw Error(ErrorCode::StoreError, "journal fsync failed: " + std::string(std::strerror(errno)));
    }

    const std::string& path() const noexcept { return path_; }

private:
    /// Cuts an unterminated final line so new records start on a fresh line.
    void drop_torn_tail()
    {
        off_t end = ::lseek(fd_, 0, SEEK_END);
        off_t keep = end;
        char buf[4096];
        while (keep > 0) {
            const off_t start = std::max<off_t>(0, keep - static_cast<off_t>(sizeof buf));
            const auto want = static_cast<std::size_t>(keep - start);
            if (::pread(fd_, buf, want, start) != static_cast<ssize_t>(want))
                throw Error(ErrorCode::StoreError, "cannot read journal " + path_);
            const char* nl = static_cast<const char*>(::memrchr(buf, '\n', want));
            if (nl) {
                keep = start + (nl - buf) + 1;
                break;
            }
            keep = start;
        }
        if (keep != end && ::ftruncate(fd_, keep) != 0)
            throw Error(ErrorCode::StoreError, "cannot truncate journal " + path_ + ": " + std::strerror(errno));
    }

public:

private:
    std::string path_;
    int fd_ = -1;
};

class Scanner {
public:
    using AuditSink = std::function<void(const nlohmann::ordered_json&)>;

    explicit Scanner(StrategyConfig config, std::shared_ptr<Journal> journal = nullptr, AuditSink audit = {})
        : config_(config), journal_(std::move(journal)), audit_(std::move(audit))
    {
        config_.validate();
        if (journal_)
            restore(journal_->load());
    }

    const StrategyConfig& config() const noexcept { return config_; }

    /// Registers game metadata (teams, kickoff). Closing lines are ignored.
    void add_game(const GameRecord& g)
    {
        auto [it, inserted] = games_.try_emplace(g.game_id);
        if (inserted) {
            it->second.meta = g;
            it->second.meta.lines.clear();
        }
    }

    void load_games(const Dataset& ds)
    {
        for (const auto& g : ds.games())
            add_game(g);
    }

    /// Updates the latest-price state. Returns false for quotes of unknown games.
    bool on_quote(const QuoteEvent& q)
    {
        auto it = games_.find(q.game_id);
        if (it == games_.end()) {
            ++orphan_quotes_;
            return false;
        }
        auto& book = it->second.latest[index_of(q.outcome)];
        auto bk = std::find_if(book.begin(), book.end(), [&](const auto& p) { return p.first == q.bookmaker_id; });
        if (bk != book.end())
            bk->second = q.odds;
        else
            book.emplace_back(q.bookmaker_id, q.odds);
        if (audit_)
            audit({{"event", "quote"},
                   {"ts", format_timestamp(q.observed_at)},
                   {"game_id", q.game_id},
                   {"bookmaker", q.bookmaker_id},
                   {"outcome", std::string(outcome_code(q.outcome))},
                   {"odds", q.odds}});
        dirty_.insert(q.game_id);
        last_event_ = q.observed_at;
        ++events_;
        return true;
    }

    /// Re-evaluates games that received quotes since the last tick, then
    /// expires pending recommendations that have left the window. Returns the
    /// ids of recommendations created or changed.
    std::vector<std::uint64_t> scan_tick(Timestamp now)
    {
        std::vector<std::uint64_t> changed;
        for (const auto& game_id : dirty_)
            evaluate_game(games_.at(game_id), now, changed);
        dirty_.clear();
        for (auto& [id, rec] : recs_) {
            if (rec.status == RecStatus::Pending && now > rec.kickoff - config_.window_close) {
                transition(rec, RecStatus::Expired, now);
                changed.push_back(id);
            }
        }
        return changed;
    }

    const LedgerEntry& place_bet(std::uint64_t recommendation_id, BetMode mode, double requested_stake,
                                 double accepted_stake, std::string note, Timestamp now)
    {
        auto it = recs_.find(recommendation_id);
        if (it == recs_.end())
            throw Error(ErrorCode::NotFound, "recommendation " + std::to_string(recommendation_id));
        auto& rec = it->second;
        if (!(requested_stake > 0.0) || !(accepted_stake > 0.0) || accepted_stake > requested_stake)
            throw Error(ErrorCode::InvalidStake, "stakes must be positive with accepted <= requested");
        if (placed_games_.contains(rec.game_id) || rec.status == RecStatus::Placed)
            throw Error(ErrorCode::AlreadyPlaced, "a bet is already placed on game " + rec.game_id);
        if (rec.status == RecStatus::Pending && now > rec.kickoff - config_.window_close)
            transition(rec, RecStatus::Expired, now);
        if (rec.status != RecStatus::Pending)
            throw Error(ErrorCode::RecommendationExpired,
                        "recommendation " + std::to_string(rec.id) + " is " + std::string(to_string(rec.status)));

        LedgerEntry e;
        e.id = next_entry_id_;
        e.recommendation_id = rec.id;
        e.game_id = rec.game_id;
        e.outcome = rec.outcome;
        e.bookmaker = rec.best_bookmaker;
        e.placed_at = now;
        e.mode = mode;
        e.requested_stake = requested_stake;
        e.accepted_stake = accepted_stake;
        e.odds = rec.best_odds;
        e.note = std::move(note);
        if (accepted_stake < requested_stake)
            e.limit_event = "stake limited by " + rec.best_bookmaker + ": accepted " + csv::format_double(accepted_stake) +
                            " of " + csv::format_double(requested_stake);

        persist({{"type", "bet"}, {"entry", to_json(e)}});
        ++next_entry_id_;
        entries_.push_back(e);
        placed_games_.insert(rec.game_id);
        audit({{"event", "bet"}, {"entry", to_json(e)}});
        transition(rec, RecStatus::Placed, now);
        for (auto& [id, other] : recs_)
            if (id != rec.id && other.game_id == rec.game_id && other.status == RecStatus::Pending)
                transition(other, RecStatus::Superseded, now);
        return entries_.back();
    }

    /// Settling again with the same result is a no-op; a different result is
    /// rejected.
    const LedgerEntry& settle_bet(std::uint64_t entry_id, Settlement result, Timestamp now)
    {
        auto it = std::find_if(entries_.begin(), entries_.end(), [&](const auto& e) { return e.id == entry_id; });
        if (it == entries_.end())
            throw Error(ErrorCode::NotFound, "ledger entry " + std::to_string(entry_id));
        if (result == Settlement::Open)
            throw Error(ErrorCode::InvalidStake, "settlement result must be won, lost or void");
        if (it->settlement != Settlement::Open) {
            if (it->settlement == result)
                return *it;
            throw Error(ErrorCode::AlreadySettled, "entry " + std::to_string(entry_id) + " already " +
                                                        std::string(to_string(it->settlement)));
        }
        double profit = 0.0;
        if (result == Settlement::Won)
            profit = settle_profit(it->accepted_stake, it->odds, true);
        else if (result == Settlement::Lost)
            profit = settle_profit(it->accepted_stake, it->odds, false);
        persist({{"type", "settle"},
                 {"entry_id", entry_id},
                 {"result", std::string(to_string(result))},
                 {"profit", profit},
                 {"settled_at", format_timestamp(now)}});
        it->settlement = result;
        it->profit = profit;
        it->settled_at = now;
        audit({{"event", "settle"}, {"entry_id", entry_id}, {"result", std::string(to_string(result))}});
        return *it;
    }

    /// Soonest kickoff first, then id.
    std::vector<Recommendation> recommendations(std::optional<RecStatus> status = std::nullopt) const
    {
        std::vector<Recommendation> out;
        for (const auto& [id, r] : recs_)
            if (!status || r.status == *status)
                out.push_back(r);
        std::sort(out.begin(), out.end(), [](const Recommendation& a, const Recommendation& b) {
            if (a.kickoff != b.kickoff)
                return a.kickoff < b.kickoff;
            return a.id < b.id;
        });
        return out;
    }

    const Recommendation* recommendation(std::uint64_t id) const
    {
        auto it = recs_.find(id);
        return it == recs_.end() ? nullptr : &it->second;
    }

    std::vector<LedgerEntry> ledger(std::optional<Timestamp> from = std::nullopt,
                                    std::optional<Timestamp> to = std::nullopt) const
    {
        std::vector<LedgerEntry> out;
        for (const auto& e : entries_)
            if ((!from || e.placed_at >= *from) && (!to || e.placed_at <= *to))
                out.push_back(e);
        return out;
    }

    LedgerStats stats() const { return compute_stats(entries_); }

    bool game_placed(const std::string& game_id) const { return placed_games_.contains(game_id); }

    /// Places the best-edge pending recommendation of a game at full stake
    /// (ties keep Home, Draw, Away order). Used for replay and automation.
    std::optional<LedgerEntry> auto_place(const std::string& game_id, Timestamp now, BetMode mode = BetMode::Paper)
    {
        auto pending = pending_.find(game_id);
        if (pending == pending_.end())
            return std::nullopt;
        const Recommendation* best = nullptr;
        for (auto id : pending->second) {
            if (!id)
                continue;
            const auto& r = recs_.at(*id);
            if (r.status != RecStatus::Pending)
                continue;
            if (!best || r.edge(config_.alpha) > best->edge(config_.alpha))
                best = &r;
        }
        if (!best)
            return std::nullopt;
        return place_bet(best->id, mode, config_.stake, config_.stake, "auto", now);
    }

    std::optional<Timestamp> last_event_time() const noexcept { return last_event_; }
    std::size_t events_processed() const noexcept { return events_; }
    std::size_t orphan_quotes() const noexcept { return orphan_quotes_; }

private:
    struct GameState {
        GameRecord meta;
        std::array<std::vector<std::pair<std::string, double>>, 3> latest;
    };

    void evaluate_game(GameState& gs, Timestamp now, std::vector<std::uint64_t>& changed)
    {
        const auto& g = gs.meta;
        if (placed_games_.contains(g.game_id) || !config_.in_window(now, g.kickoff))
            return;
        std::vector<Price> prices;
        for (std::size_t k = 0; k < 3; ++k) {
            const Outcome o = kOutcomes[k];
            prices.clear();
            for (const auto& [book, odds] : gs.latest[k])
                prices.push_back({book, odds});
            auto& slot = pending_[g.game_id][k];
            Recommendation* existing = nullptr;
            if (slot) {
                existing = &recs_.at(*slot);
                if (existing->status != RecStatus::Pending) {
                    existing = nullptr;
                    slot.reset();
                }
            }
            if (prices.size() < config_.min_quotes || prices.empty()) {
                if (existing) {
                    transition(*existing, RecStatus::Superseded, now);
                    changed.push_back(existing->id);
                }
                continue;
            }
            auto s = summarize_prices(prices);
            const double p_cons = 1.0 / s.mean_odds;
            auto gate = evaluate_gate(p_cons, s.max_odds, config_.alpha);
            audit({{"event", "gate"},
                   {"ts", format_timestamp(now)},
                   {"game_id", g.game_id},
                   {"outcome", std::string(outcome_code(o))},
                   {"n_quotes", s.n_quotes},
                   {"p_cons", p_cons},
                   {"max_odds", s.max_odds},
                   {"threshold", gate.threshold},
                   {"qualifies", gate.qualifies}});
            if (!gate.qualifies) {
                if (existing) {
                    transition(*existing, RecStatus::Superseded, now);
                    changed.push_back(existing->id);
                }
                continue;
            }
            Recommendation r = existing ? *existing : Recommendation{};
            if (!existing) {
                r.id = next_rec_id_;
                r.game_id = g.game_id;
                r.home_team = g.home_team;
                r.away_team = g.away_team;
                r.league = g.league;
                r.outcome = o;
                r.kickoff = g.kickoff;
                r.created_at = now;
                r.status = RecStatus::Pending;
            }
            r.best_odds = s.max_odds;
            r.best_bookmaker = std::string(prices[s.max_index].bookmaker);
            r.mean_odds = s.mean_odds;
            r.median_odds = s.median_odds;
            r.p_cons = p_cons;
            r.threshold = gate.threshold;
            r.n_quotes = s.n_quotes;
            r.time_to_match = std::chrono::duration_cast<Seconds>(g.kickoff - now);
            r.updated_at = now;
            persist({{"type", "rec"}, {"rec", to_json(r)}});
            if (!existing) {
                ++next_rec_id_;
                slot = r.id;
            }
            recs_[r.id] = r;
            audit({{"event", "recommendation"}, {"action", existing ? "updated" : "created"}, {"rec", to_json(r)}});
            changed.push_back(r.id);
        }
    }

    void transition(Recommendation& rec, RecStatus to, Timestamp now)
    {
        Recommendation next = rec;
        next.status = to;
        next.updated_at = now;
        persist({{"type", "rec"}, {"rec", to_json(next)}});
        rec = next;
        audit({{"event", "recommendation"}, {"action", std::string(to_string(to))}, {"id", rec.id}});
    }

    void persist(const nlohmann::ordered_json& record)
    {
        if (journal_)
            journal_->append(record);
    }

    void audit(const nlohmann::ordered_json& record)
    {
        if (audit_)
            audit_(record);
    }

    void restore(const std::vector<nlohmann::json>& records)
    {
        for (const auto& rec : records) {
            const auto type = rec.at("type").get<std::string>();
            if (type == "rec") {
                auto r = recommendation_from_json(rec.at("rec"));
                next_rec_id_ = std::max(next_rec_id_, r.id + 1);
                if (r.status == RecStatus::Pending)
                    pending_[r.game_id][index_of(r.outcome)] = r.id;
                recs_[r.id] = std::move(r);
            } else if (type == "bet") {
                auto e = ledger_entry_from_json(rec.at("entry"));
                next_entry_id_ = std::max(next_entry_id_, e.id + 1);
                placed_games_.insert(e.game_id);
                entries_.push_back(std::move(e));
            } else if (type == "settle") {
                auto id = rec.at("entry_id").get<std::uint64_t>();
                for (auto& e : entries_) {
                    if (e.id == id) {
                        e.settlement = parse_settlement(rec.at("result").get<std::string>()).value();
                        e.profit = rec.at("profit").get<double>();
                        e.settled_at = parse_timestamp_or_throw(rec.at("settled_at").get<std::string>());
                    }
                }
            } else {
                throw Error(ErrorCode::StoreError, "unknown journal record type '" + type + "'");
            }
        }
    }

    StrategyConfig config_;
    std::shared_ptr<Journal> journal_;
    AuditSink audit_;
    std::unordered_map<std::string, GameState> games_;
    std::set<std::string> dirty_;
    std::map<std::uint64_t, Recommendation> recs_;
    std::unordered_map<std::string, std::array<std::optional<std::uint64_t>, 3>> pending_;
    std::set<std::string> placed_games_;
    std::vector<LedgerEntry> entries_;
    std::uint64_t next_rec_id_ = 1;
    std::uint64_t next_entry_id_ = 1;
    std::optional<Timestamp> last_event_;
    std::size_t events_ = 0;
    std::size_t orphan_quotes_ = 0;
};

/// One bet as seen by the equivalence check.
struct ReplayBet {
    std::string game_id;
    Outcome outcome = Outcome::HomeWin;
    double odds = 0.0;
    Timestamp placed_at{};

    friend bool operator==(const ReplayBet&, const ReplayBet&) = default;
};

struct ReplayComparison {
    std::vector<ReplayBet> scanner_bets;
    std::vector<ReplayBet> backtest_bets;
    std::vector<std::string> diffs;

    bool equivalent() const noexcept { return diffs.empty(); }
};

} // namespace valuebet
