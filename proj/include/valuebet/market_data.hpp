#pragma once

// Odds datasets: games with per-bookmaker closing odds, optional time-ordered
// quote streams, and the two on-disk formats (closing-odds CSV and
// quote-stream JSON lines).

#include "valuebet/core_model.hpp"
#include "valuebet/csv.hpp"
#include "valuebet/error.hpp"
#include "valuebet/time.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace valuebet {

using BookmakerId = std::uint32_t;

/// One bookmaker's closing prices for a game; 0.0 marks an outcome not offered.
struct ClosingLine {
    BookmakerId bookmaker = 0;
    std::array<double, 3> odds{};

    std::optional<double> get(Outcome o) const noexcept
    {
        double v = odds[index_of(o)];
        return v > 0.0 ? std::optional<double>(v) : std::nullopt;
    }
};

struct GameRecord {
    std::string game_id;
    std::string league;
    std::string home_team;
    std::string away_team;
    Timestamp kickoff{};
    std::optional<Outcome> result; ///< nullopt while unsettled
    std::vector<ClosingLine> lines; ///< sorted by bookmaker id

    bool settled() const noexcept { return result.has_value(); }
};

struct QuoteEvent {
    Timestamp observed_at{};
    std::string game_id;
    std::string bookmaker_id;
    Outcome outcome = Outcome::HomeWin;
    double odds = 0.0;

    friend bool operator==(const QuoteEvent&, const QuoteEvent&) = default;
};

struct Provenance {
    std::string source;
    std::string checksum; ///< FNV-1a 64 of the source bytes, hex
};

struct ParseReport {
    std::size_t rows_read = 0;
    std::size_t rows_dropped = 0;
    std::vector<std::string> drop_reasons; ///< first 100 only
    std::size_t duplicate_quotes = 0;
    std::size_t orphan_quotes = 0;
    std::vector<std::string> orphan_game_ids;

    void drop(std::size_t line_no, const std::string& why)
    {
        ++rows_dropped;
        if (drop_reasons.size() < 100)
            drop_reasons.push_back("line " + std::to_string(line_no) + ": " + why);
    }
};

inline std::string fnv1a64_hex(std::string_view bytes)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

class DatasetBuilder;

/// Immutable after construction. Games are ordered by (kickoff, game_id);
/// bookmaker ids are ranks in lexicographic name order, so the smallest id is
/// also the lexicographic tie-break winner. Quotes are ordered by
/// (observed_at, game_id, bookmaker, outcome) and every quote resolves to a game.
class Dataset {
public:
    Dataset() = default;

    std::span<const GameRecord> games() const noexcept { return games_; }
    std::span<const QuoteEvent> quotes() const noexcept { return quotes_; }
    std::span<const std::string> bookmakers() const noexcept { return bookmakers_; }
    const Provenance& provenance() const noexcept { return provenance_; }
    const ParseReport& report() const noexcept { return report_; }
    bool has_quotes() const noexcept { return !quotes_.empty(); }

    std::optional<std::size_t> game_index(std::string_view game_id) const
    {
        auto it = index_.find(std::string(game_id));
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    const GameRecord* find(std::string_view game_id) const
    {
        auto idx = game_index(game_id);
        return idx ? &games_[*idx] : nullptr;
    }

    const std::string& bookmaker_name(BookmakerId id) const { return bookmakers_.at(id); }

    std::optional<BookmakerId> bookmaker_id(std::string_view name) const
    {
        auto it = std::lower_bound(bookmakers_.begin(), bookmakers_.end(), name);
        if (it == bookmakers_.end() || *it != name)
            return std::nullopt;
        return static_cast<BookmakerId>(it - bookmakers_.begin());
    }

    /// Closing prices offered for one outcome, in bookmaker-name order.
    std::vector<Price> closing_prices(const GameRecord& game, Outcome o) const
    {
        std::vector<Price> out;
        out.reserve(game.lines.size());
        for (const auto& line : game.lines)
            if (auto v = line.get(o))
                out.push_back({bookmakers_[line.bookmaker], *v});
        return out;
    }

    OddsSet closing_odds_set(const GameRecord& game, Outcome o) const
    {
        OddsSet set(game.game_id, o);
        for (const auto& line : game.lines)
            if (auto v = line.get(o))
                set.add({bookmakers_[line.bookmaker], o, *v, game.kickoff});
        return set;
    }

    /// Returns a copy carrying the given quote stream, normalized the same way
    /// the stream parser does (dedupe keeps last, full-key ordering, orphans
    /// removed and counted).
    Dataset with_quotes(std::vector<QuoteEvent> raw) const&
    {
        Dataset copy = *this;
        return std::move(copy).with_quotes(std::move(raw));
    }

    Dataset with_quotes(std::vector<QuoteEvent> raw) &&
    {
        quotes_.clear();
        attach_quotes(std::move(raw));
        return std::move(*this);
    }

    Dataset with_provenance(Provenance p) &&
    {
        provenance_ = std::move(p);
        return std::move(*this);
    }

private:
    friend class DatasetBuilder;
    friend Dataset parse_quote_stream(std::istream&, Dataset, std::string);

    void rebuild_index()
    {
        index_.clear();
        index_.reserve(games_.size());
        for (std::size_t i = 0; i < games_.size(); ++i)
            index_.emplace(games_[i].game_id, i);
    }

    void attach_quotes(std::vector<QuoteEvent> raw)
    {
        // last occurrence of a (game, bookmaker, outcome, ts) key wins
        std::vector<std::size_t> order(raw.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        auto key_less = [&](std::size_t a, std::size_t b) {
            const auto& x = raw[a];
            const auto& y = raw[b];
            if (x.observed_at != y.observed_at)
                return x.observed_at < y.observed_at;
            if (x.game_id != y.game_id)
                return x.game_id < y.game_id;
            if (x.bookmaker_id != y.bookmaker_id)
                return x.bookmaker_id < y.bookmaker_id;
            return x.outcome < y.outcome;
        };
        std::stable_sort(order.begin(), order.end(), key_less);
        std::vector<QuoteEvent> out;
        out.reserve(raw.size());
        std::map<std::string, bool> orphans;
        for (std::size_t i = 0; i < order.size(); ++i) {
            if (i + 1 < order.size() && !key_less(order[i], order[i + 1])) {
                ++report_.duplicate_quotes;
                continue;
            }
            auto& q = raw[order[i]];
            if (!index_.contains(q.game_id)) {
                ++report_.orphan_quotes;
                orphans[q.game_id] = true;
                continue;
            }
            out.push_back(std::move(q));
        }
        for (auto& [id, _] : orphans)
            report_.orphan_game_ids.push_back(id);
        quotes_ = std::move(out);
    }

    std::vector<GameRecord> games_;
    std::vector<std::string> bookmakers_;
    std::vector<QuoteEvent> quotes_;
    std::unordered_map<std::string, std::size_t> index_;
    Provenance provenance_;
    ParseReport report_;
};

/// Accumulates games and closing lines; build() sorts and interns.
class DatasetBuilder {
public:
    struct GameInfo {
        std::string game_id;
        std::string league;
        std::string home_team;
        std::string away_team;
        Timestamp kickoff{};
        std::optional<Outcome> result;

        bool same_metadata(const GameRecord& g) const
        {
            return g.league == league && g.home_team == home_team && g.away_team == away_team &&
                   g.kickoff == kickoff && g.result == result;
        }
    };

    /// Returns the game's slot; nullopt when an existing game has conflicting metadata.
    std::optional<std::size_t> add_game(GameInfo info)
    {
        auto it = index_.find(info.game_id);
        if (it != index_.end()) {
            if (!info.same_metadata(games_[it->second]))
                return std::nullopt;
            return it->second;
        }
        GameRecord g;
        g.game_id = std::move(info.game_id);
        g.league = std::move(info.league);
        g.home_team = std::move(info.home_team);
        g.away_team = std::move(info.away_team);
        g.kickoff = info.kickoff;
        g.result = info.result;
        index_.emplace(g.game_id, games_.size());
        games_.push_back(std::move(g));
        return games_.size() - 1;
    }

    BookmakerId intern_bookmaker(std::string_view name)
    {
        auto it = book_index_.find(std::string(name));
        if (it != book_index_.end())
            return it->second;
        auto id = static_cast<BookmakerId>(books_.size());
        books_.emplace_back(name);
        book_index_.emplace(std::string(name), id);
        return id;
    }

    /// A later line for the same (game, bookmaker) replaces the earlier one.
    void set_line(std::size_t game_slot, BookmakerId bookmaker, const std::array<double, 3>& odds)
    {
        auto& lines = games_.at(game_slot).lines;
        for (auto& l : lines) {
            if (l.bookmaker == bookmaker) {
                l.odds = odds;
                return;
            }
        }
        lines.push_back({bookmaker, odds});
    }

    void add_quote(QuoteEvent q) { quotes_.push_back(std::move(q)); }

    ParseReport& report() noexcept { return report_; }
    std::size_t game_count() const noexcept { return games_.size(); }

    Dataset build(Provenance provenance = {}) &&
    {
        Dataset ds;
        // rank bookmakers lexicographically and remap
        std::vector<BookmakerId> by_name(books_.size());
        for (std::size_t i = 0; i < by_name.size(); ++i)
            by_name[i] = static_cast<BookmakerId>(i);
        std::sort(by_name.begin(), by_name.end(), [&](BookmakerId a, BookmakerId b) { return books_[a] < books_[b]; });
        std::vector<BookmakerId> remap(books_.size());
        for (std::size_t rank = 0; rank < by_name.size(); ++rank) {
            remap[by_name[rank]] = static_cast<BookmakerId>(rank);
            ds.bookmakers_.push_back(books_[by_name[rank]]);
        }
        for (auto& g : games_) {
            for (auto& l : g.lines)
                l.bookmaker = remap[l.bookmaker];
            std::sort(g.lines.begin(), g.lines.end(),
                      [](const ClosingLine& a, const ClosingLine& b) { return a.bookmaker < b.bookmaker; });
        }
        std::sort(games_.begin(), games_.end(), [](const GameRecord& a, const GameRecord& b) {
            if (a.kickoff != b.kickoff)
                return a.kickoff < b.kickoff;
            return a.game_id < b.game_id;
        });
        ds.games_ = std::move(games_);
        ds.rebuild_index();
        ds.provenance_ = std::move(provenance);
        ds.report_ = std::move(report_);
        if (!quotes_.empty())
            ds.attach_quotes(std::move(quotes_));
        return ds;
    }

private:
    std::vector<GameRecord> games_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::string> books_;
    std::unordered_map<std::string, BookmakerId> book_index_;
    std::vector<QuoteEvent> quotes_;
    ParseReport report_;
};

// ---------------------------------------------------------------------------
// Closing-odds CSV
//
//   game_id,league,home,away,kickoff_utc,result,bookmaker,odds_home,odds_draw,odds_away
//
// One row per (game, bookmaker). result is 1 / X / 2, or empty while
// unsettled. Empty odds mean the outcome was not offered. A row with an empty
// bookmaker and no odds declares a game without prices. Rows with malformed
// odds (unparseable or <= 1.0), timestamps or result codes are dropped and
// counted.
// ---------------------------------------------------------------------------

inline constexpr std::array<std::string_view, 10> kClosingColumns{
    "game_id", "league", "home", "away", "kickoff_utc", "result", "bookmaker", "odds_home", "odds_draw", "odds_away"};

inline Dataset parse_closing_odds(std::istream& in, std::string source = "<stream>")
{
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Provenance prov{std::move(source), fnv1a64_hex(content)};
    std::istringstream lines(content);
    std::string line;
    if (!std::getline(lines, line))
        throw Error(ErrorCode::EmptyDataset, "closing-odds file is empty");
    auto header = csv::split_line(line);
    if (!header)
        throw Error(ErrorCode::SchemaError, "unreadable header");
    std::array<std::size_t, kClosingColumns.size()> col{};
    for (std::size_t c = 0; c < kClosingColumns.size(); ++c) {
        auto it = std::find(header->begin(), header->end(), kClosingColumns[c]);
        if (it == header->end())
            throw Error(ErrorCode::SchemaError, "missing required column '" + std::string(kClosingColumns[c]) + "'");
        col[c] = static_cast<std::size_t>(it - header->begin());
    }

    DatasetBuilder builder;
    auto& report = builder.report();
    std::size_t line_no = 1;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        ++report.rows_read;
        auto fields = csv::split_line(line);
        if (!fields || fields->size() != header->size()) {
            report.drop(line_no, "wrong field count");
            continue;
        }
        auto field = [&](std::size_t c) -> const std::string& { return (*fields)[col[c]]; };
        auto kickoff = parse_timestamp(field(4));
        if (!kickoff) {
            report.drop(line_no, "bad kickoff_utc");
            continue;
        }
        std::optional<Outcome> result;
        if (!field(5).empty()) {
            result = parse_outcome_code(field(5));
            if (!result) {
                report.drop(line_no, "bad result code");
                continue;
            }
        }
        if (field(0).empty()) {
            report.drop(line_no, "empty game_id");
            continue;
        }
        std::array<double, 3> odds{};
        bool bad = false;
        bool any = false;
        for (std::size_t k = 0; k < 3; ++k) {
            const auto& f = field(7 + k);
            if (f.empty())
                continue;
            auto v = csv::parse_double(f);
            if (!v || !valid_odds(*v)) {
                bad = true;
                break;
            }
            odds[k] = *v;
            any = true;
        }
        if (bad) {
            report.drop(line_no, "malformed odds");
            continue;
        }
        if (field(6).empty() && any) {
            report.drop(line_no, "odds without bookmaker");
            continue;
        }
        auto slot = builder.add_game({field(0), field(1), field(2), field(3), *kickoff, result});
        if (!slot) {
            report.drop(line_no, "metadata conflicts with earlier row for game " + field(0));
            continue;
        }
        if (!field(6).empty())
            builder.set_line(*slot, builder.intern_bookmaker(field(6)), odds);
    }
    if (builder.game_count() == 0)
        throw Error(ErrorCode::EmptyDataset, "no valid game rows");
    return std::move(builder).build(std::move(prov));
}

inline Dataset parse_closing_odds_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::SchemaError, "cannot open " + path);
    return parse_closing_odds(in, path);
}

/// Canonical serialization: games in dataset order, lines in bookmaker order.
inline void write_closing_odds(const Dataset& ds, std::ostream& out)
{
    for (std::size_t c = 0; c < kClosingColumns.size(); ++c)
        out << (c ? "," : "") << kClosingColumns[c];
    out << '\n';
    for (const auto& g : ds.games()) {
        std::string prefix = csv::escape(g.game_id) + ',' + csv::escape(g.league) + ',' + csv::escape(g.home_team) +
                             ',' + csv::escape(g.away_team) + ',' + format_timestamp(g.kickoff) + ',' +
                             (g.result ? std::string(outcome_code(*g.result)) : std::string()) + ',';
        if (g.lines.empty()) {
            out << prefix << ",,,\n";
            continue;
        }
        for (const auto& l : g.lines) {
            out << prefix << csv::escape(ds.bookmaker_name(l.bookmaker));
            for (double v : l.odds)
                out << ',' << (v > 0.0 ? csv::format_double(v) : std::string());
            out << '\n';
        }
    }
}

// ---------------------------------------------------------------------------
// Quote stream: one JSON object per line
//
//   {"ts":"2016-04-06T14:02:11Z","game_id":"G1","bookmaker":"bwin","outcome":"1","odds":1.78}
//
// Structural problems (bad JSON, missing keys, bad ts/outcome) raise
// SchemaError. Odds <= 1.0 are dropped and counted. Quotes whose game is not
// in the game catalog are collected as orphans, not fatal.
// ---------------------------------------------------------------------------

inline QuoteEvent quote_from_json(const nlohmann::json& j)
{
    for (const char* key : {"ts", "game_id", "bookmaker", "outcome", "odds"})
        if (!j.contains(key))
            throw Error(ErrorCode::SchemaError, std::string("missing key '") + key + "'");
    QuoteEvent q;
    if (!j["ts"].is_string() || !j["game_id"].is_string() || !j["bookmaker"].is_string() ||
        !j["outcome"].is_string() || !j["odds"].is_number())
        throw Error(ErrorCode::SchemaError, "wrong field type");
    q.observed_at = parse_timestamp_or_throw(j["ts"].get<std::string>());
    q.game_id = j["game_id"].get<std::string>();
    q.bookmaker_id = j["bookmaker"].get<std::string>();
    auto o = parse_outcome_code(j["outcome"].get<std::string>());
    if (!o)
        throw Error(ErrorCode::SchemaError, "bad outcome code");
    q.outcome = *o;
    q.odds = j["odds"].get<double>();
    return q;
}

inline nlohmann::ordered_json quote_to_json(const QuoteEvent& q)
{
    nlohmann::ordered_json j;
    j["ts"] = format_timestamp(q.observed_at);
    j["game_id"] = q.game_id;
    j["bookmaker"] = q.bookmaker_id;
    j["outcome"] = std::string(outcome_code(q.outcome));
    j["odds"] = q.odds;
    return j;
}

inline Dataset parse_quote_stream(std::istream& in, Dataset games, std::string source = "<stream>")
{
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::istringstream lines(content);
    std::string line;
    std::vector<QuoteEvent> raw;
    std::size_t line_no = 0;
    auto& report = games.report_;
    while (std::getline(lines, line)) {
        ++line_no;
        if (line.empty() || line == "\r")
            continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!j.is_object())
            throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": not an object");
        QuoteEvent q;
        try {
            q = quote_from_json(j);
        } catch (const Error& e) {
            throw Error(ErrorCode::SchemaError, "line " + std::to_string(line_no) + ": " + e.what());
        }
        ++report.rows_read;
        if (!valid_odds(q.odds)) {
            report.drop(line_no, "malformed odds");
            continue;
        }
        raw.push_back(std::move(q));
    }
    games.quotes_.clear();
    games.attach_quotes(std::move(raw));
    if (!source.empty())
        games.provenance_.source += (games.provenance_.source.empty() ? "" : " + ") + source;
    games.provenance_.checksum += (games.provenance_.checksum.empty() ? "" : "+") + fnv1a64_hex(content);
    return games;
}

inline Dataset parse_quote_stream_file(const std::string& path, Dataset games)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(ErrorCode::SchemaError, "cannot open " + path);
    return parse_quote_stream(in, std::move(games), path);
}

inline void write_quote_stream(const Dataset& ds, std::ostream& out)
{
    for (const auto& q : ds.quotes())
        out << quote_to_json(q).dump() << '\n';
}

} // namespace valuebet
