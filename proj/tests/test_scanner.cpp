#include "catch_amalgamated.hpp"

#include "valuebet/replay.hpp"
#include "valuebet/scanner.hpp"
#include "valuebet/synthetic.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

using namespace valuebet;
using Catch::Matchers::WithinAbs;
using std::chrono::hours;
using std::chrono::minutes;

namespace {

const Timestamp kKickoff = parse_timestamp_or_throw("2016-11-30T13:00:00Z");

GameRecord game(std::string id, Timestamp kickoff = kKickoff, std::optional<Outcome> result = std::nullopt)
{
    GameRecord g;
    g.game_id = std::move(id);
    g.league = "FYR of Macedonia: First League";
    g.home_team = "Rabotnicki";
    g.away_team = "Pobeda";
    g.kickoff = kickoff;
    g.result = result;
    return g;
}

QuoteEvent q(Timestamp at, std::string game_id, std::string book, Outcome o, double odds)
{
    return {at, std::move(game_id), std::move(book), o, odds};
}

/// Home quotes of the first dashboard row: mean 1.44722, median 1.45, top 1.57.
void feed_dashboard_row(Scanner& s, const std::string& game_id, Timestamp at)
{
    const std::vector<std::pair<std::string, double>> home{
        {"William Hill", 1.57}, {"bet365", 1.45}, {"bwin", 1.45},     {"Unibet", 1.45},     {"Betsson", 1.45},
        {"Pinnacle", 1.42},     {"888sport", 1.40}, {"Ladbrokes", 1.41}, {"Interwetten", 1.425}};
    for (const auto& [book, odds] : home)
        s.on_quote(q(at, game_id, book, Outcome::HomeWin, odds));
}

/// Three quotes that qualify: mean 2.0, top 2.5.
void feed_qualifying(Scanner& s, const std::string& game_id, Timestamp at, Outcome o = Outcome::HomeWin,
                     double top = 2.5)
{
    s.on_quote(q(at, game_id, "A", o, 1.75));
    s.on_quote(q(at, game_id, "B", o, 1.75));
    s.on_quote(q(at, game_id, "C", o, top));
}

ErrorCode code_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no valuebet::Error thrown");
    return ErrorCode::StoreError;
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name)
        : path((std::filesystem::temp_directory_path() / (name + std::to_string(::getpid()))).string())
    {
        std::filesystem::remove(path);
    }
    ~TempFile() { std::filesystem::remove(path); }
};

} // namespace

TEST_CASE("dashboard row becomes a pending recommendation")
{
    StrategyConfig cfg;
    cfg.window_close = Seconds{0}; // the dashboard showed this row 17 minutes before kickoff
    Scanner s(cfg);
    s.add_game(game("D1"));
    const auto now = kKickoff - minutes{17} - Seconds{40};
    feed_dashboard_row(s, "D1", now);
    auto changed = s.scan_tick(now);
    REQUIRE(changed.size() == 1);
    auto recs = s.recommendations(RecStatus::Pending);
    REQUIRE(recs.size() == 1);
    const auto& r = recs[0];
    CHECK(r.outcome == Outcome::HomeWin);
    CHECK(r.best_odds == 1.57);
    CHECK(r.best_bookmaker == "William Hill");
    CHECK_THAT(r.mean_odds, WithinAbs(1.44722222, 1e-8));
    CHECK(r.median_odds == 1.45);
    CHECK_THAT(r.threshold, WithinAbs(1.5601, 5e-5));
    CHECK(r.time_to_match == Seconds{17 * 60 + 40});
    CHECK(r.home_team == "Rabotnicki");
    CHECK(r.n_quotes == 9);
    CHECK_THAT(1.0 / (r.p_cons - cfg.alpha), WithinAbs(r.threshold, 1e-9));
    CHECK(r.best_odds > r.threshold);
}

TEST_CASE("default window hides the 17-minute row")
{
    Scanner s(StrategyConfig{});
    s.add_game(game("D1"));
    const auto now = kKickoff - minutes{17};
    feed_dashboard_row(s, "D1", now);
    CHECK(s.scan_tick(now).empty());
    CHECK(s.recommendations().empty());
}

TEST_CASE("recommendation lifecycle")
{
    Scanner s(StrategyConfig{});
    s.add_game(game("G1"));
    auto t = kKickoff - hours{3};
    feed_qualifying(s, "G1", t);
    s.scan_tick(t);
    auto id = s.recommendations(RecStatus::Pending).at(0).id;

    SECTION("refresh keeps one pending rec with current odds")
    {
        s.on_quote(q(t + minutes{5}, "G1", "D", Outcome::HomeWin, 2.6));
        s.scan_tick(t + minutes{5});
        auto recs = s.recommendations();
        REQUIRE(recs.size() == 1);
        CHECK(recs[0].id == id);
        CHECK(recs[0].best_odds == 2.6);
        CHECK(recs[0].best_bookmaker == "D");
        CHECK(recs[0].created_at == t);
        CHECK(recs[0].updated_at == t + minutes{5});
    }
    SECTION("odds falling below the threshold supersede")
    {
        s.on_quote(q(t + minutes{5}, "G1", "C", Outcome::HomeWin, 1.8));
        s.scan_tick(t + minutes{5});
        CHECK(s.recommendation(id)->status == RecStatus::Superseded);
        CHECK(s.recommendations(RecStatus::Pending).empty());
        // A later qualifying state opens a fresh recommendation.
        s.on_quote(q(t + minutes{6}, "G1", "C", Outcome::HomeWin, 2.7));
        s.scan_tick(t + minutes{6});
        auto pending = s.recommendations(RecStatus::Pending);
        REQUIRE(pending.size() == 1);
        CHECK(pending[0].id != id);
    }
    SECTION("expiry once the window closes")
    {
        s.scan_tick(kKickoff - hours{1});
        CHECK(s.recommendation(id)->status == RecStatus::Pending);
        s.scan_tick(kKickoff - hours{1} + Seconds{1});
        CHECK(s.recommendation(id)->status == RecStatus::Expired);
        CHECK(code_of([&] { s.place_bet(id, BetMode::Paper, 50, 50, "", kKickoff); }) ==
              ErrorCode::RecommendationExpired);
    }
    SECTION("placing after the window expires on the spot")
    {
        CHECK(code_of([&] { s.place_bet(id, BetMode::Paper, 50, 50, "", kKickoff - minutes{30}); }) ==
              ErrorCode::RecommendationExpired);
        CHECK(s.recommendation(id)->status == RecStatus::Expired);
    }
    SECTION("placed games get no new recommendations")
    {
        s.place_bet(id, BetMode::Paper, 50, 50, "", t);
        feed_qualifying(s, "G1", t + minutes{1}, Outcome::AwayWin);
        CHECK(s.scan_tick(t + minutes{1}).empty());
        CHECK(s.recommendations(RecStatus::Pending).empty());
        CHECK(s.recommendation(id)->status == RecStatus::Placed);
        // Placed recommendations do not expire.
        s.scan_tick(kKickoff);
        CHECK(s.recommendation(id)->status == RecStatus::Placed);
    }
}

TEST_CASE("quotes outside the window raise nothing")
{
    Scanner s(StrategyConfig{});
    s.add_game(game("G1"));
    feed_qualifying(s, "G1", kKickoff - hours{6});
    CHECK(s.scan_tick(kKickoff - hours{6}).empty());
    // Re-seen inside the window.
    s.on_quote(q(kKickoff - hours{4}, "G1", "C", Outcome::HomeWin, 2.5));
    CHECK(s.scan_tick(kKickoff - hours{4}).size() == 1);
    CHECK_FALSE(s.on_quote(q(kKickoff, "nope", "C", Outcome::HomeWin, 2.5)));
    CHECK(s.orphan_quotes() == 1);
}

TEST_CASE("placing bets")
{
    Scanner s(StrategyConfig{});
    s.add_game(game("G1"));
    s.add_game(game("G2", kKickoff + hours{1}));
    auto t = kKickoff - hours{3};
    feed_qualifying(s, "G1", t, Outcome::HomeWin);
    feed_qualifying(s, "G1", t, Outcome::AwayWin, 2.6);
    feed_qualifying(s, "G2", t);
    s.scan_tick(t);
    auto pending = s.recommendations(RecStatus::Pending);
    REQUIRE(pending.size() == 3);
    // Soonest kickoff first.
    CHECK(pending[0].game_id == "G1");
    CHECK(pending[2].game_id == "G2");
    const auto home_id = pending[0].outcome == Outcome::HomeWin ? pending[0].id : pending[1].id;
    const auto away_id = pending[0].outcome == Outcome::HomeWin ? pending[1].id : pending[0].id;

    SECTION("normal paper entry")
    {
        auto before = s.stats();
        const auto& e = s.place_bet(home_id, BetMode::Paper, 50, 50, "", t);
        CHECK(e.settlement == Settlement::Open);
        CHECK(e.odds == 2.5);
        CHECK(e.bookmaker == "C");
        CHECK(e.profit == 0.0);
        CHECK_FALSE(e.limit_event);
        CHECK(e.placed_at == t);
        auto after = s.stats();
        CHECK(after.total_bets == before.total_bets);
        CHECK(after.total_profit == before.total_profit);
        CHECK(after.open_bets == 1);
        CHECK(s.recommendation(home_id)->status == RecStatus::Placed);
        CHECK(s.recommendation(away_id)->status == RecStatus::Superseded);
        CHECK(code_of([&] { s.place_bet(away_id, BetMode::Paper, 50, 50, "", t); }) == ErrorCode::AlreadyPlaced);
        CHECK(code_of([&] { s.place_bet(home_id, BetMode::Paper, 50, 50, "", t); }) == ErrorCode::AlreadyPlaced);
    }
    SECTION("stake limited by the bookmaker")
    {
        const auto& e = s.place_bet(home_id, BetMode::Real, 50, 11.11, "max bet 11.11", t);
        CHECK(e.accepted_stake == 11.11);
        CHECK(e.requested_stake == 50);
        REQUIRE(e.limit_event);
        CHECK(e.limit_event->find("11.11") != std::string::npos);
        CHECK(e.limit_event->find("50") != std::string::npos);
        CHECK(e.note == "max bet 11.11");
        const auto& won = s.settle_bet(e.id, Settlement::Won, t);
        CHECK(won.profit == settle_profit(11.11, 2.5, true));
        CHECK_THAT(won.profit, WithinAbs(16.665, 0.0051));
    }
    SECTION("stake validation")
    {
        CHECK(code_of([&] { s.place_bet(home_id, BetMode::Paper, 0, 0, "", t); }) == ErrorCode::InvalidStake);
        CHECK(code_of([&] { s.place_bet(home_id, BetMode::Paper, 50, 60, "", t); }) == ErrorCode::InvalidStake);
        CHECK(code_of([&] { s.place_bet(home_id, BetMode::Paper, 50, -1, "", t); }) == ErrorCode::InvalidStake);
        CHECK(code_of([&] { s.place_bet(999, BetMode::Paper, 50, 50, "", t); }) == ErrorCode::NotFound);
        CHECK(s.ledger().empty());
    }
}

TEST_CASE("settlement")
{
    Scanner s(StrategyConfig{});
    auto t = kKickoff - hours{3};
    const std::vector<std::tuple<std::string, double, Settlement, double>> rows{
        {"G1", 1.78, Settlement::Won, 39.0},
        {"G2", 1.60, Settlement::Lost, -50.0},
        {"G3", 2.40, Settlement::Void, 0.0},
    };
    std::vector<std::uint64_t> entries;
    for (const auto& [id, odds, result, profit] : rows) {
        s.add_game(game(id));
        // Two fixed quotes plus the top price, chosen to qualify.
        s.on_quote(q(t, id, "A", Outcome::HomeWin, odds * 0.8));
        s.on_quote(q(t, id, "B", Outcome::HomeWin, odds * 0.8));
        s.on_quote(q(t, id, "C", Outcome::HomeWin, odds));
        s.scan_tick(t);
        auto rec = s.recommendations(RecStatus::Pending).at(0);
        REQUIRE(rec.best_odds == odds);
        entries.push_back(s.place_bet(rec.id, BetMode::Paper, 50, 50, "", t).id);
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& e = s.settle_bet(entries[i], std::get<2>(rows[i]), t);
        CHECK(e.profit == std::get<3>(rows[i]));
        CHECK(e.settled_at == t);
    }
    auto st = s.stats();
    CHECK(st.total_bets == 2);
    CHECK(st.void_bets == 1);
    CHECK(st.total_profit == -11.0);
    CHECK(st.accuracy == 0.5);
    CHECK_THAT(st.mean_odds, WithinAbs((1.78 + 1.60) / 2, 1e-12));
    auto ledger = s.ledger();
    auto folded = compute_stats(ledger);
    CHECK(folded.total_profit == st.total_profit);
    CHECK(folded.total_bets == st.total_bets);

    // Retrying the same result is harmless; a different one is refused.
    CHECK(s.settle_bet(entries[0], Settlement::Won, t + hours{9}).settled_at == t);
    CHECK(code_of([&] { s.settle_bet(entries[0], Settlement::Lost, t); }) == ErrorCode::AlreadySettled);
    CHECK(code_of([&] { s.settle_bet(999, Settlement::Lost, t); }) == ErrorCode::NotFound);
    CHECK(s.stats().total_profit == -11.0);
}

TEST_CASE("empty scanner stats are zero")
{
    Scanner s(StrategyConfig{});
    auto st = s.stats();
    CHECK(st.total_bets == 0);
    CHECK(st.total_profit == 0.0);
    CHECK(st.accuracy == 0.0);
    CHECK(st.mean_odds == 0.0);
}

TEST_CASE("ledger range filter")
{
    Scanner s(StrategyConfig{});
    for (int i = 0; i < 3; ++i) {
        auto id = "G" + std::to_string(i);
        auto ko = kKickoff + hours{24 * i};
        s.add_game(game(id, ko));
        feed_qualifying(s, id, ko - hours{2});
        s.scan_tick(ko - hours{2});
        s.auto_place(id, ko - hours{2});
    }
    CHECK(s.ledger().size() == 3);
    CHECK(s.ledger(kKickoff, std::nullopt).size() == 2);
    CHECK(s.ledger(std::nullopt, kKickoff).size() == 1);
    CHECK(s.ledger(kKickoff + hours{20}, kKickoff + hours{23}).size() == 1);
}

TEST_CASE("journal survives a restart")
{
    TempFile store("valuebet-journal-test-");
    StrategyConfig cfg;
    auto t = kKickoff - hours{3};
    std::uint64_t placed_rec = 0, entry_id = 0, pending_rec = 0;
    {
        Scanner s(cfg, std::make_shared<Journal>(store.path));
        s.add_game(game("G1"));
        s.add_game(game("G2"));
        feed_qualifying(s, "G1", t);
        feed_qualifying(s, "G2", t);
        s.scan_tick(t);
        auto pending = s.recommendations(RecStatus::Pending);
        REQUIRE(pending.size() == 2);
        placed_rec = pending[0].id;
        pending_rec = pending[1].id;
        entry_id = s.place_bet(placed_rec, BetMode::Real, 50, 11.11, "limited", t).id;
        s.settle_bet(entry_id, Settlement::Won, t);
    }
    // Simulate a crash mid-append.
    {
        std::ofstream torn(store.path, std::ios::app);
        torn << R"({"type":"bet","entry":{"id":)";
    }
    Scanner again(cfg, std::make_shared<Journal>(store.path));
    again.add_game(game("G1"));
    again.add_game(game("G2"));
    REQUIRE(again.ledger().size() == 1);
    const auto e = again.ledger()[0];
    CHECK(e.id == entry_id);
    CHECK(e.settlement == Settlement::Won);
    CHECK(e.profit == settle_profit(11.11, 2.5, true));
    CHECK(e.limit_event);
    CHECK(again.recommendation(placed_rec)->status == RecStatus::Placed);
    CHECK(again.recommendation(pending_rec)->status == RecStatus::Pending);
    CHECK(again.game_placed(e.game_id));
    // One bet per game holds across restarts.
    feed_qualifying(again, e.game_id, t + minutes{1}, Outcome::AwayWin);
    again.scan_tick(t + minutes{1});
    for (const auto& r : again.recommendations(RecStatus::Pending))
        CHECK(r.game_id != e.game_id);
    // Ids continue after the restored ones.
    auto next = again.place_bet(pending_rec, BetMode::Paper, 50, 50, "", t + minutes{1});
    CHECK(next.id == entry_id + 1);
    CHECK(again.stats().total_profit == e.profit);
    again.settle_bet(next.id, Settlement::Lost, t + hours{4});

    // A third start sees records written after the torn tail.
    Scanner third(cfg, std::make_shared<Journal>(store.path));
    REQUIRE(third.ledger().size() == 2);
    CHECK(third.ledger()[1].settlement == Settlement::Lost);
    CHECK(third.stats().total_profit == e.profit - 50.0);
}

TEST_CASE("journal records carry every state change")
{
    TempFile store("valuebet-journal-records-");
    {
        Scanner s(StrategyConfig{}, std::make_shared<Journal>(store.path));
        s.add_game(game("G1"));
        feed_qualifying(s, "G1", kKickoff - hours{3});
        s.scan_tick(kKickoff - hours{3});
        s.scan_tick(kKickoff);
    }
    auto records = Journal(store.path).load();
    REQUIRE(records.size() == 2);
    CHECK(records[0]["rec"]["status"] == "pending");
    CHECK(records[1]["rec"]["status"] == "expired");
}

TEST_CASE("audit log traces quote, gate and recommendation")
{
    std::vector<std::string> events;
    Scanner s(StrategyConfig{}, nullptr, [&](const nlohmann::ordered_json& j) { events.push_back(j["event"].get<std::string>()); });
    s.add_game(game("G1"));
    feed_qualifying(s, "G1", kKickoff - hours{3});
    s.scan_tick(kKickoff - hours{3});
    REQUIRE(events.size() >= 5);
    CHECK(events[0] == "quote");
    CHECK(std::count(events.begin(), events.end(), "gate") == 1);
    CHECK(events.back() == "recommendation");
}

TEST_CASE("auto placement picks the best edge")
{
    Scanner s(StrategyConfig{});
    s.add_game(game("G1"));
    auto t = kKickoff - hours{3};
    feed_qualifying(s, "G1", t, Outcome::HomeWin, 2.5);
    feed_qualifying(s, "G1", t, Outcome::AwayWin, 2.6);
    s.scan_tick(t);
    auto e = s.auto_place("G1", t);
    REQUIRE(e);
    CHECK(e->outcome == Outcome::AwayWin);
    CHECK_FALSE(s.auto_place("G1", t));
    CHECK_FALSE(s.auto_place("G2", t));
}

TEST_CASE("replay equivalence on small fixtures")
{
    auto build = [](std::vector<QuoteEvent> quotes) {
        DatasetBuilder b;
        b.add_game({"G1", "L", "H", "A", kKickoff, Outcome::HomeWin});
        b.add_game({"G2", "L", "H", "A", kKickoff + hours{2}, Outcome::Draw});
        return std::move(b).build().with_quotes(std::move(quotes));
    };
    SECTION("one qualifying game")
    {
        std::vector<QuoteEvent> qs{q(kKickoff - hours{3}, "G1", "A", Outcome::HomeWin, 1.75),
                                   q(kKickoff - hours{3}, "G1", "B", Outcome::HomeWin, 1.75),
                                   q(kKickoff - hours{3}, "G1", "C", Outcome::HomeWin, 2.5),
                                   q(kKickoff - hours{3}, "G2", "A", Outcome::HomeWin, 2.0),
                                   q(kKickoff - hours{3}, "G2", "B", Outcome::HomeWin, 2.0),
                                   q(kKickoff - hours{3}, "G2", "C", Outcome::HomeWin, 2.1)};
        auto c = replay_equivalence(build(qs), StrategyConfig{});
        CHECK(c.equivalent());
        REQUIRE(c.scanner_bets.size() == 1);
        CHECK(c.scanner_bets == c.backtest_bets);
        CHECK(c.scanner_bets[0].odds == 2.5);
    }
    SECTION("post-kickoff quotes")
    {
        std::vector<QuoteEvent> qs{q(kKickoff + minutes{1}, "G1", "A", Outcome::HomeWin, 1.75),
                                   q(kKickoff + minutes{1}, "G1", "B", Outcome::HomeWin, 1.75),
                                   q(kKickoff + minutes{1}, "G1", "C", Outcome::HomeWin, 2.5)};
        auto c = replay_equivalence(build(qs), StrategyConfig{});
        CHECK(c.equivalent());
        CHECK(c.scanner_bets.empty());
        CHECK(c.backtest_bets.empty());
    }
}

TEST_CASE("replay equivalence on synthetic streams")
{
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
        SyntheticMarketSpec spec;
        spec.seed = seed;
        spec.mispricing_rate = 0.05;
        spec.mispricing_factor = 1.08;
        spec.n_bookmakers = 12;
        spec.n_updates = 4;
        auto ds = generate_synthetic(spec, 400);
        auto c = replay_equivalence(ds, StrategyConfig{});
        CHECK(c.diffs.empty());
        CHECK(c.scanner_bets.size() > 5);
    }
}
