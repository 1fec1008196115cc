#include "catch_amalgamated.hpp"

#include "valuebet/backtest.hpp"
#include "valuebet/report_io.hpp"
#include "valuebet/synthetic.hpp"

#include <set>

using namespace valuebet;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using std::chrono::hours;
using std::chrono::minutes;

namespace {

const Timestamp kKickoff = parse_timestamp_or_throw("2016-11-30T13:00:00Z");

struct GameSpec {
    std::string id;
    std::optional<Outcome> result;
    std::vector<std::pair<std::string, std::array<double, 3>>> lines;
    Timestamp kickoff = kKickoff;
};

Dataset make_dataset(const std::vector<GameSpec>& games, std::vector<QuoteEvent> quotes = {})
{
    DatasetBuilder b;
    for (const auto& g : games) {
        auto slot = b.add_game({g.id, "L", "H", "A", g.kickoff, g.result});
        for (const auto& [book, odds] : g.lines)
            b.set_line(*slot, b.intern_bookmaker(book), odds);
    }
    auto ds = std::move(b).build({"test", ""});
    if (!quotes.empty())
        ds = std::move(ds).with_quotes(std::move(quotes));
    return ds;
}

QuoteEvent quote(Seconds before_kickoff, std::string game, std::string book, Outcome o, double odds)
{
    return {kKickoff - before_kickoff, std::move(game), std::move(book), o, odds};
}

/// Home prices with mean 1.44722 and a 1.57 top price.
GameSpec dashboard_game(std::optional<Outcome> result)
{
    GameSpec g{"D1", result, {}};
    const std::vector<std::pair<std::string, double>> home{
        {"William Hill", 1.57}, {"bet365", 1.45}, {"bwin", 1.45},     {"Unibet", 1.45},     {"Betsson", 1.45},
        {"Pinnacle", 1.42},     {"888sport", 1.40}, {"Ladbrokes", 1.41}, {"Interwetten", 1.425}};
    for (const auto& [book, odds] : home)
        g.lines.push_back({book, {odds, 3.9, 6.0}});
    return g;
}

} // namespace

TEST_CASE("closing backtest on the dashboard example")
{
    auto ds = make_dataset({dashboard_game(Outcome::HomeWin)});
    auto r = run_closing_backtest(ds, {});
    REQUIRE(r.n_bets == 1);
    const auto& bet = r.bets[0];
    CHECK(bet.outcome == Outcome::HomeWin);
    CHECK(bet.odds == 1.57);
    CHECK(bet.bookmaker == "William Hill");
    CHECK(bet.won);
    CHECK(bet.profit == 28.5);
    CHECK_FALSE(bet.placed_at);
    CHECK_THAT(bet.p_cons, WithinAbs(1.0 / 1.44722222, 1e-8));
    CHECK(r.yield == 28.5 / 50.0);
    CHECK(r.accuracy == 1.0);
    CHECK(r.bankroll == std::vector<double>{28.5});
}

TEST_CASE("closing backtest with nothing qualifying")
{
    auto ds = make_dataset({{"G1", Outcome::Draw, {{"A", {2.0, 3.4, 3.6}}, {"B", {2.05, 3.3, 3.5}}, {"C", {1.95, 3.5, 3.7}}}}});
    auto r = run_closing_backtest(ds, {});
    CHECK(r.n_bets == 0);
    CHECK(r.yield == 0.0);
    CHECK(r.games_considered == 1);
}

TEST_CASE("closing backtest needs eligible games")
{
    auto unsettled = make_dataset({dashboard_game(std::nullopt)});
    CHECK_THROWS_AS(run_closing_backtest(unsettled, {}), Error);
    auto thin = make_dataset({{"G1", Outcome::HomeWin, {{"A", {2.0, 3.4, 3.6}}, {"B", {2.05, 3.3, 3.5}}}}});
    CHECK_THROWS_AS(run_closing_backtest(thin, {}), Error);
}

TEST_CASE("several qualifying outcomes pick the largest edge")
{
    // Home: mean 2.0 (p 0.5), top 2.5 -> edge 0.45*2.5-1 = 0.125.
    // Away: mean 3.0 (p 0.333), top 3.9 -> edge 0.2833*3.9-1 = 0.105.
    GameSpec g{"G1", Outcome::AwayWin, {{"A", {1.75, 3.0, 2.55}}, {"B", {1.75, 3.0, 2.55}}, {"C", {2.5, 3.0, 3.9}}}};
    auto r = run_closing_backtest(make_dataset({g}), {});
    REQUIRE(r.n_bets == 1);
    CHECK(r.bets[0].outcome == Outcome::HomeWin);
    CHECK_FALSE(r.bets[0].won);
    CHECK(r.bets[0].profit == -50.0);

    // Identical home and away markets tie on edge: home wins the tie.
    GameSpec tie{"G2", Outcome::AwayWin, {{"A", {1.75, 5.0, 1.75}}, {"B", {1.75, 5.0, 1.75}}, {"C", {2.5, 5.0, 2.5}}}};
    auto t = run_closing_backtest(make_dataset({tie}), {});
    REQUIRE(t.n_bets == 1);
    CHECK(t.bets[0].outcome == Outcome::HomeWin);
}

TEST_CASE("report identity and settlement")
{
    SyntheticMarketSpec spec;
    spec.mispricing_rate = 0.05;
    spec.mispricing_factor = 1.08;
    spec.n_bookmakers = 16;
    auto ds = generate_synthetic(spec, 4000);
    auto r = run_closing_backtest(ds, {});
    REQUIRE(r.n_bets > 50);
    CHECK_THAT(r.yield * r.total_staked, WithinRel(r.total_profit, 1e-9));
    CHECK(r.total_staked == 50.0 * static_cast<double>(r.n_bets));
    std::set<std::string> games;
    double profit = 0.0;
    for (const auto& b : r.bets) {
        CHECK(games.insert(b.game_id).second);
        CHECK(b.profit == (b.won ? round_cents(50.0 * (b.odds - 1.0)) : -50.0));
        profit += b.profit;
    }
    CHECK(r.bankroll.back() == profit);
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
}

TEST_CASE("summarize_bets statistics")
{
    std::vector<SimulatedBet> bets(3);
    double odds[] = {1.5, 2.0, 2.5};
    bool won[] = {true, false, true};
    for (int i = 0; i < 3; ++i) {
        bets[i].game_id = "G" + std::to_string(i);
        bets[i].odds = odds[i];
        bets[i].stake = 50;
        bets[i].won = won[i];
        bets[i].profit = settle_profit(50, odds[i], won[i]);
        bets[i].p_cons = 0.5;
    }
    auto r = summarize_bets(BacktestMode::Closing, bets, {}, CalibrationAlphas{});
    CHECK(r.n_won == 2);
    CHECK(r.total_profit == 25.0 - 50.0 + 75.0);
    CHECK(r.mean_odds == 2.0);
    CHECK_THAT(r.std_odds, WithinAbs(0.5, 1e-12));
    CHECK(r.bankroll == std::vector<double>{25.0, -25.0, 50.0});
    CHECK_THAT(*r.expected_accuracy, WithinAbs(0.5 - 0.034, 1e-12));
}

TEST_CASE("expected accuracy")
{
    SimulatedBet b;
    b.outcome = Outcome::HomeWin;
    b.p_cons = 1.0 / 2.0;
    std::vector<SimulatedBet> one{b};
    CHECK_THAT(*expected_accuracy(one, CalibrationAlphas{}), WithinAbs(0.466, 1e-12));
    CalibrationAlphas zero{0.0, 0.0, 0.0, {}};
    std::vector<SimulatedBet> many(4, b);
    many[1].p_cons = 0.3;
    many[2].outcome = Outcome::Draw;
    many[2].p_cons = 0.25;
    CHECK_THAT(*expected_accuracy(many, zero), WithinAbs((0.5 + 0.3 + 0.25 + 0.5) / 4.0, 1e-12));
    CHECK_FALSE(expected_accuracy(std::vector<SimulatedBet>{}, zero));
}

TEST_CASE("stream backtest respects the window")
{
    GameSpec g{"G1", Outcome::HomeWin, {}};
    std::vector<QuoteEvent> q{
        quote(hours{6}, "G1", "A", Outcome::HomeWin, 2.0),
        quote(hours{6}, "G1", "B", Outcome::HomeWin, 2.0),
        quote(hours{6} - Seconds{1}, "G1", "C", Outcome::HomeWin, 2.5), // qualifies, but outside the window
        quote(hours{4}, "G1", "C", Outcome::HomeWin, 2.5),              // same quote re-seen inside
    };
    auto r = run_timeseries_backtest(make_dataset({g}, q), {});
    REQUIRE(r.n_bets == 1);
    CHECK(*r.bets[0].placed_at == kKickoff - hours{4});
    CHECK(r.bets[0].odds == 2.5);
    CHECK(r.bets[0].profit == 75.0);
}

TEST_CASE("stream backtest window is inclusive at both ends")
{
    for (auto lead : {hours{5}, hours{1}}) {
        std::vector<QuoteEvent> q{quote(hours{7}, "G1", "A", Outcome::HomeWin, 2.0),
                                  quote(hours{7}, "G1", "B", Outcome::HomeWin, 2.0),
                                  quote(lead, "G1", "C", Outcome::HomeWin, 2.5)};
        auto r = run_timeseries_backtest(make_dataset({{"G1", Outcome::HomeWin, {}}}, q), {});
        CHECK(r.n_bets == 1);
    }
    std::vector<QuoteEvent> late{quote(hours{7}, "G1", "A", Outcome::HomeWin, 2.0),
                                 quote(hours{7}, "G1", "B", Outcome::HomeWin, 2.0),
                                 quote(minutes{59}, "G1", "C", Outcome::HomeWin, 2.5)};
    auto r = run_timeseries_backtest(make_dataset({{"G1", Outcome::HomeWin, {}}}, late), {});
    CHECK(r.n_bets == 0);
    REQUIRE(r.games_without_window_quotes.size() == 1);
    CHECK(r.games_without_window_quotes[0] == "G1");
}

TEST_CASE("stream backtest: first qualifying event freezes the game")
{
    std::vector<QuoteEvent> q{quote(hours{4}, "G1", "A", Outcome::HomeWin, 2.0),
                              quote(hours{4}, "G1", "B", Outcome::HomeWin, 2.0),
                              quote(hours{3}, "G1", "C", Outcome::HomeWin, 2.4),
                              quote(hours{2}, "G1", "C", Outcome::HomeWin, 3.0),
                              quote(hours{2}, "G1", "D", Outcome::AwayWin, 9.0)};
    auto r = run_timeseries_backtest(make_dataset({{"G1", Outcome::AwayWin, {}}}, q), {});
    REQUIRE(r.n_bets == 1);
    CHECK(r.bets[0].odds == 2.4);
    CHECK(*r.bets[0].placed_at == kKickoff - hours{3});
}

TEST_CASE("stream backtest: simultaneous qualifiers use edge then outcome order")
{
    // Both markets qualify from quotes seen before the window opens; the first
    // in-window event (a draw quote) evaluates them together.
    auto run = [](double home_top, double away_top) {
        std::vector<QuoteEvent> q;
        for (auto [book, h, a] : std::vector<std::tuple<std::string, double, double>>{
                 {"A", 1.75, 1.75}, {"B", 1.75, 1.75}, {"C", home_top, away_top}}) {
            q.push_back(quote(hours{6}, "G1", book, Outcome::HomeWin, h));
            q.push_back(quote(hours{6}, "G1", book, Outcome::AwayWin, a));
        }
        q.push_back(quote(hours{4}, "G1", "A", Outcome::Draw, 5.0));
        auto r = run_timeseries_backtest(make_dataset({{"G1", Outcome::HomeWin, {}}}, q), {});
        REQUIRE(r.n_bets == 1);
        CHECK(*r.bets[0].placed_at == kKickoff - hours{4});
        return r.bets[0];
    };
    CHECK(run(2.5, 2.6).outcome == Outcome::AwayWin);
    CHECK(run(2.6, 2.5).outcome == Outcome::HomeWin);
    auto tie = run(2.5, 2.5);
    CHECK(tie.outcome == Outcome::HomeWin);
    CHECK(tie.odds == 2.5);
}

TEST_CASE("stream backtest skips unsettled games and post-kickoff quotes")
{
    std::vector<QuoteEvent> q{quote(hours{3}, "G1", "A", Outcome::HomeWin, 2.0),
                              quote(hours{3}, "G1", "B", Outcome::HomeWin, 2.0),
                              quote(hours{3}, "G1", "C", Outcome::HomeWin, 2.5),
                              quote(-minutes{10}, "G2", "A", Outcome::HomeWin, 2.0),
                              quote(-minutes{10}, "G2", "B", Outcome::HomeWin, 2.0),
                              quote(-minutes{10}, "G2", "C", Outcome::HomeWin, 2.5)};
    auto r = run_timeseries_backtest(
        make_dataset({{"G1", std::nullopt, {}}, {"G2", Outcome::HomeWin, {}}}, q), {});
    CHECK(r.n_bets == 0);
    CHECK(r.games_considered == 1);
}

TEST_CASE("stream backtest needs quotes")
{
    CHECK_THROWS_AS(run_timeseries_backtest(make_dataset({dashboard_game(Outcome::HomeWin)}), {}), Error);
}

TEST_CASE("stream backtest has no lookahead")
{
    SyntheticMarketSpec spec;
    spec.mispricing_rate = 0.05;
    spec.mispricing_factor = 1.08;
    spec.n_bookmakers = 12;
    spec.n_updates = 4;
    auto ds = generate_synthetic(spec, 600);
    auto base = run_timeseries_backtest(ds, {});
    REQUIRE(base.n_bets > 10);
    // Rewrite every quote that comes after a game's bet; decisions must not move.
    std::map<std::string, Timestamp> placed;
    for (const auto& b : base.bets)
        placed[b.game_id] = *b.placed_at;
    std::vector<QuoteEvent> altered(ds.quotes().begin(), ds.quotes().end());
    for (auto& q : altered) {
        auto it = placed.find(q.game_id);
        if (it != placed.end() && q.observed_at > it->second)
            q.odds = 1.5;
    }
    auto shifted = run_timeseries_backtest(ds.with_quotes(altered), {});
    REQUIRE(shifted.n_bets == base.n_bets);
    for (std::size_t i = 0; i < base.bets.size(); ++i) {
        CHECK(shifted.bets[i].game_id == base.bets[i].game_id);
        CHECK(shifted.bets[i].odds == base.bets[i].odds);
        CHECK(shifted.bets[i].placed_at == base.bets[i].placed_at);
    }
}

TEST_CASE("stream replay profits from planted mispricing")
{
    SyntheticMarketSpec spec;
    spec.mispricing_rate = 0.05;
    spec.mispricing_factor = 1.08;
    spec.n_updates = 3;
    spec.n_bookmakers = 32;
    auto ds = generate_synthetic(spec, 6000);
    auto r = run_timeseries_backtest(ds, {});
    CHECK(r.n_bets > 300);
    CHECK(r.yield > 0.0);
}

TEST_CASE("alpha sweep")
{
    SyntheticMarketSpec spec;
    spec.mispricing_rate = 0.05;
    spec.mispricing_factor = 1.08;
    spec.n_bookmakers = 16;
    auto ds = generate_synthetic(spec, 3000);
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i)
        grid.push_back(i / 100.0);
    auto rows = sweep_alpha(ds, {}, grid);
    REQUIRE(rows.size() == 10);
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].n_bets <= rows[i - 1].n_bets);
    auto none = sweep_alpha(ds, {}, {0.99});
    CHECK(none[0].n_bets == 0);
    CHECK_THROWS_AS(sweep_alpha(ds, {}, {}), Error);
    CHECK_THROWS_AS(sweep_alpha(ds, {}, {1.5}), Error);
}

TEST_CASE("staleness simulation")
{
    SyntheticMarketSpec spec;
    spec.mispricing_rate = 0.05;
    spec.mispricing_factor = 1.08;
    spec.n_bookmakers = 16;
    auto ds = generate_synthetic(spec, 3000);
    auto base = run_closing_backtest(ds, {});

    auto zero = simulate_staleness(ds, {}, 0.0, 3, 9);
    for (std::size_t s = 0; s < 3; ++s) {
        CHECK(zero.yields[s] == base.yield);
        CHECK(zero.n_bets[s] == base.n_bets);
    }
    CHECK(zero.std_yield == 0.0);

    auto thirty = simulate_staleness(ds, {}, 0.3, 5, 9);
    for (auto n : thirty.n_bets)
        CHECK(n < base.n_bets);
    auto again = simulate_staleness(ds, {}, 0.3, 5, 9);
    CHECK(again.yields == thirty.yields);

    auto nearly_all = simulate_staleness(ds, {}, 0.999, 3, 9);
    CHECK(nearly_all.high_variance);
    CHECK_THROWS_AS(simulate_staleness(ds, {}, 1.0, 3, 9), Error);
    CHECK_THROWS_AS(simulate_staleness(ds, {}, 0.3, 0, 9), Error);
}

TEST_CASE("report serialization is stable")
{
    auto ds = make_dataset({dashboard_game(Outcome::HomeWin)});
    auto r = run_closing_backtest(ds, {});
    auto j = to_json(r);
    CHECK(j["n_bets"] == 1);
    CHECK(j["bets"][0]["bookmaker"] == "William Hill");
    CHECK(j.dump() == to_json(run_closing_backtest(ds, {})).dump());
    std::ostringstream csv_out;
    write_bankroll_csv(r, csv_out);
    CHECK(csv_out.str() == "bet_index,game_id,placed_at,outcome,odds,profit,cumulative_profit\n1,D1,,1,1.57,28.5,28.5\n");
}
