#pragma once

// Cross-check of the live scanner against the stream backtester: both consume
// the same quote stream and must place the same bets.

#include "valuebet/backtest.hpp"
#include "valuebet/scanner.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace valuebet {

/// Feeds every quote through a fresh scanner, ticking at each event time and
/// auto-placing at full stake. Unsettled games are left out of the scanner's
/// side because the backtester cannot settle them.
inline ReplayComparison replay_equivalence(const Dataset& dataset, const StrategyConfig& config)
{
    Scanner scanner(config);
    scanner.load_games(dataset);
    for (const auto& ev : dataset.quotes()) {
        scanner.on_quote(ev);
        scanner.scan_tick(ev.observed_at);
        scanner.auto_place(ev.game_id, ev.observed_at);
    }

    ReplayComparison out;
    for (const auto& e : scanner.ledger()) {
        auto g = dataset.find(e.game_id);
        if (g && g->settled())
            out.scanner_bets.push_back({e.game_id, e.outcome, e.odds, e.placed_at});
    }
    auto report = run_timeseries_backtest(dataset, config);
    for (const auto& b : report.bets)
        out.backtest_bets.push_back({b.game_id, b.outcome, b.odds, *b.placed_at});

    auto by_game = [](const ReplayBet& a, const ReplayBet& b) { return a.game_id < b.game_id; };
    std::sort(out.scanner_bets.begin(), out.scanner_bets.end(), by_game);
    std::sort(out.backtest_bets.begin(), out.backtest_bets.end(), by_game);

    auto describe = [](const ReplayBet& b) {
        return b.game_id + " " + std::string(outcome_code(b.outcome)) + " @" + csv::format_double(b.odds) + " " +
               format_timestamp(b.placed_at);
    };
    std::size_t i = 0, j = 0;
    while (i < out.scanner_bets.size() || j < out.backtest_bets.size()) {
        if (j == out.backtest_bets.size() ||
            (i < out.scanner_bets.size() && out.scanner_bets[i].game_id < out.backtest_bets[j].game_id)) {
            out.diffs.push_back("scanner only: " + describe(out.scanner_bets[i++]));
        } else if (i == out.scanner_bets.size() || out.backtest_bets[j].game_id < out.scanner_bets[i].game_id) {
            out.diffs.push_back("backtest only: " + describe(out.backtest_bets[j++]));
        } else {
            if (!(out.scanner_bets[i] == out.backtest_bets[j]))
                out.diffs.push_back("mismatch: scanner " + describe(out.scanner_bets[i]) + " vs backtest " +
                                    describe(out.backtest_bets[j]));
            ++i;
            ++j;
        }
    }
    return out;
}

} // namespace valuebet
