#pragma once

// Strategy simulation over closing odds and over replayed quote streams.
// Fixed stake, unbounded bankroll, at most one bet per game.

#include "valuebet/calibration.hpp"
#include "valuebet/core_model.hpp"
#include "valuebet/market_data.hpp"
#include "valuebet/rng.hpp"

#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace valuebet {

struct SimulatedBet {
    std::string game_id;
    Outcome outcome = Outcome::HomeWin;
    double odds = 0.0;
    std::string bookmaker;
    double stake = 0.0;
    std::optional<Timestamp> placed_at; ///< nullopt for closing-odds bets
    bool won = false;
    double profit = 0.0;
    double p_cons = 0.0;
};

enum class BacktestMode { Closing, Stream };

constexpr std::string_view to_string(BacktestMode m) noexcept
{
    return m == BacktestMode::Closing ? "closing" : "stream";
}

struct BacktestReport {
    BacktestMode mode = BacktestMode::Closing;
    std::size_t n_bets = 0;
    std::size_t n_won = 0;
    double accuracy = 0.0;
    double total_profit = 0.0;
    double total_staked = 0.0;
    double yield = 0.0; ///< total_profit / total_staked; 0 with no bets
    double mean_odds = 0.0;
    double std_odds = 0.0;
    std::optional<double> expected_accuracy;
    std::array<std::size_t, 3> outcome_counts{};
    std::vector<SimulatedBet> bets;
    std::vector<double> bankroll; ///< cumulative profit after each bet
    StrategyConfig config;
    std::optional<std::uint64_t> seed;
    std::size_t games_considered = 0;
    std::vector<std::string> games_without_window_quotes; ///< stream mode only
};

/// Mean over bets of (p_cons - alpha_outcome): the accuracy the consensus
/// predicts for the selected bets. nullopt for an empty bet list.
inline std::optional<double> expected_accuracy(std::span<const SimulatedBet> bets, const CalibrationAlphas& alphas)
{
    if (bets.empty())
        return std::nullopt;
    double sum = 0.0;
    for (const auto& b : bets)
        sum += b.p_cons - alphas.of(b.outcome);
    return sum / static_cast<double>(bets.size());
}

inline BacktestReport summarize_bets(BacktestMode mode, std::vector<SimulatedBet> bets, const StrategyConfig& config,
                                     const std::optional<CalibrationAlphas>& alphas = std::nullopt)
{
    BacktestReport r;
    r.mode = mode;
    r.config = config;
    r.n_bets = bets.size();
    double odds_sum = 0.0;
    r.bankroll.reserve(bets.size());
    for (const auto& b : bets) {
        r.n_won += b.won ? 1 : 0;
        r.total_profit += b.profit;
        r.total_staked += b.stake;
        odds_sum += b.odds;
        ++r.outcome_counts[index_of(b.outcome)];
        r.bankroll.push_back(r.total_profit);
    }
    if (r.n_bets > 0) {
        const double n = static_cast<double>(r.n_bets);
        r.accuracy = static_cast<double>(r.n_won) / n;
        r.yield = r.total_profit / r.total_staked;
        r.mean_odds = odds_sum / n;
        if (r.n_bets > 1) {
            double ss = 0.0;
            for (const auto& b : bets)
                ss += (b.odds - r.mean_odds) * (b.odds - r.mean_odds);
            r.std_odds = std::sqrt(ss / (n - 1.0));
        }
    }
    if (alphas)
        r.expected_accuracy = expected_accuracy(bets, *alphas);
    r.bets = std::move(bets);
    return r;
}

/// Return false to discard a would-be bet; its game then receives no bet.
using BetFilter = std::function<bool(const SimulatedBet&)>;

namespace detail {

struct Candidate {
    Outcome outcome = Outcome::HomeWin;
    double p_cons = 0.0;
    double odds = 0.0;
    std::string_view bookmaker;
    double edge = 0.0;
};

/// Among qualifying outcomes pick the highest edge; ties keep the earlier
/// outcome in Home, Draw, Away order.
inline std::optional<Candidate> best_candidate(const std::array<std::vector<Price>, 3>& prices,
                                               const StrategyConfig& config)
{
    std::optional<Candidate> best;
    for (std::size_t k = 0; k < 3; ++k) {
        const auto& p = prices[k];
        if (p.size() < config.min_quotes || p.empty())
            continue;
        auto s = summarize_prices(p);
        const double p_cons = 1.0 / s.mean_odds;
        auto gate = evaluate_gate(p_cons, s.max_odds, config.alpha);
        if (!gate.qualifies)
            continue;
        if (!best || gate.edge > best->edge)
            best = Candidate{kOutcomes[k], p_cons, s.max_odds, p[s.max_index].bookmaker, gate.edge};
    }
    return best;
}

inline SimulatedBet make_bet(const GameRecord& g, const Candidate& c, double stake, std::optional<Timestamp> at)
{
    SimulatedBet b;
    b.game_id = g.game_id;
    b.outcome = c.outcome;
    b.odds = c.odds;
    b.bookmaker = std::string(c.bookmaker);
    b.stake = stake;
    b.placed_at = at;
    b.won = g.result && *g.result == c.outcome;
    b.profit = settle_profit(stake, c.odds, b.won);
    b.p_cons = c.p_cons;
    return b;
}

} // namespace detail

/// Applies the gate to each settled game's closing odds.
inline BacktestReport run_closing_backtest(const Dataset& dataset, const StrategyConfig& config,
                                           const BetFilter& filter = {},
                                           const std::optional<CalibrationAlphas>& alphas = std::nullopt)
{
    config.validate();
    std::vector<SimulatedBet> bets;
    std::size_t considered = 0;
    std::array<std::vector<Price>, 3> prices;
    for (const auto& g : dataset.games()) {
        if (!g.settled())
            continue;
        bool eligible = false;
        for (std::size_t k = 0; k < 3; ++k) {
            prices[k].clear();
            for (const auto& line : g.lines)
                if (auto v = line.get(kOutcomes[k]))
                    prices[k].push_back({dataset.bookmaker_name(line.bookmaker), *v});
            eligible = eligible || prices[k].size() >= config.min_quotes;
        }
        if (!eligible)
            continue;
        ++considered;
        auto best = detail::best_candidate(prices, config);
        if (!best)
            continue;
        auto bet = detail::make_bet(g, *best, config.stake, std::nullopt);
        if (filter && !filter(bet))
            continue;
        bets.push_back(std::move(bet));
    }
    if (considered == 0)
        throw Error(ErrorCode::NoEligibleGames,
                    "no settled game has " + std::to_string(config.min_quotes) + " quotes for any outcome");
    auto r = summarize_bets(BacktestMode::Closing, std::move(bets), config, alphas);
    r.games_considered = considered;
    return r;
}

/// Replays the quote stream in time order, keeping each bookmaker's latest
/// price. On every event inside [kickoff - window_open, kickoff - window_close]
/// the gate is re-evaluated for the event's game; the first qualifying event
/// places the bet at the current best odds and freezes the game. Only
/// information observed up to the event is used.
inline BacktestReport run_timeseries_backtest(const Dataset& dataset, const StrategyConfig& config,
                                              const BetFilter& filter = {},
                                              const std::optional<CalibrationAlphas>& alphas = std::nullopt)
{
    config.validate();
    if (!dataset.has_quotes())
        throw Error(ErrorCode::NoEligibleGames, "dataset carries no quote stream");

    struct GameState {
        std::array<std::vector<Price>, 3> latest;
        bool frozen = false;
        bool saw_window_quote = false;
        bool saw_quote = false;
    };
    const auto games = dataset.games();
    std::vector<GameState> state(games.size());
    std::vector<SimulatedBet> bets;

    for (const auto& ev : dataset.quotes()) {
        const auto gi = *dataset.game_index(ev.game_id);
        auto& st = state[gi];
        st.saw_quote = true;
        auto& book = st.latest[index_of(ev.outcome)];
        auto it = std::find_if(book.begin(), book.end(),
                               [&](const Price& p) { return p.bookmaker == ev.bookmaker_id; });
        if (it != book.end())
            it->odds = ev.odds;
        else
            book.push_back({ev.bookmaker_id, ev.odds});

        const auto& g = games[gi];
        if (st.frozen || !g.settled() || !config.in_window(ev.observed_at, g.kickoff))
            continue;
        st.saw_window_quote = true;
        auto best = detail::best_candidate(st.latest, config);
        if (!best)
            continue;
        st.frozen = true;
        auto bet = detail::make_bet(g, *best, config.stake, ev.observed_at);
        if (filter && !filter(bet))
            continue;
        bets.push_back(std::move(bet));
    }

    auto r = summarize_bets(BacktestMode::Stream, std::move(bets), config, alphas);
    for (std::size_t i = 0; i < games.size(); ++i) {
        if (!games[i].settled() || !state[i].saw_quote)
            continue;
        ++r.games_considered;
        if (!state[i].saw_window_quote)
            r.games_without_window_quotes.push_back(games[i].game_id);
    }
    return r;
}

inline BacktestReport run_backtest(BacktestMode mode, const Dataset& dataset, const StrategyConfig& config,
                                   const BetFilter& filter = {},
                                   const std::optional<CalibrationAlphas>& alphas = std::nullopt)
{
    return mode == BacktestMode::Closing ? run_closing_backtest(dataset, config, filter, alphas)
                                         : run_timeseries_backtest(dataset, config, filter, alphas);
}

struct AlphaSweepRow {
    double alpha = 0.0;
    std::size_t n_bets = 0;
    double yield = 0.0;
    double total_profit = 0.0;
    double accuracy = 0.0;
};

inline std::vector<AlphaSweepRow> sweep_alpha(const Dataset& dataset, StrategyConfig config,
                                              const std::vector<double>& alphas,
                                              BacktestMode mode = BacktestMode::Closing)
{
    if (alphas.empty())
        throw Error(ErrorCode::InvalidConfig, "alpha grid is empty");
    std::vector<AlphaSweepRow> rows;
    for (double a : alphas) {
        if (!(a > 0.0 && a < 1.0))
            throw Error(ErrorCode::InvalidConfig, "alpha " + std::to_string(a) + " outside (0,1)");
        config.alpha = a;
        auto r = run_backtest(mode, dataset, config);
        rows.push_back({a, r.n_bets, r.yield, r.total_profit, r.accuracy});
    }
    return rows;
}

struct StalenessResult {
    double drop_rate = 0.0;
    double baseline_yield = 0.0;
    std::size_t baseline_bets = 0;
    std::vector<double> yields;      ///< one per seed
    std::vector<std::size_t> n_bets; ///< one per seed
    double mean_yield = 0.0;
    double std_yield = 0.0;
    bool high_variance = false; ///< some run kept fewer than kMinStableBets bets
};

inline constexpr std::size_t kMinStableBets = 30;

/// Re-runs the backtest n_seeds times, discarding each would-be bet
/// independently with probability drop_rate (seed index s draws from its own
/// stream, so runs are reproducible and order-independent).
inline StalenessResult simulate_staleness(const Dataset& dataset, const StrategyConfig& config, double drop_rate,
                                          std::size_t n_seeds, std::uint64_t seed,
                                          BacktestMode mode = BacktestMode::Closing)
{
    if (!(drop_rate >= 0.0 && drop_rate < 1.0))
        throw Error(ErrorCode::InvalidConfig, "drop_rate must lie in [0,1)");
    if (n_seeds == 0)
        throw Error(ErrorCode::InvalidConfig, "n_seeds must be positive");
    StalenessResult out;
    out.drop_rate = drop_rate;
    auto base = run_backtest(mode, dataset, config);
    out.baseline_yield = base.yield;
    out.baseline_bets = base.n_bets;
    for (std::size_t s = 0; s < n_seeds; ++s) {
        rng::Stream rs(seed, s, rng::Tag::Staleness);
        auto r = run_backtest(mode, dataset, config, [&](const SimulatedBet&) { return !rs.bernoulli(drop_rate); });
        out.yields.push_back(r.yield);
        out.n_bets.push_back(r.n_bets);
        if (r.n_bets < kMinStableBets)
            out.high_variance = true;
    }
    double sum = 0.0;
    for (double y : out.yields)
        sum += y;
    out.mean_yield = sum / static_cast<double>(n_seeds);
    if (n_seeds > 1) {
        double ss = 0.0;
        for (double y : out.yields)
            ss += (y - out.mean_yield) * (y - out.mean_yield);
        out.std_yield = std::sqrt(ss / static_cast<double>(n_seeds - 1));
    }
    return out;
}

} // namespace valuebet
