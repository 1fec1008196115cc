#pragma once

// Random-bet bootstrap: how would a bettor do who picks games at random (with
// replacement), backs an outcome drawn from fixed priors and always takes the
// best price on offer? The strategy's yield is scored against that
// distribution.

#include "valuebet/backtest.hpp"
#include "valuebet/market_data.hpp"
#include "valuebet/rng.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace valuebet {

struct BootstrapConfig {
    std::size_t n_reps = 2000;
    std::size_t sample_size = 0; ///< matched to the strategy's bet count
    std::array<double, 3> outcome_priors{0.595, 0.021, 0.384};
    double stake = 50.0;
    std::uint64_t seed = 1;

    void validate() const
    {
        if (n_reps < 1)
            throw Error(ErrorCode::InvalidConfig, "n_reps must be at least 1");
        if (sample_size < 1)
            throw Error(ErrorCode::InvalidConfig, "sample_size must be at least 1");
        double sum = 0.0;
        for (double p : outcome_priors) {
            if (!(p >= 0.0))
                throw Error(ErrorCode::InvalidConfig, "priors must be non-negative");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw Error(ErrorCode::InvalidConfig, "priors must sum to 1");
        if (!(stake > 0.0))
            throw Error(ErrorCode::InvalidConfig, "stake must be positive");
    }
};

struct BootstrapDistribution {
    std::vector<double> returns;    ///< per-rep yield
    std::vector<double> accuracies; ///< per-rep hit rate
    std::vector<double> mean_odds;  ///< per-rep mean odds taken
    double mean = 0.0;
    double std = 0.0; ///< sample standard deviation; 0 with one rep
    double mean_accuracy = 0.0;
    std::optional<double> strategy_return;
    std::optional<double> z_score;   ///< (strategy - mean) / std, when std > 0
    std::optional<double> empirical_p; ///< fraction of reps >= strategy
    std::optional<double> z_tail_p;  ///< one-sided normal tail implied by z
    std::size_t eligible_games = 0;
};

/// (reps with return >= observed) / n_reps. One-sided; ties count against
/// significance.
inline double empirical_p_value(std::span<const double> returns, double observed)
{
    if (returns.empty())
        throw Error(ErrorCode::InvalidConfig, "empty distribution");
    std::size_t at_or_above = 0;
    for (double r : returns)
        if (r >= observed)
            ++at_or_above;
    return static_cast<double>(at_or_above) / static_cast<double>(returns.size());
}

inline double normal_upper_tail(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

/// Fills the strategy-dependent fields of an existing distribution.
inline void score_strategy(BootstrapDistribution& d, double strategy_return)
{
    d.strategy_return = strategy_return;
    d.empirical_p = empirical_p_value(d.returns, strategy_return);
    if (d.std > 0.0) {
        d.z_score = (strategy_return - d.mean) / d.std;
        d.z_tail_p = normal_upper_tail(*d.z_score);
    } else {
        d.z_score.reset();
        d.z_tail_p.reset();
    }
}

/// Rep r draws from stream (seed, r), so reps are order-independent and may
/// run concurrently without changing results. Eligible games are settled and
/// priced for all three outcomes.
inline BootstrapDistribution run_bootstrap(const Dataset& dataset, const BootstrapConfig& config,
                                           std::optional<double> strategy_return = std::nullopt)
{
    config.validate();
    struct Eligible {
        std::array<double, 3> max_odds;
        Outcome result;
    };
    std::vector<Eligible> games;
    for (const auto& g : dataset.games()) {
        if (!g.settled())
            continue;
        std::array<double, 3> best{};
        for (const auto& line : g.lines)
            for (std::size_t k = 0; k < 3; ++k)
                best[k] = std::max(best[k], line.odds[k]);
        if (best[0] > 0.0 && best[1] > 0.0 && best[2] > 0.0)
            games.push_back({best, *g.result});
    }
    if (games.empty())
        throw Error(ErrorCode::NoEligibleGames, "no settled game is priced for all three outcomes");

    BootstrapDistribution d;
    d.eligible_games = games.size();
    d.returns.resize(config.n_reps);
    d.accuracies.resize(config.n_reps);
    d.mean_odds.resize(config.n_reps);
    const double staked = config.stake * static_cast<double>(config.sample_size);
    for (std::size_t rep = 0; rep < config.n_reps; ++rep) {
        rng::Stream rs(config.seed, rep, rng::Tag::Bootstrap);
        double profit = 0.0, odds_sum = 0.0;
        std::size_t wins = 0;
        for (std::size_t i = 0; i < config.sample_size; ++i) {
            const auto& g = games[rs.index(games.size())];
            const auto k = rs.categorical(config.outcome_priors);
            const double odds = g.max_odds[k];
            const bool won = index_of(g.result) == k;
            profit += settle_profit(config.stake, odds, won);
            odds_sum += odds;
            wins += won ? 1 : 0;
        }
        d.returns[rep] = profit / staked;
        d.accuracies[rep] = static_cast<double>(wins) / static_cast<double>(config.sample_size);
        d.mean_odds[rep] = odds_sum / static_cast<double>(config.sample_size);
    }
    const double n = static_cast<double>(config.n_reps);
    double sum = 0.0, acc = 0.0;
    for (std::size_t r = 0; r < config.n_reps; ++r) {
        sum += d.returns[r];
        acc += d.accuracies[r];
    }
    d.mean = sum / n;
    d.mean_accuracy = acc / n;
    if (config.n_reps > 1) {
        double ss = 0.0;
        for (double r : d.returns)
            ss += (r - d.mean) * (r - d.mean);
        d.std = std::sqrt(ss / (n - 1.0));
    }
    if (strategy_return)
        score_strategy(d, *strategy_return);
    return d;
}

/// Bootstrap matched to a strategy report: same bet count and stake.
inline BootstrapDistribution bootstrap_against(const Dataset& dataset, const BacktestReport& strategy,
                                               BootstrapConfig config)
{
    config.sample_size = strategy.n_bets;
    config.stake = strategy.config.stake;
    return run_bootstrap(dataset, config, strategy.yield);
}

} // namespace valuebet
