#pragma once

// JSON and CSV forms of analysis reports. Field order is fixed so the same
// report always serializes to the same bytes.

#include "valuebet/backtest.hpp"
#include "valuebet/baseline.hpp"
#include "valuebet/calibration.hpp"
#include "valuebet/replay.hpp"
#include "valuebet/synthetic.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>

namespace valuebet {

using ojson = nlohmann::ordered_json;

namespace detail {

inline ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

/// NaN and infinities become null (JSON has no spelling for them).
inline ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

} // namespace detail

inline ojson to_json(const StrategyConfig& c)
{
    return {{"alpha", c.alpha},
            {"stake", c.stake},
            {"min_quotes", c.min_quotes},
            {"window_open_s", c.window_open.count()},
            {"window_close_s", c.window_close.count()}};
}

inline ojson to_json(const SimulatedBet& b)
{
    ojson j;
    j["game_id"] = b.game_id;
    j["outcome"] = std::string(outcome_code(b.outcome));
    j["odds"] = b.odds;
    j["bookmaker"] = b.bookmaker;
    j["stake"] = b.stake;
    j["placed_at"] = b.placed_at ? ojson(format_timestamp(*b.placed_at)) : ojson(nullptr);
    j["won"] = b.won;
    j["profit"] = b.profit;
    j["p_cons"] = b.p_cons;
    return j;
}

inline ojson to_json(const BacktestReport& r, bool include_bets = true)
{
    ojson j;
    j["mode"] = std::string(to_string(r.mode));
    j["config"] = to_json(r.config);
    j["seed"] = r.seed ? ojson(*r.seed) : ojson(nullptr);
    j["n_bets"] = r.n_bets;
    j["n_won"] = r.n_won;
    j["accuracy"] = r.accuracy;
    j["expected_accuracy"] = detail::opt(r.expected_accuracy);
    j["total_profit"] = r.total_profit;
    j["total_staked"] = r.total_staked;
    j["yield"] = r.yield;
    j["mean_odds"] = r.mean_odds;
    j["std_odds"] = r.std_odds;
    j["outcome_counts"] = {{"1", r.outcome_counts[0]}, {"X", r.outcome_counts[1]}, {"2", r.outcome_counts[2]}};
    j["games_considered"] = r.games_considered;
    j["games_without_window_quotes"] = r.games_without_window_quotes;
    if (include_bets) {
        ojson bets = ojson::array();
        for (const auto& b : r.bets)
            bets.push_back(to_json(b));
        j["bets"] = std::move(bets);
    }
    return j;
}

inline ojson to_json(const CalibrationBin& b)
{
    return {{"lower", b.lower},
            {"upper", b.upper},
            {"mean_p_cons", b.mean_p_cons},
            {"empirical_rate", b.empirical_rate},
            {"n_games", b.n_games},
            {"included", b.included}};
}

inline ojson to_json(const RegressionFit& f)
{
    return {{"outcome", std::string(outcome_code(f.outcome))},
            {"slope", f.slope},
            {"intercept", f.intercept},
            {"r_squared", f.r_squared},
            {"n_bins", f.n_bins}};
}

inline ojson to_json(const CalibrationAlphas& a)
{
    return {{"alpha_home", a.alpha_home},
            {"alpha_draw", a.alpha_draw},
            {"alpha_away", a.alpha_away},
            {"warnings", a.warnings}};
}

inline ojson to_json(const CalibrationReport& r)
{
    ojson j;
    ojson outcomes = ojson::array();
    for (std::size_t k = 0; k < 3; ++k) {
        ojson bins = ojson::array();
        for (const auto& b : r.binned[k].bins)
            bins.push_back(to_json(b));
        outcomes.push_back({{"outcome", std::string(outcome_code(kOutcomes[k]))},
                            {"eligible_games", r.binned[k].eligible_games},
                            {"fit", to_json(r.fits[k])},
                            {"bins", std::move(bins)}});
    }
    j["outcomes"] = std::move(outcomes);
    j["alphas"] = to_json(r.alphas);
    return j;
}

inline ojson to_json(const BootstrapDistribution& d, bool include_reps = false)
{
    ojson j;
    j["n_reps"] = d.returns.size();
    j["eligible_games"] = d.eligible_games;
    j["mean"] = d.mean;
    j["std"] = d.std;
    j["mean_accuracy"] = d.mean_accuracy;
    j["strategy_return"] = detail::opt(d.strategy_return);
    j["z_score"] = detail::opt(d.z_score);
    j["empirical_p"] = detail::opt(d.empirical_p);
    j["z_tail_p"] = detail::opt(d.z_tail_p);
    if (include_reps) {
        j["returns"] = d.returns;
        j["accuracies"] = d.accuracies;
        j["mean_odds"] = d.mean_odds;
    }
    return j;
}

inline ojson to_json(const StalenessResult& s)
{
    return {{"drop_rate", s.drop_rate},
            {"baseline_yield", s.baseline_yield},
            {"baseline_bets", s.baseline_bets},
            {"mean_yield", s.mean_yield},
            {"std_yield", s.std_yield},
            {"yield_change", s.mean_yield - s.baseline_yield},
            {"high_variance", s.high_variance},
            {"yields", s.yields},
            {"n_bets", s.n_bets}};
}

inline ojson to_json(const std::vector<AlphaSweepRow>& rows)
{
    ojson out = ojson::array();
    for (const auto& r : rows)
        out.push_back({{"alpha", r.alpha},
                       {"n_bets", r.n_bets},
                       {"yield", r.yield},
                       {"total_profit", r.total_profit},
                       {"accuracy", r.accuracy}});
    return out;
}

inline ojson to_json(const ReplayComparison& c)
{
    auto bets = [](const std::vector<ReplayBet>& v) {
        ojson out = ojson::array();
        for (const auto& b : v)
            out.push_back({{"game_id", b.game_id},
                           {"outcome", std::string(outcome_code(b.outcome))},
                           {"odds", b.odds},
                           {"placed_at", format_timestamp(b.placed_at)}});
        return out;
    };
    return {{"equivalent", c.equivalent()},
            {"scanner_bets", c.scanner_bets.size()},
            {"backtest_bets", c.backtest_bets.size()},
            {"diffs", c.diffs},
            {"bets", bets(c.backtest_bets)}};
}

inline ojson to_json(const ParseReport& p)
{
    return {{"rows_read", p.rows_read},
            {"rows_dropped", p.rows_dropped},
            {"duplicate_quotes", p.duplicate_quotes},
            {"orphan_quotes", p.orphan_quotes},
            {"drop_reasons", p.drop_reasons}};
}

// --- plot-ready CSV ----------------------------------------------------------

inline void write_bankroll_csv(const BacktestReport& r, std::ostream& out)
{
    out << "bet_index,game_id,placed_at,outcome,odds,profit,cumulative_profit\n";
    for (std::size_t i = 0; i < r.bets.size(); ++i) {
        const auto& b = r.bets[i];
        out << i + 1 << ',' << csv::escape(b.game_id) << ','
            << (b.placed_at ? format_timestamp(*b.placed_at) : std::string()) << ',' << outcome_code(b.outcome) << ','
            << csv::format_double(b.odds) << ',' << csv::format_double(b.profit) << ','
            << csv::format_double(r.bankroll[i]) << '\n';
    }
}

inline void write_calibration_csv(const CalibrationReport& r, std::ostream& out)
{
    out << "outcome,lower,upper,mean_p_cons,empirical_rate,n_games,included\n";
    for (std::size_t k = 0; k < 3; ++k)
        for (const auto& b : r.binned[k].bins)
            out << outcome_code(kOutcomes[k]) << ',' << csv::format_double(b.lower) << ','
                << csv::format_double(b.upper) << ',' << csv::format_double(b.mean_p_cons) << ','
                << csv::format_double(b.empirical_rate) << ',' << b.n_games << ',' << (b.included ? 1 : 0) << '\n';
}

/// Equal-width histogram of bootstrap returns over [min, max].
inline void write_histogram_csv(const BootstrapDistribution& d, std::size_t n_bins, std::ostream& out)
{
    out << "bin_lower,bin_upper,count\n";
    if (d.returns.empty() || n_bins == 0)
        return;
    auto [lo_it, hi_it] = std::minmax_element(d.returns.begin(), d.returns.end());
    double lo = *lo_it, hi = *hi_it;
    if (hi == lo)
        hi = lo + 1e-9;
    const double width = (hi - lo) / static_cast<double>(n_bins);
    std::vector<std::size_t> counts(n_bins, 0);
    for (double r : d.returns) {
        auto b = static_cast<std::size_t>((r - lo) / width);
        ++counts[std::min(b, n_bins - 1)];
    }
    for (std::size_t b = 0; b < n_bins; ++b)
        out << csv::format_double(lo + width * static_cast<double>(b)) << ','
            << csv::format_double(lo + width * static_cast<double>(b + 1)) << ',' << counts[b] << '\n';
}

} // namespace valuebet
