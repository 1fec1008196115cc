#pragma once

// Probability and payoff algebra for 1X2 football markets quoted in decimal
// (European) odds: consensus probability, fair odds, expected payoff and the
// value-bet gate  max(odds) > 1 / (p_cons - alpha).

#include "valuebet/error.hpp"
#include "valuebet/time.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace valuebet {

enum class Outcome : std::uint8_t { HomeWin = 0, Draw = 1, AwayWin = 2 };

inline constexpr std::array<Outcome, 3> kOutcomes{Outcome::HomeWin, Outcome::Draw, Outcome::AwayWin};

constexpr std::size_t index_of(Outcome o) noexcept { return static_cast<std::size_t>(o); }

/// "1" / "X" / "2", the dashboard notation.
constexpr std::string_view outcome_code(Outcome o) noexcept
{
    switch (o) {
    case Outcome::HomeWin: return "1";
    case Outcome::Draw: return "X";
    case Outcome::AwayWin: return "2";
    }
    return "?";
}

constexpr std::string_view outcome_name(Outcome o) noexcept
{
    switch (o) {
    case Outcome::HomeWin: return "home";
    case Outcome::Draw: return "draw";
    case Outcome::AwayWin: return "away";
    }
    return "?";
}

inline std::optional<Outcome> parse_outcome_code(std::string_view s) noexcept
{
    if (s == "1")
        return Outcome::HomeWin;
    if (s == "X" || s == "x")
        return Outcome::Draw;
    if (s == "2")
        return Outcome::AwayWin;
    return std::nullopt;
}

/// Decimal odds must exceed 1.0; exactly 1.0 pays nothing and is rejected too.
constexpr bool valid_odds(double odds) noexcept
{
    return odds > 1.0 && odds < std::numeric_limits<double>::infinity();
}

struct OddsQuote {
    std::string bookmaker_id;
    Outcome outcome = Outcome::HomeWin;
    double odds = 0.0;
    Timestamp observed_at{};
};

/// The set of bookmaker quotes for one outcome of one game. One quote per
/// bookmaker: a later observation replaces an earlier one.
class OddsSet {
public:
    OddsSet(std::string game_id, Outcome outcome) : game_id_(std::move(game_id)), outcome_(outcome) {}

    void add(OddsQuote quote)
    {
        if (quote.outcome != outcome_)
            throw Error(ErrorCode::InvalidQuote, "quote outcome does not match odds set");
        if (!valid_odds(quote.odds))
            throw Error(ErrorCode::InvalidQuote, "odds must be > 1.0, got " + std::to_string(quote.odds));
        for (auto& existing : quotes_) {
            if (existing.bookmaker_id == quote.bookmaker_id) {
                if (quote.observed_at >= existing.observed_at)
                    existing = std::move(quote);
                return;
            }
        }
        quotes_.push_back(std::move(quote));
    }

    const std::string& game_id() const noexcept { return game_id_; }
    Outcome outcome() const noexcept { return outcome_; }
    std::span<const OddsQuote> quotes() const noexcept { return quotes_; }
    std::size_t size() const noexcept { return quotes_.size(); }
    bool empty() const noexcept { return quotes_.empty(); }

private:
    std::string game_id_;
    Outcome outcome_;
    std::vector<OddsQuote> quotes_;
};

/// Non-owning view of one bookmaker's price; the hot paths work on these.
struct Price {
    std::string_view bookmaker;
    double odds = 0.0;
};

struct PriceSummary {
    std::size_t n_quotes = 0;
    double mean_odds = 0.0;
    double median_odds = 0.0;
    double max_odds = 0.0;
    std::size_t max_index = 0; ///< into the summarized span
};

/// Max-odds ties go to the lexicographically smallest bookmaker.
inline PriceSummary summarize_prices(std::span<const Price> prices)
{
    PriceSummary s;
    s.n_quotes = prices.size();
    if (prices.empty())
        return s;
    double sum = 0.0;
    std::vector<double> sorted;
    sorted.reserve(prices.size());
    for (std::size_t i = 0; i < prices.size(); ++i) {
        const auto& p = prices[i];
        sum += p.odds;
        sorted.push_back(p.odds);
        if (i == 0 || p.odds > s.max_odds ||
            (p.odds == s.max_odds && p.bookmaker < prices[s.max_index].bookmaker)) {
            s.max_odds = p.odds;
            s.max_index = i;
        }
    }
    s.mean_odds = sum / static_cast<double>(prices.size());
    std::sort(sorted.begin(), sorted.end());
    std::size_t mid = sorted.size() / 2;
    s.median_odds = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
    return s;
}

struct ConsensusEstimate {
    std::string game_id;
    Outcome outcome = Outcome::HomeWin;
    double p_cons = 0.0; ///< exactly 1 / mean_odds
    std::size_t n_quotes = 0;
    double mean_odds = 0.0;
    double median_odds = 0.0;
    double max_odds = 0.0;
    std::string max_bookmaker;
};

inline ConsensusEstimate consensus_from_prices(std::string game_id, Outcome outcome, std::span<const Price> prices,
                                               std::size_t min_quotes)
{
    if (prices.size() < min_quotes || prices.empty())
        throw Error(ErrorCode::InsufficientQuotes, std::to_string(prices.size()) + " quotes for game " + game_id +
                                                        " outcome " + std::string(outcome_code(outcome)) +
                                                        ", need " + std::to_string(min_quotes));
    for (const auto& p : prices)
        if (!valid_odds(p.odds))
            throw Error(ErrorCode::InvalidQuote, "odds must be > 1.0 in game " + game_id);
    auto s = summarize_prices(prices);
    ConsensusEstimate est;
    est.game_id = std::move(game_id);
    est.outcome = outcome;
    est.p_cons = 1.0 / s.mean_odds;
    est.n_quotes = s.n_quotes;
    est.mean_odds = s.mean_odds;
    est.median_odds = s.median_odds;
    est.max_odds = s.max_odds;
    est.max_bookmaker = std::string(prices[s.max_index].bookmaker);
    return est;
}

/// p_cons = 1 / arithmetic mean of the odds in the set.
inline ConsensusEstimate consensus_probability(const OddsSet& odds_set, std::size_t min_quotes)
{
    std::vector<Price> prices;
    prices.reserve(odds_set.size());
    for (const auto& q : odds_set.quotes())
        prices.push_back({q.bookmaker_id, q.odds});
    return consensus_from_prices(odds_set.game_id(), odds_set.outcome(), prices, min_quotes);
}

inline double fair_odds(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorCode::DegenerateProbability, "probability must lie in (0,1), got " + std::to_string(p));
    return 1.0 / p;
}

/// Expected payoff of a unit stake: p_real * odds - 1.
inline double expected_payoff(double p_real, double omega)
{
    if (!(p_real >= 0.0 && p_real <= 1.0))
        throw Error(ErrorCode::DegenerateProbability, "probability must lie in [0,1], got " + std::to_string(p_real));
    if (!valid_odds(omega))
        throw Error(ErrorCode::InvalidQuote, "odds must be > 1.0, got " + std::to_string(omega));
    return p_real * omega - 1.0;
}

inline double adjusted_probability(double p_cons, double alpha)
{
    if (!(p_cons > alpha))
        throw Error(ErrorCode::MarginUnderflow,
                    "p_cons " + std::to_string(p_cons) + " does not exceed alpha " + std::to_string(alpha));
    return p_cons - alpha;
}

inline double bet_threshold(double p_cons, double alpha) { return 1.0 / adjusted_probability(p_cons, alpha); }

struct StrategyConfig {
    double alpha = 0.05;
    double stake = 50.0;
    std::size_t min_quotes = 3;
    Seconds window_open = std::chrono::hours{5};
    Seconds window_close = std::chrono::hours{1};

    void validate() const
    {
        if (!(alpha > 0.0 && alpha < 1.0))
            throw Error(ErrorCode::InvalidConfig, "alpha must lie in (0,1)");
        if (!(stake > 0.0))
            throw Error(ErrorCode::InvalidConfig, "stake must be positive");
        if (min_quotes < 2)
            throw Error(ErrorCode::InvalidConfig, "min_quotes must be at least 2");
        if (!(window_open > window_close && window_close >= Seconds{0}))
            throw Error(ErrorCode::InvalidConfig, "betting window must satisfy open > close >= 0");
    }

    /// Inclusive on both ends: close <= kickoff - t <= open.
    bool in_window(Timestamp t, Timestamp kickoff) const noexcept
    {
        auto to_match = kickoff - t;
        return to_match >= window_close && to_match <= window_open;
    }
};

struct GateResult {
    bool qualifies = false;
    double threshold = std::numeric_limits<double>::quiet_NaN(); ///< NaN when p_cons <= alpha
    double edge = std::numeric_limits<double>::quiet_NaN();      ///< (p_cons - alpha) * odds - 1
};

/// Strict comparison, no epsilon: odds exactly at the threshold do not qualify.
inline GateResult evaluate_gate(double p_cons, double max_odds, double alpha) noexcept
{
    GateResult g;
    if (!(p_cons > alpha))
        return g;
    const double adjusted = p_cons - alpha;
    g.threshold = 1.0 / adjusted;
    g.edge = adjusted * max_odds - 1.0;
    g.qualifies = max_odds > g.threshold;
    return g;
}

struct BetDecision {
    bool qualifies = false;
    double threshold = std::numeric_limits<double>::quiet_NaN();
    double best_odds = 0.0;
    std::string bookmaker;
    double edge = std::numeric_limits<double>::quiet_NaN(); ///< (p_cons - alpha) * best_odds - 1
    std::string reason;
};

inline BetDecision should_bet(const ConsensusEstimate& estimate, const StrategyConfig& config)
{
    BetDecision d;
    d.best_odds = estimate.max_odds;
    d.bookmaker = estimate.max_bookmaker;
    if (!(estimate.p_cons > config.alpha)) {
        d.reason = std::string(to_string(ErrorCode::MarginUnderflow));
        return d;
    }
    auto g = evaluate_gate(estimate.p_cons, estimate.max_odds, config.alpha);
    d.threshold = g.threshold;
    d.edge = g.edge;
    d.qualifies = g.qualifies;
    if (!d.qualifies)
        d.reason = "below threshold";
    return d;
}

/// Money is settled in whole cents, half away from zero.
inline double round_cents(double amount) { return std::round(amount * 100.0) / 100.0; }

/// Won: stake * (odds - 1); lost: -stake.
inline double settle_profit(double stake, double odds, bool won)
{
    return won ? round_cents(stake * (odds - 1.0)) : -stake;
}

/// Sum of implied probabilities minus one; zero for a fair book.
inline double overround(std::span<const double> odds)
{
    if (odds.empty())
        throw Error(ErrorCode::IncompleteMarket, "no odds supplied");
    double implied = 0.0;
    for (double w : odds) {
        if (!valid_odds(w))
            throw Error(ErrorCode::IncompleteMarket, "missing or invalid odds in market");
        implied += 1.0 / w;
    }
    return implied - 1.0;
}

/// 1X2 form; any missing outcome makes the market incomplete.
inline double overround(const std::array<std::optional<double>, 3>& odds)
{
    std::array<double, 3> values{};
    for (std::size_t k = 0; k < 3; ++k) {
        if (!odds[k])
            throw Error(ErrorCode::IncompleteMarket,
                        "no odds for outcome " + std::string(outcome_code(kOutcomes[k])));
        values[k] = *odds[k];
    }
    return overround(std::span<const double>(values));
}

} // namespace valuebet
