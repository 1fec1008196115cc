#pragma once

// Synthetic 1X2 markets with known true probabilities. Per game:
//
//   p_real  ~ Dirichlet(concentration * p_real_mean)    (fixed if concentration <= 0)
//   implied = p_real[k] + overround * w[k] / sum(w)     (additive per-outcome margin)
//   odds    = 1 / (implied * (1 + dispersion * U(-1,1)))
//   odds   *= mispricing_factor   with probability mispricing_rate, per quote
//   result  ~ Categorical(p_real)
//
// With equal weights the consensus probability sits overround/3 above p_real,
// so a calibration fit recovers intercept -overround/3 with slope 1.

#include "valuebet/market_data.hpp"
#include "valuebet/rng.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace valuebet {

inline constexpr std::array<std::string_view, 32> kDefaultBookmakers{
    "Interwetten", "bwin",        "bet-at-home", "Unibet",      "Stan James", "Expekt",    "10Bet",
    "William Hill", "bet365",     "Pinnacle Sports", "DOXXbet", "Betsafe",    "Betway",    "888sport",
    "Ladbrokes",   "Betclix",     "Sportingbet", "myBet",       "Betsson",    "188BET",    "Jetbull",
    "Paddy Power", "Tipico",      "Coral",       "SBOBET",      "BetVictor",  "12BET",     "Titanbet",
    "Youwin",      "ComeOn",      "Betadonis",   "Betfair"};

struct SyntheticMarketSpec {
    std::array<double, 3> p_real{0.5, 0.25, 0.25}; ///< mean of the true-probability prior
    double concentration = 6.0;
    double overround = 0.05;
    std::array<double, 3> margin_weights{1.0, 1.0, 1.0};
    double dispersion = 0.02;
    double mispricing_rate = 0.0;
    double mispricing_factor = 1.0;
    std::size_t n_bookmakers = 32;
    std::uint64_t seed = 1;

    /// Quote snapshots per bookmaker; 0 emits closing odds only (no stream).
    std::size_t n_updates = 0;
    Seconds stream_span = std::chrono::hours{8};
    Seconds last_quote_lead = std::chrono::minutes{5};
    Timestamp first_kickoff = std::chrono::sys_days{std::chrono::year{2015} / 9 / 1} + std::chrono::hours{12};
    Seconds kickoff_spacing = std::chrono::minutes{10};

    void validate() const
    {
        double sum = 0.0;
        for (double p : p_real) {
            if (!(p >= 0.0))
                throw Error(ErrorCode::InvalidConfig, "p_real entries must be non-negative");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw Error(ErrorCode::InvalidConfig, "p_real must sum to 1");
        if (!(overround >= 0.0))
            throw Error(ErrorCode::InvalidConfig, "overround must be >= 0");
        if (!(mispricing_factor >= 1.0))
            throw Error(ErrorCode::InvalidConfig, "mispricing_factor must be >= 1");
        if (!(mispricing_rate >= 0.0 && mispricing_rate <= 1.0))
            throw Error(ErrorCode::InvalidConfig, "mispricing_rate must lie in [0,1]");
        if (!(dispersion >= 0.0 && dispersion < 1.0))
            throw Error(ErrorCode::InvalidConfig, "dispersion must lie in [0,1)");
        if (n_bookmakers == 0)
            throw Error(ErrorCode::InvalidConfig, "need at least one bookmaker");
        double wsum = margin_weights[0] + margin_weights[1] + margin_weights[2];
        if (!(wsum > 0.0) || *std::min_element(margin_weights.begin(), margin_weights.end()) < 0.0)
            throw Error(ErrorCode::InvalidConfig, "margin weights must be non-negative with positive sum");
        if (n_updates > 0 && !(stream_span > last_quote_lead))
            throw Error(ErrorCode::InvalidConfig, "stream_span must exceed last_quote_lead");
    }

    std::array<double, 3> margin_shares() const
    {
        double wsum = margin_weights[0] + margin_weights[1] + margin_weights[2];
        return {overround * margin_weights[0] / wsum, overround * margin_weights[1] / wsum,
                overround * margin_weights[2] / wsum};
    }
};

struct SyntheticMarket {
    Dataset dataset;
    std::vector<std::array<double, 3>> p_real; ///< aligned with dataset.games()
};

inline constexpr double kMinSyntheticOdds = 1.01;

inline std::string synthetic_bookmaker_name(std::size_t b)
{
    if (b < kDefaultBookmakers.size())
        return std::string(kDefaultBookmakers[b]);
    return "Book" + std::to_string(b + 1);
}

inline SyntheticMarket generate_synthetic_market(const SyntheticMarketSpec& spec, std::size_t n_games)
{
    spec.validate();
    const auto shares = spec.margin_shares();
    DatasetBuilder builder;
    std::vector<BookmakerId> books(spec.n_bookmakers);
    for (std::size_t b = 0; b < spec.n_bookmakers; ++b)
        books[b] = builder.intern_bookmaker(synthetic_bookmaker_name(b));

    std::vector<std::array<double, 3>> truth(n_games);
    std::vector<Timestamp> times;
    for (std::size_t i = 0; i < n_games; ++i) {
        rng::Stream rs(spec.seed, i, rng::Tag::Generator);

        std::array<double, 3> p = spec.p_real;
        if (spec.concentration > 0.0) {
            double total = 0.0;
            for (std::size_t k = 0; k < 3; ++k) {
                p[k] = spec.p_real[k] > 0.0 ? rs.gamma(spec.concentration * spec.p_real[k]) : 0.0;
                total += p[k];
            }
            for (auto& v : p)
                v /= total;
        }
        truth[i] = p;
        auto result = kOutcomes[rs.categorical(p)];

        char id[32];
        std::snprintf(id, sizeof id, "G%07zu", i + 1);
        Timestamp kickoff = spec.first_kickoff + spec.kickoff_spacing * static_cast<long>(i);
        auto slot = builder.add_game({id, "Synthetic League " + std::to_string(i % 20 + 1),
                                      "Home " + std::to_string(i + 1), "Away " + std::to_string(i + 1), kickoff,
                                      result});

        const std::size_t snapshots = std::max<std::size_t>(1, spec.n_updates);
        const auto earliest = kickoff - spec.stream_span;
        const auto span_seconds = (spec.stream_span - spec.last_quote_lead).count();
        for (std::size_t b = 0; b < spec.n_bookmakers; ++b) {
            times.clear();
            if (spec.n_updates > 0) {
                for (std::size_t s = 0; s < snapshots; ++s)
                    times.push_back(earliest + Seconds{static_cast<long>(rs.index(span_seconds + 1))});
                std::sort(times.begin(), times.end());
            }
            std::array<double, 3> odds{};
            for (std::size_t s = 0; s < snapshots; ++s) {
                for (std::size_t k = 0; k < 3; ++k) {
                    double implied = p[k] + shares[k];
                    double noise = 1.0 + spec.dispersion * rs.uniform(-1.0, 1.0);
                    double w = 1.0 / (implied * noise);
                    if (spec.mispricing_rate > 0.0 && rs.bernoulli(spec.mispricing_rate))
                        w *= spec.mispricing_factor;
                    odds[k] = std::max(w, kMinSyntheticOdds);
                    if (spec.n_updates > 0)
                        builder.add_quote(
                            {times[s], id, synthetic_bookmaker_name(b), kOutcomes[k], odds[k]});
                }
            }
            builder.set_line(*slot, books[b], odds);
        }
    }
    auto ds = std::move(builder).build(
        {"synthetic(seed=" + std::to_string(spec.seed) + ", games=" + std::to_string(n_games) + ")", ""});
    SyntheticMarket market{std::move(ds), {}};
    market.p_real.reserve(n_games);
    for (const auto& g : market.dataset.games())
        market.p_real.push_back(truth[std::stoul(g.game_id.substr(1)) - 1]);
    return market;
}

inline Dataset generate_synthetic(const SyntheticMarketSpec& spec, std::size_t n_games)
{
    return generate_synthetic_market(spec, n_games).dataset;
}

} // namespace valuebet
