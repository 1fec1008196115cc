#pragma once

// Reliability analysis of consensus probabilities: bin p_cons per outcome,
// compare with the realized outcome frequency, fit a line through the bins
// and read the margins off the intercepts.

#include "valuebet/core_model.hpp"
#include "valuebet/market_data.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace valuebet {

struct CalibrationBin {
    double lower = 0.0;
    double upper = 0.0;
    double mean_p_cons = 0.0;
    double empirical_rate = 0.0;
    std::size_t n_games = 0;
    bool included = false;
};

struct CalibrationOptions {
    double bin_width = 0.0125;
    std::size_t min_bin_count = 100;
    std::size_t min_quotes = 3;
};

struct BinnedCalibration {
    Outcome outcome = Outcome::HomeWin;
    std::vector<CalibrationBin> bins; ///< every non-empty bin, ascending; check `included`
    std::size_t eligible_games = 0;

    std::vector<CalibrationBin> included() const
    {
        std::vector<CalibrationBin> out;
        for (const auto& b : bins)
            if (b.included)
                out.push_back(b);
        return out;
    }
};

/// Half-open bins [lower, upper) over [0, 1). Bins with fewer than
/// min_bin_count games are kept in the result but marked excluded.
inline BinnedCalibration bin_consensus(const Dataset& dataset, Outcome outcome, const CalibrationOptions& opt = {})
{
    if (!(opt.bin_width > 0.0 && opt.bin_width <= 1.0))
        throw Error(ErrorCode::InvalidConfig, "bin width must lie in (0,1]");
    const auto n_bins = static_cast<std::size_t>(std::ceil(1.0 / opt.bin_width - 1e-9));
    std::vector<double> sum_p(n_bins, 0.0);
    std::vector<std::size_t> hits(n_bins, 0), count(n_bins, 0);

    BinnedCalibration out;
    out.outcome = outcome;
    std::vector<Price> prices;
    for (const auto& g : dataset.games()) {
        if (!g.settled())
            continue;
        prices.clear();
        for (const auto& line : g.lines)
            if (auto v = line.get(outcome))
                prices.push_back({{}, *v});
        if (prices.size() < opt.min_quotes || prices.empty())
            continue;
        double sum = 0.0;
        for (const auto& p : prices)
            sum += p.odds;
        const double p_cons = 1.0 / (sum / static_cast<double>(prices.size()));
        auto bin = static_cast<std::size_t>(p_cons / opt.bin_width);
        if (bin >= n_bins)
            bin = n_bins - 1;
        sum_p[bin] += p_cons;
        ++count[bin];
        if (*g.result == outcome)
            ++hits[bin];
        ++out.eligible_games;
    }
    if (out.eligible_games == 0)
        throw Error(ErrorCode::NoEligibleGames, "no settled game has " + std::to_string(opt.min_quotes) +
                                                     " quotes for outcome " + std::string(outcome_code(outcome)));
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (count[b] == 0)
            continue;
        CalibrationBin bin;
        bin.lower = static_cast<double>(b) * opt.bin_width;
        bin.upper = static_cast<double>(b + 1) * opt.bin_width;
        bin.n_games = count[b];
        bin.mean_p_cons = sum_p[b] / static_cast<double>(count[b]);
        bin.empirical_rate = static_cast<double>(hits[b]) / static_cast<double>(count[b]);
        bin.included = count[b] >= opt.min_bin_count;
        out.bins.push_back(bin);
    }
    return out;
}

struct RegressionFit {
    Outcome outcome = Outcome::HomeWin;
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    std::size_t n_bins = 0;
};

/// Least squares of empirical_rate on mean_p_cons over included bins.
/// Unweighted by default; `weighted` uses n_games as bin weights.
inline RegressionFit fit_regression(const std::vector<CalibrationBin>& bins, Outcome outcome = Outcome::HomeWin,
                                    bool weighted = false)
{
    double sw = 0.0, sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    for (const auto& b : bins) {
        if (!b.included)
            continue;
        double w = weighted ? static_cast<double>(b.n_games) : 1.0;
        sw += w;
        sx += w * b.mean_p_cons;
        sy += w * b.empirical_rate;
        ++n;
    }
    if (n < 2)
        throw Error(ErrorCode::InsufficientBins, std::to_string(n) + " included bins, need 2");
    const double mx = sx / sw, my = sy / sw;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& b : bins) {
        if (!b.included)
            continue;
        double w = weighted ? static_cast<double>(b.n_games) : 1.0;
        double dx = b.mean_p_cons - mx, dy = b.empirical_rate - my;
        sxx += w * dx * dx;
        sxy += w * dx * dy;
        syy += w * dy * dy;
    }
    if (!(sxx > 0.0))
        throw Error(ErrorCode::InsufficientBins, "included bins share a single abscissa");
    RegressionFit fit;
    fit.outcome = outcome;
    fit.n_bins = n;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    fit.r_squared = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : 1.0;
    return fit;
}

inline RegressionFit fit_regression(const BinnedCalibration& binned, bool weighted = false)
{
    return fit_regression(binned.bins, binned.outcome, weighted);
}

/// Per-outcome margins; only the expected-accuracy estimate uses these, the
/// betting gate keeps its single flat alpha.
struct CalibrationAlphas {
    double alpha_home = 0.034;
    double alpha_draw = 0.057;
    double alpha_away = 0.037;
    std::vector<std::string> warnings;

    double of(Outcome o) const noexcept
    {
        switch (o) {
        case Outcome::HomeWin: return alpha_home;
        case Outcome::Draw: return alpha_draw;
        case Outcome::AwayWin: return alpha_away;
        }
        return 0.0;
    }
};

/// alpha_k = -intercept_k. A positive intercept gives a negative alpha and a warning.
inline CalibrationAlphas derive_alphas(const std::array<RegressionFit, 3>& fits)
{
    CalibrationAlphas a;
    double* slots[3] = {&a.alpha_home, &a.alpha_draw, &a.alpha_away};
    for (std::size_t k = 0; k < 3; ++k) {
        if (fits[k].outcome != kOutcomes[k])
            throw Error(ErrorCode::InvalidCalibration, "fits must be ordered home, draw, away");
        double alpha = -fits[k].intercept;
        if (!(alpha > -0.2 && alpha < 0.2))
            throw Error(ErrorCode::InvalidCalibration, "alpha for " + std::string(outcome_name(kOutcomes[k])) +
                                                           " outside (-0.2, 0.2): " + std::to_string(alpha));
        if (alpha < 0.0)
            a.warnings.push_back("positive intercept for " + std::string(outcome_name(kOutcomes[k])) +
                                 " gives negative alpha " + std::to_string(alpha));
        *slots[k] = alpha;
    }
    return a;
}

struct CalibrationReport {
    std::array<BinnedCalibration, 3> binned;
    std::array<RegressionFit, 3> fits;
    CalibrationAlphas alphas;
};

inline CalibrationReport calibrate(const Dataset& dataset, const CalibrationOptions& opt = {}, bool weighted = false)
{
    CalibrationReport r;
    for (std::size_t k = 0; k < 3; ++k) {
        r.binned[k] = bin_consensus(dataset, kOutcomes[k], opt);
        r.fits[k] = fit_regression(r.binned[k], weighted);
    }
    r.alphas = derive_alphas(r.fits);
    return r;
}

} // namespace valuebet
