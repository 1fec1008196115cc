// valuebet: command line front end for the analysis pipeline and the scanner
// service.

#include "valuebet/replay.hpp"
#include "valuebet/report_io.hpp"
#include "valuebet/service.hpp"
#include "valuebet/valuebet.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <pthread.h>

using namespace valuebet;

namespace {

struct StrategyArgs {
    double alpha = 0.05;
    double stake = 50.0;
    std::size_t min_quotes = 3;
    long window_open_s = 5 * 3600;
    long window_close_s = 3600;

    void add(CLI::App* app)
    {
        app->add_option("--alpha", alpha, "probability margin")->capture_default_str();
        app->add_option("--stake", stake, "flat stake per bet")->capture_default_str();
        app->add_option("--min-quotes", min_quotes, "bookmakers required per outcome")->capture_default_str();
        app->add_option("--window-open-s", window_open_s, "earliest bet, seconds before kickoff")
            ->capture_default_str();
        app->add_option("--window-close-s", window_close_s, "latest bet, seconds before kickoff")
            ->capture_default_str();
    }

    StrategyConfig config() const
    {
        StrategyConfig c;
        c.alpha = alpha;
        c.stake = stake;
        c.min_quotes = min_quotes;
        c.window_open = Seconds{window_open_s};
        c.window_close = Seconds{window_close_s};
        c.validate();
        return c;
    }
};

/// Writes JSON to `path`, or stdout when empty.
void emit(const ojson& j, const std::string& path)
{
    if (path.empty()) {
        std::cout << j.dump(2) << '\n';
        return;
    }
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

template <typename F>
void write_file(const std::string& path, F&& f)
{
    if (path.empty())
        return;
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    f(out);
}

Dataset load(const std::string& closing, const std::string& quotes = {})
{
    auto ds = parse_closing_odds_file(closing);
    if (!quotes.empty())
        ds = parse_quote_stream_file(quotes, std::move(ds));
    const auto& r = ds.report();
    if (r.rows_dropped || r.orphan_quotes || r.duplicate_quotes)
        std::cerr << "input: " << to_json(r).dump() << '\n';
    return ds;
}

std::optional<CalibrationAlphas> load_alphas(const std::string& path)
{
    if (path.empty())
        return std::nullopt;
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    auto j = nlohmann::json::parse(in);
    const auto& a = j.contains("alphas") ? j["alphas"] : j;
    CalibrationAlphas out;
    out.alpha_home = a.at("alpha_home").get<double>();
    out.alpha_draw = a.at("alpha_draw").get<double>();
    out.alpha_away = a.at("alpha_away").get<double>();
    return out;
}

/// The fields of a saved backtest report that the bootstrap needs.
BacktestReport load_strategy_report(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read " + path);
    auto j = nlohmann::json::parse(in);
    BacktestReport r;
    r.n_bets = j.at("n_bets").get<std::size_t>();
    r.yield = j.at("yield").get<double>();
    r.config.stake = j.at("config").at("stake").get<double>();
    return r;
}

BacktestMode parse_mode(const std::string& s)
{
    if (s == "closing")
        return BacktestMode::Closing;
    if (s == "stream")
        return BacktestMode::Stream;
    throw Error(ErrorCode::InvalidConfig, "mode must be closing or stream");
}

int serve(const std::string& config_path)
{
    auto cfg = load_service_config(config_path);
    if (cfg.feed_games.empty())
        throw Error(ErrorCode::InvalidConfig, "feed_games is required to serve");
    auto catalog = parse_closing_odds_file(cfg.feed_games);

    // Signals are taken by a dedicated thread so shutdown runs outside a handler.
    // Background jobs may inherit SIGINT as ignored, which would discard it.
    std::signal(SIGINT, SIG_DFL);
    std::signal(SIGTERM, SIG_DFL);
    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    ScannerService service(cfg, catalog);
    if (!cfg.feed_quotes.empty()) {
        auto stream = parse_quote_stream_file(cfg.feed_quotes, catalog);
        service.attach_feed(std::make_unique<ReplayFeed>(stream, cfg.feed_speedup, service.interruptible_sleeper()));
    }
    httplib::Server server;
    service.install(server);
    if (!server.bind_to_port(cfg.bind_host, cfg.bind_port))
        throw std::runtime_error("cannot bind " + cfg.bind_host + ":" + std::to_string(cfg.bind_port));
    std::atomic<bool> signalled{false};
    std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        signalled = true;
        server.stop();
    });
    service.start();
    std::cerr << "listening on " << cfg.bind_host << ':' << cfg.bind_port << '\n';
    server.listen_after_bind();
    service.stop();
    if (!signalled)
        pthread_kill(waiter.native_handle(), SIGTERM);
    waiter.join();
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Consensus value-betting toolkit"};
    app.require_subcommand(1);

    // generate
    SyntheticMarketSpec spec;
    std::size_t n_games = 10000;
    std::string out_closing, out_quotes;
    auto* gen = app.add_subcommand("generate", "write a synthetic market");
    gen->add_option("--games", n_games)->capture_default_str();
    gen->add_option("--seed", spec.seed)->capture_default_str();
    gen->add_option("--bookmakers", spec.n_bookmakers)->capture_default_str();
    gen->add_option("--updates", spec.n_updates, "stream snapshots per bookmaker")->capture_default_str();
    gen->add_option("--overround", spec.overround)->capture_default_str();
    gen->add_option("--dispersion", spec.dispersion)->capture_default_str();
    gen->add_option("--concentration", spec.concentration)->capture_default_str();
    gen->add_option("--mispricing-rate", spec.mispricing_rate)->capture_default_str();
    gen->add_option("--mispricing-factor", spec.mispricing_factor)->capture_default_str();
    gen->add_option("--out-closing", out_closing)->required();
    gen->add_option("--out-quotes", out_quotes);

    // shared inputs
    std::string closing, quotes, out, csv_out, calibration_path, mode_text = "closing";
    StrategyArgs strategy;

    auto* cal = app.add_subcommand("calibrate", "bin consensus probabilities and fit the margin");
    CalibrationOptions cal_opt;
    bool weighted = false;
    cal->add_option("--closing", closing)->required();
    cal->add_option("--bin-width", cal_opt.bin_width)->capture_default_str();
    cal->add_option("--min-bin-count", cal_opt.min_bin_count)->capture_default_str();
    cal->add_option("--min-quotes", cal_opt.min_quotes)->capture_default_str();
    cal->add_flag("--weighted", weighted, "weight bins by game count");
    cal->add_option("--out", out);
    cal->add_option("--bins-csv", csv_out);

    auto* bc = app.add_subcommand("backtest-closing", "bet on closing odds");
    bc->add_option("--closing", closing)->required();
    bc->add_option("--calibration", calibration_path, "calibration report for expected accuracy");
    bc->add_option("--out", out);
    bc->add_option("--bankroll-csv", csv_out);
    strategy.add(bc);

    auto* bs = app.add_subcommand("backtest-stream", "bet on the time-ordered quote stream");
    bs->add_option("--closing", closing)->required();
    bs->add_option("--quotes", quotes)->required();
    bs->add_option("--calibration", calibration_path);
    bs->add_option("--out", out);
    bs->add_option("--bankroll-csv", csv_out);
    strategy.add(bs);

    std::vector<double> alphas;
    auto* sw = app.add_subcommand("sweep-alpha", "backtest over a grid of alpha values");
    sw->add_option("--closing", closing)->required();
    sw->add_option("--quotes", quotes);
    sw->add_option("--mode", mode_text)->capture_default_str();
    sw->add_option("--alphas", alphas)->delimiter(',')->required();
    sw->add_option("--out", out);
    strategy.add(sw);

    double drop_rate = 0.5;
    std::size_t n_seeds = 20;
    std::uint64_t seed = 1;
    auto* st = app.add_subcommand("staleness", "drop would-be bets at random");
    st->add_option("--closing", closing)->required();
    st->add_option("--quotes", quotes);
    st->add_option("--mode", mode_text)->capture_default_str();
    st->add_option("--drop-rate", drop_rate)->capture_default_str();
    st->add_option("--seeds", n_seeds)->capture_default_str();
    st->add_option("--seed", seed)->capture_default_str();
    st->add_option("--out", out);
    strategy.add(st);

    BootstrapConfig boot;
    std::string strategy_report;
    std::size_t hist_bins = 50;
    bool include_reps = false;
    auto* bo = app.add_subcommand("bootstrap", "random-bet baseline for a strategy report");
    bo->add_option("--closing", closing)->required();
    bo->add_option("--strategy-report", strategy_report, "backtest JSON to match")->required();
    bo->add_option("--reps", boot.n_reps)->capture_default_str();
    bo->add_option("--seed", boot.seed)->capture_default_str();
    bo->add_option("--priors", boot.outcome_priors, "home,draw,away")->delimiter(',');
    bo->add_option("--out", out);
    bo->add_option("--hist-csv", csv_out);
    bo->add_option("--hist-bins", hist_bins)->capture_default_str();
    bo->add_flag("--include-reps", include_reps);

    auto* rc = app.add_subcommand("replay-check", "compare the live scanner with the stream backtest");
    rc->add_option("--closing", closing)->required();
    rc->add_option("--quotes", quotes)->required();
    rc->add_option("--out", out);
    strategy.add(rc);

    std::string config_path;
    auto* sv = app.add_subcommand("serve", "run the scanner HTTP service");
    sv->add_option("--config", config_path, "JSON config; VALUEBET_* variables override it");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            spec.validate();
            auto ds = generate_synthetic(spec, n_games);
            write_file(out_closing, [&](std::ostream& o) { write_closing_odds(ds, o); });
            if (!out_quotes.empty()) {
                if (spec.n_updates == 0)
                    throw Error(ErrorCode::InvalidConfig, "--out-quotes needs --updates > 0");
                write_file(out_quotes, [&](std::ostream& o) { write_quote_stream(ds, o); });
            }
            std::cerr << "wrote " << ds.games().size() << " games, " << ds.quotes().size() << " quotes\n";
        } else if (*cal) {
            auto r = calibrate(load(closing), cal_opt, weighted);
            for (const auto& w : r.alphas.warnings)
                std::cerr << "warning: " << w << '\n';
            emit(to_json(r), out);
            write_file(csv_out, [&](std::ostream& o) { write_calibration_csv(r, o); });
        } else if (*bc || *bs) {
            const auto mode = *bc ? BacktestMode::Closing : BacktestMode::Stream;
            auto ds = load(closing, quotes);
            auto r = run_backtest(mode, ds, strategy.config(), {}, load_alphas(calibration_path));
            emit(to_json(r), out);
            write_file(csv_out, [&](std::ostream& o) { write_bankroll_csv(r, o); });
        } else if (*sw) {
            auto rows = sweep_alpha(load(closing, quotes), strategy.config(), alphas, parse_mode(mode_text));
            emit(to_json(rows), out);
        } else if (*st) {
            auto r = simulate_staleness(load(closing, quotes), strategy.config(), drop_rate, n_seeds, seed,
                                        parse_mode(mode_text));
            emit(to_json(r), out);
        } else if (*bo) {
            auto d = bootstrap_against(load(closing), load_strategy_report(strategy_report), boot);
            emit(to_json(d, include_reps), out);
            write_file(csv_out, [&](std::ostream& o) { write_histogram_csv(d, hist_bins, o); });
        } else if (*rc) {
            auto c = replay_equivalence(load(closing, quotes), strategy.config());
            emit(to_json(c), out);
            return c.equivalent() ? 0 : 3;
        } else if (*sv) {
            return serve(config_path);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
