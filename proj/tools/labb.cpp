// labb - look-ahead benchmark bias toolkit
//
// Subcommands: ingest, synth, backtest, theory, random-bench. Every seeded
// command is bit-reproducible: reports carry no timestamps and parallel
// sections reduce in a fixed order.

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "labb/engine.hpp"
#include "labb/marketdata.hpp"
#include "labb/metrics.hpp"
#include "labb/randomstrat.hpp"
#include "labb/report.hpp"
#include "labb/synthmarket.hpp"
#include "labb/theory.hpp"
#include "labb/universe.hpp"

namespace fs = std::filesystem;
using labb::json;

namespace {

constexpr int kExitUsage = 64;
constexpr int kExitBadInput = 65;
constexpr int kExitRuntime = 70;

struct Period {
    labb::Date start;
    labb::Date end;
};

std::vector<Period> parse_periods(const std::string& text) {
    std::vector<Period> periods;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        auto colon = token.find(':');
        if (colon == std::string::npos)
            throw labb::ValidationError("period '" + token + "' must be START:END");
        Period p{labb::Date::parse(token.substr(0, colon)),
                 labb::Date::parse(token.substr(colon + 1))};
        if (!(p.start < p.end))
            throw labb::ValidationError("period '" + token + "' has start >= end");
        if (!periods.empty() && p.start <= periods.back().end)
            throw labb::ValidationError("periods must be ordered and non-overlapping");
        periods.push_back(p);
    }
    if (periods.empty())
        throw labb::ValidationError("no periods given");
    return periods;
}

Period snap_to_calendar(const labb::MarketDataset& dataset, Period p) {
    auto start = dataset.calendar_at_or_after(p.start);
    auto end = dataset.calendar_at_or_before(p.end);
    if (!start || !end || !(*start < *end))
        throw labb::ValidationError("period " + p.start.to_string() + ":" + p.end.to_string() +
                                    " does not overlap the dataset calendar");
    return {*start, *end};
}

void ensure_output_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw labb::ValidationError("cannot create output directory '" + dir + "'");
}

// --- ingest ---------------------------------------------------------------

int cmd_ingest(const std::string& data_path, const std::string& report_path) {
    labb::MarketDataset ds = labb::ingest_csv_file(data_path);
    std::size_t bars = 0;
    for (const auto& rec : ds.securities())
        bars += rec.bar_count();
    std::cout << "securities:    " << ds.size() << "\n"
              << "trading days:  " << ds.calendar().size() << "\n"
              << "bars:          " << bars << "\n"
              << "calendar:      " << ds.calendar().front().to_string() << " .. "
              << ds.calendar().back().to_string() << "\n";
    if (!report_path.empty()) {
        json j = {{"securities", ds.size()},
                  {"trading_days", ds.calendar().size()},
                  {"bars", bars},
                  {"calendar_start", ds.calendar().front().to_string()},
                  {"calendar_end", ds.calendar().back().to_string()}};
        labb::write_json_file(j, report_path);
    }
    return 0;
}

// --- synth ----------------------------------------------------------------

std::vector<std::pair<double, double>> parse_quantiles(const std::string& text) {
    std::vector<std::pair<double, double>> q;
    std::stringstream ss(text);
    std::string token;
    while (std::getline(ss, token, ',')) {
        auto colon = token.find(':');
        if (colon == std::string::npos)
            throw labb::ValidationError("quantile '" + token + "' must be YEARS:FRACTION");
        q.emplace_back(labb::parse_double(token.substr(0, colon), "quantile years"),
                       labb::parse_double(token.substr(colon + 1), "quantile fraction"));
    }
    return q;
}

int cmd_synth(const labb::SynthConfig& config, const std::string& quantiles_text,
              const std::string& out_dir, const std::string& name) {
    config.validate();
    auto quantiles = parse_quantiles(quantiles_text);
    labb::HazardModel hazard = labb::calibrate_hazard(quantiles);

    std::cout << "hazard rates (per annum):";
    for (std::size_t k = 0; k < hazard.segment_rates.size(); ++k)
        std::cout << " " << labb::format_double(hazard.segment_rates[k]);
    std::cout << "\n";

    labb::MarketDataset ds = labb::simulate_market(config, hazard);
    ensure_output_dir(out_dir);
    std::string csv_path = (fs::path(out_dir) / (name + ".csv")).string();
    ds.write_csv(csv_path);

    json quantile_json = json::array();
    for (auto [t, f] : quantiles)
        quantile_json.push_back({{"years", t}, {"exit_fraction", f}});
    json rates = json::array();
    for (double r : hazard.segment_rates)
        rates.push_back(r);
    json meta = {{"config",
                  {{"n_firms_initial", config.n_firms_initial},
                   {"horizon_years", config.horizon_years},
                   {"trading_days_per_year", config.trading_days_per_year},
                   {"annual_drift", config.annual_drift},
                   {"annual_volatility", config.annual_volatility},
                   {"cap_lognormal_mu", config.cap_lognormal_mu},
                   {"cap_lognormal_sigma", config.cap_lognormal_sigma},
                   {"entry_rate_per_year", config.entry_rate_per_year},
                   {"seed", config.seed},
                   {"inject_splits", config.inject_splits},
                   {"base_date", config.base_date.to_string()}}},
                 {"hazard_quantiles", std::move(quantile_json)},
                 {"hazard_rates_per_annum", std::move(rates)},
                 {"securities", ds.size()},
                 {"dataset", name + ".csv"}};
    labb::write_json_file(meta, (fs::path(out_dir) / (name + "_meta.json")).string());
    std::cout << "wrote " << csv_path << " (" << ds.size() << " securities)\n";
    return 0;
}

// --- backtest ---------------------------------------------------------------

int cmd_backtest(const std::string& data_path, const std::string& periods_text, int top_n,
                 const std::string& weighting_text, const std::string& policy_text,
                 const std::string& risk_free_path, const std::string& freq_text,
                 const std::string& out_dir) {
    labb::MarketDataset ds = labb::ingest_csv_file(data_path);
    std::vector<Period> periods = parse_periods(periods_text);
    labb::Weighting weighting = labb::parse_weighting(weighting_text);
    labb::DelistingPolicy policy = labb::parse_delisting_policy(policy_text);
    labb::ReturnFrequency freq = labb::parse_return_frequency(freq_text);

    labb::RiskFreeSeries rf;
    bool have_rf = !risk_free_path.empty();
    if (have_rf)
        rf = labb::load_risk_free_csv(risk_free_path);

    ensure_output_dir(out_dir);
    json report;
    report["dataset"] = data_path;
    report["top_n"] = top_n;
    report["weighting"] = weighting_text;
    report["delisting_policy"] = policy_text;
    report["t_test_frequency"] = freq_text;
    json period_reports = json::array();

    std::vector<labb::EquityCurve> ex_ante_curves, ex_post_curves, ratio_curves;
    for (std::size_t i = 0; i < periods.size(); ++i) {
        Period p = snap_to_calendar(ds, periods[i]);
        std::string tag = "period_" + std::to_string(i);

        auto ante = labb::select_period_universe(ds, p.start, p.end, top_n,
                                                 labb::UniverseMode::ex_ante);
        auto post = labb::select_period_universe(ds, p.start, p.end, top_n,
                                                 labb::UniverseMode::ex_post);
        labb::EquityCurve ante_curve = labb::run_buy_and_hold(
            ds, {ante, weighting, policy}, p.start, p.end, tag + "_ex_ante");
        labb::EquityCurve post_curve = labb::run_buy_and_hold(
            ds, {post, weighting, policy}, p.start, p.end, tag + "_ex_post");
        labb::EquityCurve ratio = labb::long_short_ratio(post_curve, ante_curve,
                                                         tag + "_ratio");

        labb::write_equity_csv(ante_curve, (fs::path(out_dir) / (tag + "_ex_ante.csv")).string());
        labb::write_equity_csv(post_curve, (fs::path(out_dir) / (tag + "_ex_post.csv")).string());
        labb::write_equity_csv(ratio, (fs::path(out_dir) / (tag + "_ratio.csv")).string());

        auto ante_metrics = labb::compute_metrics(ante_curve);
        auto post_metrics = labb::compute_metrics(post_curve);
        auto ratio_metrics = labb::compute_metrics(ratio);

        auto post_returns = labb::period_returns(post_curve, freq, have_rf ? &rf : nullptr);
        auto ante_returns = labb::period_returns(ante_curve, freq, have_rf ? &rf : nullptr);
        labb::TTestResult ttest = labb::two_sample_t_pooled(post_returns, ante_returns);

        json jp = {{"period_start", p.start.to_string()},
                   {"period_end", p.end.to_string()},
                   {"universe_ex_ante", labb::to_json(ante)},
                   {"universe_ex_post", labb::to_json(post)},
                   {"metrics_ex_ante", labb::to_json(ante_metrics)},
                   {"metrics_ex_post", labb::to_json(post_metrics)},
                   {"metrics_ratio", labb::to_json(ratio_metrics)},
                   {"t_test", labb::to_json(ttest)},
                   {"t_test_n", {{"ex_post", post_returns.size()},
                                 {"ex_ante", ante_returns.size()}}}};
        period_reports.push_back(std::move(jp));

        std::cout << tag << " " << p.start.to_string() << ".." << p.end.to_string()
                  << "  ex_post cagr=" << labb::format_double(post_metrics.cagr_continuous)
                  << " sharpe="
                  << (post_metrics.sharpe_defined
                          ? labb::format_double(post_metrics.sharpe_annualized)
                          : "n/a")
                  << "  ex_ante cagr=" << labb::format_double(ante_metrics.cagr_continuous)
                  << " sharpe="
                  << (ante_metrics.sharpe_defined
                          ? labb::format_double(ante_metrics.sharpe_annualized)
                          : "n/a")
                  << "  t=" << labb::format_double(ttest.t_statistic)
                  << " p=" << labb::format_double(ttest.p_value) << "\n";

        ex_ante_curves.push_back(std::move(ante_curve));
        ex_post_curves.push_back(std::move(post_curve));
        ratio_curves.push_back(std::move(ratio));
    }

    report["periods"] = std::move(period_reports);
    if (periods.size() > 1) {
        labb::EquityCurve chained_post = labb::chain_periods(ex_post_curves, "chained_ex_post");
        labb::EquityCurve chained_ante = labb::chain_periods(ex_ante_curves, "chained_ex_ante");
        labb::EquityCurve chained_ratio = labb::chain_periods(ratio_curves, "chained_ratio");
        labb::write_equity_csv(chained_post, (fs::path(out_dir) / "chained_ex_post.csv").string());
        labb::write_equity_csv(chained_ante, (fs::path(out_dir) / "chained_ex_ante.csv").string());
        labb::write_equity_csv(chained_ratio, (fs::path(out_dir) / "chained_ratio.csv").string());
        report["chained"] = {{"ex_post", labb::to_json(labb::compute_metrics(chained_post))},
                             {"ex_ante", labb::to_json(labb::compute_metrics(chained_ante))},
                             {"ratio", labb::to_json(labb::compute_metrics(chained_ratio))}};
    }
    labb::write_json_file(report, (fs::path(out_dir) / "backtest_report.json").string());
    std::cout << "wrote " << (fs::path(out_dir) / "backtest_report.json").string() << "\n";
    return 0;
}

// --- theory -----------------------------------------------------------------

int cmd_theory(const std::string& model_path, long trials, long ew_trials, uint64_t seed,
               unsigned threads, const std::string& out_dir) {
    labb::BiasModel model = labb::load_bias_model_file(model_path);

    double k = labb::k_factor(model.T, model.N);
    double s1 = labb::sharpe_sq_star(model.mu1, model.sigma1);
    double s2 = labb::sharpe_sq_star(model.mu2, model.sigma2);
    double ew1 = labb::sharpe_sq_ew(model.mu1, model.sigma1);
    double ew2 = labb::sharpe_sq_ew(model.mu2, model.sigma2);
    double delta = labb::delta_bias(model);

    // The optimal-weight quadratic form w*'Sigma^{-1}w* alongside S*^2
    // (they differ by gamma^-2 scaling of the weights).
    labb::Vector w1 = labb::markowitz_weights(model.mu1, model.sigma1, model.gamma);
    labb::Vector w2 = labb::markowitz_weights(model.mu2, model.sigma2, model.gamma);
    double wq1 = labb::sharpe_sq_star(w1, model.sigma1);
    double wq2 = labb::sharpe_sq_star(w2, model.sigma2);

    labb::McBiasResult mc = labb::mc_estimated_bias(model, trials, seed, threads);
    labb::McSharpeComparison cmp1 =
        labb::mc_ew_vs_markowitz(model.mu1, model.sigma1, model.T, model.gamma, ew_trials,
                                 seed + 1, threads);
    labb::McSharpeComparison cmp2 =
        labb::mc_ew_vs_markowitz(model.mu2, model.sigma2, model.T, model.gamma, ew_trials,
                                 seed + 2, threads);

    std::cout << "k(T=" << model.T << ", N=" << model.N << ") = " << labb::format_double(k)
              << "\n"
              << "sharpe_sq_star_1 = " << labb::format_double(s1)
              << "   sharpe_sq_star_2 = " << labb::format_double(s2) << "\n"
              << "sharpe_sq_ew_1   = " << labb::format_double(ew1)
              << "   sharpe_sq_ew_2   = " << labb::format_double(ew2) << "\n"
              << "delta = " << labb::format_double(delta) << "\n"
              << "mc estimated spread = " << labb::format_double(mc.estimated_spread_mean)
              << " +- " << labb::format_double(mc.estimated_spread_se) << " ("
              << mc.trials_used << " trials, " << mc.trials_discarded << " discarded)\n"
              << "mc delta = " << labb::format_double(mc.delta_mc) << " +- "
              << labb::format_double(mc.delta_se) << "\n"
              << "dataset 1: EW sharpe " << labb::format_double(cmp1.equal_weight_sharpe)
              << " vs markowitz-rule " << labb::format_double(cmp1.markowitz_mean_sharpe)
              << " +- " << labb::format_double(cmp1.markowitz_se) << "\n"
              << "dataset 2: EW sharpe " << labb::format_double(cmp2.equal_weight_sharpe)
              << " vs markowitz-rule " << labb::format_double(cmp2.markowitz_mean_sharpe)
              << " +- " << labb::format_double(cmp2.markowitz_se) << "\n";

    if (!out_dir.empty()) {
        ensure_output_dir(out_dir);
        auto mc_json = [](const labb::McSharpeComparison& c) {
            return json{{"equal_weight_sharpe", c.equal_weight_sharpe},
                        {"markowitz_mean_sharpe", c.markowitz_mean_sharpe},
                        {"markowitz_se", c.markowitz_se},
                        {"trials_used", c.trials_used},
                        {"trials_discarded", c.trials_discarded}};
        };
        json j = {{"model",
                   {{"gamma", model.gamma}, {"T", model.T}, {"N", model.N}}},
                  {"k_factor", k},
                  {"sharpe_sq_star", {{"dataset1", s1}, {"dataset2", s2}}},
                  {"sharpe_sq_ew", {{"dataset1", ew1}, {"dataset2", ew2}}},
                  {"weight_quadratic_form", {{"dataset1", wq1}, {"dataset2", wq2}}},
                  {"delta", delta},
                  {"monte_carlo",
                   {{"trials", trials},
                    {"seed", seed},
                    {"estimated_spread_mean", mc.estimated_spread_mean},
                    {"estimated_spread_se", mc.estimated_spread_se},
                    {"true_spread", mc.true_spread},
                    {"delta_mc", mc.delta_mc},
                    {"delta_se", mc.delta_se},
                    {"trials_used", mc.trials_used},
                    {"trials_discarded", mc.trials_discarded}}},
                  {"ew_vs_markowitz",
                   {{"trials", ew_trials}, {"dataset1", mc_json(cmp1)},
                    {"dataset2", mc_json(cmp2)}}}};
        labb::write_json_file(j, (fs::path(out_dir) / "theory_report.json").string());
        std::cout << "wrote " << (fs::path(out_dir) / "theory_report.json").string() << "\n";
    }
    return 0;
}

// --- random-bench -----------------------------------------------------------

int cmd_random_bench(const std::string& data_path, const std::string& candidate_path,
                     const std::string& period_text, const std::string& mode_text, int top_n,
                     labb::RandomStrategyConfig config, unsigned threads, bool write_curves,
                     const std::string& out_dir) {
    labb::MarketDataset ds = labb::ingest_csv_file(data_path);
    std::vector<Period> periods = parse_periods(period_text);
    if (periods.size() != 1)
        throw labb::ValidationError("random-bench takes exactly one period");
    Period p = snap_to_calendar(ds, periods[0]);
    labb::UniverseMode mode = mode_text == "ex_ante" ? labb::UniverseMode::ex_ante
                              : mode_text == "ex_post"
                                  ? labb::UniverseMode::ex_post
                                  : throw labb::ValidationError("mode must be ex_ante or ex_post");
    config.universe = labb::select_period_universe(ds, p.start, p.end, top_n, mode);

    json candidate = labb::read_json_file(candidate_path);
    if (!candidate.contains("sharpe") || !candidate.contains("cagr"))
        throw labb::ValidationError(candidate_path +
                                    ": candidate file needs 'sharpe' and 'cagr' fields");
    double cand_sharpe = candidate.at("sharpe").get<double>();
    double cand_cagr = candidate.at("cagr").get<double>();

    labb::EnsembleReport ensemble = labb::run_ensemble(ds, config, threads);
    double pct_sharpe = labb::percentile_score(cand_sharpe, ensemble, labb::MetricKind::sharpe);
    double pct_cagr = labb::percentile_score(cand_cagr, ensemble, labb::MetricKind::cagr);

    std::cout << "ensemble: mean cagr " << labb::format_double(ensemble.mean_cagr) << " +- "
              << labb::format_double(ensemble.std_cagr) << ", mean sharpe "
              << labb::format_double(ensemble.mean_sharpe) << " +- "
              << labb::format_double(ensemble.std_sharpe) << "\n"
              << "realized leverage " << labb::format_double(ensemble.realized_mean_leverage)
              << ", realized holding days "
              << labb::format_double(ensemble.realized_mean_holding_days) << "\n"
              << "candidate percentile: sharpe " << labb::format_double(pct_sharpe)
              << ", cagr " << labb::format_double(pct_cagr) << "\n";

    ensure_output_dir(out_dir);
    json j = labb::to_json(ensemble);
    j["candidate"] = {{"sharpe", cand_sharpe},
                      {"cagr", cand_cagr},
                      {"percentile_sharpe", pct_sharpe},
                      {"percentile_cagr", pct_cagr}};
    labb::write_json_file(j, (fs::path(out_dir) / "random_bench_report.json").string());
    if (write_curves)
        for (std::size_t i = 0; i < ensemble.runs.size(); ++i)
            labb::write_equity_csv(
                ensemble.runs[i].curve,
                (fs::path(out_dir) / ("random_run_" + std::to_string(i) + ".csv")).string());
    std::cout << "wrote " << (fs::path(out_dir) / "random_bench_report.json").string() << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"look-ahead benchmark bias toolkit"};
    app.require_subcommand(1);

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate a market data file");
    std::string in_data, in_report, in_outdir = ".";
    uint64_t in_seed = 1;
    ingest->add_option("--data", in_data, "market data csv")->required();
    ingest->add_option("--report", in_report, "write a summary report (json)");
    ingest->add_option("--output-dir", in_outdir, "output directory (unused)");
    ingest->add_option("--seed", in_seed, "seed (unused; ingest is deterministic)");
    ingest->set_config("--config");

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic market");
    labb::SynthConfig sc;
    std::string sy_outdir = ".", sy_name = "market";
    std::string sy_quantiles = "3.3:0.25,14:0.75,34:0.95";
    std::string sy_base_date = "1970-01-05";
    synth->add_option("--firms", sc.n_firms_initial, "initial listed firms");
    synth->add_option("--horizon-years", sc.horizon_years, "market horizon in years");
    synth->add_option("--tdpy", sc.trading_days_per_year, "trading days per year");
    synth->add_option("--drift", sc.annual_drift, "annual drift");
    synth->add_option("--vol", sc.annual_volatility, "annual volatility");
    synth->add_option("--cap-mu", sc.cap_lognormal_mu, "log median initial cap");
    synth->add_option("--cap-sigma", sc.cap_lognormal_sigma, "initial cap log-sd");
    synth->add_option("--entry-rate", sc.entry_rate_per_year, "new listings per year");
    synth->add_option("--seed", sc.seed, "generation seed");
    synth->add_flag("--inject-splits", sc.inject_splits, "inject 2-for-1 splits");
    synth->add_option("--base-date", sy_base_date, "calendar base date");
    synth->add_option("--hazard-quantiles", sy_quantiles,
                      "exit quantiles YEARS:FRACTION[,..]");
    synth->add_option("--output-dir", sy_outdir, "output directory");
    synth->add_option("--name", sy_name, "dataset base name");
    synth->set_config("--config");

    // backtest
    auto* backtest = app.add_subcommand("backtest", "ex-ante vs ex-post backtest");
    std::string bt_data, bt_periods, bt_weighting = "equal", bt_policy = "cash_at_zero";
    std::string bt_rf, bt_freq = "annual", bt_outdir = ".";
    int bt_topn = 500;
    uint64_t bt_seed = 1;
    backtest->add_option("--data", bt_data, "market data csv")->required();
    backtest->add_option("--periods", bt_periods, "START:END[,START:END..]")->required();
    backtest->add_option("--top-n", bt_topn, "universe size");
    backtest->add_option("--weighting", bt_weighting, "equal|value|price");
    backtest->add_option("--delisting-policy", bt_policy, "cash_at_zero|redistribute");
    backtest->add_option("--risk-free", bt_rf, "risk-free rate csv (date,rate)");
    backtest->add_option("--t-test-frequency", bt_freq, "daily|monthly|annual");
    backtest->add_option("--output-dir", bt_outdir, "output directory");
    backtest->add_option("--seed", bt_seed, "seed (unused; backtest is deterministic)");
    backtest->set_config("--config");

    // theory
    auto* theory = app.add_subcommand("theory", "estimation-bias analysis");
    std::string th_model, th_outdir;
    long th_trials = 100000, th_ew_trials = 10000;
    uint64_t th_seed = 1;
    unsigned th_threads = 1;
    theory->add_option("--model", th_model, "model file")->required();
    theory->add_option("--trials", th_trials, "monte-carlo trials");
    theory->add_option("--ew-trials", th_ew_trials, "EW-vs-markowitz trials");
    theory->add_option("--seed", th_seed, "monte-carlo seed");
    theory->add_option("--threads", th_threads, "worker threads");
    theory->add_option("--output-dir", th_outdir, "output directory (optional)");
    theory->set_config("--config");

    // random-bench
    auto* bench = app.add_subcommand("random-bench", "score a strategy against random ones");
    std::string rb_data, rb_candidate, rb_period, rb_mode = "ex_post", rb_outdir = ".";
    std::string rb_duration = "geometric";
    int rb_topn = 500;
    unsigned rb_threads = 1;
    bool rb_curves = false;
    labb::RandomStrategyConfig rb_config;
    bench->add_option("--data", rb_data, "market data csv")->required();
    bench->add_option("--candidate", rb_candidate, "candidate metrics json")->required();
    bench->add_option("--period", rb_period, "START:END")->required();
    bench->add_option("--mode", rb_mode, "universe mode: ex_ante|ex_post");
    bench->add_option("--top-n", rb_topn, "universe size");
    bench->add_option("--leverage", rb_config.target_mean_leverage, "target mean leverage");
    bench->add_option("--holding-days", rb_config.mean_holding_days, "mean holding days");
    bench->add_option("--positions-max", rb_config.positions_max, "position slots");
    bench->add_option("--ensemble-size", rb_config.ensemble_size, "number of random runs");
    bench->add_option("--duration-model", rb_duration, "geometric|fixed");
    bench->add_option("--seed", rb_config.master_seed, "ensemble master seed");
    bench->add_option("--threads", rb_threads, "worker threads");
    bench->add_flag("--write-curves", rb_curves, "write per-run equity curves");
    bench->add_option("--output-dir", rb_outdir, "output directory");
    bench->set_config("--config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (*ingest)
            return cmd_ingest(in_data, in_report);
        if (*synth) {
            sc.base_date = labb::Date::parse(sy_base_date);
            return cmd_synth(sc, sy_quantiles, sy_outdir, sy_name);
        }
        if (*backtest)
            return cmd_backtest(bt_data, bt_periods, bt_topn, bt_weighting, bt_policy, bt_rf,
                                bt_freq, bt_outdir);
        if (*theory)
            return cmd_theory(th_model, th_trials, th_ew_trials, th_seed, th_threads,
                              th_outdir);
        if (*bench) {
            rb_config.duration_model = rb_duration == "fixed" ? labb::DurationModel::fixed
                                       : rb_duration == "geometric"
                                           ? labb::DurationModel::geometric
                                           : throw labb::ValidationError(
                                                 "duration-model must be geometric or fixed");
            return cmd_random_bench(rb_data, rb_candidate, rb_period, rb_mode, rb_topn,
                                    rb_config, rb_threads, rb_curves, rb_outdir);
        }
    } catch (const labb::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const labb::DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
