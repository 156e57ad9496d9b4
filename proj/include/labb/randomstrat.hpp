#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "labb/engine.hpp"
#include "labb/metrics.hpp"
#include "labb/rng.hpp"
#include "labb/parallel.hpp"

namespace labb {

enum class DurationModel { geometric, fixed };

inline const char* to_string(DurationModel m) {
    return m == DurationModel::geometric ? "geometric" : "fixed";
}

enum class MetricKind { sharpe, cagr };

inline MetricKind parse_metric_kind(std::string_view s) {
    if (s == "sharpe") return MetricKind::sharpe;
    if (s == "cagr") return MetricKind::cagr;
    throw ValidationError("unknown metric '" + std::string(s) + "' (expected sharpe or cagr)");
}

// Constraints for an ensemble of random long-only strategies. Positions are
// unit slots: the strategy keeps round(target_mean_leverage * positions_max)
// slots filled with uniformly chosen names for geometric (or fixed) random
// holding periods.
struct RandomStrategyConfig {
    UniverseSnapshot universe;
    double target_mean_leverage = 0.8;
    double mean_holding_days = 9.0;
    int positions_max = 10;
    int ensemble_size = 10;
    uint64_t master_seed = 1;
    DurationModel duration_model = DurationModel::geometric;
    int periods_per_year = 252;

    void validate() const {
        if (!(target_mean_leverage > 0.0) || target_mean_leverage > 1.0)
            throw ValidationError("target_mean_leverage must lie in (0, 1]");
        if (!(mean_holding_days >= 1.0))
            throw ValidationError("mean_holding_days must be at least 1");
        if (positions_max < 1)
            throw ValidationError("positions_max must be at least 1");
        if (ensemble_size < 1)
            throw ValidationError("ensemble_size must be at least 1");
        if (universe.members.empty())
            throw ValidationError("universe is empty");
    }

    int target_open_positions() const {
        int k = static_cast<int>(std::lround(target_mean_leverage * positions_max));
        return std::clamp(k, 1, positions_max);
    }
};

// One planned deal: day indices are offsets into the period's calendar
// slice; exits are truncated at delisting and at the period end.
struct PlannedTrade {
    std::size_t member = 0; // index into universe.members
    int entry_day = 0;
    int exit_day = 0;
};

namespace detail {

inline int draw_holding_days(Rng& rng, DurationModel model, double mean_days) {
    if (model == DurationModel::fixed)
        return std::max(1, static_cast<int>(std::lround(mean_days)));
    double p = 1.0 / mean_days;
    if (p >= 1.0)
        return 1;
    return static_cast<int>(std::ceil(std::log(rng.uniform01()) / std::log1p(-p)));
}

} // namespace detail

// Draws the full trade plan of one run. Entries fire whenever fewer than
// the target number of slots are open, names are uniform over tradable,
// not-yet-held members, and holding periods come from the configured
// duration model. Wealth never enters: the plan depends only on (dataset
// dates, config, run index), which keeps runs reproducible and parallel.
inline std::vector<PlannedTrade> generate_random_run(const MarketDataset& dataset,
                                                     const RandomStrategyConfig& config,
                                                     int run_index) {
    config.validate();
    Date start = config.universe.period_start;
    Date end = config.universe.period_end;
    if (!(start < end))
        throw DomainError("universe period is empty");

    auto cal = dataset.calendar();
    auto first = std::lower_bound(cal.begin(), cal.end(), start);
    auto last = std::upper_bound(cal.begin(), cal.end(), end);
    int n_days = static_cast<int>(last - first);
    if (n_days < 2)
        throw DomainError("period has fewer than 2 trading days");

    struct MemberInfo {
        const SecurityRecord* rec;
        int first_day; // first period day the member is listed
        int last_day;  // last period day with a price
    };
    std::vector<MemberInfo> members;
    members.reserve(config.universe.members.size());
    for (const auto& m : config.universe.members) {
        const SecurityRecord& rec = dataset.security(m.id);
        auto lo = std::lower_bound(first, last, rec.listing_date());
        auto hi = std::upper_bound(first, last, rec.delisting_date());
        members.push_back({&rec, static_cast<int>(lo - first), static_cast<int>(hi - first) - 1});
    }

    Rng rng = Rng::substream(config.master_seed, static_cast<uint64_t>(run_index));
    const int target = config.target_open_positions();

    std::vector<PlannedTrade> plan;
    std::vector<bool> held(members.size(), false);
    struct Open {
        std::size_t member;
        int exit_day;
    };
    std::vector<Open> open;
    std::vector<std::size_t> candidates;

    for (int day = 0; day < n_days - 1; ++day) {
        // Close deals scheduled for today.
        std::erase_if(open, [&](const Open& o) {
            if (o.exit_day != day)
                return false;
            held[o.member] = false;
            return true;
        });
        // Refill slots up to the target.
        while (static_cast<int>(open.size()) < target) {
            candidates.clear();
            for (std::size_t m = 0; m < members.size(); ++m)
                if (!held[m] && members[m].first_day <= day && day < members[m].last_day)
                    candidates.push_back(m);
            if (candidates.empty())
                break;
            std::size_t pick = candidates[rng.uniform_int(candidates.size())];
            int d = detail::draw_holding_days(rng, config.duration_model,
                                              config.mean_holding_days);
            int exit_day = std::min({day + d, members[pick].last_day, n_days - 1});
            plan.push_back({pick, day, exit_day});
            open.push_back({pick, exit_day});
            held[pick] = true;
        }
    }
    return plan;
}

struct RandomRunResult {
    EquityCurve curve;
    MetricsReport metrics;
    double realized_mean_leverage = 0.0;     // time-average invested fraction
    double realized_mean_holding_days = 0.0; // executed deals only
    int n_trades = 0;
};

// Executes a trade plan: fills at daily close, each entry sized to an equal
// slot of current wealth (bounded by cash), idle wealth in zero-interest
// cash.
inline RandomRunResult simulate_random_run(const MarketDataset& dataset,
                                           const RandomStrategyConfig& config,
                                           const std::vector<PlannedTrade>& plan,
                                           std::string label = {}) {
    Date start = config.universe.period_start;
    Date end = config.universe.period_end;
    auto cal = dataset.calendar();
    auto first = std::lower_bound(cal.begin(), cal.end(), start);
    auto last = std::upper_bound(cal.begin(), cal.end(), end);
    int n_days = static_cast<int>(last - first);

    std::vector<const SecurityRecord*> recs;
    recs.reserve(config.universe.members.size());
    for (const auto& m : config.universe.members)
        recs.push_back(&dataset.security(m.id));

    // Group trades by entry/exit day for the single forward pass.
    std::vector<std::vector<std::size_t>> entries_by_day(static_cast<std::size_t>(n_days));
    std::vector<std::vector<std::size_t>> exits_by_day(static_cast<std::size_t>(n_days));
    for (std::size_t i = 0; i < plan.size(); ++i) {
        entries_by_day[static_cast<std::size_t>(plan[i].entry_day)].push_back(i);
        exits_by_day[static_cast<std::size_t>(plan[i].exit_day)].push_back(i);
    }

    std::vector<double> shares(plan.size(), 0.0);
    std::vector<bool> open(plan.size(), false);
    std::vector<std::size_t> active; // open plan indices, kept small

    EquityCurve curve;
    curve.label = std::move(label);
    curve.points.reserve(static_cast<std::size_t>(n_days));

    double cash = 1.0;
    double leverage_sum = 0.0;
    long duration_sum = 0;
    long executed = 0;
    for (int day = 0; day < n_days; ++day) {
        Date d = first[day];
        // Exits at today's close.
        for (std::size_t i : exits_by_day[static_cast<std::size_t>(day)]) {
            if (!open[i])
                continue;
            cash += shares[i] * recs[plan[i].member]->adjusted_close(d);
            open[i] = false;
            duration_sum += plan[i].exit_day - plan[i].entry_day;
            ++executed;
        }
        std::erase_if(active, [&](std::size_t i) { return !open[i]; });
        // Mark surviving positions.
        double invested = 0.0;
        for (std::size_t i : active)
            invested += shares[i] * recs[plan[i].member]->adjusted_close(d);
        // Entries at today's close.
        for (std::size_t i : entries_by_day[static_cast<std::size_t>(day)]) {
            double wealth = cash + invested;
            double size = std::min(wealth / config.positions_max, cash);
            if (size <= 0.0)
                continue;
            double px = recs[plan[i].member]->adjusted_close(d);
            shares[i] = size / px;
            open[i] = true;
            active.push_back(i);
            cash -= size;
            invested += size;
        }
        double wealth = cash + invested;
        leverage_sum += invested / wealth;
        curve.points.push_back({d, wealth});
    }
    curve.points.front().value = 1.0; // day-0 fills convert cash at the same marks

    RandomRunResult res;
    res.n_trades = static_cast<int>(executed);
    res.realized_mean_leverage = leverage_sum / static_cast<double>(n_days);
    res.realized_mean_holding_days =
        executed == 0 ? 0.0 : static_cast<double>(duration_sum) / static_cast<double>(executed);
    res.metrics = compute_metrics(curve, nullptr, config.periods_per_year);
    res.curve = std::move(curve);
    return res;
}

struct EnsembleReport {
    std::vector<RandomRunResult> runs;
    double mean_cagr = 0.0;
    double std_cagr = 0.0;
    double mean_sharpe = 0.0;
    double std_sharpe = 0.0;
    int sharpe_undefined_runs = 0;
    double realized_mean_leverage = 0.0;
    double realized_mean_holding_days = 0.0;
    RandomStrategyConfig config;
};

// Runs the whole ensemble; every run derives its stream from (master_seed,
// run index), so serial and parallel execution agree bit for bit.
inline EnsembleReport run_ensemble(const MarketDataset& dataset,
                                   const RandomStrategyConfig& config, unsigned threads = 1) {
    config.validate();
    EnsembleReport rep;
    rep.config = config;
    rep.runs.resize(static_cast<std::size_t>(config.ensemble_size));
    parallel_for(rep.runs.size(), threads, [&](std::size_t i) {
        auto plan = generate_random_run(dataset, config, static_cast<int>(i));
        rep.runs[i] = simulate_random_run(dataset, config, plan,
                                          "random-run-" + std::to_string(i));
    });

    std::vector<double> cagrs, sharpes;
    double lev = 0.0, dur = 0.0;
    long dur_runs = 0;
    for (const auto& r : rep.runs) {
        cagrs.push_back(r.metrics.cagr_continuous);
        if (r.metrics.sharpe_defined)
            sharpes.push_back(r.metrics.sharpe_annualized);
        lev += r.realized_mean_leverage;
        if (r.n_trades > 0) {
            dur += r.realized_mean_holding_days;
            ++dur_runs;
        }
    }
    rep.mean_cagr = mean(cagrs);
    rep.std_cagr = cagrs.size() > 1 ? sample_stdev(cagrs) : 0.0;
    rep.sharpe_undefined_runs = static_cast<int>(rep.runs.size() - sharpes.size());
    if (!sharpes.empty()) {
        rep.mean_sharpe = mean(sharpes);
        rep.std_sharpe = sharpes.size() > 1 ? sample_stdev(sharpes) : 0.0;
    }
    rep.realized_mean_leverage = lev / static_cast<double>(rep.runs.size());
    rep.realized_mean_holding_days = dur_runs > 0 ? dur / static_cast<double>(dur_runs) : 0.0;
    return rep;
}

// Rank of a candidate metric within the ensemble: percent of runs strictly
// below, with the midpoint convention for ties.
inline double percentile_score(double candidate_value, const EnsembleReport& ensemble,
                               MetricKind metric) {
    long below = 0, equal = 0, total = 0;
    for (const auto& r : ensemble.runs) {
        double v;
        if (metric == MetricKind::sharpe) {
            if (!r.metrics.sharpe_defined)
                continue;
            v = r.metrics.sharpe_annualized;
        } else {
            v = r.metrics.cagr_continuous;
        }
        ++total;
        if (v < candidate_value)
            ++below;
        else if (v == candidate_value)
            ++equal;
    }
    if (total == 0)
        throw DomainError("ensemble has no runs with the requested metric");
    return 100.0 * (static_cast<double>(below) + 0.5 * static_cast<double>(equal)) /
           static_cast<double>(total);
}

} // namespace labb
