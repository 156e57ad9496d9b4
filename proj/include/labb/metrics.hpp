#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "labb/engine.hpp"
#include "labb/stats.hpp"

namespace labb {

// Annual risk-free rates keyed by date, forward-filled when sampled.
struct RiskFreeSeries {
    std::vector<Date> dates;
    std::vector<double> annual_rates;

    // Most recent annual rate on or before d; 0 before the first observation.
    double annual_rate_at(Date d) const {
        auto it = std::upper_bound(dates.begin(), dates.end(), d);
        if (it == dates.begin())
            return 0.0;
        return annual_rates[static_cast<std::size_t>(it - dates.begin() - 1)];
    }
};

// Two-column file: date,annual_rate (decimal, e.g. 0.03).
inline RiskFreeSeries load_risk_free_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open '" + path + "'");
    RiskFreeSeries rf;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || (lineno == 1 && line == "date,rate"))
            continue;
        auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": expected 'date,rate'");
        Date d = Date::parse(fields[0]);
        if (!rf.dates.empty() && d <= rf.dates.back())
            throw ValidationError(path + ":" + std::to_string(lineno) +
                                  ": dates must be strictly increasing");
        rf.dates.push_back(d);
        rf.annual_rates.push_back(parse_double(fields[1], "rate"));
    }
    if (rf.dates.empty())
        throw ValidationError(path + ": no rate observations");
    return rf;
}

// Annualized Sharpe ratio of per-period simple excess returns:
// mean(r) / stdev(r) * sqrt(periods_per_year), sample stdev (n-1).
// `risk_free` may be null for a zero rate.
inline double sharpe(const EquityCurve& curve, const RiskFreeSeries* risk_free,
                     int periods_per_year) {
    if (curve.points.size() < 2)
        throw DomainError("sharpe requires at least 2 curve points");
    if (periods_per_year < 1)
        throw DomainError("periods_per_year must be positive");
    std::vector<double> r = curve.simple_returns();
    if (risk_free) {
        for (std::size_t i = 0; i < r.size(); ++i)
            r[i] -= risk_free->annual_rate_at(curve.points[i + 1].date) /
                    static_cast<double>(periods_per_year);
    }
    double sd = sample_stdev(r);
    if (sd == 0.0)
        throw DomainError("sharpe undefined: zero return standard deviation");
    return mean(r) / sd * std::sqrt(static_cast<double>(periods_per_year));
}

// Continuously compounded annual return ln(v_T / v_0) / years, with years
// measured as calendar days / 365.25.
inline double cagr_continuous(const EquityCurve& curve) {
    if (curve.points.size() < 2)
        throw DomainError("cagr requires at least 2 curve points");
    double v0 = curve.points.front().value;
    double vT = curve.points.back().value;
    if (!(v0 > 0.0) || !(vT > 0.0))
        throw DomainError("cagr requires positive initial and terminal values");
    double years = years_between(curve.start_date(), curve.end_date());
    if (!(years > 0.0))
        throw DomainError("cagr requires a positive period length");
    return std::log(vT / v0) / years;
}

// Largest peak-to-valley decline (running_peak - v) / running_peak, one pass.
inline double max_drawdown(const EquityCurve& curve) {
    if (curve.points.empty())
        throw DomainError("max_drawdown requires at least 1 point");
    double peak = curve.points.front().value;
    double worst = 0.0;
    for (const auto& p : curve.points) {
        peak = std::max(peak, p.value);
        worst = std::max(worst, (peak - p.value) / peak);
    }
    return worst;
}

struct TTestResult {
    double t_statistic = 0.0;
    double p_value = 1.0; // two-sided
    double dof = 0.0;

    friend bool operator==(const TTestResult&, const TTestResult&) = default;
};

// Pooled-variance two-sample t-test for equal means (common unknown
// standard deviation); two-sided p from the Student-t distribution.
inline TTestResult two_sample_t_pooled(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw DomainError("t-test requires at least 2 observations per sample");
    double na = static_cast<double>(a.size());
    double nb = static_cast<double>(b.size());
    double dof = na + nb - 2.0;
    double pooled = ((na - 1.0) * sample_variance(a) + (nb - 1.0) * sample_variance(b)) / dof;
    if (pooled == 0.0)
        throw DomainError("t-test undefined: zero pooled variance");
    double t = (mean(a) - mean(b)) / std::sqrt(pooled * (1.0 / na + 1.0 / nb));
    return {t, student_t_two_sided_p(t, dof), dof};
}

enum class ReturnFrequency { daily, monthly, annual };

inline ReturnFrequency parse_return_frequency(std::string_view s) {
    if (s == "daily") return ReturnFrequency::daily;
    if (s == "monthly") return ReturnFrequency::monthly;
    if (s == "annual") return ReturnFrequency::annual;
    throw ValidationError("unknown frequency '" + std::string(s) +
                          "' (expected daily, monthly or annual)");
}

// Simple returns of the curve sampled at the requested frequency (last
// observation of each bucket), optionally in excess of the risk-free rate
// scaled to the bucket length.
inline std::vector<double> period_returns(const EquityCurve& curve, ReturnFrequency freq,
                                          const RiskFreeSeries* risk_free = nullptr) {
    if (curve.points.size() < 2)
        throw DomainError("need at least 2 curve points");

    auto bucket_key = [&](Date d) -> long {
        switch (freq) {
        case ReturnFrequency::daily: return d.days_since_epoch();
        case ReturnFrequency::monthly: return static_cast<long>(d.year()) * 12 + d.month();
        default: return d.year();
        }
    };
    double rf_scale = freq == ReturnFrequency::daily     ? 1.0 / 252.0
                      : freq == ReturnFrequency::monthly ? 1.0 / 12.0
                                                         : 1.0;

    // Anchor at the period start, then the last observation of each bucket.
    std::vector<CurvePoint> marks;
    marks.push_back(curve.points.front());
    for (std::size_t i = 0; i < curve.points.size(); ++i) {
        bool last_of_bucket = i + 1 == curve.points.size() ||
                              bucket_key(curve.points[i + 1].date) !=
                                  bucket_key(curve.points[i].date);
        if (last_of_bucket && curve.points[i].date != marks.back().date)
            marks.push_back(curve.points[i]);
    }
    std::vector<double> r;
    r.reserve(marks.size() > 0 ? marks.size() - 1 : 0);
    for (std::size_t i = 1; i < marks.size(); ++i) {
        double ret = marks[i].value / marks[i - 1].value - 1.0;
        if (risk_free)
            ret -= risk_free->annual_rate_at(marks[i].date) * rf_scale;
        r.push_back(ret);
    }
    return r;
}

struct MetricsReport {
    double sharpe_annualized = 0.0;
    bool sharpe_defined = false;
    double cagr_continuous = 0.0;
    double max_drawdown = 0.0;
    int n_observations = 0;
    Date period_start;
    Date period_end;
    std::string label;
};

inline MetricsReport compute_metrics(const EquityCurve& curve,
                                     const RiskFreeSeries* risk_free = nullptr,
                                     int periods_per_year = 252) {
    MetricsReport rep;
    rep.label = curve.label;
    rep.n_observations = static_cast<int>(curve.points.size());
    rep.period_start = curve.start_date();
    rep.period_end = curve.end_date();
    rep.cagr_continuous = cagr_continuous(curve);
    rep.max_drawdown = max_drawdown(curve);
    try {
        rep.sharpe_annualized = sharpe(curve, risk_free, periods_per_year);
        rep.sharpe_defined = true;
    } catch (const DomainError&) {
        rep.sharpe_defined = false;
    }
    return rep;
}

} // namespace labb
