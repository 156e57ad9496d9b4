#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "labb/marketdata.hpp"
#include "labb/rng.hpp"

namespace labb {

// Piecewise-exponential firm-exit model: hazard rate segment_rates[k]
// applies between breakpoints_years[k-1] and breakpoints_years[k], and the
// last rate continues beyond the final breakpoint.
struct HazardModel {
    std::vector<double> breakpoints_years;
    std::vector<double> segment_rates;

    double survival(double years) const {
        if (years <= 0.0)
            return 1.0;
        double log_s = 0.0;
        double prev = 0.0;
        for (std::size_t k = 0; k < breakpoints_years.size(); ++k) {
            double seg_end = breakpoints_years[k];
            if (years <= seg_end) {
                log_s -= segment_rates[k] * (years - prev);
                return std::exp(log_s);
            }
            log_s -= segment_rates[k] * (seg_end - prev);
            prev = seg_end;
        }
        log_s -= segment_rates.back() * (years - prev);
        return std::exp(log_s);
    }

    // Inverse-CDF lifetime draw.
    double sample_lifetime_years(Rng& rng) const {
        double u = rng.uniform01(); // target survival level
        double log_target = std::log(u);
        double log_s = 0.0;
        double prev = 0.0;
        for (std::size_t k = 0; k < breakpoints_years.size(); ++k) {
            double seg_end = breakpoints_years[k];
            double seg_drop = -segment_rates[k] * (seg_end - prev);
            if (log_s + seg_drop <= log_target)
                return prev + (log_s - log_target) / segment_rates[k];
            log_s += seg_drop;
            prev = seg_end;
        }
        return prev + (log_s - log_target) / segment_rates.back();
    }
};

// Solves the piecewise-exponential rates that hit the given cumulative exit
// fractions exactly: S(t_k) = 1 - f_k for quantiles (t_k, f_k).
inline HazardModel calibrate_hazard(std::span<const std::pair<double, double>> quantiles) {
    if (quantiles.empty())
        throw DomainError("hazard calibration needs at least one quantile");
    HazardModel model;
    double prev_t = 0.0;
    double prev_log_s = 0.0;
    for (auto [t, f] : quantiles) {
        if (!(t > prev_t))
            throw DomainError("hazard quantile years must be strictly increasing");
        if (!(f > 0.0) || !(f < 1.0))
            throw DomainError("hazard exit fractions must lie in (0,1)");
        double log_s = std::log1p(-f);
        if (!(log_s < prev_log_s))
            throw DomainError("hazard exit fractions must be strictly increasing");
        model.breakpoints_years.push_back(t);
        model.segment_rates.push_back((prev_log_s - log_s) / (t - prev_t));
        prev_t = t;
        prev_log_s = log_s;
    }
    return model;
}

// The firm-exit quantiles reported for the 1926-2006 listed-stock universe.
inline HazardModel default_hazard() {
    const std::pair<double, double> q[] = {{3.3, 0.25}, {14.0, 0.75}, {34.0, 0.95}};
    return calibrate_hazard(q);
}

struct SynthConfig {
    int n_firms_initial = 1000;
    double horizon_years = 80.0;
    int trading_days_per_year = 252;
    double annual_drift = 0.05;
    double annual_volatility = 0.30;
    double cap_lognormal_mu = std::log(1e9); // log median initial cap
    double cap_lognormal_sigma = 1.0;
    double entry_rate_per_year = 0.0; // Poisson arrivals of new listings
    uint64_t seed = 1;
    bool inject_splits = false; // test hook: occasional 2-for-1 splits
    Date base_date = Date::from_ymd(1970, 1, 5);

    void validate() const {
        if (n_firms_initial < 1)
            throw ValidationError("n_firms_initial must be at least 1");
        if (!(horizon_years > 0.0))
            throw ValidationError("horizon_years must be positive");
        if (trading_days_per_year < 1 || trading_days_per_year > 365)
            throw ValidationError("trading_days_per_year must be in [1, 365]");
        if (!(annual_volatility > 0.0))
            throw ValidationError("annual_volatility must be positive");
        if (entry_rate_per_year < 0.0)
            throw ValidationError("entry_rate_per_year cannot be negative");
        if (!(cap_lognormal_sigma >= 0.0))
            throw ValidationError("cap_lognormal_sigma cannot be negative");
    }
};

namespace detail {

// Synthetic trading calendar: day i maps to base + round(i * 365.25/tdpy)
// so trading-day counts and calendar years stay mutually consistent.
inline Date synth_date(Date base, int day_index, int tdpy) {
    double offset = static_cast<double>(day_index) * 365.25 / static_cast<double>(tdpy);
    return base + static_cast<int32_t>(std::llround(offset));
}

} // namespace detail

// Generates a CRSP-shaped market: each firm follows an independent geometric
// Brownian motion, lifetimes come from the hazard model, entries arrive as a
// Poisson process, and shares outstanding are constant per firm (reported
// monthly). Firm paths use per-firm substreams of `seed`.
inline MarketDataset simulate_market(const SynthConfig& config, const HazardModel& hazard) {
    config.validate();
    const int tdpy = config.trading_days_per_year;
    const int horizon_days =
        static_cast<int>(std::lround(config.horizon_years * static_cast<double>(tdpy)));
    if (horizon_days < 2)
        throw ValidationError("horizon too short");

    // Listing day for every firm: the initial cohort plus Poisson entrants.
    std::vector<int> listing_days(static_cast<std::size_t>(config.n_firms_initial), 0);
    if (config.entry_rate_per_year > 0.0) {
        Rng entry_rng = Rng::substream(config.seed, 0x656e747279ULL); // dedicated stream
        double t_years = 0.0;
        for (;;) {
            t_years += entry_rng.exponential(config.entry_rate_per_year);
            int day = static_cast<int>(std::floor(t_years * tdpy));
            if (day >= horizon_days - 1)
                break;
            listing_days.push_back(day);
        }
    }

    const double dt = 1.0 / static_cast<double>(tdpy);
    const double log_step_drift =
        (config.annual_drift - 0.5 * config.annual_volatility * config.annual_volatility) * dt;
    const double log_step_vol = config.annual_volatility * std::sqrt(dt);
    const double base_price = 10.0;

    DatasetBuilder builder;
    for (std::size_t f = 0; f < listing_days.size(); ++f) {
        Rng rng = Rng::substream(config.seed, f + 1);
        std::string id = "F" + std::to_string(f);

        double cap = std::exp(config.cap_lognormal_mu + config.cap_lognormal_sigma * rng.normal());
        double shares = std::max(1.0, std::round(cap / base_price));
        double lifetime_years = hazard.sample_lifetime_years(rng);
        int lifetime_days = std::max(1, static_cast<int>(std::lround(lifetime_years * tdpy)));

        int first_day = listing_days[f];
        int last_day = std::min(first_day + lifetime_days, horizon_days - 1);

        int split_day = -1;
        if (config.inject_splits && rng.uniform01() < 0.5 && last_day - first_day >= 3)
            split_day = first_day + 1 +
                        static_cast<int>(rng.uniform_int(
                            static_cast<uint64_t>(last_day - first_day - 1)));

        double log_price = std::log(base_price);
        double split_divisor = 1.0;
        long last_obs_month = -1;
        for (int day = first_day; day <= last_day; ++day) {
            if (day > first_day)
                log_price += log_step_drift + log_step_vol * rng.normal();
            double split_factor = 1.0;
            if (day == split_day) {
                split_factor = 2.0;
                split_divisor *= 2.0;
            }
            Date d = detail::synth_date(config.base_date, day, tdpy);
            double close = std::exp(log_price) / split_divisor;
            std::optional<double> share_obs;
            long month_key = d.month_key();
            if (month_key != last_obs_month) {
                share_obs = shares * split_divisor;
                last_obs_month = month_key;
            }
            builder.add_bar(id, d, close, split_factor, share_obs);
        }
    }
    return builder.build();
}

// Empirical cumulative exit fractions at the queried horizons, using the
// product-limit (Kaplan-Meier) convention: firms whose last bar falls on the
// dataset's final calendar date are treated as censored, not exited.
inline std::vector<double> survival_quantiles(const MarketDataset& dataset,
                                              std::span<const double> horizons_years) {
    if (dataset.size() == 0)
        throw DomainError("survival_quantiles requires a non-empty dataset");
    Date dataset_end = dataset.calendar().back();

    struct Obs {
        double years;
        bool exited;
    };
    std::vector<Obs> obs;
    obs.reserve(dataset.size());
    for (const auto& rec : dataset.securities()) {
        double years = years_between(rec.listing_date(), rec.delisting_date());
        obs.push_back({years, rec.delisting_date() < dataset_end});
    }
    std::sort(obs.begin(), obs.end(), [](const Obs& a, const Obs& b) {
        return a.years < b.years;
    });

    std::vector<double> out;
    out.reserve(horizons_years.size());
    for (double h : horizons_years) {
        double surv = 1.0;
        std::size_t at_risk = obs.size();
        std::size_t i = 0;
        while (i < obs.size() && obs[i].years <= h) {
            // group ties
            std::size_t j = i;
            std::size_t deaths = 0;
            while (j < obs.size() && obs[j].years == obs[i].years) {
                deaths += obs[j].exited ? 1 : 0;
                ++j;
            }
            if (deaths > 0 && at_risk > 0)
                surv *= 1.0 - static_cast<double>(deaths) / static_cast<double>(at_risk);
            at_risk -= j - i;
            i = j;
        }
        out.push_back(1.0 - surv);
    }
    return out;
}

} // namespace labb
