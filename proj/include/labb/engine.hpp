#pragma once

#include <cmath>
#include <fstream>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "labb/csv.hpp"
#include "labb/universe.hpp"

namespace labb {

enum class Weighting { equal, value, price };
enum class DelistingPolicy { cash_at_zero, redistribute };

inline const char* to_string(Weighting w) {
    switch (w) {
    case Weighting::equal: return "equal";
    case Weighting::value: return "value";
    default: return "price";
    }
}

inline const char* to_string(DelistingPolicy p) {
    return p == DelistingPolicy::cash_at_zero ? "cash_at_zero" : "redistribute";
}

inline Weighting parse_weighting(std::string_view s) {
    if (s == "equal") return Weighting::equal;
    if (s == "value") return Weighting::value;
    if (s == "price") return Weighting::price;
    throw ValidationError("unknown weighting '" + std::string(s) + "'");
}

inline DelistingPolicy parse_delisting_policy(std::string_view s) {
    if (s == "cash_at_zero") return DelistingPolicy::cash_at_zero;
    if (s == "redistribute") return DelistingPolicy::redistribute;
    throw ValidationError("unknown delisting policy '" + std::string(s) + "'");
}

struct PortfolioSpec {
    UniverseSnapshot universe;
    Weighting weighting = Weighting::equal;
    DelistingPolicy delisting_policy = DelistingPolicy::cash_at_zero;
};

struct CurvePoint {
    Date date;
    double value = 0.0;

    friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

// Dated portfolio value series normalized to 1 at the first date.
struct EquityCurve {
    std::vector<CurvePoint> points;
    std::string label;

    Date start_date() const { return points.front().date; }
    Date end_date() const { return points.back().date; }
    double terminal_value() const { return points.back().value; }

    // Per-period simple returns v_t / v_{t-1} - 1.
    std::vector<double> simple_returns() const {
        std::vector<double> r;
        r.reserve(points.size() > 0 ? points.size() - 1 : 0);
        for (std::size_t i = 1; i < points.size(); ++i)
            r.push_back(points[i].value / points[i - 1].value - 1.0);
        return r;
    }

    friend bool operator==(const EquityCurve&, const EquityCurve&) = default;
};

inline void write_equity_csv(const EquityCurve& curve, std::ostream& out) {
    out << "date,value\n";
    for (const auto& p : curve.points)
        out << p.date.to_string() << ',' << format_double(p.value) << '\n';
}

inline void write_equity_csv(const EquityCurve& curve, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ValidationError("cannot open '" + path + "' for writing");
    write_equity_csv(curve, out);
}

// Buy-and-hold simulation. Wealth 1 is allocated at `start` per the
// weighting rule, holdings are frozen in adjusted shares, and the portfolio
// is marked on every calendar date through `end`. A member's position is
// liquidated at its last close on its delisting date; proceeds either sit in
// zero-interest cash or are redistributed across survivors at the next
// trading day's marks.
inline EquityCurve run_buy_and_hold(const MarketDataset& dataset, const PortfolioSpec& spec,
                                    Date start, Date end, std::string label = {}) {
    if (spec.universe.members.empty())
        throw DomainError("portfolio universe is empty");
    if (!(start < end))
        throw DomainError("period start must precede period end");
    dataset.require_calendar_date(start);
    dataset.require_calendar_date(end);

    struct Position {
        const SecurityRecord* rec;
        double shares = 0.0; // adjusted shares
        double weight = 0.0;
        bool open = false;
    };

    std::vector<Position> pos;
    pos.reserve(spec.universe.members.size());
    for (const auto& m : spec.universe.members) {
        const SecurityRecord& rec = dataset.security(m.id);
        if (!rec.listed_on(start))
            throw std::logic_error("universe member '" + m.id +
                                   "' is not tradable at period start " + start.to_string());
        pos.push_back({&rec, 0.0, 0.0, true});
    }

    // Weights per the allocation rule.
    double total = 0.0;
    for (auto& p : pos) {
        switch (spec.weighting) {
        case Weighting::equal: p.weight = 1.0; break;
        case Weighting::value: p.weight = p.rec->market_cap(start); break;
        case Weighting::price: p.weight = p.rec->raw_close(start); break;
        }
        total += p.weight;
    }
    for (auto& p : pos) {
        p.weight /= total;
        p.shares = p.weight / p.rec->adjusted_close(start);
    }

    auto cal = dataset.calendar();
    auto first = std::lower_bound(cal.begin(), cal.end(), start);
    auto last = std::upper_bound(cal.begin(), cal.end(), end);

    EquityCurve curve;
    curve.label = std::move(label);
    curve.points.reserve(static_cast<std::size_t>(last - first));

    double cash = 0.0;
    double pending_redistribution = 0.0;
    for (auto it = first; it != last; ++it) {
        Date d = *it;

        // Redeploy yesterday's delisting proceeds at today's marks.
        if (pending_redistribution > 0.0) {
            double open_value = 0.0;
            for (const auto& p : pos)
                if (p.open)
                    open_value += p.shares * p.rec->adjusted_close(d);
            if (open_value > 0.0) {
                for (auto& p : pos) {
                    if (!p.open)
                        continue;
                    double px = p.rec->adjusted_close(d);
                    double slice = pending_redistribution * (p.shares * px) / open_value;
                    p.shares += slice / px;
                }
            } else {
                cash += pending_redistribution; // no survivors; flagged by all-cash curve
            }
            pending_redistribution = 0.0;
        }

        double value = cash;
        for (auto& p : pos) {
            if (!p.open)
                continue;
            value += p.shares * p.rec->adjusted_close(d);
            if (p.rec->delisting_date() <= d && d < end) {
                double proceeds = p.shares * p.rec->adjusted_close(d);
                if (spec.delisting_policy == DelistingPolicy::cash_at_zero)
                    cash += proceeds;
                else
                    pending_redistribution += proceeds;
                p.open = false;
            }
        }
        curve.points.push_back({d, value});
    }
    curve.points.front().value = 1.0; // allocation sums to 1 by construction
    return curve;
}

// Pointwise ratio of two curves on the same date grid, renormalized to 1 at
// the first date.
inline EquityCurve long_short_ratio(const EquityCurve& long_leg, const EquityCurve& short_leg,
                                    std::string label = {}) {
    if (long_leg.points.size() != short_leg.points.size())
        throw DomainError("long and short curves have different lengths");
    for (std::size_t i = 0; i < long_leg.points.size(); ++i)
        if (long_leg.points[i].date != short_leg.points[i].date)
            throw DomainError("long and short curves are on different date grids");
    EquityCurve out;
    out.label = std::move(label);
    out.points.reserve(long_leg.points.size());
    double base = 0.0;
    for (std::size_t i = 0; i < long_leg.points.size(); ++i) {
        double denom = short_leg.points[i].value;
        if (denom == 0.0)
            throw DomainError("short curve hits zero on " +
                              short_leg.points[i].date.to_string());
        double ratio = long_leg.points[i].value / denom;
        if (i == 0) {
            base = ratio;
            out.points.push_back({long_leg.points[i].date, 1.0});
        } else {
            out.points.push_back({long_leg.points[i].date, ratio / base});
        }
    }
    return out;
}

// Multiplicative chaining of consecutive period curves: each curve is scaled
// by the terminal value of the chain so far.
inline EquityCurve chain_periods(std::span<const EquityCurve> curves, std::string label = {}) {
    if (curves.empty())
        throw DomainError("no curves to chain");
    EquityCurve out;
    out.label = std::move(label);
    double scale = 1.0;
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto& curve = curves[c];
        if (curve.points.empty())
            throw DomainError("cannot chain an empty curve");
        if (c > 0 && curve.start_date() <= curves[c - 1].end_date())
            throw DomainError("periods overlap or are out of order at curve " +
                              std::to_string(c));
        for (const auto& p : curve.points)
            out.points.push_back({p.date, scale * p.value});
        scale *= curve.terminal_value();
    }
    out.points.front().value = 1.0;
    return out;
}

} // namespace labb
