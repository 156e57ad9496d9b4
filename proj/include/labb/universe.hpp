#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "labb/marketdata.hpp"

namespace labb {

enum class UniverseMode { ex_ante, ex_post };

inline const char* to_string(UniverseMode m) {
    return m == UniverseMode::ex_ante ? "ex_ante" : "ex_post";
}

struct UniverseMember {
    std::string id;
    int cap_rank = 0;
    double market_cap = 0.0;

    friend bool operator==(const UniverseMember&, const UniverseMember&) = default;
};

// Constituent set selected by market-cap rank as of a date. Members are
// ordered by descending cap, ranks 1..size.
struct UniverseSnapshot {
    Date as_of;
    UniverseMode mode = UniverseMode::ex_ante;
    int n_requested = 0;
    std::vector<UniverseMember> members;
    Date period_start;
    Date period_end;
    int dropped_untradable = 0; // ex-post constituents without a start price

    friend bool operator==(const UniverseSnapshot&, const UniverseSnapshot&) = default;
};

// Deterministic selection order: larger cap first, ties by lexicographic id.
inline bool cap_rank_before(const UniverseMember& a, const UniverseMember& b) {
    if (a.market_cap != b.market_cap)
        return a.market_cap > b.market_cap;
    return a.id < b.id;
}

// The n securities with the largest market cap at `date`; fewer than n
// active securities means all of them.
inline UniverseSnapshot top_n_by_cap(const MarketDataset& dataset, Date date, int n) {
    if (n < 1)
        throw DomainError("universe size must be at least 1");
    dataset.require_calendar_date(date);

    std::vector<UniverseMember> all;
    for (const auto& rec : dataset.securities())
        if (auto cap = rec.try_market_cap(date))
            all.push_back({rec.id(), 0, *cap});
    std::sort(all.begin(), all.end(), cap_rank_before);
    if (static_cast<int>(all.size()) > n)
        all.resize(static_cast<std::size_t>(n));
    for (std::size_t i = 0; i < all.size(); ++i)
        all[i].cap_rank = static_cast<int>(i) + 1;

    UniverseSnapshot snap;
    snap.as_of = date;
    snap.mode = UniverseMode::ex_ante;
    snap.n_requested = n;
    snap.members = std::move(all);
    snap.period_start = date;
    snap.period_end = date;
    return snap;
}

// Period constituents: ex_ante ranks at the period start; ex_post ranks at
// the period end and then drops members that cannot be bought at the start
// (not listed there), recording how many were removed.
inline UniverseSnapshot select_period_universe(const MarketDataset& dataset, Date start,
                                               Date end, int n, UniverseMode mode) {
    if (!(start < end))
        throw DomainError("period start must precede period end");
    dataset.require_calendar_date(start);
    dataset.require_calendar_date(end);

    UniverseSnapshot snap = top_n_by_cap(dataset, mode == UniverseMode::ex_ante ? start : end, n);
    snap.mode = mode;
    snap.period_start = start;
    snap.period_end = end;

    if (mode == UniverseMode::ex_post) {
        std::size_t before = snap.members.size();
        std::erase_if(snap.members, [&](const UniverseMember& m) {
            return !dataset.security(m.id).listed_on(start);
        });
        snap.dropped_untradable = static_cast<int>(before - snap.members.size());
        for (std::size_t i = 0; i < snap.members.size(); ++i)
            snap.members[i].cap_rank = static_cast<int>(i) + 1;
    }
    if (snap.members.empty())
        throw DomainError("empty universe for period " + start.to_string() + " .. " +
                          end.to_string());
    return snap;
}

} // namespace labb
