#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "labb/csv.hpp"
#include "labb/dates.hpp"
#include "labb/errors.hpp"

namespace labb {

// One listed firm: daily close/split series plus a sparser shares-outstanding
// series. Bars are strictly ordered; the first and last bar define the
// listing and delisting dates.
class SecurityRecord {
public:
    SecurityRecord() = default;
    explicit SecurityRecord(std::string id) : id_(std::move(id)) {}

    const std::string& id() const { return id_; }
    std::size_t bar_count() const { return dates_.size(); }
    bool empty() const { return dates_.empty(); }

    Date listing_date() const { return dates_.front(); }
    Date delisting_date() const { return dates_.back(); }
    bool listed_on(Date d) const {
        return !empty() && listing_date() <= d && d <= delisting_date();
    }

    std::span<const Date> bar_dates() const { return dates_; }
    std::span<const double> closes() const { return closes_; }
    std::span<const double> split_factors() const { return splits_; }
    std::span<const Date> shares_dates() const { return shares_dates_; }
    std::span<const double> shares_counts() const { return shares_; }

    // Index of the latest bar dated on or before d, if any.
    std::optional<std::size_t> bar_at_or_before(Date d) const {
        auto it = std::upper_bound(dates_.begin(), dates_.end(), d);
        if (it == dates_.begin())
            return std::nullopt;
        return static_cast<std::size_t>(it - dates_.begin() - 1);
    }

    // Raw close at d; the last close carries forward over missing bars
    // inside the listed range.
    double raw_close(Date d) const {
        require_listed(d);
        return closes_[*bar_at_or_before(d)];
    }

    // Split-adjusted close: the raw close divided by the cumulative product
    // of split factors dated after d, so a fixed adjusted-share position is
    // continuous across splits. Carries forward like raw_close.
    double adjusted_close(Date d) const {
        require_listed(d);
        return adjusted_at(*bar_at_or_before(d));
    }

    double adjusted_at(std::size_t bar_index) const {
        return adjusted_.empty() ? closes_[bar_index] : adjusted_[bar_index];
    }

    // Most recent shares-outstanding observation on or before d.
    std::optional<double> shares_outstanding(Date d) const {
        auto it = std::upper_bound(shares_dates_.begin(), shares_dates_.end(), d);
        if (it == shares_dates_.begin())
            return std::nullopt;
        return shares_[static_cast<std::size_t>(it - shares_dates_.begin() - 1)];
    }

    // Raw close times forward-filled shares outstanding; empty when no
    // shares observation exists yet.
    std::optional<double> try_market_cap(Date d) const {
        if (!listed_on(d))
            return std::nullopt;
        auto sh = shares_outstanding(d);
        if (!sh)
            return std::nullopt;
        return raw_close(d) * *sh;
    }

    double market_cap(Date d) const {
        require_listed(d);
        auto sh = shares_outstanding(d);
        if (!sh)
            throw DomainError("market cap undefined for '" + id_ + "' on " + d.to_string() +
                              ": no shares observation on or before that date");
        return raw_close(d) * *sh;
    }

    friend bool operator==(const SecurityRecord&, const SecurityRecord&) = default;

private:
    friend class DatasetBuilder;

    void require_listed(Date d) const {
        if (!listed_on(d))
            throw DomainError("security '" + id_ + "' not listed on " + d.to_string());
    }

    std::string id_;
    std::vector<Date> dates_;
    std::vector<double> closes_;
    std::vector<double> splits_;
    std::vector<double> adjusted_; // empty when every split factor is 1
    std::vector<Date> shares_dates_;
    std::vector<double> shares_;
};

// Immutable collection of SecurityRecords plus the union trading calendar.
// Safe to share across threads once built.
class MarketDataset {
public:
    std::size_t size() const { return securities_.size(); }
    std::span<const SecurityRecord> securities() const { return securities_; }
    std::span<const Date> calendar() const { return calendar_; }

    const SecurityRecord* find(std::string_view id) const {
        auto it = index_.find(std::string(id));
        return it == index_.end() ? nullptr : &securities_[it->second];
    }

    const SecurityRecord& security(std::string_view id) const {
        const SecurityRecord* rec = find(id);
        if (!rec)
            throw DomainError("unknown security '" + std::string(id) + "'");
        return *rec;
    }

    bool calendar_contains(Date d) const {
        return std::binary_search(calendar_.begin(), calendar_.end(), d);
    }

    void require_calendar_date(Date d) const {
        if (!calendar_contains(d))
            throw DomainError("date " + d.to_string() + " is not a trading date in this dataset");
    }

    // All securities listed on d with a defined market cap, sorted by id.
    std::vector<std::string> active_universe(Date d) const {
        require_calendar_date(d);
        std::vector<std::string> ids;
        for (const auto& rec : securities_)
            if (rec.try_market_cap(d))
                ids.push_back(rec.id());
        std::sort(ids.begin(), ids.end());
        return ids;
    }

    // First calendar date >= d (for snapping period boundaries).
    std::optional<Date> calendar_at_or_after(Date d) const {
        auto it = std::lower_bound(calendar_.begin(), calendar_.end(), d);
        if (it == calendar_.end())
            return std::nullopt;
        return *it;
    }

    // Last calendar date <= d.
    std::optional<Date> calendar_at_or_before(Date d) const {
        auto it = std::upper_bound(calendar_.begin(), calendar_.end(), d);
        if (it == calendar_.begin())
            return std::nullopt;
        return *(it - 1);
    }

    void write_csv(std::ostream& out) const;
    void write_csv(const std::string& path) const;

    friend bool operator==(const MarketDataset&, const MarketDataset&);

private:
    friend class DatasetBuilder;

    std::vector<SecurityRecord> securities_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<Date> calendar_;
};

inline bool operator==(const MarketDataset& a, const MarketDataset& b) {
    return a.securities_ == b.securities_ && a.calendar_ == b.calendar_;
}

// Single validation path for both CSV ingestion and synthetic generation.
// Bars for a security must arrive in strictly increasing date order.
class DatasetBuilder {
public:
    void add_bar(std::string_view security_id, Date date, double close, double split_factor,
                 std::optional<double> shares, std::string_view where = {}) {
        if (!(close > 0.0))
            throw ValidationError(diag(where, "non-positive close for '" +
                                              std::string(security_id) + "'"));
        if (!(split_factor > 0.0))
            throw ValidationError(diag(where, "non-positive split factor for '" +
                                              std::string(security_id) + "'"));
        if (shares && !(*shares > 0.0))
            throw ValidationError(diag(where, "non-positive shares outstanding for '" +
                                              std::string(security_id) + "'"));
        SecurityRecord& rec = record(security_id);
        if (!rec.dates_.empty()) {
            if (date == rec.dates_.back())
                throw ValidationError(diag(where, "duplicate date " + date.to_string() +
                                                  " for '" + std::string(security_id) + "'"));
            if (date < rec.dates_.back())
                throw ValidationError(diag(where, "out-of-order date " + date.to_string() +
                                                  " for '" + std::string(security_id) + "'"));
        }
        rec.dates_.push_back(date);
        rec.closes_.push_back(close);
        rec.splits_.push_back(split_factor);
        if (shares) {
            rec.shares_dates_.push_back(date);
            rec.shares_.push_back(*shares);
        }
    }

    MarketDataset build() {
        MarketDataset ds;
        ds.securities_.reserve(records_.size());
        std::vector<Date> all_dates;
        for (auto& rec : records_) {
            if (rec.empty())
                throw ValidationError("security '" + rec.id_ + "' has no bars");
            finalize_adjustment(rec);
            all_dates.insert(all_dates.end(), rec.dates_.begin(), rec.dates_.end());
            ds.index_.emplace(rec.id_, ds.securities_.size());
            ds.securities_.push_back(std::move(rec));
        }
        records_.clear();
        record_index_.clear();
        std::sort(all_dates.begin(), all_dates.end());
        all_dates.erase(std::unique(all_dates.begin(), all_dates.end()), all_dates.end());
        ds.calendar_ = std::move(all_dates);
        return ds;
    }

private:
    static std::string diag(std::string_view where, std::string msg) {
        return where.empty() ? msg : std::string(where) + ": " + msg;
    }

    SecurityRecord& record(std::string_view id) {
        auto it = record_index_.find(std::string(id));
        if (it != record_index_.end())
            return records_[it->second];
        record_index_.emplace(std::string(id), records_.size());
        records_.emplace_back(std::string(id));
        return records_.back();
    }

    // Backward adjustment: divide each close by the product of split
    // factors dated strictly after it.
    static void finalize_adjustment(SecurityRecord& rec) {
        bool any_split = std::any_of(rec.splits_.begin(), rec.splits_.end(),
                                     [](double f) { return f != 1.0; });
        if (!any_split)
            return;
        rec.adjusted_.assign(rec.closes_.size(), 0.0);
        double cum = 1.0;
        for (std::size_t i = rec.closes_.size(); i-- > 0;) {
            rec.adjusted_[i] = rec.closes_[i] / cum;
            cum *= rec.splits_[i]; // factor on bar i applies to all earlier bars
        }
    }

    std::vector<SecurityRecord> records_;
    std::unordered_map<std::string, std::size_t> record_index_;
};

// Reads the canonical input format: header row then
// security_id,date,close,split_factor,shares_outstanding per (security, day).
inline MarketDataset ingest_csv(std::istream& in, std::string_view source_name = "input") {
    std::string line;
    if (!std::getline(in, line))
        throw ValidationError(std::string(source_name) + ": empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line != "security_id,date,close,split_factor,shares_outstanding")
        throw ValidationError(std::string(source_name) +
                              ": unexpected header '" + line + "'");
    DatasetBuilder builder;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        std::string where = std::string(source_name) + ":" + std::to_string(lineno);
        auto fields = split_csv_line(line);
        if (fields.size() != 5)
            throw ValidationError(where + ": expected 5 fields, got " +
                                  std::to_string(fields.size()));
        if (fields[0].empty())
            throw ValidationError(where + ": empty security_id");
        Date date = Date::parse(fields[1]);
        double close = parse_double(fields[2], "close");
        double split = parse_double(fields[3], "split_factor");
        std::optional<double> shares;
        if (!fields[4].empty())
            shares = static_cast<double>(parse_int(fields[4], "shares_outstanding"));
        builder.add_bar(fields[0], date, close, split, shares, where);
    }
    return builder.build();
}

inline MarketDataset ingest_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ValidationError("cannot open '" + path + "'");
    return ingest_csv(in, path);
}

inline void MarketDataset::write_csv(std::ostream& out) const {
    out << "security_id,date,close,split_factor,shares_outstanding\n";
    for (const auto& rec : securities_) {
        std::size_t next_share = 0;
        auto sdates = rec.shares_dates();
        auto scounts = rec.shares_counts();
        for (std::size_t i = 0; i < rec.bar_count(); ++i) {
            Date d = rec.bar_dates()[i];
            out << rec.id() << ',' << d.to_string() << ',' << format_double(rec.closes()[i])
                << ',' << format_double(rec.split_factors()[i]) << ',';
            if (next_share < sdates.size() && sdates[next_share] == d) {
                out << format_double(scounts[next_share]);
                ++next_share;
            }
            out << '\n';
        }
    }
}

inline void MarketDataset::write_csv(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ValidationError("cannot open '" + path + "' for writing");
    write_csv(out);
    if (!out)
        throw ValidationError("write to '" + path + "' failed");
}

} // namespace labb
