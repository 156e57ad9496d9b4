#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "labb/marketdata.hpp"
#include "test_helpers.hpp"

using namespace labb;
using test::kBase;

namespace {

const char* kHeader = "security_id,date,close,split_factor,shares_outstanding\n";

MarketDataset from_csv(const std::string& body) {
    std::string text = std::string(kHeader) + body;
    std::istringstream in(text);
    return ingest_csv(in, "test");
}

} // namespace

TEST_CASE("ingest builds records and calendar", "[marketdata]") {
    auto ds = from_csv("A,2000-01-03,10,1,1000\n"
                       "A,2000-01-04,11,1,\n"
                       "A,2000-01-05,12,1,\n"
                       "B,2000-01-03,5,1,500\n"
                       "B,2000-01-04,6,1,\n"
                       "B,2000-01-05,7,1,\n");
    REQUIRE(ds.size() == 2);
    REQUIRE(ds.calendar().size() == 3);
    REQUIRE(ds.security("A").bar_count() == 3);
    REQUIRE(ds.security("A").listing_date() == Date::parse("2000-01-03"));
    REQUIRE(ds.security("A").delisting_date() == Date::parse("2000-01-05"));
    REQUIRE(ds.security("B").shares_outstanding(Date::parse("2000-01-05")) == 500.0);
}

TEST_CASE("ingest rejects bad rows with line numbers", "[marketdata]") {
    SECTION("zero close") {
        std::string msg =
            test::ingest_error(std::string(kHeader) + "A,2000-01-03,0,1,1000\n");
        REQUIRE(msg.find("test:2") != std::string::npos);
        REQUIRE(msg.find("close") != std::string::npos);
    }
    SECTION("duplicate date") {
        std::string msg = test::ingest_error(std::string(kHeader) +
                                             "A,2000-01-03,10,1,1000\n"
                                             "A,2000-01-03,11,1,\n");
        REQUIRE(msg.find("test:3") != std::string::npos);
        REQUIRE(msg.find("duplicate") != std::string::npos);
    }
    SECTION("out of order date") {
        std::string msg = test::ingest_error(std::string(kHeader) +
                                             "A,2000-01-04,10,1,1000\n"
                                             "A,2000-01-03,11,1,\n");
        REQUIRE(msg.find("out-of-order") != std::string::npos);
    }
    SECTION("negative shares") {
        std::string msg =
            test::ingest_error(std::string(kHeader) + "A,2000-01-03,10,1,-5\n");
        REQUIRE(msg.find("shares") != std::string::npos);
    }
    SECTION("wrong field count") {
        std::string msg = test::ingest_error(std::string(kHeader) + "A,2000-01-03,10,1\n");
        REQUIRE(msg.find("5 fields") != std::string::npos);
    }
    SECTION("bad header") {
        std::string msg = test::ingest_error("id,date,close\nA,2000-01-03,10\n");
        REQUIRE(msg.find("header") != std::string::npos);
    }
}

TEST_CASE("adjusted close handles splits", "[marketdata]") {
    SECTION("no splits: adjusted equals raw") {
        DatasetBuilder b;
        test::add_security(b, "A", {{0, 10, 1, 1000.0}, {1, 11}, {2, 12}});
        auto ds = b.build();
        for (int d = 0; d < 3; ++d)
            REQUIRE(ds.security("A").adjusted_close(kBase + d) ==
                    ds.security("A").raw_close(kBase + d));
    }
    SECTION("2-for-1 split between two bars") {
        DatasetBuilder b;
        test::add_security(b, "A", {{0, 10, 1, 1000.0}, {1, 5, 2}});
        auto ds = b.build();
        const auto& rec = ds.security("A");
        REQUIRE(rec.adjusted_close(kBase + 0) == Catch::Approx(5.0).margin(1e-15));
        REQUIRE(rec.adjusted_close(kBase + 1) == Catch::Approx(5.0).margin(1e-15));
        // a fixed adjusted position has constant wealth across the split
        REQUIRE(rec.adjusted_close(kBase + 1) - rec.adjusted_close(kBase + 0) == 0.0);
    }
    SECTION("not listed") {
        DatasetBuilder b;
        test::add_security(b, "A", {{1, 10, 1, 1000.0}, {2, 11}});
        auto ds = b.build();
        REQUIRE_THROWS_AS(ds.security("A").adjusted_close(kBase + 0), DomainError);
        REQUIRE_THROWS_AS(ds.security("A").adjusted_close(kBase + 3), DomainError);
    }
}

// Oracle: simulate a raw holding whose share count is multiplied at each
// split; its wealth must match a fixed adjusted-share holding exactly.
TEST_CASE("split invariance against raw share-count simulation", "[marketdata]") {
    Rng rng(42);
    for (int rep = 0; rep < 10; ++rep) {
        int split_a = 10 + static_cast<int>(rng.uniform_int(15));
        int split_b = 30 + static_cast<int>(rng.uniform_int(15));
        std::vector<double> raw_close(50);
        std::vector<double> split(50, 1.0);
        split[static_cast<std::size_t>(split_a)] = 2.0;
        split[static_cast<std::size_t>(split_b)] = 3.0;
        double underlying = 100.0;
        DatasetBuilder b;
        double divisor = 1.0;
        for (int d = 0; d < 50; ++d) {
            underlying *= std::exp(0.02 * rng.normal());
            divisor *= split[static_cast<std::size_t>(d)];
            raw_close[static_cast<std::size_t>(d)] = underlying / divisor;
            b.add_bar("A", kBase + d, raw_close[static_cast<std::size_t>(d)],
                      split[static_cast<std::size_t>(d)],
                      d == 0 ? std::optional<double>(1000.0) : std::nullopt);
        }
        auto ds = b.build();
        const auto& rec = ds.security("A");

        double raw_shares = 1.0;
        double adjusted_shares = divisor; // equivalent fixed holding
        for (int d = 0; d < 50; ++d) {
            if (d > 0)
                raw_shares *= split[static_cast<std::size_t>(d)];
            double wealth_raw = raw_shares * raw_close[static_cast<std::size_t>(d)];
            double wealth_adj = adjusted_shares * rec.adjusted_close(kBase + d);
            REQUIRE(wealth_adj == Catch::Approx(wealth_raw).epsilon(1e-12));
        }
    }
}

TEST_CASE("market cap forward-fills shares", "[marketdata]") {
    DatasetBuilder b;
    // shares observed on day 0 only; bars continue for ~2 months
    std::vector<test::BarSpec> bars;
    bars.push_back({0, 10, 1, 1000.0});
    for (int d = 1; d <= 60; ++d)
        bars.push_back({d, d == 60 ? 20.0 : 10.0});
    test::add_security(b, "A", bars);
    auto ds = b.build();
    const auto& rec = ds.security("A");

    REQUIRE(rec.market_cap(kBase) == 10000.0);
    REQUIRE(rec.market_cap(kBase + 60) == 20.0 * 1000.0);

    SECTION("query before first shares observation") {
        DatasetBuilder b2;
        b2.add_bar("B", kBase, 10.0, 1.0, std::nullopt);
        b2.add_bar("B", kBase + 1, 10.0, 1.0, 500.0);
        auto ds2 = b2.build();
        REQUIRE_THROWS_WITH(ds2.security("B").market_cap(kBase),
                            Catch::Matchers::ContainsSubstring("no shares observation"));
        REQUIRE(ds2.security("B").market_cap(kBase + 1) == 5000.0);
    }
}

TEST_CASE("market cap changes only with close or shares updates", "[marketdata]") {
    DatasetBuilder b;
    test::add_security(b, "A",
                       {{0, 10, 1, 1000.0}, {1, 10}, {2, 10, 1, 2000.0}, {3, 12}});
    auto ds = b.build();
    const auto& rec = ds.security("A");
    REQUIRE(rec.market_cap(kBase + 1) == rec.market_cap(kBase + 0)); // nothing changed
    REQUIRE(rec.market_cap(kBase + 2) == 2.0 * rec.market_cap(kBase + 1)); // new shares
    REQUIRE(rec.market_cap(kBase + 3) == 1.2 * 20000.0); // new close
}

TEST_CASE("active universe", "[marketdata]") {
    SECTION("full-span securities all active") {
        auto ds = test::random_dataset(1, 5, 10);
        REQUIRE(ds.active_universe(kBase + 5).size() == 5);
    }
    SECTION("delisted the day before is excluded") {
        DatasetBuilder b;
        test::add_security(b, "A", {{0, 10, 1, 100.0}, {1, 10}, {2, 10}});
        test::add_security(b, "B", {{0, 10, 1, 100.0}, {1, 10}});
        auto ds = b.build();
        auto ids = ds.active_universe(kBase + 2);
        REQUIRE(ids == std::vector<std::string>{"A"});
    }
    SECTION("unknown date") {
        auto ds = test::random_dataset(1, 2, 5);
        REQUIRE_THROWS_AS(ds.active_universe(kBase + 99), DomainError);
    }
    SECTION("staggered listings match brute-force scan") {
        Rng rng(7);
        DatasetBuilder b;
        struct Range { int lo, hi; };
        std::vector<Range> ranges;
        for (int s = 0; s < 100; ++s) {
            int lo = static_cast<int>(rng.uniform_int(40));
            int hi = lo + 1 + static_cast<int>(rng.uniform_int(40));
            ranges.push_back({lo, hi});
            std::vector<test::BarSpec> bars;
            for (int d = lo; d <= hi; ++d)
                bars.push_back({d, 10.0 + s, 1.0,
                                d == lo ? std::optional<double>(100.0) : std::nullopt});
            test::add_security(b, "S" + std::to_string(s), bars);
        }
        auto ds = b.build();
        for (Date d : ds.calendar()) {
            auto got = ds.active_universe(d);
            std::vector<std::string> expected;
            for (int s = 0; s < 100; ++s) {
                int off = d - kBase;
                if (ranges[static_cast<std::size_t>(s)].lo <= off &&
                    off <= ranges[static_cast<std::size_t>(s)].hi)
                    expected.push_back("S" + std::to_string(s));
            }
            std::sort(expected.begin(), expected.end());
            REQUIRE(got == expected);
        }
    }
}

TEST_CASE("ingest-serialize-reingest round trip", "[marketdata]") {
    auto ds = test::random_dataset(99, 8, 30);
    std::ostringstream out;
    ds.write_csv(out);
    std::istringstream in(out.str());
    auto ds2 = ingest_csv(in, "round-trip");
    REQUIRE(ds == ds2);

    std::ostringstream out2;
    ds2.write_csv(out2);
    REQUIRE(out.str() == out2.str());
}
