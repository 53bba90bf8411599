#include "fleetrel/error.hpp"
#include "fleetrel/rng.hpp"
#include "fleetrel/ssd.hpp"

#include <doctest.h>

#include <cmath>

using namespace fleetrel;

namespace {

SSDSnapshot snap(const std::string& server, int slot, bool failed, double written_tb = 10)
{
    SSDSnapshot s;
    s.server_id = server;
    s.ssd_id = server + "-" + std::to_string(slot);
    s.slot_index = slot;
    s.platform = Platform::B;
    s.flash_written_tb = written_tb;
    s.flash_read_tb = 5;
    s.uncorrectable_errors = failed ? 3 : 0;
    s.os_sectors_written = static_cast<std::int64_t>(written_tb * 1e12 / 512);
    return s;
}

BucketedSeries curve_from(const std::vector<double>& rates, double width = 1.0)
{
    BucketedSeries s;
    for (std::size_t i = 0; i < rates.size(); ++i) {
        s.centers.push_back(static_cast<double>(i) * width);
        s.counts.push_back(1000);
        s.failures.push_back(std::llround(rates[i] * 1000));
        s.rates.push_back(rates[i]);
        s.ci.push_back({rates[i], rates[i]});
    }
    return s;
}

// rises to bucket 3, falls to 8, flat to 15, rises after
std::vector<double> bathtub_with_bump()
{
    std::vector<double> r;
    for (int i = 0; i <= 24; ++i) {
        double v;
        if (i <= 3)
            v = 0.02 + 0.01 * i;
        else if (i <= 8)
            v = 0.02 + 0.006 * (8 - i);
        else if (i <= 15)
            v = 0.02;
        else
            v = 0.02 + 0.008 * (i - 15);
        r.push_back(v);
    }
    return r;
}

} // namespace

TEST_SUITE("ssd")
{
    TEST_CASE("error rates")
    {
        CHECK(uber(52, 1e11) == doctest::Approx(5.2e-10));
        CHECK(uber(0, 1e11) == 0.0);
        CHECK_THROWS_AS(uber(1, 0), Error);
        CHECK(ber(10, 0, 1e10) == doctest::Approx(1e-9));
        CHECK(ber(0, 0, 12345) == 0.0);
        CHECK_THROWS_AS(ber(1, 1, 0), Error);
        Rng rng(1);
        for (int t = 0; t < 100; ++t) {
            const auto c = static_cast<std::int64_t>(rng.below(1000));
            const auto u = static_cast<std::int64_t>(rng.below(1000));
            const double bits = rng.uniform(1e6, 1e15);
            CHECK(ber(c, u, bits) >= uber(u, bits));
            CHECK(uber(u * 7, bits * 7) == doctest::Approx(uber(u, bits)).epsilon(1e-12));
        }
        const auto s = snap("a", 0, true, 2.0);
        CHECK(bits_accessed(s) == doctest::Approx((2.0 + 5.0) * 8e12));
    }

    TEST_CASE("factor curves")
    {
        std::vector<SSDSnapshot> same;
        for (int i = 0; i < 20; ++i)
            same.push_back(snap("s" + std::to_string(i), 0, i % 2 == 0));
        const auto c = factor_curve(same, SsdFactor::flash_written_tb, 1.0);
        REQUIRE(c.size() == 1);
        CHECK(c.rates[0] == 0.5);
        CHECK_THROWS(factor_curve(std::vector<SSDSnapshot>{}, SsdFactor::avg_temp_c, 1.0));

        // failure probability rising linearly in temperature
        Rng rng(4);
        std::vector<SSDSnapshot> cohort;
        for (int i = 0; i < 60000; ++i) {
            auto s = snap("t" + std::to_string(i), 0, false);
            s.avg_temp_c = rng.uniform(30, 60);
            s.uncorrectable_errors = rng.bernoulli((s.avg_temp_c - 25) / 50) ? 1 : 0;
            cohort.push_back(s);
        }
        const auto t = factor_curve(cohort, SsdFactor::avg_temp_c, 5.0);
        REQUIRE(t.size() == 7);
        for (std::size_t i = 1; i < t.size(); ++i)
            CHECK(t.rates[i] > t.rates[i - 1]);
        for (std::size_t i = 1; i + 1 < t.size(); ++i) {
            const double law = (t.centers[i] - 25) / 50;
            const auto wide = binomial_ci(t.failures[i], t.counts[i], 0.999);
            CHECK(wide.low <= law);
            CHECK(law <= wide.high);
        }

        // reordering the cohort changes nothing
        auto shuffled = cohort;
        for (std::size_t i = shuffled.size() - 1; i > 0; --i)
            std::swap(shuffled[i], shuffled[rng.below(i + 1)]);
        const auto t2 = factor_curve(shuffled, SsdFactor::avg_temp_c, 5.0);
        CHECK(t2.rates == t.rates);
        CHECK(t2.counts == t.counts);
    }

    TEST_CASE("factor values")
    {
        auto s = snap("x", 0, false, 3.0);
        s.os_sectors_written = 2'000'000'000;
        CHECK(ssd_factor_value(s, SsdFactor::os_written_tb) == doctest::Approx(1.024));
        CHECK(ssd_factor_value(s, SsdFactor::flash_written_tb) == 3.0);
        CHECK(parse_enum<SsdFactor>("bus_power_w") == SsdFactor::bus_power_w);
        CHECK_THROWS(parse_enum<SsdFactor>("voltage"));
    }

    TEST_CASE("lifecycle phases on a constructed curve")
    {
        const auto p = label_phases(curve_from(bathtub_with_bump()));
        CHECK(p.bucket_index == std::array<std::size_t, 3>{3, 8, 15});
        CHECK(p.boundaries == std::array<double, 3>{3.0, 8.0, 15.0});
    }

    TEST_CASE("phases refuse monotone or short curves")
    {
        std::vector<double> up;
        for (int i = 0; i < 20; ++i)
            up.push_back(0.01 * (i + 1));
        CHECK_THROWS_WITH_AS(label_phases(curve_from(up)), doctest::Contains("phases not identifiable"), Error);
        CHECK_THROWS_AS(label_phases(curve_from({0.1, 0.2, 0.1, 0.05, 0.05, 0.1, 0.2})), Error);
    }

    TEST_CASE("early detection ends near 3 TB on a 720 GB-style cohort")
    {
        // failure probability against TB written: early rise ending at 3 TB,
        // decline to 8 TB, flat useful life, wearout after 16 TB
        auto law = [](double tb) {
            if (tb <= 3)
                return 0.03 + 0.02 * tb;
            if (tb <= 8)
                return 0.09 - 0.012 * (tb - 3);
            if (tb <= 16)
                return 0.03;
            return 0.03 + 0.01 * (tb - 16);
        };
        Rng rng(720);
        std::vector<SSDSnapshot> cohort;
        for (int i = 0; i < 400000; ++i) {
            const double tb = rng.uniform(0, 25);
            auto s = snap("p" + std::to_string(i), 0, false, tb);
            s.uncorrectable_errors = rng.bernoulli(law(tb)) ? 1 : 0;
            cohort.push_back(s);
        }
        const double width = 0.5;
        const auto c = factor_curve(cohort, SsdFactor::flash_written_tb, width);
        const auto p = label_phases(c);
        CHECK(std::abs(p.boundaries[0] - 3.0) <= width + 1e-9);
        CHECK(p.boundaries[0] < p.boundaries[1]);
        CHECK(p.boundaries[1] < p.boundaries[2]);
        CHECK(std::abs(p.boundaries[1] - 8.0) <= 2 * width + 1e-9);
    }

    TEST_CASE("both-fail probability")
    {
        FleetPairIndex idx{{"a", "b", "c"}, {"b", "c", "d"}};
        CHECK(conditional_both_fail(idx) == 0.5);
        CHECK(conditional_both_fail(FleetPairIndex{{"a"}, {"b"}}) == 0.0);
        CHECK(conditional_both_fail(FleetPairIndex{{"a", "b"}, {"a", "b"}}) == 1.0);
        CHECK(conditional_both_fail(FleetPairIndex{idx.s_higher, idx.s_lower}) == conditional_both_fail(idx));
        CHECK_THROWS(conditional_both_fail(FleetPairIndex{}));
    }

    TEST_CASE("pair index only takes two-SSD servers")
    {
        std::vector<SSDSnapshot> v{snap("two", 0, true), snap("two", 1, false), snap("one", 0, true),
                                   snap("both", 0, true), snap("both", 1, true)};
        const auto idx = build_pair_index(v);
        CHECK(idx.s_lower == std::set<std::string>{"both", "two"});
        CHECK(idx.s_higher == std::set<std::string>{"both"});
    }

    TEST_CASE("write amplification")
    {
        auto s = snap("w", 0, false, 1.0);
        s.os_sectors_written = static_cast<std::int64_t>(2e12 / 512);
        CHECK(write_amplification_ratio(s) == doctest::Approx(0.5));
        s.os_sectors_written = static_cast<std::int64_t>(1e12 / 512);
        CHECK(write_amplification_ratio(s) == doctest::Approx(1.0));
        s.os_sectors_written = 0;
        CHECK_THROWS(write_amplification_ratio(s));
    }

    TEST_CASE("platform summaries")
    {
        std::vector<SSDSnapshot> v{snap("a", 0, true), snap("a", 1, false), snap("b", 0, false), snap("b", 1, false)};
        v[3].platform = Platform::D;
        const auto s = summarize_platforms(v);
        REQUIRE(s.size() == 2);
        CHECK(s[0].platform == Platform::B);
        CHECK(s[0].ssds == 3);
        CHECK(s[0].failed == 1);
        CHECK(s[0].failure_rate == doctest::Approx(1.0 / 3));
        CHECK(s[0].uber == doctest::Approx(3.0 / (3 * 15 * 8e12)));
        CHECK(s[1].platform == Platform::D);
    }
}
