#include "classify_oracle.hpp"
#include "helpers.hpp"

#include "fleetrel/classify.hpp"
#include "fleetrel/error.hpp"
#include "fleetrel/generator.hpp"
#include "fleetrel/rng.hpp"
#include "fleetrel/stats.hpp"

#include <doctest.h>

#include <algorithm>

using namespace fleetrel;
using testutil::mem_event;

namespace {

const EpochSeconds t0 = 1388534400; // 2014-01-01

std::size_t count_of(const std::vector<ComponentClass>& v, ComponentClass c)
{
    return static_cast<std::size_t>(std::count(v.begin(), v.end(), c));
}

} // namespace

TEST_SUITE("classify")
{
    TEST_CASE("socket rule claims a socket spread over two channels")
    {
        std::vector<MemErrorEvent> ev;
        for (int i = 0; i < 1500; ++i)
            ev.push_back(mem_event(t0 + i, 0, i % 2, i % 8, i, i % 1024, i % 8));
        const auto c = classify_month(ev);
        CHECK(count_of(c, ComponentClass::socket) == 1500);
    }

    TEST_CASE("socket rule needs strictly more than K errors")
    {
        std::vector<MemErrorEvent> ev;
        for (int i = 0; i < 1000; ++i)
            ev.push_back(mem_event(t0 + 100 * i, 0, i % 2, 0, i, 0));
        auto c = classify_month(ev);
        CHECK(count_of(c, ComponentClass::socket) == 0);
        ev.push_back(mem_event(t0 + 200000, 0, 0, 0, 5000, 0));
        c = classify_month(ev);
        CHECK(count_of(c, ComponentClass::socket) == 1001);
    }

    TEST_CASE("one channel only is not a socket fault")
    {
        std::vector<MemErrorEvent> ev;
        for (int i = 0; i < 1200; ++i)
            ev.push_back(mem_event(t0 + i, 1, 3, i % 2, i, 7));
        const auto c = classify_month(ev);
        CHECK(count_of(c, ComponentClass::socket) == 0);
        CHECK(count_of(c, ComponentClass::channel) == 1200);
    }

    TEST_CASE("bank rule")
    {
        std::vector<MemErrorEvent> ev;
        for (int i = 0; i < 1100; ++i)
            ev.push_back(mem_event(t0 + i, 0, 0, 4, i % 3, 9));
        CHECK(count_of(classify_month(ev), ComponentClass::bank) == 1100);
    }

    TEST_CASE("single error is spurious")
    {
        const std::vector<MemErrorEvent> ev{mem_event(t0, 0, 0, 0, 1, 1)};
        CHECK(classify_month(ev) == std::vector<ComponentClass>{ComponentClass::spurious});
    }

    TEST_CASE("same byte 30 s apart is a cell fault, 61 s apart is not")
    {
        std::vector<MemErrorEvent> ev{mem_event(t0, 0, 1, 2, 3, 4, 5), mem_event(t0 + 30, 0, 1, 2, 3, 4, 5)};
        CHECK(classify_month(ev) == std::vector<ComponentClass>(2, ComponentClass::cell));
        ev[1].timestamp = t0 + 60;
        CHECK(classify_month(ev) == std::vector<ComponentClass>(2, ComponentClass::cell));
        ev[1].timestamp = t0 + 61;
        CHECK(classify_month(ev) == std::vector<ComponentClass>(2, ComponentClass::spurious));
    }

    TEST_CASE("different byte offsets in one column word are not a cell")
    {
        const std::vector<MemErrorEvent> ev{mem_event(t0, 0, 0, 0, 3, 4, 0), mem_event(t0 + 1, 0, 0, 0, 3, 4, 1)};
        CHECK(classify_month(ev) == std::vector<ComponentClass>(2, ComponentClass::spurious));
    }

    TEST_CASE("row and column rules")
    {
        const std::vector<MemErrorEvent> row{mem_event(t0, 0, 0, 0, 7, 1), mem_event(t0 + 900, 0, 0, 0, 7, 2)};
        CHECK(classify_month(row) == std::vector<ComponentClass>(2, ComponentClass::row));
        const std::vector<MemErrorEvent> col{mem_event(t0, 0, 0, 0, 7, 1), mem_event(t0 + 900, 0, 0, 0, 8, 1)};
        CHECK(classify_month(col) == std::vector<ComponentClass>(2, ComponentClass::column));
        // same row in another bank is a different row
        const std::vector<MemErrorEvent> apart{mem_event(t0, 0, 0, 0, 7, 1), mem_event(t0 + 900, 0, 0, 1, 7, 2)};
        CHECK(classify_month(apart) == std::vector<ComponentClass>(2, ComponentClass::spurious));
    }

    TEST_CASE("earlier rules remove errors from later ones")
    {
        std::vector<MemErrorEvent> ev;
        for (int i = 0; i < 1001; ++i)
            ev.push_back(mem_event(t0 + i, 0, i % 2, 0, 3, 3, 0));
        // would be a cell pair if the socket rule had not claimed socket 0
        ev.push_back(mem_event(t0 + 5000, 1, 0, 0, 1, 1, 2));
        const auto c = classify_month(ev);
        CHECK(count_of(c, ComponentClass::socket) == 1001);
        CHECK(c.back() == ComponentClass::spurious);
    }

    TEST_CASE("two sockets over the threshold are judged independently")
    {
        std::vector<MemErrorEvent> ev;
        for (int s = 0; s < 2; ++s)
            for (int i = 0; i < 1001; ++i)
                ev.push_back(mem_event(t0 + i, s, i % 2, 0, i, 0));
        CHECK(count_of(classify_month(ev), ComponentClass::socket) == 2002);
    }

    TEST_CASE("mixed servers or months are rejected")
    {
        std::vector<MemErrorEvent> ev{mem_event(t0, 0, 0, 0, 0, 0), mem_event(t0 + 5, 0, 0, 0, 0, 0, 0, "s2")};
        CHECK_THROWS_AS(classify_month(ev), Error);
        ev[1].server_id = "s1";
        ev[1].timestamp = t0 + 31 * 86400;
        CHECK_THROWS_WITH_AS(classify_month(ev), doctest::Contains("months"), Error);
        ClassifyOptions bad;
        bad.threshold_k = 0;
        CHECK_THROWS(classify_month(ev, bad));
    }

    TEST_CASE("infinite threshold disables socket, channel and bank")
    {
        Rng rng(41);
        ClassifyOptions opts;
        opts.threshold_k = ClassifyOptions::never;
        for (int trial = 0; trial < 200; ++trial) {
            const auto ev = oracle::random_trace(rng, 200);
            const auto c = classify_month(ev, opts);
            CHECK(count_of(c, ComponentClass::socket) + count_of(c, ComponentClass::channel) +
                      count_of(c, ComponentClass::bank) ==
                  0);
        }
    }

    TEST_CASE("matches the brute-force oracle")
    {
        Rng rng(2024);
        int mismatches = 0;
        for (int trial = 0; trial < 300; ++trial) {
            const auto ev = oracle::random_trace(rng, 200);
            ClassifyOptions opts;
            opts.threshold_k = 1 + static_cast<std::int64_t>(rng.below(40));
            opts.cell_window_s = static_cast<std::int64_t>(rng.below(120));
            if (classify_month(ev, opts) != oracle::classify(ev, opts.threshold_k, opts.cell_window_s))
                ++mismatches;
        }
        CHECK(mismatches == 0);
    }

    TEST_CASE("adding errors never demotes a socket error")
    {
        Rng rng(77);
        ClassifyOptions opts;
        opts.threshold_k = 5;
        for (int trial = 0; trial < 200; ++trial) {
            auto ev = oracle::random_trace(rng, 60);
            const auto before = classify_month(ev, opts);
            const auto extra = oracle::random_trace(rng, 60);
            ev.insert(ev.end(), extra.begin(), extra.end());
            const auto after = classify_month(ev, opts);
            for (std::size_t i = 0; i < before.size(); ++i)
                if (before[i] == ComponentClass::socket)
                    REQUIRE(after[i] == ComponentClass::socket);
        }
    }

    TEST_CASE("fleet classification partitions the input")
    {
        GeneratorSpec spec;
        spec.seed = 5;
        spec.fleet_size = 400;
        spec.months = 2;
        spec.ssd.enabled = spec.net.enabled = spec.fiber.enabled = false;
        const auto b = generate_traces(spec);
        const auto c = classify_fleet(b.dram);
        REQUIRE(c.size() == b.dram.size());
        const auto r = summarize(c);
        std::size_t total = 0;
        double frac = 0;
        for (std::size_t i = 0; i < component_class_count; ++i) {
            total += r.error_counts[i];
            frac += r.error_fraction[i];
            CHECK(r.server_fraction[i] >= 0.0);
            CHECK(r.server_fraction[i] <= 1.0);
        }
        CHECK(total == b.dram.size());
        CHECK(frac == doctest::Approx(1.0));
        // every input event appears exactly once
        auto key = [](const MemErrorEvent& e) {
            return std::tuple(e.server_id, e.timestamp, e.socket, e.channel, e.bank, e.row, e.column, e.byte_offset);
        };
        std::vector<decltype(key(b.dram[0]))> in, out;
        for (const auto& e : b.dram)
            in.push_back(key(e));
        for (const auto& e : c)
            out.push_back(key(e.event));
        std::sort(in.begin(), in.end());
        std::sort(out.begin(), out.end());
        CHECK(in == out);
    }

    TEST_CASE("generated fleet: classifier recovers the generating component")
    {
        GeneratorSpec spec;
        spec.seed = 11;
        spec.fleet_size = 20000;
        spec.ssd.enabled = spec.net.enabled = spec.fiber.enabled = false;
        const auto b = generate_traces(spec);
        const auto c = classify_fleet(b.dram);
        REQUIRE(c.size() == b.dram.size());
        std::size_t agree = 0;
        for (std::size_t i = 0; i < c.size(); ++i)
            agree += c[i].component == b.dram_truth[i] ? 1 : 0;
        CHECK(agree == c.size());

        // servers per class follow weight / burst size; the expected error shares are then the class weights
        const auto r = summarize(c);
        const auto& w = spec.dram.class_weights;
        const auto& burst = spec.dram.burst_sizes;
        double norm = 0;
        for (std::size_t i = 0; i < component_class_count; ++i)
            norm += w[i] / static_cast<double>(burst[i]);
        for (std::size_t i = 0; i < component_class_count; ++i) {
            const double p = w[i] / static_cast<double>(burst[i]) / norm;
            const auto ci = binomial_ci(static_cast<std::int64_t>(r.server_counts[i]),
                                        static_cast<std::int64_t>(r.server_months), 0.999);
            CHECK_MESSAGE((p >= ci.low && p <= ci.high), to_string(all_component_classes[i]));
            CHECK(r.error_counts[i] == r.server_counts[i] * static_cast<std::size_t>(burst[i]));
        }
    }

    TEST_CASE("summaries")
    {
        std::vector<ClassifiedEvent> one{{mem_event(t0, 0, 0, 0, 0, 0), ComponentClass::socket},
                                         {mem_event(t0 + 1, 0, 1, 0, 0, 0), ComponentClass::socket}};
        auto r = summarize(one);
        CHECK(r.error_share(ComponentClass::socket) == 1.0);
        CHECK(r.server_share(ComponentClass::socket) == 1.0);

        std::vector<ClassifiedEvent> two{{mem_event(t0, 0, 0, 0, 0, 0, 0, "a"), ComponentClass::cell},
                                         {mem_event(t0 + 1, 0, 0, 0, 0, 0, 0, "a"), ComponentClass::cell},
                                         {mem_event(t0, 0, 0, 0, 0, 0, 0, "b"), ComponentClass::spurious}};
        r = summarize(two);
        CHECK(r.server_share(ComponentClass::cell) == 0.5);
        CHECK(r.server_share(ComponentClass::spurious) == 0.5);
        CHECK(report_csv(r).rfind("class,error_fraction,server_fraction\n", 0) == 0);
        CHECK_THROWS(summarize(std::vector<ClassifiedEvent>{}));
    }
}
