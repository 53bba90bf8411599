#include "fleetrel/error.hpp"
#include "fleetrel/mitigation.hpp"

#include "helpers.hpp"

#include <doctest.h>

#include <functional>
#include <numeric>

using namespace fleetrel;
using testutil::mem_event;

namespace {

ClassifiedEvent ce(EpochSeconds t, ComponentClass c, std::int64_t row, std::int64_t column = 0, int channel = 0,
                   const std::string& server = "s1")
{
    return {mem_event(t, 0, channel, 0, row, column, 0, server), c};
}

OfflineSimConfig exact_policy()
{
    OfflineSimConfig cfg;
    cfg.policy.initial_fail_prob = 0.0;
    cfg.policy.errors_before_offline = 1;
    cfg.policy.cap_frac = 0.5;
    return cfg;
}

// 85% of errors from socket/channel faults, the rest from a few failing cells
std::vector<ClassifiedEvent> server_heavy_trace(Rng& rng)
{
    std::vector<ClassifiedEvent> v;
    for (int i = 0; i < 2000; ++i) {
        const EpochSeconds t = 1'500'000'000 + i * 600;
        if (rng.uniform() < 0.85)
            v.push_back(ce(t, i % 2 ? ComponentClass::socket : ComponentClass::channel,
                           static_cast<std::int64_t>(rng.below(65536)), static_cast<std::int64_t>(rng.below(1024)),
                           static_cast<int>(rng.below(4))));
        else
            v.push_back(ce(t, ComponentClass::cell, static_cast<std::int64_t>(rng.below(5))));
    }
    return v;
}

} // namespace

TEST_SUITE("mitigation")
{
    TEST_CASE("a repeating cell disappears after the first error")
    {
        std::vector<ClassifiedEvent> v;
        for (int i = 0; i < 100; ++i)
            v.push_back(ce(1'500'000'000 + i * 30, ComponentClass::cell, 7, 3));
        const auto r = run_offline_sim(v, exact_policy(), 1);
        CHECK(r.trace_errors == 100);
        CHECK(r.observed == 1);
        CHECK(r.suppressed == 99);
        CHECK(r.pages_offlined == 1);
        CHECK(r.reduction == doctest::Approx(0.99));

        auto never = exact_policy();
        never.policy.initial_fail_prob = 1.0;
        const auto n = run_offline_sim(v, never, 1);
        CHECK(n.pages_offlined == 0);
        CHECK(n.failed_attempts == 100);
        CHECK(n.reduction == 0.0);
    }

    TEST_CASE("server-level faults bound the reduction")
    {
        Rng rng(85);
        const auto v = server_heavy_trace(rng);
        std::int64_t server_level = 0;
        for (const auto& e : v)
            server_level += e.component == ComponentClass::socket || e.component == ComponentClass::channel;
        REQUIRE(static_cast<double>(server_level) / static_cast<double>(v.size()) >= 0.8);
        auto cfg = exact_policy();
        cfg.window_days = 3650;
        const auto r = run_offline_sim(v, cfg, 2);
        CHECK(r.reduction > 0.0);
        CHECK(r.reduction < 1.0 - static_cast<double>(server_level) / static_cast<double>(v.size()) + 1e-12);
        CHECK(r.reduction < 0.2);
    }

    TEST_CASE("every error is either observed or suppressed")
    {
        Rng rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            auto v = server_heavy_trace(rng);
            OfflineSimConfig cfg;
            cfg.policy.initial_fail_prob = rng.uniform();
            cfg.policy.errors_before_offline = 1 + static_cast<std::int64_t>(rng.below(3));
            if (trial % 2)
                cfg.policy.retry = RetryKind::fixed_delay;
            const auto r = run_offline_sim(v, cfg, static_cast<std::uint64_t>(trial));
            CHECK(r.observed + r.suppressed == r.trace_errors);
            CHECK(r.trace_errors == static_cast<std::int64_t>(v.size()));
            std::int64_t days = 0;
            for (const auto& d : r.timeline)
                days += d.baseline_errors;
            CHECK(days == r.trace_errors);
            CHECK(r.store.size() == static_cast<std::size_t>(r.pages_offlined));
        }
    }

    TEST_CASE("unsorted traces and bad policies are rejected")
    {
        std::vector<ClassifiedEvent> v{ce(20, ComponentClass::cell, 1), ce(10, ComponentClass::cell, 1)};
        CHECK_THROWS_AS(run_offline_sim(v, exact_policy(), 1), Error);
        auto cfg = exact_policy();
        cfg.policy.initial_fail_prob = 1.5;
        CHECK_THROWS(run_offline_sim({}, cfg, 1));
        cfg = exact_policy();
        cfg.policy.errors_before_offline = 0;
        CHECK_THROWS(run_offline_sim({}, cfg, 1));
    }

    TEST_CASE("retries eventually retire the page")
    {
        std::vector<ClassifiedEvent> v;
        for (int i = 0; i < 500; ++i)
            v.push_back(ce(1'500'000'000 + i * 100, ComponentClass::row, 9, i % 4));
        OfflineSimConfig cfg;
        cfg.policy.initial_fail_prob = 0.9;
        cfg.policy.errors_before_offline = 1000;
        cfg.policy.retry = RetryKind::fixed_delay;
        cfg.policy.retry_delay_s = 50;
        // threshold never reached: no attempts at all
        auto none = run_offline_sim(v, cfg, 5);
        CHECK(none.pages_offlined == 0);
        cfg.policy.errors_before_offline = 1;
        cfg.policy.initial_fail_prob = 0.5;
        const auto r = run_offline_sim(v, cfg, 5);
        CHECK(r.pages_offlined == 1);
        CHECK(r.suppressed > 400);
    }

    TEST_CASE("the offline store persists and only grows")
    {
        Rng rng(11);
        auto v = server_heavy_trace(rng);
        const auto first = run_offline_sim(std::span(v).first(1000), exact_policy(), 1);
        const auto text = first.store.to_jsonl();
        const auto back = OfflineStore::from_jsonl(text);
        CHECK(back == first.store);
        CHECK(back.to_jsonl() == text);

        auto cfg = exact_policy();
        cfg.initial_store = back;
        const auto second = run_offline_sim(std::span(v).subspan(1000), cfg, 2);
        for (const auto& [host, pages] : first.store.hosts())
            for (auto p : pages)
                CHECK(second.store.contains(host, p));
        CHECK(second.store.size() >= first.store.size());

        OfflineStore s;
        CHECK(s.insert("h", 3));
        CHECK_FALSE(s.insert("h", 3));
        CHECK(s.pages_on("h") == 1);
        CHECK_THROWS(OfflineStore::from_jsonl("{\"host\": \"h\"}\n"));
    }

    TEST_CASE("the memory cap stops offlining and opens a ticket")
    {
        std::vector<ClassifiedEvent> v;
        for (int i = 0; i < 10; ++i)
            v.push_back(ce(1'500'000'000 + i, ComponentClass::cell, i));
        auto cfg = exact_policy();
        cfg.capacity_bytes = 10 * page_size_bytes;
        cfg.policy.cap_frac = 0.25;
        const auto r = run_offline_sim(v, cfg, 1);
        CHECK(r.pages_offlined == 3);
        REQUIRE(r.tickets.size() == 1);
        CHECK(r.tickets[0].host == "s1");
        CHECK(r.tickets[0].offline_bytes == 3 * page_size_bytes);
        CHECK(r.tickets[0].time == 1'500'000'002);
    }

    TEST_CASE("two frames swap")
    {
        SimMemory m(2, 1);
        Rng rng(1);
        CHECK(m.frame_of(0) == 0);
        CHECK(m.randomize_page(0, rng) == 1);
        CHECK(m.state(0) == SimMemory::FrameState::free);
        CHECK(m.randomize_page(0, rng) == 0);
        CHECK(m.wear(0) == 1);
        CHECK(m.wear(1) == 1);
        m.check_invariants();
        SimMemory full(3, 3);
        CHECK_THROWS(full.randomize_page(0, rng));
        CHECK_THROWS(SimMemory(2, 3));
    }

    TEST_CASE("every short move sequence keeps a bijection")
    {
        constexpr int frames = 5, pages = 3, depth = 4;
        std::int64_t sequences = 0;
        std::function<void(SimMemory&, int)> walk = [&](SimMemory& m, int d) {
            m.check_invariants();
            std::vector<bool> used(frames, false);
            for (int l = 0; l < pages; ++l) {
                const auto f = m.frame_of(l);
                CHECK_FALSE(used[static_cast<std::size_t>(f)]);
                used[static_cast<std::size_t>(f)] = true;
            }
            const auto wear = m.wear_counts();
            CHECK(std::accumulate(wear.begin(), wear.end(), std::int64_t{0}) == depth - d);
            if (d == 0) {
                ++sequences;
                return;
            }
            for (int l = 0; l < pages; ++l)
                for (std::int64_t slot = 0; slot < m.free_frames(); ++slot) {
                    SimMemory next = m;
                    next.randomize_page_to(l, slot);
                    walk(next, d - 1);
                }
        };
        SimMemory m(frames, pages);
        walk(m, depth);
        CHECK(sequences == 1296);
    }

    TEST_CASE("random operations preserve the invariants")
    {
        Rng rng(10000);
        SimMemory m(200, 150);
        std::int64_t writes = 0;
        for (int op = 0; op < 10000; ++op) {
            const auto l = static_cast<std::int64_t>(rng.below(150));
            switch (rng.below(4)) {
            case 0:
                m.write(l, 3);
                writes += 3;
                break;
            case 1:
                m.randomize_page(l, rng);
                ++writes;
                break;
            case 2:
                if (m.offline_count() < 40 && m.free_frames() > 1) {
                    m.offline_frame(m.frame_of(l), rng);
                    ++writes;
                }
                break;
            default: CHECK(m.frame_of(l) >= 0);
            }
            m.check_invariants();
        }
        const auto wear = m.wear_counts();
        CHECK(std::accumulate(wear.begin(), wear.end(), std::int64_t{0}) == writes);
        CHECK(m.mapped_pages() + m.free_frames() + static_cast<std::int64_t>(m.offline_count()) == m.total_frames());
    }

    TEST_CASE("randomization overhead")
    {
        const auto o = overhead_estimate(RandomizationPlan{});
        CHECK(std::abs(o.pages_per_second - 777) <= 1.0);
        CHECK(o.overhead_fraction == doctest::Approx(0.291).epsilon(0.007));
        RandomizationPlan idle;
        idle.utilization = 0;
        CHECK(overhead_estimate(idle).pages_per_second == 0.0);
        RandomizationPlan slow;
        slow.utilization = 0.5;
        slow.period_days = 7;
        CHECK(overhead_estimate(slow).pages_per_second == doctest::Approx(777.0 / 14).epsilon(2e-3));
        RandomizationPlan bad;
        bad.period_days = 0;
        CHECK_THROWS(overhead_estimate(bad));
        bad.period_days = -1;
        CHECK_THROWS(overhead_estimate(bad));
        bad = {};
        bad.utilization = 1.1;
        CHECK_THROWS(overhead_estimate(bad));
    }

    TEST_CASE("gini")
    {
        CHECK(gini(std::vector<std::int64_t>{5, 5, 5, 5}) == doctest::Approx(0.0));
        CHECK(gini(std::vector<std::int64_t>{0, 0, 0, 8}) == doctest::Approx(0.75));
        CHECK(gini(std::vector<std::int64_t>{0, 0}) == 0.0);
        CHECK(gini(std::vector<std::int64_t>{}) == 0.0);
        CHECK_THROWS(gini(std::vector<std::int64_t>{1, -1}));
    }

    TEST_CASE("randomization evens out wear")
    {
        std::vector<double> hot(64, 0.0);
        hot[0] = 1.0;
        RandomizerSimConfig cfg;
        cfg.spare_frames = 8;
        const auto r = run_randomizer_sim(hot, {}, cfg, 42);
        CHECK(r.gini_without > 0.9);
        CHECK(r.gini_with < 0.5 * r.gini_without);
        CHECK(r.migrations > 0);

        const std::vector<double> flat(64, 1.0);
        const auto u = run_randomizer_sim(flat, {}, cfg, 42);
        CHECK(u.gini_without < 0.2);

        const auto again = run_randomizer_sim(hot, {}, cfg, 42);
        CHECK(again.wear_with == r.wear_with);
        CHECK(again.wear_without == r.wear_without);

        RandomizerSimConfig zero = cfg;
        zero.steps = 0;
        CHECK_THROWS(run_randomizer_sim(hot, {}, zero, 1));
        CHECK_THROWS(run_randomizer_sim(std::vector<double>(4, 0.0), {}, cfg, 1));
        CHECK_THROWS(run_randomizer_sim(std::vector<double>{}, {}, cfg, 1));
    }
}
