// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include "classify_oracle.hpp"
#include "designs.hpp"
#include "helpers.hpp"

#include "fleetrel/commands.hpp"
#include "fleetrel/failure_model.hpp"
#include "fleetrel/generator.hpp"
#include "fleetrel/mitigation.hpp"
#include "fleetrel/network.hpp"
#include "fleetrel/stats.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>

using namespace fleetrel;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
    bool ok = true;
    std::string detail;

    void expect(bool cond, const std::string& what)
    {
        if (!cond) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::map<std::string, std::string> tree(const fs::path& root)
{
    std::map<std::string, std::string> files;
    for (const auto& f : fs::recursive_directory_iterator(root))
        if (f.is_regular_file()) {
            std::ifstream in(f.path(), std::ios::binary);
            std::stringstream ss;
            ss << in.rdbuf();
            files[fs::relative(f.path(), root).string()] = ss.str();
        }
    return files;
}

// 1. published coefficients reproduce the case-study rates and comparisons
Outcome published_model()
{
    Outcome o;
    const auto m = LogisticFailureModel::published_2015();
    const double le = predict_relative_rate(m, low_end());
    const double he = predict_relative_rate(m, high_end());
    o.expect(std::abs(le - 0.12) < 0.005, "low-end rate " + fmt("%.4f", le));
    o.expect(std::abs(he - 0.78) < 0.005, "high-end rate " + fmt("%.4f", he));
    o.expect(std::abs(he / le - 6.5) < 0.1, "ratio " + fmt("%.3f", he / le));
    const auto density = compare_designs(m, high_end(), high_end_low_density(), 2);
    const auto cpus = compare_designs(m, high_end(), high_end_fewer_cpus(), 2);
    o.expect(std::abs(100 * density.percent_reduction - 57.7) < 0.05,
             "density reduction " + fmt("%.2f%%", 100 * density.percent_reduction));
    o.expect(std::abs(100 * cpus.percent_reduction - 34.6) < 0.05,
             "cpu reduction " + fmt("%.2f%%", 100 * cpus.percent_reduction));
    return o;
}

// 2. logistic fit recovers its generating coefficients
Outcome logistic_round_trip()
{
    Outcome o;
    const auto truth = LogisticFailureModel::published_2015();
    const auto t0 = std::chrono::steady_clock::now();
    const auto fit = fit_logistic(generate_design_samples(truth, 100000, 2015));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& t : fit.terms) {
        const double want = truth.coefficient(t.factor);
        const double err = std::abs(t.estimate - want);
        o.expect(err <= 0.05 * std::abs(want) && err <= 3 * t.std_error,
                 std::string(coefficient_name(t.factor)) + " " + fmt("%.5g", t.estimate) + fmt(" (se %.2g)", t.std_error));
    }
    o.expect(secs < 30, "took " + fmt("%.1fs", secs));
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("fit ") + fmt("%.2fs", secs);
    return o;
}

// 3. classifier agrees with the brute-force reference
Outcome classifier_oracle()
{
    Outcome o;
    Rng rng(31337);
    int mismatches = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto ev = oracle::random_trace(rng, 200);
        ClassifyOptions opts;
        opts.threshold_k = 1 + static_cast<std::int64_t>(rng.below(40));
        opts.cell_window_s = static_cast<std::int64_t>(rng.below(120));
        if (classify_month(ev, opts) != oracle::classify(ev, opts.threshold_k, opts.cell_window_s))
            ++mismatches;
    }
    o.expect(mismatches == 0, std::to_string(mismatches) + " of 1000 traces differ");
    return o;
}

// 4. exponential percentile models are recovered from their own values
Outcome exponential_models()
{
    Outcome o;
    for (auto [a, b] : std::vector<std::pair<double, double>>{
             {462.88, 2.3408}, {1.513, 4.256}, {336.51, 3.4371}, {1.1345, 4.7709}}) {
        std::vector<double> v;
        for (int i = 1; i <= 1000; ++i)
            v.push_back(a * std::exp(b * i / 1000.0));
        const auto c = percentile_curve(v);
        o.expect(std::abs(c.fit.a - a) / a < 1e-3 && std::abs(c.fit.b - b) / b < 1e-3 && c.fit.r2 >= 0.999,
                 fmt("a=%.4g", a) + " gave " + fmt("%.5g", c.fit.a) + fmt(" exp(%.5g p)", c.fit.b));
    }
    return o;
}

// 5. heavy-tailed fits at 1e5 samples
Outcome distribution_fits()
{
    Outcome o;
    Rng rng(5);
    std::vector<double> p(100000), w(100000);
    for (auto& x : p)
        x = rng.pareto(1.5, 1.0);
    for (auto& x : w)
        x = rng.weibull(0.3, 5000.0);
    const auto fp = fit_pareto(p);
    const auto t0 = std::chrono::steady_clock::now();
    const auto fw = fit_weibull(w);
    o.expect(std::abs(fp.alpha - 1.5) / 1.5 < 0.05, "pareto alpha " + fmt("%.4f", fp.alpha));
    o.expect(std::abs(fw.shape - 0.3) / 0.3 < 0.05, "weibull shape " + fmt("%.4f", fw.shape));
    o.expect(std::abs(fw.scale - 5000) / 5000 < 0.05, "weibull scale " + fmt("%.1f", fw.scale));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.expect(secs < 10, "took " + fmt("%.1fs", secs));
    return o;
}

ClassifiedEvent at(EpochSeconds t, ComponentClass c, std::int64_t row, std::int64_t column, int channel)
{
    return {mem_event(t, 0, channel, 0, row, column), c};
}

// 6. page offlining removes repeating cells but not server-level faults
Outcome offlining()
{
    Outcome o;
    std::vector<ClassifiedEvent> cells;
    for (int i = 0; i < 10000; ++i)
        cells.push_back(at(1'500'000'000 + i * 60, ComponentClass::cell, i % 10, 0, 0));
    const auto pure = run_offline_sim(cells, OfflineSimConfig{}, 6);
    o.expect(pure.reduction >= 0.99, "pure-cell reduction " + fmt("%.4f", pure.reduction));

    Rng rng(85);
    std::vector<ClassifiedEvent> mixed;
    std::int64_t server_level = 0;
    for (int i = 0; i < 10000; ++i) {
        const EpochSeconds t = 1'500'000'000 + i * 60;
        if (rng.uniform() < 0.85) {
            ++server_level;
            mixed.push_back(at(t, i % 2 ? ComponentClass::socket : ComponentClass::channel,
                               static_cast<std::int64_t>(rng.below(65536)), static_cast<std::int64_t>(rng.below(1024)),
                               static_cast<int>(rng.below(4))));
        } else
            mixed.push_back(at(t, ComponentClass::cell, static_cast<std::int64_t>(rng.below(10)), 0, 0));
    }
    const double share = static_cast<double>(server_level) / static_cast<double>(mixed.size());
    const auto m = run_offline_sim(mixed, OfflineSimConfig{}, 6);
    o.expect(share >= 0.85 - 0.01, "server-level share " + fmt("%.3f", share));
    o.expect(m.reduction < 1.0 - share, "mixed reduction " + fmt("%.4f", m.reduction));
    o.expect(m.reduction < 0.99, "mixed reduction not bounded");
    return o;
}

// 7. invariants that hold for any input
Outcome properties()
{
    Outcome o;
    Rng rng(7);

    for (int trial = 0; trial < 200; ++trial) {
        const auto ev = oracle::random_trace(rng, 150);
        const auto c = classify_month(ev);
        o.expect(c.size() == ev.size(), "classification lost errors");
    }

    SimMemory mem(300, 250);
    for (int op = 0; op < 10000; ++op) {
        const auto l = static_cast<std::int64_t>(rng.below(250));
        if (rng.bernoulli(0.5))
            mem.write(l);
        else
            mem.randomize_page(l, rng);
        if (op % 500 == 0 && mem.offline_count() < 20)
            mem.offline_frame(static_cast<std::int64_t>(rng.below(300)), rng);
    }
    try {
        mem.check_invariants();
    } catch (const std::exception& e) {
        o.expect(false, e.what());
    }

    int outside = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const auto n = 1 + static_cast<std::int64_t>(rng.below(500));
        const auto k = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n + 1)));
        const auto ci = binomial_ci(k, n);
        const double r = static_cast<double>(k) / static_cast<double>(n);
        outside += !(ci.low <= r && r <= ci.high);
    }
    o.expect(outside == 0, std::to_string(outside) + " intervals miss their rate");

    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Observation> obs;
        const double slope = rng.uniform(0, 0.02);
        for (int i = 0; i < 2000; ++i) {
            const double x = rng.uniform(0, 40);
            obs.push_back({x, rng.bernoulli(std::min(1.0, slope * x))});
        }
        const auto s = bucket_series(obs, rng.uniform(0.5, 10), 0.0);
        for (std::size_t i = 0; i < s.size(); ++i)
            if (!(s.ci[i].low <= s.rates[i] && s.rates[i] <= s.ci[i].high))
                ++outside;
    }
    o.expect(outside == 0, std::to_string(outside) + " bucket intervals miss their rate");

    const auto truth = LogisticFailureModel::published_2015();
    const auto samples = generate_design_samples(truth, 200, 77);
    const std::vector<Factor> factors{Factor::intercept, Factor::capacity, Factor::density_2gb, Factor::density_4gb,
                                      Factor::chips,     Factor::cpu_pct,  Factor::age,         Factor::cpus};
    std::vector<double> beta;
    for (auto f : factors)
        beta.push_back(truth.coefficient(f));
    const auto g = logistic_gradient(samples, factors, beta);
    for (std::size_t i = 0; i < beta.size(); ++i) {
        auto up = beta, down = beta;
        up[i] += 1e-5;
        down[i] -= 1e-5;
        const double fd =
            (logistic_log_likelihood(samples, factors, up) - logistic_log_likelihood(samples, factors, down)) / 2e-5;
        o.expect(std::abs(fd - g[i]) <= 1e-6 * std::max(1.0, std::abs(g[i])), "gradient term " + std::to_string(i));
    }

    TempDir dir("accept");
    const std::map<std::string, Json> runs{
        {"generate", Json{{"seed", 9}, {"fleet_size", 300}, {"designs", 500}}},
        {"sim-offline", Json{{"seed", 9}, {"fail_prob", 0.3}, {"input", Json::array({dir.file("g0/dram.jsonl")})}}},
        {"sim-randomize", Json{{"seed", 9}, {"steps", 20000}, {"svg", true}}},
    };
    run_command("generate", runs.at("generate"), dir.file("g0"));
    for (const auto& [name, params] : runs) {
        o.expect(command_is_stochastic(name), name + " not marked stochastic");
        run_command(name, params, dir.file(name + "-a"));
        run_command(name, params, dir.file(name + "-b"));
        o.expect(tree(dir.file(name + "-a")) == tree(dir.file(name + "-b")), name + " output differs between runs");
    }
    for (const auto& n : command_names())
        if (command_is_stochastic(n))
            o.expect(runs.count(n) == 1, n + " not covered");
    return o;
}

// 8. randomization cost and wear spread
Outcome randomization()
{
    Outcome o;
    const auto e = overhead_estimate(RandomizationPlan{});
    o.expect(std::abs(e.pages_per_second - 777) <= 1, "pages/s " + fmt("%.2f", e.pages_per_second));
    o.expect(std::abs(100 * e.overhead_fraction - 29.1) <= 0.2, "overhead " + fmt("%.2f%%", 100 * e.overhead_fraction));
    std::vector<double> hot(64, 0.0);
    hot[0] = 1.0;
    RandomizerSimConfig cfg;
    cfg.spare_frames = 8;
    const auto r = run_randomizer_sim(hot, {}, cfg, 8);
    const double cut = 1.0 - r.gini_with / r.gini_without;
    o.expect(cut >= 0.5, "gini reduction " + fmt("%.3f", cut));
    return o;
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"published model rates and comparisons", published_model},
        {"logistic fit round trip at 1e5 samples", logistic_round_trip},
        {"classifier matches reference on 1000 traces", classifier_oracle},
        {"four exponential percentile models", exponential_models},
        {"pareto and weibull fits at 1e5 samples", distribution_fits},
        {"page offlining reductions", offlining},
        {"property checks", properties},
        {"randomization overhead and wear", randomization},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o.expect(false, std::string("threw: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        failed += !o.ok;
        std::printf("%s criterion %zu: %s (%.2fs)%s%s\n", o.ok ? "PASS" : "FAIL", i + 1, criteria[i].first, secs,
                    o.detail.empty() ? "" : " ", o.detail.c_str());
    }
    return failed ? 1 : 0;
}
