#include "fleetrel/error.hpp"
#include "fleetrel/rng.hpp"
#include "fleetrel/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace fleetrel;

namespace {

// P(X <= k) for X ~ Binomial(n, p), summed in log space
double binom_cdf(std::int64_t k, std::int64_t n, double p)
{
    if (k < 0)
        return 0.0;
    if (k >= n)
        return 1.0;
    if (p <= 0)
        return 1.0;
    if (p >= 1)
        return 0.0;
    double s = 0;
    for (std::int64_t i = 0; i <= k; ++i) {
        const double lt = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) + i * std::log(p) +
                          (n - i) * std::log1p(-p);
        s += std::exp(lt);
    }
    return s;
}

// root of a decreasing function on [0, 1]
template <class F> double bisect(F f)
{
    double lo = 0, hi = 1;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (f(mid) > 0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

ConfidenceInterval cp_oracle(std::int64_t k, std::int64_t n, double level)
{
    const double a = (1 - level) / 2;
    ConfidenceInterval ci;
    // lower: P(X >= k | p) = a, increasing in p
    ci.low = k == 0 ? 0.0 : bisect([&](double p) { return a - (1 - binom_cdf(k - 1, n, p)); });
    // upper: P(X <= k | p) = a, decreasing in p
    ci.high = k == n ? 1.0 : bisect([&](double p) { return binom_cdf(k, n, p) - a; });
    return ci;
}

std::vector<std::pair<double, double>> exact_points(double a, double b, int n)
{
    std::vector<std::pair<double, double>> pts;
    for (int i = 1; i <= n; ++i) {
        const double p = static_cast<double>(i) / n;
        pts.emplace_back(p, a * std::exp(b * p));
    }
    return pts;
}

} // namespace

TEST_SUITE("stats")
{
    TEST_CASE("binomial interval boundaries")
    {
        CHECK(binomial_ci(0, 10).low == 0.0);
        CHECK(binomial_ci(10, 10).high == 1.0);
        CHECK_THROWS_AS(binomial_ci(11, 10), Error);
        CHECK_THROWS_AS(binomial_ci(0, 0), Error);
    }

    TEST_CASE("binomial interval matches bisection on the binomial CDF")
    {
        for (auto [k, n] : std::vector<std::pair<int, int>>{{5, 10}, {0, 7}, {1, 3}, {17, 40}, {99, 100}, {3, 250}}) {
            const auto got = binomial_ci(k, n);
            const auto want = cp_oracle(k, n, 0.95);
            CHECK(got.low == doctest::Approx(want.low).epsilon(1e-9));
            CHECK(got.high == doctest::Approx(want.high).epsilon(1e-9));
        }
        const auto ci = binomial_ci(5, 10);
        CHECK(ci.low == doctest::Approx(0.18708603).epsilon(1e-6));
        CHECK(ci.high == doctest::Approx(0.81291397).epsilon(1e-6));
        const auto ci99 = binomial_ci(5, 10, 0.99);
        const auto want99 = cp_oracle(5, 10, 0.99);
        CHECK(ci99.low == doctest::Approx(want99.low).epsilon(1e-9));
    }

    TEST_CASE("interval always contains the point estimate")
    {
        Rng rng(3);
        for (int t = 0; t < 500; ++t) {
            const auto n = 1 + static_cast<std::int64_t>(rng.below(500));
            const auto k = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(n + 1)));
            const auto ci = binomial_ci(k, n);
            const double r = static_cast<double>(k) / static_cast<double>(n);
            REQUIRE(ci.low <= r);
            REQUIRE(r <= ci.high);
        }
    }

    TEST_CASE("bucket series basics")
    {
        std::vector<Observation> same;
        for (int i = 0; i < 10; ++i)
            same.push_back({10.0, i % 2 == 0});
        auto s = bucket_series(same, 1.0);
        REQUIRE(s.size() == 1);
        CHECK(s.centers[0] == 10.0);
        CHECK(s.rates[0] == 0.5);

        std::vector<Observation> rare(999, {0.0, false});
        rare.push_back({100.0, true});
        s = bucket_series(rare, 10.0, 0.01);
        REQUIRE(s.size() == 1);
        CHECK(s.centers[0] == 0.0);

        CHECK_THROWS(bucket_series(std::vector<Observation>{}, 1.0));
        CHECK_THROWS(bucket_series(same, 0.0));
        CHECK_THROWS(bucket_series(same, 1.0, 1.0));

        const auto csv = curve_csv(bucket_series(same, 1.0));
        CHECK(csv.rfind("bucket_x,n,rate,ci_low,ci_high\n", 0) == 0);
    }

    TEST_CASE("linear failure law gives a rising curve that brackets the law")
    {
        Rng rng(99);
        std::vector<Observation> obs;
        for (int i = 0; i < 200000; ++i) {
            const double x = rng.uniform(0, 100);
            obs.push_back({x, rng.bernoulli(x / 100)});
        }
        const auto s = bucket_series(obs, 10.0);
        REQUIRE(s.size() == 11);
        for (std::size_t i = 0; i < s.size(); ++i) {
            // the end buckets only see half their width
            const double c = s.centers[i];
            const double law = i == 0 ? 0.025 : i + 1 == s.size() ? 0.975 : c / 100;
            const auto wide = binomial_ci(s.failures[i], s.counts[i], 0.999);
            CHECK(wide.low <= law);
            CHECK(law <= wide.high);
            if (i > 0)
                CHECK(s.rates[i] > s.rates[i - 1]);
        }
    }

    TEST_CASE("every bucket rate lies inside its own interval")
    {
        Rng rng(8);
        for (int t = 0; t < 50; ++t) {
            std::vector<Observation> obs;
            const double p = rng.uniform();
            for (int i = 0; i < 500; ++i)
                obs.push_back({rng.uniform(-50, 50), rng.bernoulli(p)});
            const auto s = bucket_series(obs, rng.uniform(0.5, 20), 0.0);
            std::int64_t total = 0;
            for (std::size_t i = 0; i < s.size(); ++i) {
                REQUIRE(s.ci[i].low <= s.rates[i]);
                REQUIRE(s.rates[i] <= s.ci[i].high);
                total += s.counts[i];
                if (i > 0)
                    REQUIRE(s.centers[i] > s.centers[i - 1]);
            }
            CHECK(total == 500);
        }
    }

    TEST_CASE("pareto fit")
    {
        Rng rng(1);
        std::vector<double> xs(100000);
        for (auto& x : xs)
            x = rng.pareto(1.5, 1.0);
        const auto f = fit_pareto(xs);
        CHECK(std::abs(f.alpha - 1.5) / 1.5 < 0.05);
        CHECK(f.hazard(1.0) > f.hazard(2.0));
        CHECK(f.hazard(2.0) > f.hazard(200.0));

        // {1, e} with x_min 1 gives n / sum ln x = 2; repeated to meet the sample minimum
        std::vector<double> two;
        for (int i = 0; i < 5; ++i) {
            two.push_back(1.0);
            two.push_back(std::exp(1.0));
        }
        CHECK(fit_pareto(two, 1.0).alpha == doctest::Approx(2.0).epsilon(1e-12));

        CHECK_THROWS_WITH(fit_pareto(std::vector<double>(20, 3.0)), doctest::Contains("degenerate"));
        auto bad = two;
        bad[0] = 0.0;
        CHECK_THROWS(fit_pareto(bad));
        CHECK_THROWS(fit_pareto(std::vector<double>{1, 2, 3}));
        CHECK(fit_pareto(xs).alpha == fit_pareto(xs).alpha);
    }

    TEST_CASE("power-law exponent")
    {
        Rng rng(2);
        std::vector<double> xs(100000);
        for (auto& x : xs)
            x = rng.pareto(1.964, 1.0);
        const double e = fit_power_law_exponent(xs);
        CHECK(std::abs(e - (-2.964)) / 2.964 < 0.05);
        CHECK(e == doctest::Approx(-(fit_pareto(xs).alpha + 1)).epsilon(1e-12));
        CHECK_THROWS(fit_power_law_exponent(std::vector<double>{1, 2, 3, 4, 5}));
    }

    TEST_CASE("weibull fit")
    {
        Rng rng(3);
        std::vector<double> xs(100000);
        for (auto& x : xs)
            x = rng.weibull(0.3, 5000.0);
        const auto f = fit_weibull(xs);
        CHECK(std::abs(f.shape - 0.3) / 0.3 < 0.05);
        CHECK(std::abs(f.scale - 5000) / 5000 < 0.05);

        std::vector<double> ex(20000);
        for (auto& x : ex)
            x = rng.exponential(3.0);
        CHECK(std::abs(fit_weibull(ex).shape - 1.0) < 0.03);

        CHECK_THROWS(fit_weibull(std::vector<double>(50, 2.0)));
        CHECK_THROWS(fit_weibull(std::vector<double>{1, 2, 3}));
    }

    TEST_CASE("exponential percentile fits")
    {
        for (auto [a, b] : std::vector<std::pair<double, double>>{
                 {462.88, 2.3408}, {1.513, 4.256}, {336.51, 3.4371}, {1.1345, 4.7709}}) {
            const auto c = fit_exponential_percentile(exact_points(a, b, 100));
            CHECK(std::abs(c.a - a) / a < 1e-3);
            CHECK(std::abs(c.b - b) / b < 1e-3);
            CHECK(c.r2 >= 0.999);
            CHECK(c(0.5) == doctest::Approx(a * std::exp(b * 0.5)).epsilon(1e-9));
        }
        const auto flat = fit_exponential_percentile(exact_points(7.0, 0.0, 10));
        CHECK(flat.b == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(flat.r2 == 1.0);
        CHECK_THROWS(fit_exponential_percentile(exact_points(1.0, 1.0, 2)));
        auto neg = exact_points(1.0, 1.0, 5);
        neg[2].second = -1;
        CHECK_THROWS(fit_exponential_percentile(neg));
    }

    TEST_CASE("exponential fit ignores point order")
    {
        Rng rng(5);
        auto pts = exact_points(10, 2, 50);
        for (auto& p : pts)
            p.second *= rng.uniform(0.8, 1.2);
        const auto ref = fit_exponential_percentile(pts);
        for (int t = 0; t < 10; ++t) {
            for (std::size_t i = pts.size() - 1; i > 0; --i)
                std::swap(pts[i], pts[rng.below(i + 1)]);
            const auto c = fit_exponential_percentile(pts);
            CHECK(c.a == doctest::Approx(ref.a).epsilon(1e-12));
            CHECK(c.b == doctest::Approx(ref.b).epsilon(1e-12));
            CHECK(c.r2 == doctest::Approx(ref.r2).epsilon(1e-12));
        }
    }

    TEST_CASE("skew summary")
    {
        // mean 495 over a median of 9
        const auto s = skew_summary(std::vector<double>{9, 9, 9, 1953});
        CHECK(s.median == 9);
        CHECK(s.mean_to_median == doctest::Approx(55.0));
        const auto eq = skew_summary(std::vector<double>(10, 4.0));
        CHECK(eq.mean_to_median == 1.0);
        CHECK(eq.top_share(0.1) == doctest::Approx(0.1));

        Rng rng(6);
        std::vector<double> xs(20000);
        for (auto& x : xs)
            x = std::max(1.0, std::round(rng.weibull(0.3, 5000)));
        CHECK(skew_summary(xs).top_share(0.1) > 0.8);
        CHECK_THROWS(skew_summary(std::vector<double>{}));
    }

    TEST_CASE("nearest-rank percentiles")
    {
        const std::vector<double> v{4, 1, 3, 2};
        CHECK(percentile_nearest_rank(v, 0.75) == 3);
        CHECK(percentile_nearest_rank(v, 1.0) == 4);
        CHECK(percentile_nearest_rank(v, 0.0) == 1);
        CHECK(percentile_nearest_rank(v, 0.5) == 2);
    }
}
