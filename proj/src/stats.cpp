#include "fleetrel/stats.hpp"

#include "fleetrel/error.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>

namespace fleetrel {

namespace {

void check_fit_sample(std::span<const double> samples, const char* what)
{
    if (samples.size() < min_fit_samples)
        fail(ErrorKind::invalid_argument, std::string(what) + ": need at least " + std::to_string(min_fit_samples) +
                                              " samples, got " + std::to_string(samples.size()));
    for (double x : samples)
        if (!(x > 0) || !std::isfinite(x))
            fail(ErrorKind::invalid_argument, std::string(what) + ": samples must be positive and finite");
}

// Sum of ln(x / x_min) for the Hill-type estimators.
double log_spread(std::span<const double> samples, std::optional<double> x_min, double& resolved_min,
                  const char* what)
{
    check_fit_sample(samples, what);
    const double lo = *std::min_element(samples.begin(), samples.end());
    resolved_min = x_min.value_or(lo);
    require(resolved_min > 0, std::string(what) + ": x_min must be positive");
    if (lo < resolved_min)
        fail(ErrorKind::invalid_argument, std::string(what) + ": sample below x_min");
    double s = 0;
    for (double x : samples)
        s += std::log(x / resolved_min);
    if (!(s > 0))
        fail(ErrorKind::data, std::string(what) + ": degenerate sample (zero log-spread)");
    return s;
}

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(12);
    os << v;
    return os.str();
}

} // namespace

ConfidenceInterval binomial_ci(std::int64_t k, std::int64_t n, double level)
{
    require(n >= 1, "binomial_ci: n must be at least 1");
    require(k >= 0, "binomial_ci: k must be non-negative");
    if (k > n)
        fail(ErrorKind::invalid_argument, "binomial_ci: k > n");
    require(level > 0 && level < 1, "binomial_ci: level must lie in (0, 1)");
    const double tail = (1.0 - level) / 2.0;
    const auto kd = static_cast<double>(k);
    const auto nd = static_cast<double>(n);
    ConfidenceInterval ci;
    ci.low = k == 0 ? 0.0 : boost::math::ibeta_inv(kd, nd - kd + 1.0, tail);
    ci.high = k == n ? 1.0 : boost::math::ibeta_inv(kd + 1.0, nd - kd, 1.0 - tail);
    return ci;
}

BucketedSeries bucket_series(std::span<const Observation> samples, double bucket_width, double min_frac)
{
    require(bucket_width > 0 && std::isfinite(bucket_width), "bucket_series: bucket_width must be positive");
    require(min_frac >= 0 && min_frac < 1, "bucket_series: min_frac must lie in [0, 1)");
    if (samples.empty())
        fail(ErrorKind::data, "bucket_series: no samples");

    std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> buckets; // index -> (n, failed)
    for (const auto& s : samples) {
        if (!std::isfinite(s.x))
            fail(ErrorKind::data, "bucket_series: non-finite factor value");
        auto& b = buckets[std::llround(s.x / bucket_width)];
        ++b.first;
        b.second += s.failed ? 1 : 0;
    }

    const auto total = static_cast<double>(samples.size());
    BucketedSeries out;
    for (const auto& [idx, nf] : buckets) {
        if (static_cast<double>(nf.first) / total < min_frac)
            continue;
        out.centers.push_back(static_cast<double>(idx) * bucket_width);
        out.counts.push_back(nf.first);
        out.failures.push_back(nf.second);
        out.rates.push_back(static_cast<double>(nf.second) / static_cast<double>(nf.first));
        out.ci.push_back(binomial_ci(nf.second, nf.first));
    }
    return out;
}

std::string curve_csv(const BucketedSeries& s)
{
    std::ostringstream os;
    os.precision(10);
    os << "bucket_x,n,rate,ci_low,ci_high\n";
    for (std::size_t i = 0; i < s.size(); ++i)
        os << s.centers[i] << ',' << s.counts[i] << ',' << s.rates[i] << ',' << s.ci[i].low << ',' << s.ci[i].high
           << '\n';
    return os.str();
}

FittedPareto fit_pareto(std::span<const double> samples, std::optional<double> x_min)
{
    double xm = 0;
    const double spread = log_spread(samples, x_min, xm, "fit_pareto");
    const auto n = static_cast<double>(samples.size());
    FittedPareto f;
    f.x_min = xm;
    f.alpha = n / spread;
    double sum_log = 0;
    for (double x : samples)
        sum_log += std::log(x);
    f.log_likelihood = n * std::log(f.alpha) + n * f.alpha * std::log(xm) - (f.alpha + 1.0) * sum_log;
    return f;
}

double fit_power_law_exponent(std::span<const double> samples, std::optional<double> x_min)
{
    double xm = 0;
    const double spread = log_spread(samples, x_min, xm, "fit_power_law_exponent");
    return -(1.0 + static_cast<double>(samples.size()) / spread);
}

FittedWeibull fit_weibull(std::span<const double> samples)
{
    check_fit_sample(samples, "fit_weibull");
    const auto n = static_cast<double>(samples.size());

    std::vector<double> logs(samples.size());
    std::transform(samples.begin(), samples.end(), logs.begin(), [](double x) { return std::log(x); });
    // shift logs so every x^k term is <= 1; the shape equation is shift invariant
    const double shift = *std::max_element(logs.begin(), logs.end());
    double mean_log = 0;
    for (auto& l : logs) {
        l -= shift;
        mean_log += l;
    }
    mean_log /= n;
    double var = 0;
    for (double l : logs)
        var += (l - mean_log) * (l - mean_log);
    var /= n;
    if (!(var > 0))
        fail(ErrorKind::data, "fit_weibull: degenerate sample (all values equal)");

    struct Eval
    {
        double g, dg, s0;
    };
    auto eval = [&](double k) {
        double s0 = 0, s1 = 0, s2 = 0;
        for (double l : logs) {
            const double w = std::exp(k * l);
            s0 += w;
            s1 += w * l;
            s2 += w * l * l;
        }
        const double m1 = s1 / s0;
        return Eval{m1 - 1.0 / k - mean_log, s2 / s0 - m1 * m1 + 1.0 / (k * k), s0};
    };

    // Gumbel moment estimate of the shape as the starting point
    double k = std::numbers::pi / std::sqrt(6.0 * var);
    Eval cur = eval(k);
    std::ostringstream trace;
    for (int it = 1; it <= 100; ++it) {
        double step = -cur.g / cur.dg;
        double next = k + step;
        Eval e{};
        int halvings = 0;
        while (true) {
            if (next > 0) {
                e = eval(next);
                if (std::isfinite(e.g) && std::fabs(e.g) <= std::fabs(cur.g))
                    break;
            }
            if (++halvings > 60)
                break;
            step /= 2;
            next = k + step;
        }
        trace << " k" << it << '=' << fmt(next);
        if (!(next > 0) || !std::isfinite(e.g))
            fail(ErrorKind::numeric, "fit_weibull: Newton step left the domain; iterates:" + trace.str());
        const double delta = std::fabs(next - k);
        k = next;
        cur = e;
        if (delta <= 1e-9 * std::max(1.0, k)) {
            FittedWeibull f;
            f.shape = k;
            f.scale = std::exp(shift) * std::pow(cur.s0 / n, 1.0 / k);
            f.iterations = it;
            return f;
        }
    }
    fail(ErrorKind::numeric, "fit_weibull: no convergence in 100 iterations; iterates:" + trace.str());
}

double ExponentialCurve::operator()(double p) const { return a * std::exp(b * p); }

ExponentialCurve fit_exponential_percentile(std::span<const std::pair<double, double>> points)
{
    if (points.size() < 3)
        fail(ErrorKind::invalid_argument, "fit_exponential_percentile: need at least 3 points");
    std::vector<std::pair<double, double>> pts;
    pts.reserve(points.size());
    for (const auto& [p, y] : points) {
        if (!(y > 0) || !std::isfinite(y))
            fail(ErrorKind::invalid_argument, "fit_exponential_percentile: y must be positive");
        if (!(p >= 0 && p <= 1))
            fail(ErrorKind::invalid_argument, "fit_exponential_percentile: p must lie in [0, 1]");
        pts.emplace_back(p, std::log(y));
    }
    // canonical order makes the result independent of input order, bit for bit
    std::sort(pts.begin(), pts.end());

    const auto n = static_cast<double>(pts.size());
    double mx = 0, my = 0;
    for (const auto& [x, y] : pts) {
        mx += x;
        my += y;
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (const auto& [x, y] : pts) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (!(sxx > 0))
        fail(ErrorKind::data, "fit_exponential_percentile: all points share one percentile");
    ExponentialCurve c;
    c.b = sxy / sxx;
    c.a = std::exp(my - c.b * mx);
    // flat curve, up to rounding in the logs
    if (syy <= 1e-24 * n * (1.0 + my * my)) {
        c.r2 = 1.0;
    } else {
        double ss_res = 0;
        for (const auto& [x, y] : pts) {
            const double r = y - (my + c.b * (x - mx));
            ss_res += r * r;
        }
        c.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
    }
    return c;
}

double percentile_sorted(std::span<const double> sorted, double p)
{
    require(!sorted.empty(), "percentile of an empty set");
    require(p >= 0 && p <= 1, "percentile p must lie in [0, 1]");
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::int64_t>(std::ceil(p * n - 1e-9));
    rank = std::clamp<std::int64_t>(rank, 1, static_cast<std::int64_t>(sorted.size()));
    return sorted[static_cast<std::size_t>(rank - 1)];
}

double percentile_nearest_rank(std::span<const double> values, double p)
{
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    return percentile_sorted(v, p);
}

double SkewSummary::top_share(double fraction) const
{
    require(fraction > 0 && fraction <= 1, "top_share: fraction must lie in (0, 1]");
    const auto n = static_cast<double>(sorted_desc.size());
    const auto k = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(fraction * n - 1e-9)));
    const double total = std::accumulate(sorted_desc.begin(), sorted_desc.end(), 0.0);
    if (total == 0)
        return 0;
    const double top = std::accumulate(sorted_desc.begin(), sorted_desc.begin() + static_cast<std::ptrdiff_t>(k), 0.0);
    return top / total;
}

SkewSummary skew_summary(std::span<const double> counts)
{
    if (counts.empty())
        fail(ErrorKind::data, "skew_summary: no counts");
    SkewSummary s;
    s.sorted_desc.assign(counts.begin(), counts.end());
    std::sort(s.sorted_desc.begin(), s.sorted_desc.end(), std::greater<>());
    s.mean = std::accumulate(s.sorted_desc.begin(), s.sorted_desc.end(), 0.0) / static_cast<double>(counts.size());
    std::vector<double> asc(s.sorted_desc.rbegin(), s.sorted_desc.rend());
    s.median = percentile_sorted(asc, 0.5);
    if (s.median > 0)
        s.mean_to_median = s.mean / s.median;
    else
        s.mean_to_median = s.mean > 0 ? std::numeric_limits<double>::infinity() : 1.0;
    return s;
}

Json to_json(const FittedPareto& f)
{
    return Json{{"alpha", f.alpha}, {"x_min", f.x_min}, {"log_likelihood", f.log_likelihood}};
}

Json to_json(const FittedWeibull& f) { return Json{{"shape", f.shape}, {"scale", f.scale}}; }

Json to_json(const ExponentialCurve& c) { return Json{{"a", c.a}, {"b", c.b}, {"r2", c.r2}}; }

Json to_json(const BucketedSeries& s)
{
    Json rows = Json::array();
    for (std::size_t i = 0; i < s.size(); ++i)
        rows.push_back(Json{{"bucket_x", s.centers[i]},
                            {"n", s.counts[i]},
                            {"rate", s.rates[i]},
                            {"ci_low", s.ci[i].low},
                            {"ci_high", s.ci[i].high}});
    return rows;
}

} // namespace fleetrel
