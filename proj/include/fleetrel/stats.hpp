#pragma once

#include "fleetrel/trace_io.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fleetrel {

struct ConfidenceInterval
{
    double low = 0;
    double high = 1;
};

/// Clopper-Pearson exact interval for k successes in n trials.
ConfidenceInterval binomial_ci(std::int64_t k, std::int64_t n, double level = 0.95);

struct Observation
{
    double x;
    bool failed;
};

/// Failure rate per bucket of a rounded factor value. Buckets are sorted by center.
struct BucketedSeries
{
    std::vector<double> centers;
    std::vector<std::int64_t> counts;
    std::vector<std::int64_t> failures;
    std::vector<double> rates;
    std::vector<ConfidenceInterval> ci;

    std::size_t size() const { return centers.size(); }
};

/**
 * Rounds each x to the nearest multiple of bucket_width, drops buckets holding
 * less than min_frac of all samples, and reports each bucket's failure rate
 * with a 95% Clopper-Pearson interval.
 */
BucketedSeries bucket_series(std::span<const Observation> samples, double bucket_width, double min_frac = 0.001);

/// bucket_x,n,rate,ci_low,ci_high
std::string curve_csv(const BucketedSeries& s);

struct FittedPareto
{
    double alpha = 0;
    double x_min = 0;
    double log_likelihood = 0;

    /// Hazard rate alpha / x; strictly decreasing in x.
    double hazard(double x) const { return alpha / x; }
};

inline constexpr std::size_t min_fit_samples = 10;

/// Maximum-likelihood Pareto shape, alpha = n / sum(ln(x / x_min)).
/// x_min defaults to the sample minimum.
FittedPareto fit_pareto(std::span<const double> samples, std::optional<double> x_min = std::nullopt);

/// Continuous power-law exponent -(1 + n / sum(ln(x / x_min))), reported negative.
double fit_power_law_exponent(std::span<const double> samples, std::optional<double> x_min = std::nullopt);

struct FittedWeibull
{
    double shape = 0;
    double scale = 0;
    int iterations = 0;
};

/// Maximum-likelihood Weibull fit: damped Newton on the shape equation
/// (tolerance 1e-9, at most 100 steps), then the closed-form scale.
FittedWeibull fit_weibull(std::span<const double> samples);

struct ExponentialCurve
{
    double a = 0;
    double b = 0;
    double r2 = 0;

    double operator()(double p) const;
};

/// Least squares of ln y on p; r2 is measured on the log-linear fit.
ExponentialCurve fit_exponential_percentile(std::span<const std::pair<double, double>> points);

struct SkewSummary
{
    double mean = 0;
    double median = 0;
    double mean_to_median = 0;
    std::vector<double> sorted_desc;

    /// Share of the total held by the top `fraction` of entities.
    double top_share(double fraction) const;
};

SkewSummary skew_summary(std::span<const double> counts);

/// Nearest-rank percentile, p in [0, 1]. Sorts a copy.
double percentile_nearest_rank(std::span<const double> values, double p);
/// Same on an already ascending-sorted range.
double percentile_sorted(std::span<const double> sorted, double p);

Json to_json(const FittedPareto& f);
Json to_json(const FittedWeibull& f);
Json to_json(const ExponentialCurve& c);
Json to_json(const BucketedSeries& s);

} // namespace fleetrel
