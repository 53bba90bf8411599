#pragma once

#include "fleetrel/trace_io.hpp"
#include "fleetrel/types.hpp"

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fleetrel {

/// Model terms in table order. The last two are recorded but left out of the
/// prediction formula unless explicitly enabled.
enum class Factor { intercept, capacity, density_2gb, density_4gb, chips, width_8, cpu_pct, memory_pct, age, cpus };

inline constexpr std::size_t factor_count = 10;
inline constexpr std::array<Factor, factor_count> all_factors{
    Factor::intercept, Factor::capacity, Factor::density_2gb, Factor::density_4gb, Factor::chips,
    Factor::width_8,   Factor::cpu_pct,  Factor::memory_pct,  Factor::age,         Factor::cpus};

/// Coefficient name as it appears in the published table ("Intercept", "CPU%", ...).
std::string_view coefficient_name(Factor f);
Factor parse_coefficient_name(std::string_view name);

/// Value of one factor for a design (1.0 for the intercept, indicators for density/width).
double factor_value(const ServerDesign& d, Factor f);

/**
 * Logistic server-failure model: ln[F / (1 - F)] = sum of beta_i * x_i.
 *
 * F is a relative failure rate. It compares error-group and control-group
 * servers, so only ratios between designs carry meaning; it is not a
 * probability of failure.
 */
class LogisticFailureModel
{
  public:
    /// Width8 and Memory% default to excluded.
    explicit LogisticFailureModel(std::array<double, factor_count> coefficients,
                                  std::optional<std::array<double, factor_count>> standard_errors = std::nullopt);

    /// Coefficients published for the 2015 fleet study, registered as "paper-2015".
    static LogisticFailureModel published_2015();
    /// Looks up a built-in model by name.
    static LogisticFailureModel builtin(std::string_view name);

    double coefficient(Factor f) const { return beta_[static_cast<std::size_t>(f)]; }
    const std::array<double, factor_count>& coefficients() const { return beta_; }
    const std::optional<std::array<double, factor_count>>& standard_errors() const { return se_; }

    bool included(Factor f) const { return included_[static_cast<std::size_t>(f)]; }
    /// Copy with an optional factor switched in or out. The eight formula terms stay in.
    LogisticFailureModel with_factor(Factor f, bool include) const;

    /// Linear predictor z = beta . x over the included factors.
    double logit(const ServerDesign& d) const;
    /// F = 1 / (1 + e^-z), strictly inside (0, 1).
    double predict(const ServerDesign& d) const;

    const std::string& name() const { return name_; }
    void set_name(std::string n) { name_ = std::move(n); }

  private:
    std::array<double, factor_count> beta_;
    std::optional<std::array<double, factor_count>> se_;
    std::array<bool, factor_count> included_;
    std::string name_ = "custom";
};

Json to_json(const LogisticFailureModel& m);
LogisticFailureModel model_from_json(const Json& j);

double predict_relative_rate(const LogisticFailureModel& m, const ServerDesign& d);

struct DesignComparison
{
    double rate_a = 0;
    double rate_b = 0;
    /// rate_a / rate_b
    double ratio = 0;
    /// (rate_a - rate_b) / rate_a; negative when b fails more often.
    double percent_reduction = 0;
};

/**
 * Compares two designs under one model. With report_decimals set, both rates are
 * first rounded to that many decimals, the way a published table reports them,
 * and ratio/reduction are derived from the rounded values.
 */
DesignComparison compare_designs(const LogisticFailureModel& m, const ServerDesign& a, const ServerDesign& b,
                                 std::optional<int> report_decimals = std::nullopt);

Json to_json(const DesignComparison& c);

struct LabeledDesign
{
    ServerDesign design;
    bool in_error_group = false;
};

struct FitOptions
{
    double tol = 1e-8;
    int max_iter = 200;
    /// L2 penalty on slopes; 0 is plain maximum likelihood.
    double ridge = 0.0;
    bool include_width8 = false;
    bool include_memory_pct = false;
    double significance = 0.01;
};

struct CoefficientFit
{
    Factor factor;
    double estimate;
    double std_error;
    double z;
    double p_value;
    bool significant;
};

struct LogisticFit
{
    LogisticFailureModel model;
    std::vector<CoefficientFit> terms;
    double log_likelihood = 0;
    int iterations = 0;
};

/**
 * Maximum-likelihood logistic regression by iteratively reweighted least
 * squares. Standard errors come from the inverse information matrix at the
 * optimum; p-values are two-sided Wald tests.
 *
 * Throws Error(numeric) with "separation" when the classes are perfectly
 * separable, or "singular" when the design matrix is rank deficient.
 */
LogisticFit fit_logistic(std::span<const LabeledDesign> samples, const FitOptions& opts = {});

Json to_json(const LogisticFit& f);

/// Log-likelihood and its gradient for raw coefficient vectors over the given factors.
double logistic_log_likelihood(std::span<const LabeledDesign> samples, std::span<const Factor> factors,
                               std::span<const double> beta);
std::vector<double> logistic_gradient(std::span<const LabeledDesign> samples, std::span<const Factor> factors,
                                      std::span<const double> beta);

Json to_json(const LabeledDesign& s);
template <> LabeledDesign decode<LabeledDesign>(const Json& j, std::size_t line);

} // namespace fleetrel
