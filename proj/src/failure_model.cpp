#include "fleetrel/failure_model.hpp"

#include "fleetrel/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>

namespace fleetrel {

namespace {

constexpr std::array<std::string_view, factor_count> names{"Intercept", "Capacity", "Density2Gb", "Density4Gb",
                                                           "Chips",     "Width8",   "CPU%",       "Memory%",
                                                           "Age",       "CPUs"};

constexpr std::size_t idx(Factor f) { return static_cast<std::size_t>(f); }

constexpr bool optional_factor(Factor f) { return f == Factor::width_8 || f == Factor::memory_pct; }

double sigmoid(double z)
{
    // split by sign so exp never overflows
    if (z >= 0)
        return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// log(1 + e^z) without overflow
double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

Eigen::MatrixXd design_matrix(std::span<const LabeledDesign> samples, std::span<const Factor> factors)
{
    Eigen::MatrixXd x(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(factors.size()));
    for (std::size_t i = 0; i < samples.size(); ++i)
        for (std::size_t j = 0; j < factors.size(); ++j)
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                factor_value(samples[i].design, factors[j]);
    return x;
}

Eigen::VectorXd labels(std::span<const LabeledDesign> samples)
{
    Eigen::VectorXd y(static_cast<Eigen::Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i)
        y(static_cast<Eigen::Index>(i)) = samples[i].in_error_group ? 1.0 : 0.0;
    return y;
}

double log_likelihood(const Eigen::VectorXd& eta, const Eigen::VectorXd& y)
{
    double ll = 0;
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        ll += y(i) * eta(i) - softplus(eta(i));
    return ll;
}

} // namespace

std::string_view coefficient_name(Factor f) { return names[idx(f)]; }

Factor parse_coefficient_name(std::string_view name)
{
    for (std::size_t i = 0; i < factor_count; ++i)
        if (names[i] == name)
            return all_factors[i];
    fail(ErrorKind::invalid_argument, "unknown coefficient '" + std::string(name) + "'");
}

double factor_value(const ServerDesign& d, Factor f)
{
    switch (f) {
    case Factor::intercept: return 1.0;
    case Factor::capacity: return d.capacity_gb;
    case Factor::density_2gb: return d.density == ChipDensity::gb2 ? 1.0 : 0.0;
    case Factor::density_4gb: return d.density == ChipDensity::gb4 ? 1.0 : 0.0;
    case Factor::chips: return d.chips;
    case Factor::width_8: return d.transfer_width == TransferWidth::x8 ? 1.0 : 0.0;
    case Factor::cpu_pct: return d.cpu_util_pct;
    case Factor::memory_pct: return d.mem_util_pct;
    case Factor::age: return d.age_years;
    case Factor::cpus: return d.cpus;
    }
    return 0.0;
}

LogisticFailureModel::LogisticFailureModel(std::array<double, factor_count> coefficients,
                                           std::optional<std::array<double, factor_count>> standard_errors)
    : beta_(coefficients), se_(standard_errors)
{
    for (std::size_t i = 0; i < factor_count; ++i) {
        included_[i] = !optional_factor(all_factors[i]);
        if (included_[i] && !std::isfinite(beta_[i]))
            fail(ErrorKind::invalid_argument, "coefficient " + std::string(names[i]) + " must be finite");
    }
}

LogisticFailureModel LogisticFailureModel::published_2015()
{
    //                        Intercept Capacity  D2Gb   D4Gb   Chips      Width8   CPU%      Memory%  Age       CPUs
    LogisticFailureModel m({-5.511, 9.012e-2, 1.018, 2.585, -4.035e-2, 2.310e-1, 1.731e-2, 5.905e-5, 2.296e-1, 2.126e-1},
                           std::array<double, factor_count>{3.011e-1, 2.168e-2, 1.039e-1, 1.907e-1, 1.294e-2, 1.277e-1,
                                                            1.633e-3, 1.224e-3, 3.956e-2, 1.449e-2});
    m.set_name("paper-2015");
    return m;
}

LogisticFailureModel LogisticFailureModel::builtin(std::string_view name)
{
    if (name == "paper-2015")
        return published_2015();
    fail(ErrorKind::invalid_argument, "unknown built-in model '" + std::string(name) + "' (known: paper-2015)");
}

LogisticFailureModel LogisticFailureModel::with_factor(Factor f, bool include) const
{
    require(optional_factor(f), "only Width8 and Memory% can be toggled");
    LogisticFailureModel m = *this;
    m.included_[idx(f)] = include;
    return m;
}

double LogisticFailureModel::logit(const ServerDesign& d) const
{
    double z = 0;
    for (std::size_t i = 0; i < factor_count; ++i) {
        if (!included_[i])
            continue;
        const double x = factor_value(d, all_factors[i]);
        if (!std::isfinite(x))
            fail(ErrorKind::invalid_argument, "factor " + std::string(names[i]) + " is not finite");
        z += beta_[i] * x;
    }
    return z;
}

// kept off the endpoints so callers can always take logit(F)
double LogisticFailureModel::predict(const ServerDesign& d) const
{
    return std::clamp(sigmoid(logit(d)), std::numeric_limits<double>::min(), 1.0 - 0x1.0p-53);
}

double predict_relative_rate(const LogisticFailureModel& m, const ServerDesign& d)
{
    validate(d);
    return m.predict(d);
}

Json to_json(const LogisticFailureModel& m)
{
    Json coef = Json::object();
    for (std::size_t i = 0; i < factor_count; ++i)
        coef[std::string(names[i])] = m.coefficients()[i];
    Json j{{"name", m.name()}, {"coefficients", coef}};
    if (m.standard_errors()) {
        Json se = Json::object();
        for (std::size_t i = 0; i < factor_count; ++i)
            se[std::string(names[i])] = (*m.standard_errors())[i];
        j["standard_errors"] = se;
    }
    Json excluded = Json::array();
    for (auto f : all_factors)
        if (!m.included(f))
            excluded.push_back(std::string(coefficient_name(f)));
    j["excluded"] = excluded;
    return j;
}

LogisticFailureModel model_from_json(const Json& j)
{
    if (!j.is_object() || !j.contains("coefficients") || !j["coefficients"].is_object())
        fail(ErrorKind::parse, "model JSON needs a 'coefficients' object");
    std::array<double, factor_count> beta{};
    const Json& c = j["coefficients"];
    for (std::size_t i = 0; i < factor_count; ++i) {
        const std::string key(names[i]);
        if (!c.contains(key)) {
            if (optional_factor(all_factors[i]))
                continue;
            fail(ErrorKind::parse, "model JSON is missing coefficient '" + key + "'");
        }
        if (!c[key].is_number())
            fail(ErrorKind::parse, "model coefficient '" + key + "' must be a number");
        beta[i] = c[key].get<double>();
    }
    std::optional<std::array<double, factor_count>> se;
    if (j.contains("standard_errors") && j["standard_errors"].is_object()) {
        std::array<double, factor_count> s{};
        for (std::size_t i = 0; i < factor_count; ++i) {
            const std::string key(names[i]);
            if (j["standard_errors"].contains(key) && j["standard_errors"][key].is_number())
                s[i] = j["standard_errors"][key].get<double>();
        }
        se = s;
    }
    LogisticFailureModel m(beta, se);
    if (j.contains("name") && j["name"].is_string())
        m.set_name(j["name"].get<std::string>());
    if (j.contains("excluded") && j["excluded"].is_array()) {
        for (auto f : {Factor::width_8, Factor::memory_pct}) {
            const bool excluded = std::any_of(j["excluded"].begin(), j["excluded"].end(), [&](const Json& e) {
                return e.is_string() && e.get<std::string>() == coefficient_name(f);
            });
            m = m.with_factor(f, !excluded);
        }
    }
    return m;
}

DesignComparison compare_designs(const LogisticFailureModel& m, const ServerDesign& a, const ServerDesign& b,
                                 std::optional<int> report_decimals)
{
    DesignComparison c;
    c.rate_a = predict_relative_rate(m, a);
    c.rate_b = predict_relative_rate(m, b);
    if (report_decimals) {
        require(*report_decimals >= 1 && *report_decimals <= 15, "report_decimals must lie in [1, 15]");
        const double scale = std::pow(10.0, *report_decimals);
        c.rate_a = std::round(c.rate_a * scale) / scale;
        c.rate_b = std::round(c.rate_b * scale) / scale;
        require(c.rate_a > 0 && c.rate_b > 0, "a rate rounds to zero at the requested precision");
    }
    c.ratio = c.rate_a / c.rate_b;
    c.percent_reduction = (c.rate_a - c.rate_b) / c.rate_a;
    return c;
}

Json to_json(const DesignComparison& c)
{
    return Json{{"rate_a", c.rate_a},
                {"rate_b", c.rate_b},
                {"ratio", c.ratio},
                {"percent_reduction", c.percent_reduction}};
}

double logistic_log_likelihood(std::span<const LabeledDesign> samples, std::span<const Factor> factors,
                               std::span<const double> beta)
{
    require(beta.size() == factors.size(), "one coefficient per factor");
    const Eigen::MatrixXd x = design_matrix(samples, factors);
    const Eigen::Map<const Eigen::VectorXd> b(beta.data(), static_cast<Eigen::Index>(beta.size()));
    return log_likelihood(x * b, labels(samples));
}

std::vector<double> logistic_gradient(std::span<const LabeledDesign> samples, std::span<const Factor> factors,
                                      std::span<const double> beta)
{
    require(beta.size() == factors.size(), "one coefficient per factor");
    const Eigen::MatrixXd x = design_matrix(samples, factors);
    const Eigen::Map<const Eigen::VectorXd> b(beta.data(), static_cast<Eigen::Index>(beta.size()));
    const Eigen::VectorXd eta = x * b;
    Eigen::VectorXd resid = labels(samples);
    for (Eigen::Index i = 0; i < eta.size(); ++i)
        resid(i) -= sigmoid(eta(i));
    const Eigen::VectorXd g = x.transpose() * resid;
    return {g.data(), g.data() + g.size()};
}

LogisticFit fit_logistic(std::span<const LabeledDesign> samples, const FitOptions& opts)
{
    require(opts.tol > 0 && opts.max_iter >= 1, "fit_logistic: tol must be positive and max_iter at least 1");
    require(opts.ridge >= 0, "fit_logistic: ridge must be non-negative");
    const auto positives =
        std::count_if(samples.begin(), samples.end(), [](const LabeledDesign& s) { return s.in_error_group; });
    if (positives == 0 || positives == static_cast<std::ptrdiff_t>(samples.size()))
        fail(ErrorKind::invalid_argument, "fit_logistic: need at least one sample of each label");

    std::vector<Factor> factors;
    for (auto f : all_factors) {
        if (f == Factor::width_8 && !opts.include_width8)
            continue;
        if (f == Factor::memory_pct && !opts.include_memory_pct)
            continue;
        factors.push_back(f);
    }
    for (const auto& s : samples)
        for (auto f : factors)
            if (!std::isfinite(factor_value(s.design, f)))
                fail(ErrorKind::invalid_argument, "fit_logistic: non-finite factor " +
                                                      std::string(coefficient_name(f)));

    const Eigen::MatrixXd x = design_matrix(samples, factors);
    const Eigen::VectorXd y = labels(samples);
    const auto p = static_cast<Eigen::Index>(factors.size());

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < p)
        fail(ErrorKind::numeric, "fit_logistic: singular design matrix (rank " + std::to_string(qr.rank()) + " < " +
                                     std::to_string(p) + ")");

    Eigen::MatrixXd penalty = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index j = 1; j < p; ++j)
        penalty(j, j) = opts.ridge;

    auto objective = [&](const Eigen::VectorXd& b) {
        return log_likelihood(x * b, y) - 0.5 * b.dot(penalty * b);
    };

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    const double ybar = y.mean();
    beta(0) = std::log(ybar / (1.0 - ybar));
    double obj = objective(beta);
    Eigen::MatrixXd info(p, p);
    int it = 0;
    bool converged = false;
    for (it = 1; it <= opts.max_iter; ++it) {
        const Eigen::VectorXd eta = x * beta;
        Eigen::VectorXd mu(eta.size()), w(eta.size());
        for (Eigen::Index i = 0; i < eta.size(); ++i) {
            mu(i) = sigmoid(eta(i));
            w(i) = mu(i) * (1.0 - mu(i));
        }
        info = x.transpose() * w.asDiagonal() * x + penalty;
        const Eigen::VectorXd grad = x.transpose() * (y - mu) - penalty * beta;
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
        if (ldlt.info() != Eigen::Success)
            fail(ErrorKind::numeric, "fit_logistic: information matrix is singular");
        Eigen::VectorXd step = ldlt.solve(grad);

        // halve the Newton step until the likelihood does not drop
        Eigen::VectorXd next = beta + step;
        double next_obj = objective(next);
        for (int h = 0; h < 30 && !(next_obj >= obj - 1e-12 * std::fabs(obj)); ++h) {
            step /= 2;
            next = beta + step;
            next_obj = objective(next);
        }
        const double change = std::fabs(next_obj - obj) / (std::fabs(next_obj) + 0.1);
        beta = next;
        obj = next_obj;

        // deviance -2 ll tends to zero only when the classes separate perfectly
        if (-2.0 * log_likelihood(x * beta, y) < 1e-6 * static_cast<double>(samples.size()) && opts.ridge == 0)
            fail(ErrorKind::numeric, "fit_logistic: separation (perfectly separable labels; coefficients diverge)");
        if (change < opts.tol) {
            converged = true;
            break;
        }
    }

    const Eigen::VectorXd eta = x * beta;
    std::size_t saturated = 0;
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double m = sigmoid(eta(i));
        w(i) = m * (1.0 - m);
        if (w(i) < 1e-12)
            ++saturated;
    }
    if (!converged) {
        if (saturated > 0)
            fail(ErrorKind::numeric, "fit_logistic: separation (fitted probabilities reached 0 or 1)");
        fail(ErrorKind::numeric, "fit_logistic: no convergence in " + std::to_string(opts.max_iter) + " iterations");
    }
    if (saturated * 20 > samples.size() && opts.ridge == 0)
        fail(ErrorKind::numeric, "fit_logistic: separation (fitted probabilities reached 0 or 1)");

    info = x.transpose() * w.asDiagonal() * x + penalty;
    const Eigen::MatrixXd cov = info.ldlt().solve(Eigen::MatrixXd::Identity(p, p));

    std::array<double, factor_count> coef{};
    std::array<double, factor_count> se{};
    LogisticFit fit{LogisticFailureModel(coef), {}, log_likelihood(eta, y), it};
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto f = factors[static_cast<std::size_t>(j)];
        CoefficientFit t{};
        t.factor = f;
        t.estimate = beta(j);
        t.std_error = std::sqrt(std::max(0.0, cov(j, j)));
        t.z = t.estimate / t.std_error;
        t.p_value = std::erfc(std::fabs(t.z) / std::sqrt(2.0));
        t.significant = t.p_value < opts.significance;
        fit.terms.push_back(t);
        coef[idx(f)] = t.estimate;
        se[idx(f)] = t.std_error;
    }
    LogisticFailureModel model(coef, se);
    model = model.with_factor(Factor::width_8, opts.include_width8);
    model = model.with_factor(Factor::memory_pct, opts.include_memory_pct);
    model.set_name("fitted");
    fit.model = model;
    return fit;
}

Json to_json(const LogisticFit& f)
{
    Json terms = Json::array();
    for (const auto& t : f.terms)
        terms.push_back(Json{{"name", std::string(coefficient_name(t.factor))},
                             {"estimate", t.estimate},
                             {"std_error", t.std_error},
                             {"z", t.z},
                             {"p_value", t.p_value},
                             {"significant", t.significant}});
    return Json{{"model", to_json(f.model)},
                {"terms", terms},
                {"log_likelihood", f.log_likelihood},
                {"iterations", f.iterations}};
}

Json to_json(const LabeledDesign& s)
{
    Json j = to_json(s.design);
    j["in_error_group"] = s.in_error_group;
    return j;
}

template <> LabeledDesign decode<LabeledDesign>(const Json& j, std::size_t line)
{
    LabeledDesign s;
    s.design = decode<ServerDesign>(j, line);
    auto it = j.find("in_error_group");
    if (it == j.end() || !it->is_boolean())
        throw ParseError(line, "in_error_group", "missing required field");
    s.in_error_group = it->get<bool>();
    return s;
}

} // namespace fleetrel
