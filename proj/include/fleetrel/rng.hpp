#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace fleetrel {

/// 64-bit FNV-1a over a byte string.
std::uint64_t fnv1a64(std::string_view s);

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix64(std::uint64_t x);

/// Seed of the substream for a named entity (e.g. a server id) under a master seed.
std::uint64_t substream_seed(std::uint64_t seed, std::string_view key);

/**
 * Seedable random source with portable output. The engine is mt19937_64, whose
 * sequence is fixed by the standard; every variate transform below is written
 * out here rather than taken from <random> distributions, which are allowed to
 * differ between standard library implementations.
 */
class Rng
{
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    /// Uniform on (0, 1]; safe to take the log of.
    double uniform_pos() { return 1.0 - uniform(); }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n). n must be positive.
    std::uint64_t below(std::uint64_t n);

    bool bernoulli(double p) { return uniform() < p; }
    double exponential(double mean);
    double normal(double mean, double sd);
    /// Pareto with shape alpha and scale x_min (support [x_min, inf)).
    double pareto(double alpha, double x_min);
    double weibull(double shape, double scale);
    double lognormal(double mu, double sigma);
    /// Index drawn with probability proportional to weights[i].
    std::size_t discrete(std::span<const double> weights);

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace fleetrel
