#include "fleetrel/rng.hpp"

#include "fleetrel/error.hpp"

#include <cmath>
#include <numbers>

namespace fleetrel {

std::uint64_t fnv1a64(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t substream_seed(std::uint64_t seed, std::string_view key) { return mix64(mix64(seed) ^ fnv1a64(key)); }

std::uint64_t Rng::below(std::uint64_t n)
{
    require(n > 0, "Rng::below needs a positive bound");
    // reject the top partial block so every residue is equally likely
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = engine_();
    } while (x >= limit);
    return x % n;
}

double Rng::exponential(double mean) { return -mean * std::log(uniform_pos()); }

double Rng::normal(double mean, double sd)
{
    if (has_spare_) {
        has_spare_ = false;
        return mean + sd * spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return mean + sd * r * std::cos(theta);
}

double Rng::pareto(double alpha, double x_min) { return x_min * std::pow(uniform_pos(), -1.0 / alpha); }

double Rng::weibull(double shape, double scale) { return scale * std::pow(-std::log(uniform_pos()), 1.0 / shape); }

double Rng::lognormal(double mu, double sigma) { return std::exp(normal(mu, sigma)); }

std::size_t Rng::discrete(std::span<const double> weights)
{
    double total = 0;
    for (double w : weights)
        total += w;
    require(total > 0, "discrete draw needs a positive total weight");
    double u = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (u < weights[i])
            return i;
        u -= weights[i];
    }
    // rounding left u just past the last positive weight
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0)
            return i;
    return 0;
}

} // namespace fleetrel
