#include "fleetrel/ssd.hpp"

#include "fleetrel/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace fleetrel {

namespace {

constexpr std::array<std::string_view, 9> factor_names{
    "flash_written_tb", "flash_read_tb", "discarded_blocks", "dram_buffer_util_pct", "avg_temp_c",
    "bus_power_w",      "os_written_tb", "erases_per_gc",    "pages_copied"};

[[noreturn]] void not_identifiable(const std::string& why)
{
    fail(ErrorKind::data, "phases not identifiable: " + why);
}

std::vector<double> moving_average(const std::vector<double>& x, int window)
{
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    const std::ptrdiff_t half = window / 2;
    std::vector<double> out(x.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const auto lo = std::max<std::ptrdiff_t>(0, i - half);
        const auto hi = std::min(n - 1, i + half);
        double s = 0;
        for (auto j = lo; j <= hi; ++j)
            s += x[static_cast<std::size_t>(j)];
        out[static_cast<std::size_t>(i)] = s / static_cast<double>(hi - lo + 1);
    }
    return out;
}

// extremum of the raw curve within +-2 buckets of i, restricted to [lo, hi]
template <class Better>
std::size_t snap(const std::vector<double>& raw, std::size_t i, std::size_t lo, std::size_t hi, Better better)
{
    const std::size_t a = std::max(lo, i >= 2 ? i - 2 : 0);
    const std::size_t b = std::min(hi, i + 2);
    std::size_t best = std::clamp(i, a, b);
    for (std::size_t j = a; j <= b; ++j)
        if (better(raw[j], raw[best], j, best))
            best = j;
    return best;
}

} // namespace

double uber(std::int64_t uncorrectable_errors, double bits_accessed)
{
    require(uncorrectable_errors >= 0, "uber: error count must be non-negative");
    require(bits_accessed > 0 && std::isfinite(bits_accessed), "uber: bits accessed must be positive");
    return static_cast<double>(uncorrectable_errors) / bits_accessed;
}

double ber(std::int64_t correctable_errors, std::int64_t uncorrectable_errors, double bits_accessed)
{
    require(correctable_errors >= 0 && uncorrectable_errors >= 0, "ber: error counts must be non-negative");
    require(bits_accessed > 0 && std::isfinite(bits_accessed), "ber: bits accessed must be positive");
    return static_cast<double>(correctable_errors + uncorrectable_errors) / bits_accessed;
}

double bits_accessed(const SSDSnapshot& s) { return (s.flash_written_tb + s.flash_read_tb) * 8e12; }

std::string_view to_string(SsdFactor f) { return factor_names[static_cast<std::size_t>(f)]; }

template <> SsdFactor parse_enum<SsdFactor>(std::string_view s)
{
    for (std::size_t i = 0; i < factor_names.size(); ++i)
        if (factor_names[i] == s)
            return all_ssd_factors[i];
    fail(ErrorKind::invalid_argument, "unknown SSD factor '" + std::string(s) + "'");
}

double ssd_factor_value(const SSDSnapshot& s, SsdFactor f)
{
    switch (f) {
    case SsdFactor::flash_written_tb: return s.flash_written_tb;
    case SsdFactor::flash_read_tb: return s.flash_read_tb;
    case SsdFactor::discarded_blocks: return static_cast<double>(s.discarded_blocks);
    case SsdFactor::dram_buffer_util_pct: return s.dram_buffer_util_pct;
    case SsdFactor::avg_temp_c: return s.avg_temp_c;
    case SsdFactor::bus_power_w: return s.bus_power_w;
    case SsdFactor::os_written_tb: return static_cast<double>(s.os_sectors_written) * 512.0 / 1e12;
    case SsdFactor::erases_per_gc: return s.erases_per_gc;
    case SsdFactor::pages_copied: return static_cast<double>(s.pages_copied);
    }
    return 0.0;
}

BucketedSeries factor_curve(std::span<const SSDSnapshot> snapshots, SsdFactor factor, double bucket_width,
                            double min_frac)
{
    if (snapshots.empty())
        fail(ErrorKind::data, "factor_curve: empty cohort");
    std::vector<Observation> obs;
    obs.reserve(snapshots.size());
    for (const auto& s : snapshots)
        obs.push_back({ssd_factor_value(s, factor), ssd_failed(s)});
    return bucket_series(obs, bucket_width, min_frac);
}

LifecyclePhases label_phases(const BucketedSeries& curve, int window)
{
    require(window >= 1 && window % 2 == 1, "label_phases: window must be a positive odd number");
    const std::size_t n = curve.size();
    require(n >= 8, "label_phases: need at least 8 buckets, got " + std::to_string(n));
    const auto& raw = curve.rates;
    const auto s = moving_average(raw, window);

    // slope sign on the smoothed curve, carrying the last non-zero sign across plateaus
    std::size_t peak = n;
    int sign = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = s[i + 1] - s[i];
        if (d > 0)
            sign = 1;
        else if (d < 0) {
            if (sign > 0) {
                peak = i;
                break;
            }
            sign = -1;
        }
    }
    if (peak == n)
        not_identifiable("no rise followed by a fall");

    std::size_t trough = n;
    for (std::size_t i = peak; i + 1 < n; ++i)
        if (s[i + 1] - s[i] >= 0) {
            trough = i;
            break;
        }
    if (trough == n)
        not_identifiable("failure rate never stops falling");

    std::size_t onset = n;
    for (std::size_t i = n - 1; i > trough; --i)
        if (s[i] - s[i - 1] <= 0) {
            onset = i;
            break;
        }
    if (onset == n)
        onset = trough;
    if (onset + 1 >= n || !(s[n - 1] > s[onset]))
        not_identifiable("no sustained increase after the minimum");

    LifecyclePhases p;
    const std::size_t b0 = snap(raw, peak, 0, n - 1, [](double x, double best, std::size_t, std::size_t) {
        return x > best;
    });
    const std::size_t b1 = snap(raw, trough, b0 + 1, n - 1, [&](double x, double best, std::size_t j, std::size_t k) {
        return x < best || (x == best && j < k);
    });
    const std::size_t b2 = snap(raw, onset, b1, n - 1, [](double x, double best, std::size_t j, std::size_t k) {
        return x < best || (x == best && j > k);
    });
    if (!(b0 < b1 && b1 < b2))
        not_identifiable("boundaries are not strictly increasing");
    p.bucket_index = {b0, b1, b2};
    p.boundaries = {curve.centers[b0], curve.centers[b1], curve.centers[b2]};
    return p;
}

FleetPairIndex build_pair_index(std::span<const SSDSnapshot> snapshots)
{
    std::map<std::string, std::vector<const SSDSnapshot*>> by_server;
    for (const auto& s : snapshots)
        by_server[s.server_id].push_back(&s);
    FleetPairIndex idx;
    for (auto& [server, devs] : by_server) {
        if (devs.size() != 2)
            continue;
        if (devs[0]->slot_index == devs[1]->slot_index)
            fail(ErrorKind::data, "server '" + server + "' has two SSDs in slot " +
                                      std::to_string(devs[0]->slot_index));
        if (devs[0]->slot_index > devs[1]->slot_index)
            std::swap(devs[0], devs[1]);
        if (ssd_failed(*devs[0]))
            idx.s_lower.insert(server);
        if (ssd_failed(*devs[1]))
            idx.s_higher.insert(server);
    }
    return idx;
}

double conditional_both_fail(const FleetPairIndex& index)
{
    std::size_t both = 0;
    for (const auto& s : index.s_lower)
        both += index.s_higher.count(s);
    const std::size_t either = index.s_lower.size() + index.s_higher.size() - both;
    if (either == 0)
        fail(ErrorKind::data, "conditional_both_fail: no server with a failed SSD");
    return static_cast<double>(both) / static_cast<double>(either);
}

double write_amplification_ratio(const SSDSnapshot& s)
{
    if (s.os_sectors_written <= 0)
        fail(ErrorKind::data, "write_amplification_ratio: SSD '" + s.ssd_id + "' has no OS writes");
    return s.flash_written_tb * 1e12 / (static_cast<double>(s.os_sectors_written) * 512.0);
}

std::vector<PlatformSummary> summarize_platforms(std::span<const SSDSnapshot> snapshots)
{
    std::map<Platform, std::vector<const SSDSnapshot*>> by;
    for (const auto& s : snapshots)
        by[s.platform].push_back(&s);
    std::vector<PlatformSummary> out;
    for (const auto& [platform, devs] : by) {
        PlatformSummary p{};
        p.platform = platform;
        p.ssds = static_cast<std::int64_t>(devs.size());
        std::int64_t errors = 0;
        double bits = 0;
        for (const auto* d : devs) {
            p.failed += ssd_failed(*d) ? 1 : 0;
            errors += d->uncorrectable_errors;
            bits += bits_accessed(*d);
            p.mean_written_tb += d->flash_written_tb;
            p.mean_read_tb += d->flash_read_tb;
        }
        p.failure_rate = static_cast<double>(p.failed) / static_cast<double>(p.ssds);
        p.failure_ci = binomial_ci(p.failed, p.ssds);
        p.uber = bits > 0 ? uber(errors, bits) : 0.0;
        p.mean_written_tb /= static_cast<double>(p.ssds);
        p.mean_read_tb /= static_cast<double>(p.ssds);
        out.push_back(p);
    }
    return out;
}

Json to_json(const LifecyclePhases& p)
{
    return Json{{"early_detection_end", p.boundaries[0]},
                {"early_failure_end", p.boundaries[1]},
                {"useful_life_end", p.boundaries[2]},
                {"bucket_index", p.bucket_index}};
}

Json to_json(const PlatformSummary& p)
{
    return Json{{"platform", std::string(to_string(p.platform))},
                {"ssds", p.ssds},
                {"failed", p.failed},
                {"failure_rate", p.failure_rate},
                {"ci_low", p.failure_ci.low},
                {"ci_high", p.failure_ci.high},
                {"uber", p.uber},
                {"mean_written_tb", p.mean_written_tb},
                {"mean_read_tb", p.mean_read_tb}};
}

} // namespace fleetrel
