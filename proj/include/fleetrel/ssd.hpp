#pragma once

#include "fleetrel/stats.hpp"
#include "fleetrel/trace_io.hpp"
#include "fleetrel/types.hpp"

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace fleetrel {

/// Uncorrectable errors per bit accessed.
double uber(std::int64_t uncorrectable_errors, double bits_accessed);
/// All errors (correctable + uncorrectable) per bit accessed.
double ber(std::int64_t correctable_errors, std::int64_t uncorrectable_errors, double bits_accessed);

/// 8 x (bytes written + bytes read to flash), with 1 TB = 10^12 bytes.
double bits_accessed(const SSDSnapshot& s);

/// A snapshot counts as failed when it logged at least one uncorrectable error.
inline bool ssd_failed(const SSDSnapshot& s) { return s.uncorrectable_errors > 0; }

enum class SsdFactor
{
    flash_written_tb,
    flash_read_tb,
    discarded_blocks,
    dram_buffer_util_pct,
    avg_temp_c,
    bus_power_w,
    os_written_tb,
    erases_per_gc,
    pages_copied,
};

inline constexpr std::array<SsdFactor, 9> all_ssd_factors{
    SsdFactor::flash_written_tb, SsdFactor::flash_read_tb, SsdFactor::discarded_blocks,
    SsdFactor::dram_buffer_util_pct, SsdFactor::avg_temp_c, SsdFactor::bus_power_w,
    SsdFactor::os_written_tb, SsdFactor::erases_per_gc, SsdFactor::pages_copied};

std::string_view to_string(SsdFactor f);
template <> SsdFactor parse_enum<SsdFactor>(std::string_view s);

/// os_written_tb is os_sectors_written x 512 bytes, in TB.
double ssd_factor_value(const SSDSnapshot& s, SsdFactor f);

/// Failure rate against one snapshot field, bucketed as in bucket_series.
BucketedSeries factor_curve(std::span<const SSDSnapshot> snapshots, SsdFactor factor, double bucket_width,
                            double min_frac = 0.001);

struct LifecyclePhases
{
    /// Ends of early detection, early failure and useful life, in factor units.
    std::array<double, 3> boundaries{};
    /// Bucket index of each boundary.
    std::array<std::size_t, 3> bucket_index{};
};

/**
 * Splits a failure-rate curve into early detection / early failure / useful
 * life / wearout. The curve is smoothed with a centered moving average; the
 * first rise-to-fall turn, the following fall-to-rise turn and the start of the
 * final run of increases are located there, then each is snapped to the raw
 * curve's extremum within two buckets.
 *
 * Needs at least 8 buckets; throws Error(data) "phases not identifiable" when
 * the turns are missing.
 */
LifecyclePhases label_phases(const BucketedSeries& curve, int window = 5);

struct FleetPairIndex
{
    std::set<std::string> s_lower;
    std::set<std::string> s_higher;
};

/// Servers with exactly two SSDs, split by which slot failed.
FleetPairIndex build_pair_index(std::span<const SSDSnapshot> snapshots);

/// |S_lower n S_higher| / |S_lower u S_higher|.
double conditional_both_fail(const FleetPairIndex& index);

/// Flash bytes written over bytes the OS issued (os_sectors_written x 512).
double write_amplification_ratio(const SSDSnapshot& s);

struct PlatformSummary
{
    Platform platform;
    std::int64_t ssds = 0;
    std::int64_t failed = 0;
    double failure_rate = 0;
    ConfidenceInterval failure_ci;
    double uber = 0;
    double mean_written_tb = 0;
    double mean_read_tb = 0;
};

/// Platforms in table order; platforms without snapshots are skipped.
std::vector<PlatformSummary> summarize_platforms(std::span<const SSDSnapshot> snapshots);

Json to_json(const LifecyclePhases& p);
Json to_json(const PlatformSummary& p);

} // namespace fleetrel
