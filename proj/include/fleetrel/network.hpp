#pragma once

#include "fleetrel/stats.hpp"
#include "fleetrel/trace_io.hpp"
#include "fleetrel/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace fleetrel {

struct IncidentStats
{
    std::int64_t i = 0;
    std::int64_t n = 0;
    /// i / n; not clamped, a device type can average more than one incident.
    double r = 0;
};

IncidentStats incident_rate(std::int64_t incidents, std::int64_t population);

/// Mean gap between consecutive start times, in hours. Starts must be sorted.
double mtbf_hours(std::span<const EpochSeconds> starts);

struct Interval
{
    EpochSeconds start;
    EpochSeconds end;
};

/// Mean interval length in hours.
double mttr_hours(std::span<const Interval> intervals);

/**
 * Sorted per-entity values (MTBF or MTTR hours) with an exponential fit of
 * value against percentile. Entity i of n (1-based, ascending) sits at p = i/n.
 */
struct ReliabilityCurve
{
    std::vector<double> values;
    ExponentialCurve fit;

    /// Nearest-rank percentile, p in [0, 1].
    double percentile(double p) const;
    std::vector<std::pair<double, double>> points() const;
};

ReliabilityCurve percentile_curve(std::span<const double> per_entity_values);

/// Nearest-rank percentile of resolution times (resolved - start), in hours.
double resolution_percentile(std::span<const IncidentRecord> incidents, double p = 0.75);

enum class GroupBy { root_cause, device_type, sev_level };

GroupBy parse_group_by(std::string_view s);

/**
 * Share of incidents per category, keyed by category name. An incident with
 * several root causes counts once toward each, so root-cause shares can sum
 * past 1.
 */
std::map<std::string, double> breakdown(std::span<const IncidentRecord> incidents, GroupBy group_by);

/// Steady-state unavailability mttr / (mtbf + mttr).
double conditional_risk(double mtbf_h, double mttr_h);
inline bool conditional_risk_ok(double risk, double threshold = 1e-4) { return risk < threshold; }

struct DeviceTypeReport
{
    DeviceType type;
    IncidentStats stats;
    /// Absent with fewer than two incidents.
    std::optional<double> mtbi_h;
    std::optional<double> p75irt_h;
};

/// Per device type {i, n, r, mtbi_h, p75irt_h}; n comes from the population table.
std::vector<DeviceTypeReport> device_type_report(std::span<const IncidentRecord> incidents,
                                                 const std::map<DeviceType, std::int64_t>& population);

struct LinkStats
{
    std::string link_id;
    std::string vendor;
    Continent continent;
    std::size_t tickets = 0;
    std::optional<double> mtbf_h;
    std::optional<double> mttr_h;
};

/// Per-link MTBF over repair-ticket starts and MTTR over closed repair tickets.
/// Maintenance tickets are left out.
std::vector<LinkStats> link_stats(std::span<const FiberRepairTicket> tickets);

struct GroupReliability
{
    std::string key;
    std::size_t links = 0;
    std::optional<double> mtbf_h;
    std::optional<double> mttr_h;
};

/// Mean of per-link MTBF/MTTR within each continent or vendor.
std::vector<GroupReliability> group_reliability(std::span<const LinkStats> links, bool by_vendor);

Json to_json(const IncidentStats& s);
Json to_json(const DeviceTypeReport& r);
Json to_json(const GroupReliability& g);

} // namespace fleetrel
