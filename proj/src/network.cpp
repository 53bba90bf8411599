#include "fleetrel/network.hpp"

#include "fleetrel/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace fleetrel {

namespace {

Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<double> mean_of(const std::vector<double>& v)
{
    if (v.empty())
        return std::nullopt;
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

} // namespace

IncidentStats incident_rate(std::int64_t incidents, std::int64_t population)
{
    require(population >= 1, "incident_rate: population must be at least 1");
    require(incidents >= 0, "incident_rate: incident count must be non-negative");
    return {incidents, population, static_cast<double>(incidents) / static_cast<double>(population)};
}

double mtbf_hours(std::span<const EpochSeconds> starts)
{
    require(starts.size() >= 2, "mtbf: need at least two start times");
    if (!std::is_sorted(starts.begin(), starts.end()))
        fail(ErrorKind::invalid_argument, "mtbf: start times are not sorted");
    // mean of consecutive gaps telescopes to (last - first) / (n - 1)
    return static_cast<double>(starts.back() - starts.front()) / static_cast<double>(starts.size() - 1) /
           seconds_per_hour;
}

double mttr_hours(std::span<const Interval> intervals)
{
    require(!intervals.empty(), "mttr: need at least one interval");
    double total = 0;
    for (const auto& iv : intervals) {
        if (iv.end < iv.start)
            fail(ErrorKind::invalid_argument, "mttr: interval ends before it starts");
        total += static_cast<double>(iv.end - iv.start);
    }
    return total / static_cast<double>(intervals.size()) / seconds_per_hour;
}

double ReliabilityCurve::percentile(double p) const { return percentile_sorted(values, p); }

std::vector<std::pair<double, double>> ReliabilityCurve::points() const
{
    std::vector<std::pair<double, double>> pts;
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        pts.emplace_back(static_cast<double>(i + 1) / n, values[i]);
    return pts;
}

ReliabilityCurve percentile_curve(std::span<const double> per_entity_values)
{
    require(per_entity_values.size() >= 3, "percentile_curve: need at least 3 entities");
    ReliabilityCurve c;
    c.values.assign(per_entity_values.begin(), per_entity_values.end());
    for (double v : c.values)
        require(std::isfinite(v) && v > 0, "percentile_curve: values must be positive");
    std::sort(c.values.begin(), c.values.end());
    const auto pts = c.points();
    c.fit = fit_exponential_percentile(pts);
    return c;
}

double resolution_percentile(std::span<const IncidentRecord> incidents, double p)
{
    require(!incidents.empty(), "resolution_percentile: no incidents");
    require(p > 0 && p <= 1, "resolution_percentile: p must lie in (0, 1]");
    std::vector<double> hours;
    hours.reserve(incidents.size());
    for (const auto& r : incidents)
        hours.push_back(static_cast<double>(r.resolved - r.start) / seconds_per_hour);
    return percentile_nearest_rank(hours, p);
}

GroupBy parse_group_by(std::string_view s)
{
    if (s == "root_cause")
        return GroupBy::root_cause;
    if (s == "device_type")
        return GroupBy::device_type;
    if (s == "sev_level")
        return GroupBy::sev_level;
    fail(ErrorKind::invalid_argument, "unknown grouping '" + std::string(s) +
                                          "' (expected root_cause, device_type or sev_level)");
}

std::map<std::string, double> breakdown(std::span<const IncidentRecord> incidents, GroupBy group_by)
{
    require(!incidents.empty(), "breakdown: no incidents");
    std::map<std::string, double> counts;
    for (const auto& r : incidents) {
        switch (group_by) {
        case GroupBy::root_cause:
            for (auto c : r.root_causes)
                counts[std::string(to_string(c))] += 1;
            break;
        case GroupBy::device_type: counts[std::string(to_string(r.device_type))] += 1; break;
        case GroupBy::sev_level: counts["SEV" + std::to_string(r.sev_level)] += 1; break;
        }
    }
    for (auto& [k, v] : counts)
        v /= static_cast<double>(incidents.size());
    return counts;
}

double conditional_risk(double mtbf_h, double mttr_h)
{
    require(std::isfinite(mtbf_h) && mtbf_h > 0, "conditional_risk: MTBF must be positive");
    require(std::isfinite(mttr_h) && mttr_h >= 0, "conditional_risk: MTTR must be non-negative");
    return mttr_h / (mtbf_h + mttr_h);
}

std::vector<DeviceTypeReport> device_type_report(std::span<const IncidentRecord> incidents,
                                                 const std::map<DeviceType, std::int64_t>& population)
{
    std::vector<DeviceTypeReport> out;
    for (auto type : all_device_types) {
        std::vector<IncidentRecord> mine;
        for (const auto& r : incidents)
            if (r.device_type == type)
                mine.push_back(r);
        const auto it = population.find(type);
        const std::int64_t n = it == population.end() ? 0 : it->second;
        if (n == 0) {
            if (!mine.empty())
                fail(ErrorKind::data, "device type " + std::string(to_string(type)) +
                                          " has incidents but no population entry");
            continue;
        }
        DeviceTypeReport rep{type, incident_rate(static_cast<std::int64_t>(mine.size()), n), {}, {}};
        if (mine.size() >= 2) {
            std::vector<EpochSeconds> starts;
            for (const auto& r : mine)
                starts.push_back(r.start);
            std::sort(starts.begin(), starts.end());
            rep.mtbi_h = mtbf_hours(starts);
        }
        if (!mine.empty())
            rep.p75irt_h = resolution_percentile(mine, 0.75);
        out.push_back(rep);
    }
    return out;
}

std::vector<LinkStats> link_stats(std::span<const FiberRepairTicket> tickets)
{
    std::map<std::string, std::vector<const FiberRepairTicket*>> by;
    for (const auto& t : tickets)
        by[t.link_id].push_back(&t);
    std::vector<LinkStats> out;
    for (auto& [id, ts] : by) {
        LinkStats s{id, ts.front()->vendor, ts.front()->continent, 0, {}, {}};
        std::vector<EpochSeconds> starts;
        std::vector<Interval> repairs;
        for (const auto* t : ts) {
            if (t->kind != TicketKind::repair)
                continue;
            ++s.tickets;
            starts.push_back(t->start);
            if (t->end)
                repairs.push_back({t->start, *t->end});
        }
        std::sort(starts.begin(), starts.end());
        if (starts.size() >= 2)
            s.mtbf_h = mtbf_hours(starts);
        if (!repairs.empty())
            s.mttr_h = mttr_hours(repairs);
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<GroupReliability> group_reliability(std::span<const LinkStats> links, bool by_vendor)
{
    struct Acc
    {
        std::size_t links = 0;
        std::vector<double> mtbf, mttr;
    };
    std::map<std::string, Acc> by;
    for (const auto& l : links) {
        auto& a = by[by_vendor ? l.vendor : std::string(to_string(l.continent))];
        ++a.links;
        if (l.mtbf_h)
            a.mtbf.push_back(*l.mtbf_h);
        if (l.mttr_h)
            a.mttr.push_back(*l.mttr_h);
    }
    std::vector<GroupReliability> out;
    for (const auto& [k, a] : by)
        out.push_back({k, a.links, mean_of(a.mtbf), mean_of(a.mttr)});
    return out;
}

Json to_json(const IncidentStats& s) { return Json{{"i", s.i}, {"n", s.n}, {"r", s.r}}; }

Json to_json(const DeviceTypeReport& r)
{
    return Json{{"device_type", std::string(to_string(r.type))},
                {"i", r.stats.i},
                {"n", r.stats.n},
                {"r", r.stats.r},
                {"mtbi_h", opt(r.mtbi_h)},
                {"p75irt_h", opt(r.p75irt_h)}};
}

Json to_json(const GroupReliability& g)
{
    return Json{{"key", g.key}, {"links", g.links}, {"mtbf_h", opt(g.mtbf_h)}, {"mttr_h", opt(g.mttr_h)}};
}

} // namespace fleetrel
