#include "fleetrel/classify.hpp"

#include "fleetrel/error.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <tuple>

namespace fleetrel {

namespace {

constexpr std::array<std::string_view, component_class_count> class_names{"socket", "channel", "bank",    "row",
                                                                          "column", "cell",    "spurious"};

using Assignment = std::vector<std::optional<ComponentClass>>;

// Applies a threshold rule: group unclaimed errors by `key`, and claim every
// group holding more than `threshold` errors that span more than one distinct
// `spread` value.
template <class KeyFn, class SpreadFn>
void threshold_rule(std::span<const MemErrorEvent> ev, Assignment& out, std::int64_t threshold, ComponentClass cls,
                    KeyFn key, SpreadFn spread)
{
    using Key = decltype(key(ev[0]));
    using Spread = decltype(spread(ev[0]));
    struct Group
    {
        std::vector<std::size_t> members;
        std::set<Spread> spread;
    };
    std::map<Key, Group> groups;
    for (std::size_t i = 0; i < ev.size(); ++i) {
        if (out[i])
            continue;
        auto& g = groups[key(ev[i])];
        g.members.push_back(i);
        g.spread.insert(spread(ev[i]));
    }
    for (const auto& [k, g] : groups) {
        if (static_cast<std::int64_t>(g.members.size()) > threshold && g.spread.size() > 1)
            for (auto i : g.members)
                out[i] = cls;
    }
}

} // namespace

std::string_view to_string(ComponentClass c) { return class_names[static_cast<std::size_t>(c)]; }

template <> ComponentClass parse_enum<ComponentClass>(std::string_view s)
{
    for (std::size_t i = 0; i < class_names.size(); ++i)
        if (class_names[i] == s)
            return all_component_classes[i];
    fail(ErrorKind::invalid_argument, "unknown component class '" + std::string(s) + "'");
}

std::vector<ComponentClass> classify_month(std::span<const MemErrorEvent> ev, const ClassifyOptions& opts)
{
    require(opts.threshold_k >= 1, "threshold_k must be at least 1");
    require(opts.cell_window_s >= 0, "cell_window_s must be non-negative");
    if (ev.empty())
        return {};
    const auto month = utc_month_index(ev.front().timestamp);
    for (const auto& e : ev) {
        if (e.server_id != ev.front().server_id)
            fail(ErrorKind::invalid_argument, "classify_month: events mix servers '" + ev.front().server_id +
                                                  "' and '" + e.server_id + "'");
        if (utc_month_index(e.timestamp) != month)
            fail(ErrorKind::invalid_argument, "classify_month: events span months " + utc_month_label(month) +
                                                  " and " + utc_month_label(utc_month_index(e.timestamp)));
    }

    Assignment out(ev.size());
    const auto k = opts.threshold_k;

    threshold_rule(
        ev, out, k, ComponentClass::socket, [](const MemErrorEvent& e) { return e.socket; },
        [](const MemErrorEvent& e) { return e.channel; });
    threshold_rule(
        ev, out, k, ComponentClass::channel, [](const MemErrorEvent& e) { return std::tuple(e.socket, e.channel); },
        [](const MemErrorEvent& e) { return e.bank; });
    threshold_rule(
        ev, out, k, ComponentClass::bank,
        [](const MemErrorEvent& e) { return std::tuple(e.socket, e.channel, e.bank); },
        [](const MemErrorEvent& e) { return e.row; });
    // row and column rules carry no count threshold: two distinct positions suffice
    threshold_rule(
        ev, out, 1, ComponentClass::row,
        [](const MemErrorEvent& e) { return std::tuple(e.socket, e.channel, e.bank, e.row); },
        [](const MemErrorEvent& e) { return e.column; });
    threshold_rule(
        ev, out, 1, ComponentClass::column,
        [](const MemErrorEvent& e) { return std::tuple(e.socket, e.channel, e.bank, e.column); },
        [](const MemErrorEvent& e) { return e.row; });

    // cell: sort each byte address by time; an error is a cell error if either
    // time neighbour lies within the window
    std::map<std::tuple<int, int, int, std::int64_t, std::int64_t, std::int64_t>, std::vector<std::size_t>> bytes;
    for (std::size_t i = 0; i < ev.size(); ++i)
        if (!out[i])
            bytes[std::tuple(ev[i].socket, ev[i].channel, ev[i].bank, ev[i].row, ev[i].column, ev[i].byte_offset)]
                .push_back(i);
    for (auto& [addr, idx] : bytes) {
        if (idx.size() < 2)
            continue;
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return ev[a].timestamp < ev[b].timestamp; });
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const bool near_prev = j > 0 && ev[idx[j]].timestamp - ev[idx[j - 1]].timestamp <= opts.cell_window_s;
            const bool near_next =
                j + 1 < idx.size() && ev[idx[j + 1]].timestamp - ev[idx[j]].timestamp <= opts.cell_window_s;
            if (near_prev || near_next)
                out[idx[j]] = ComponentClass::cell;
        }
    }

    std::vector<ComponentClass> result(ev.size());
    for (std::size_t i = 0; i < ev.size(); ++i)
        result[i] = out[i].value_or(ComponentClass::spurious);
    return result;
}

std::vector<ClassifiedEvent> classify_fleet(std::span<const MemErrorEvent> events, const ClassifyOptions& opts)
{
    std::vector<std::size_t> order(events.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto& x = events[a];
        const auto& y = events[b];
        return std::tie(x.server_id, x.timestamp) < std::tie(y.server_id, y.timestamp);
    });

    std::vector<ClassifiedEvent> out;
    out.reserve(events.size());
    std::vector<MemErrorEvent> group;
    auto flush = [&] {
        if (group.empty())
            return;
        const auto classes = classify_month(group, opts);
        for (std::size_t i = 0; i < group.size(); ++i)
            out.push_back({std::move(group[i]), classes[i]});
        group.clear();
    };
    for (auto i : order) {
        const auto& e = events[i];
        if (!group.empty() &&
            (group.front().server_id != e.server_id || utc_month_index(group.front().timestamp) !=
                                                           utc_month_index(e.timestamp)))
            flush();
        group.push_back(e);
    }
    flush();
    return out;
}

ClassificationReport summarize(std::span<const ClassifiedEvent> classified)
{
    require(!classified.empty(), "summarize: no classified errors");
    ClassificationReport r;
    std::map<std::pair<std::string, std::int64_t>, std::array<bool, component_class_count>> seen;
    for (const auto& c : classified) {
        const auto idx = static_cast<std::size_t>(c.component);
        ++r.error_counts[idx];
        seen[{c.event.server_id, utc_month_index(c.event.timestamp)}][idx] = true;
    }
    r.total_errors = classified.size();
    r.server_months = seen.size();
    for (const auto& [key, flags] : seen)
        for (std::size_t i = 0; i < component_class_count; ++i)
            r.server_counts[i] += flags[i] ? 1 : 0;
    for (std::size_t i = 0; i < component_class_count; ++i) {
        r.error_fraction[i] = static_cast<double>(r.error_counts[i]) / static_cast<double>(r.total_errors);
        r.server_fraction[i] = static_cast<double>(r.server_counts[i]) / static_cast<double>(r.server_months);
    }
    return r;
}

std::string report_csv(const ClassificationReport& r)
{
    std::ostringstream os;
    os.precision(10);
    os << "class,error_fraction,server_fraction\n";
    for (std::size_t i = 0; i < component_class_count; ++i)
        os << class_names[i] << ',' << r.error_fraction[i] << ',' << r.server_fraction[i] << '\n';
    return os.str();
}

Json to_json(const ClassificationReport& r)
{
    Json classes = Json::object();
    for (std::size_t i = 0; i < component_class_count; ++i)
        classes[std::string(class_names[i])] = Json{{"errors", r.error_counts[i]},
                                                    {"servers", r.server_counts[i]},
                                                    {"error_fraction", r.error_fraction[i]},
                                                    {"server_fraction", r.server_fraction[i]}};
    return Json{{"total_errors", r.total_errors}, {"server_months", r.server_months}, {"classes", classes}};
}

Json to_json(const ClassifiedEvent& e)
{
    Json j = to_json(e.event);
    j["component"] = to_string(e.component);
    return j;
}

template <> ClassifiedEvent decode<ClassifiedEvent>(const Json& j, std::size_t line)
{
    ClassifiedEvent c;
    c.event = decode<MemErrorEvent>(j, line);
    auto it = j.find("component");
    if (it == j.end() || !it->is_string())
        throw ParseError(line, "component", "missing required field");
    try {
        c.component = parse_enum<ComponentClass>(it->get<std::string>());
    } catch (const Error& e) {
        throw ParseError(line, "component", e.what());
    }
    return c;
}

} // namespace fleetrel
