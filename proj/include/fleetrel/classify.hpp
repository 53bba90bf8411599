#pragma once

#include "fleetrel/trace_io.hpp"
#include "fleetrel/types.hpp"

#include <array>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace fleetrel {

/// Component blamed for a DRAM error. Declaration order is evaluation order.
enum class ComponentClass { socket, channel, bank, row, column, cell, spurious };

inline constexpr std::size_t component_class_count = 7;
inline constexpr std::array<ComponentClass, component_class_count> all_component_classes{
    ComponentClass::socket, ComponentClass::channel, ComponentClass::bank,    ComponentClass::row,
    ComponentClass::column, ComponentClass::cell,    ComponentClass::spurious};

std::string_view to_string(ComponentClass c);
template <> ComponentClass parse_enum<ComponentClass>(std::string_view s);

struct ClassifyOptions
{
    /// Socket, channel and bank rules fire above this many errors.
    std::int64_t threshold_k = 1000;
    /// Two errors at one byte address this many seconds apart or closer form a cell failure.
    std::int64_t cell_window_s = 60;

    static constexpr std::int64_t never = std::numeric_limits<std::int64_t>::max();
};

/**
 * Attributes every error of one server-month to a failed component.
 *
 * Rules are applied in order and each rule only sees errors that no earlier
 * rule claimed:
 *   socket   more than threshold_k errors on a socket, spanning >1 channel
 *   channel  more than threshold_k errors on a channel, spanning >1 bank
 *   bank     more than threshold_k errors in a bank, spanning >1 row
 *   row      errors in >1 column of the same row
 *   column   errors in >1 row of the same column
 *   cell     >1 error at the same byte address within cell_window_s
 *   spurious everything left
 * Groups at one level are disjoint, so each one is judged on its own.
 *
 * Throws if the events span more than one server or UTC month.
 */
std::vector<ComponentClass> classify_month(std::span<const MemErrorEvent> events, const ClassifyOptions& opts = {});

struct ClassifiedEvent
{
    MemErrorEvent event;
    ComponentClass component = ComponentClass::spurious;

    bool operator==(const ClassifiedEvent&) const = default;
};

/// Classifies a whole trace, one (server, UTC month) group at a time. Output is
/// ordered by server id, then timestamp, then input position.
std::vector<ClassifiedEvent> classify_fleet(std::span<const MemErrorEvent> events, const ClassifyOptions& opts = {});

struct ClassificationReport
{
    std::size_t total_errors = 0;
    /// Number of (server, month) groups with at least one error.
    std::size_t server_months = 0;
    std::array<std::size_t, component_class_count> error_counts{};
    std::array<std::size_t, component_class_count> server_counts{};
    std::array<double, component_class_count> error_fraction{};
    /// Fraction of server-months exhibiting each class; may sum past 1.
    std::array<double, component_class_count> server_fraction{};

    double error_share(ComponentClass c) const { return error_fraction[static_cast<std::size_t>(c)]; }
    double server_share(ComponentClass c) const { return server_fraction[static_cast<std::size_t>(c)]; }
};

ClassificationReport summarize(std::span<const ClassifiedEvent> classified);

/// Rows = classes; columns error_fraction, server_fraction.
std::string report_csv(const ClassificationReport& r);
Json to_json(const ClassificationReport& r);

/// Event JSON plus a "component" field.
Json to_json(const ClassifiedEvent& e);
template <> ClassifiedEvent decode<ClassifiedEvent>(const Json& j, std::size_t line);

} // namespace fleetrel
