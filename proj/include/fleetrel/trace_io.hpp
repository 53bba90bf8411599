#pragma once

#include "fleetrel/types.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fleetrel {

using Json = nlohmann::ordered_json;

/// Record kinds that can appear in a JSONL stream.
enum class Schema { mem_error, ssd_snapshot, incident, fiber_ticket };

Schema parse_schema(std::string_view name);
std::string_view to_string(Schema s);

using RecordBatch = std::variant<std::vector<MemErrorEvent>, std::vector<SSDSnapshot>, std::vector<IncidentRecord>,
                                 std::vector<FiberRepairTicket>>;

// JSON object <-> record. Field names match the struct members; the decoders
// throw ParseError naming the missing or mistyped field (line 0 when called
// outside a stream). Unknown keys are ignored so annotated records still parse.
Json to_json(const MemErrorEvent& e);
Json to_json(const ServerDesign& d);
Json to_json(const SSDSnapshot& s);
Json to_json(const IncidentRecord& r);
Json to_json(const FiberRepairTicket& t);

template <class T> T decode(const Json& j, std::size_t line = 0);
template <> MemErrorEvent decode<MemErrorEvent>(const Json& j, std::size_t line);
template <> ServerDesign decode<ServerDesign>(const Json& j, std::size_t line);
template <> SSDSnapshot decode<SSDSnapshot>(const Json& j, std::size_t line);
template <> IncidentRecord decode<IncidentRecord>(const Json& j, std::size_t line);
template <> FiberRepairTicket decode<FiberRepairTicket>(const Json& j, std::size_t line);

/**
 * Calls fn(json, line_number) for every non-blank line of a JSONL stream.
 * Lines that are not a JSON object raise ParseError with the line number.
 */
template <class Fn> void for_each_jsonl(std::istream& in, Fn&& fn);

/// Parses every non-blank line of a JSONL stream as T, preserving file order.
template <class T> std::vector<T> parse_jsonl(std::istream& in);

RecordBatch parse_events(std::istream& in, Schema schema);

/// One compact JSON line (no trailing newline).
template <class T> std::string to_jsonl_line(const T& rec) { return to_json(rec).dump(); }

template <class T> std::string to_jsonl(const std::vector<T>& recs)
{
    std::string out;
    for (const auto& r : recs) {
        out += to_jsonl_line(r);
        out += '\n';
    }
    return out;
}

/// CSV with a header row; columns follow the JSON field order.
std::string to_csv(const std::vector<MemErrorEvent>& recs);
std::string to_csv(const std::vector<SSDSnapshot>& recs);
std::string to_csv(const std::vector<IncidentRecord>& recs);
std::string to_csv(const std::vector<FiberRepairTicket>& recs);

/// Parses the line-oriented `key: value` ticket text. Mandatory keys are link,
/// vendor, continent, kind and start; end and est_duration are optional.
/// Timestamps are epoch seconds or `YYYY-MM-DDTHH:MM:SSZ`.
FiberRepairTicket parse_fiber_ticket(std::string_view text);
std::string format_fiber_ticket(const FiberRepairTicket& t);

/// Parses an epoch-seconds integer or an ISO-8601 UTC timestamp.
EpochSeconds parse_timestamp(std::string_view s);

/// Reads a whole file; gzip-compressed content is inflated transparently.
std::string read_text_file(const std::string& path);
/// Writes a file, gzip-compressing when the path ends in ".gz".
void write_text_file(const std::string& path, std::string_view content);

template <class T> std::vector<T> read_jsonl_file(const std::string& path);

} // namespace fleetrel

#include "fleetrel/detail/trace_io_impl.hpp"
