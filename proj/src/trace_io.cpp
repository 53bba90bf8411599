#include "fleetrel/trace_io.hpp"

#include "fleetrel/error.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace fleetrel {

namespace {

// Field accessors that report the missing or mistyped field by name.
class Fields
{
  public:
    Fields(const Json& j, std::size_t line) : j_(j), line_(line) {}

    const Json& at(const char* key) const
    {
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null())
            throw ParseError(line_, key, "missing required field");
        return *it;
    }

    bool has(const char* key) const
    {
        auto it = j_.find(key);
        return it != j_.end() && !it->is_null();
    }

    std::int64_t integer(const char* key) const
    {
        const Json& v = at(key);
        if (v.is_number_integer())
            return v.get<std::int64_t>();
        if (v.is_number_float()) {
            const double d = v.get<double>();
            if (std::isfinite(d) && d == std::floor(d) && std::fabs(d) < 9.0e15)
                return static_cast<std::int64_t>(d);
        }
        throw ParseError(line_, key, "expected an integer");
    }

    double number(const char* key) const
    {
        const Json& v = at(key);
        if (!v.is_number())
            throw ParseError(line_, key, "expected a number");
        return v.get<double>();
    }

    bool boolean(const char* key) const
    {
        const Json& v = at(key);
        if (!v.is_boolean())
            throw ParseError(line_, key, "expected true or false");
        return v.get<bool>();
    }

    std::string string(const char* key) const
    {
        const Json& v = at(key);
        if (!v.is_string())
            throw ParseError(line_, key, "expected a string");
        return v.get<std::string>();
    }

    template <class E> E enumeration(const char* key) const
    {
        const Json& v = at(key);
        std::string s;
        if (v.is_string())
            s = v.get<std::string>();
        else if (v.is_number_integer())
            s = std::to_string(v.get<std::int64_t>());
        else
            throw ParseError(line_, key, "expected a string");
        try {
            return parse_enum<E>(s);
        } catch (const Error& e) {
            throw ParseError(line_, key, e.what());
        }
    }

    template <class Fn> void check(const char* key, Fn&& validator) const
    {
        try {
            validator();
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(line_, key, e.what());
        }
    }

    std::size_t line() const { return line_; }

  private:
    const Json& j_;
    std::size_t line_;
};

std::string csv_cell(const Json& v)
{
    if (v.is_string()) {
        const auto s = v.get<std::string>();
        if (s.find_first_of(",\"\n") == std::string::npos)
            return s;
        std::string q = "\"";
        for (char c : s) {
            if (c == '"')
                q += '"';
            q += c;
        }
        return q + '"';
    }
    if (v.is_null())
        return "";
    if (v.is_array()) {
        std::string joined;
        for (const auto& x : v) {
            if (!joined.empty())
                joined += ';';
            joined += x.is_string() ? x.get<std::string>() : x.dump();
        }
        return joined;
    }
    return v.dump();
}

template <class T> std::string records_to_csv(const std::vector<T>& recs, const Json& header_template)
{
    std::string out;
    bool first = true;
    for (const auto& [key, _] : header_template.items()) {
        if (!first)
            out += ',';
        out += key;
        first = false;
    }
    out += '\n';
    for (const auto& r : recs) {
        const Json j = to_json(r);
        first = true;
        for (const auto& [key, _] : header_template.items()) {
            if (!first)
                out += ',';
            auto it = j.find(key);
            out += it == j.end() ? std::string() : csv_cell(*it);
            first = false;
        }
        out += '\n';
    }
    return out;
}

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
        s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
        s.remove_suffix(1);
    return s;
}

} // namespace

Schema parse_schema(std::string_view name)
{
    if (name == "mem_error")
        return Schema::mem_error;
    if (name == "ssd_snapshot")
        return Schema::ssd_snapshot;
    if (name == "incident")
        return Schema::incident;
    if (name == "fiber_ticket")
        return Schema::fiber_ticket;
    fail(ErrorKind::invalid_argument, "unknown schema '" + std::string(name) + "'");
}

std::string_view to_string(Schema s)
{
    switch (s) {
    case Schema::mem_error: return "mem_error";
    case Schema::ssd_snapshot: return "ssd_snapshot";
    case Schema::incident: return "incident";
    case Schema::fiber_ticket: return "fiber_ticket";
    }
    return "?";
}

Json to_json(const MemErrorEvent& e)
{
    return Json{{"timestamp", e.timestamp},
                {"server_id", e.server_id},
                {"socket", e.socket},
                {"channel", e.channel},
                {"bank", e.bank},
                {"row", e.row},
                {"column", e.column},
                {"byte_offset", e.byte_offset},
                {"access_type", to_string(e.access_type)},
                {"severity", to_string(e.severity)}};
}

template <> MemErrorEvent decode<MemErrorEvent>(const Json& j, std::size_t line)
{
    Fields f(j, line);
    MemErrorEvent e;
    e.timestamp = f.integer("timestamp");
    f.check("timestamp", [&] { require(e.timestamp > 0, "must be positive"); });
    e.server_id = f.string("server_id");
    f.check("server_id", [&] { require(!e.server_id.empty(), "must be non-empty"); });
    auto index = [&](const char* key) {
        const auto v = f.integer(key);
        f.check(key, [&] { require(v >= 0, "must be non-negative"); });
        return v;
    };
    e.socket = static_cast<int>(index("socket"));
    e.channel = static_cast<int>(index("channel"));
    e.bank = static_cast<int>(index("bank"));
    e.row = index("row");
    e.column = index("column");
    e.byte_offset = index("byte_offset");
    e.access_type = f.enumeration<AccessType>("access_type");
    e.severity = f.enumeration<Severity>("severity");
    return e;
}

Json to_json(const ServerDesign& d)
{
    Json j{{"capacity_gb", d.capacity_gb},
           {"density", to_string(d.density)},
           {"chips", d.chips},
           {"transfer_width", to_string(d.transfer_width)},
           {"cpu_util_pct", d.cpu_util_pct},
           {"mem_util_pct", d.mem_util_pct},
           {"age_years", d.age_years},
           {"cpus", d.cpus}};
    if (d.workload)
        j["workload"] = *d.workload;
    return j;
}

template <> ServerDesign decode<ServerDesign>(const Json& j, std::size_t line)
{
    Fields f(j, line);
    ServerDesign d;
    d.capacity_gb = f.number("capacity_gb");
    d.density = f.enumeration<ChipDensity>("density");
    d.chips = static_cast<int>(f.integer("chips"));
    if (f.has("transfer_width"))
        d.transfer_width = f.enumeration<TransferWidth>("transfer_width");
    d.cpu_util_pct = f.number("cpu_util_pct");
    if (f.has("mem_util_pct"))
        d.mem_util_pct = f.number("mem_util_pct");
    d.age_years = f.number("age_years");
    d.cpus = static_cast<int>(f.integer("cpus"));
    if (f.has("workload"))
        d.workload = f.string("workload");
    f.check("capacity_gb", [&] { validate(d); });
    return d;
}

Json to_json(const SSDSnapshot& s)
{
    return Json{{"ssd_id", s.ssd_id},
                {"platform", to_string(s.platform)},
                {"slot_index", s.slot_index},
                {"server_id", s.server_id},
                {"flash_written_tb", s.flash_written_tb},
                {"flash_read_tb", s.flash_read_tb},
                {"uncorrectable_errors", s.uncorrectable_errors},
                {"discarded_blocks", s.discarded_blocks},
                {"dram_buffer_util_pct", s.dram_buffer_util_pct},
                {"avg_temp_c", s.avg_temp_c},
                {"bus_power_w", s.bus_power_w},
                {"throttled", s.throttled},
                {"os_sectors_written", s.os_sectors_written},
                {"erases_per_gc", s.erases_per_gc},
                {"pages_copied", s.pages_copied}};
}

template <> SSDSnapshot decode<SSDSnapshot>(const Json& j, std::size_t line)
{
    Fields f(j, line);
    SSDSnapshot s;
    s.ssd_id = f.string("ssd_id");
    s.platform = f.enumeration<Platform>("platform");
    s.slot_index = static_cast<int>(f.integer("slot_index"));
    s.server_id = f.string("server_id");
    s.flash_written_tb = f.number("flash_written_tb");
    s.flash_read_tb = f.number("flash_read_tb");
    s.uncorrectable_errors = f.integer("uncorrectable_errors");
    s.discarded_blocks = f.integer("discarded_blocks");
    s.dram_buffer_util_pct = f.number("dram_buffer_util_pct");
    s.avg_temp_c = f.number("avg_temp_c");
    s.bus_power_w = f.number("bus_power_w");
    s.throttled = f.boolean("throttled");
    s.os_sectors_written = f.integer("os_sectors_written");
    s.erases_per_gc = f.number("erases_per_gc");
    s.pages_copied = f.integer("pages_copied");
    f.check("ssd_id", [&] { validate(s); });
    return s;
}

Json to_json(const IncidentRecord& r)
{
    Json causes;
    if (r.root_causes.size() == 1) {
        causes = to_string(r.root_causes.front());
    } else {
        causes = Json::array();
        for (auto c : r.root_causes)
            causes.push_back(to_string(c));
    }
    return Json{{"device_type", to_string(r.device_type)},
                {"sev_level", r.sev_level},
                {"root_cause", causes},
                {"start", r.start},
                {"resolved", r.resolved}};
}

template <> IncidentRecord decode<IncidentRecord>(const Json& j, std::size_t line)
{
    Fields f(j, line);
    IncidentRecord r;
    r.device_type = f.enumeration<DeviceType>("device_type");
    r.sev_level = static_cast<int>(f.integer("sev_level"));
    f.check("sev_level", [&] { require(r.sev_level >= 1 && r.sev_level <= 3, "must be 1, 2 or 3"); });
    const Json& causes = f.at("root_cause");
    r.root_causes.clear();
    auto add_cause = [&](const Json& c) {
        if (!c.is_string())
            throw ParseError(line, "root_cause", "expected a string");
        f.check("root_cause", [&] { r.root_causes.push_back(parse_enum<RootCause>(c.get<std::string>())); });
    };
    if (causes.is_array()) {
        for (const auto& c : causes)
            add_cause(c);
        if (r.root_causes.empty())
            throw ParseError(line, "root_cause", "must name at least one category");
    } else {
        add_cause(causes);
    }
    r.start = f.integer("start");
    r.resolved = f.integer("resolved");
    f.check("resolved", [&] { require(r.resolved >= r.start, "resolved before start"); });
    return r;
}

Json to_json(const FiberRepairTicket& t)
{
    Json j{{"link_id", t.link_id},
           {"vendor", t.vendor},
           {"continent", to_string(t.continent)},
           {"kind", to_string(t.kind)},
           {"start", t.start}};
    j["end"] = t.end ? Json(*t.end) : Json(nullptr);
    j["est_duration_s"] = t.est_duration_s ? Json(*t.est_duration_s) : Json(nullptr);
    return j;
}

template <> FiberRepairTicket decode<FiberRepairTicket>(const Json& j, std::size_t line)
{
    Fields f(j, line);
    FiberRepairTicket t;
    t.link_id = f.string("link_id");
    t.vendor = f.string("vendor");
    t.continent = f.enumeration<Continent>("continent");
    t.kind = f.enumeration<TicketKind>("kind");
    t.start = f.integer("start");
    if (f.has("end"))
        t.end = f.integer("end");
    if (f.has("est_duration_s"))
        t.est_duration_s = f.integer("est_duration_s");
    f.check("end", [&] { validate(t); });
    return t;
}

RecordBatch parse_events(std::istream& in, Schema schema)
{
    switch (schema) {
    case Schema::mem_error: return parse_jsonl<MemErrorEvent>(in);
    case Schema::ssd_snapshot: return parse_jsonl<SSDSnapshot>(in);
    case Schema::incident: return parse_jsonl<IncidentRecord>(in);
    case Schema::fiber_ticket: return parse_jsonl<FiberRepairTicket>(in);
    }
    fail(ErrorKind::invalid_argument, "unknown schema");
}

std::string to_csv(const std::vector<MemErrorEvent>& recs) { return records_to_csv(recs, to_json(MemErrorEvent{})); }
std::string to_csv(const std::vector<SSDSnapshot>& recs) { return records_to_csv(recs, to_json(SSDSnapshot{})); }
std::string to_csv(const std::vector<IncidentRecord>& recs) { return records_to_csv(recs, to_json(IncidentRecord{})); }
std::string to_csv(const std::vector<FiberRepairTicket>& recs)
{
    return records_to_csv(recs, to_json(FiberRepairTicket{}));
}

EpochSeconds parse_timestamp(std::string_view raw)
{
    const std::string s(trim(raw));
    require(!s.empty(), "empty timestamp");
    {
        std::size_t pos = 0;
        try {
            const long long v = std::stoll(s, &pos);
            if (pos == s.size())
                return v;
        } catch (const std::exception&) {
        }
    }
    int y, mo, d, h, mi, sec;
    char tail = 0;
    if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%c", &y, &mo, &d, &h, &mi, &sec, &tail) == 7 && tail == 'Z') {
        using namespace std::chrono;
        const year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
        require(ymd.ok() && h < 24 && mi < 60 && sec < 61, "invalid calendar timestamp '" + s + "'");
        return duration_cast<seconds>(sys_days{ymd}.time_since_epoch()).count() + h * 3600LL + mi * 60LL + sec;
    }
    fail(ErrorKind::invalid_argument, "unrecognized timestamp '" + s + "'");
}

FiberRepairTicket parse_fiber_ticket(std::string_view text)
{
    std::map<std::string, std::string, std::less<>> kv;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos)
            nl = text.size();
        const auto line = trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        const auto colon = line.find(':');
        if (line.empty() || colon == std::string_view::npos)
            continue;
        std::string key(trim(line.substr(0, colon)));
        for (auto& c : key)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        kv.emplace(std::move(key), std::string(trim(line.substr(colon + 1))));
    }

    auto mandatory = [&](const char* key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end() || it->second.empty())
            fail(ErrorKind::parse, std::string("ticket is missing mandatory key '") + key + "'");
        return it->second;
    };
    auto wrap = [](const char* key, auto&& fn) {
        try {
            return fn();
        } catch (const std::exception& e) {
            fail(ErrorKind::parse, std::string("ticket key '") + key + "': " + e.what());
        }
    };

    FiberRepairTicket t;
    t.link_id = mandatory("link");
    t.vendor = mandatory("vendor");
    t.continent = wrap("continent", [&] { return parse_enum<Continent>(mandatory("continent")); });
    t.kind = wrap("kind", [&] { return parse_enum<TicketKind>(mandatory("kind")); });
    t.start = wrap("start", [&] { return parse_timestamp(mandatory("start")); });
    if (auto it = kv.find("end"); it != kv.end() && !it->second.empty())
        t.end = wrap("end", [&] { return parse_timestamp(it->second); });
    if (auto it = kv.find("est_duration"); it != kv.end() && !it->second.empty())
        t.est_duration_s = wrap("est_duration", [&] { return std::int64_t{std::stoll(it->second)}; });
    if (t.end && *t.end < t.start)
        fail(ErrorKind::data, "end before start");
    return t;
}

std::string format_fiber_ticket(const FiberRepairTicket& t)
{
    std::ostringstream os;
    os << "link: " << t.link_id << "\nvendor: " << t.vendor << "\ncontinent: " << to_string(t.continent)
       << "\nkind: " << to_string(t.kind) << "\nstart: " << t.start << '\n';
    if (t.end)
        os << "end: " << *t.end << '\n';
    if (t.est_duration_s)
        os << "est_duration: " << *t.est_duration_s << '\n';
    return os.str();
}

std::string read_text_file(const std::string& path)
{
    gzFile f = gzopen(path.c_str(), "rb");
    if (!f)
        fail(ErrorKind::io, "cannot open '" + path + "'");
    std::string out;
    char buf[1 << 16];
    int n;
    while ((n = gzread(f, buf, sizeof buf)) > 0)
        out.append(buf, static_cast<std::size_t>(n));
    int errnum = 0;
    const char* msg = gzerror(f, &errnum);
    const bool bad = n < 0 || (errnum != Z_OK && errnum != Z_STREAM_END);
    const std::string detail = bad && msg ? msg : "";
    gzclose(f);
    if (bad)
        fail(ErrorKind::io, "error reading '" + path + "': " + detail);
    return out;
}

void write_text_file(const std::string& path, std::string_view content)
{
    const bool gz = path.size() > 3 && path.compare(path.size() - 3, 3, ".gz") == 0;
    if (gz) {
        gzFile f = gzopen(path.c_str(), "wb");
        if (!f)
            fail(ErrorKind::io, "cannot write '" + path + "'");
        // zlib writes a zero mtime in the header, so output is reproducible
        std::size_t off = 0;
        while (off < content.size()) {
            const auto chunk = static_cast<unsigned>(std::min<std::size_t>(content.size() - off, 1u << 20));
            if (gzwrite(f, content.data() + off, chunk) != static_cast<int>(chunk)) {
                gzclose(f);
                fail(ErrorKind::io, "error writing '" + path + "'");
            }
            off += chunk;
        }
        if (gzclose(f) != Z_OK)
            fail(ErrorKind::io, "error closing '" + path + "'");
        return;
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        fail(ErrorKind::io, "cannot write '" + path + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        fail(ErrorKind::io, "error writing '" + path + "'");
}

} // namespace fleetrel
