#include "fleetrel/types.hpp"

#include "fleetrel/error.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

namespace fleetrel {

namespace {

template <class E, std::size_t N>
E lookup(std::string_view s, const std::array<std::pair<E, std::string_view>, N>& table, const char* what)
{
    for (const auto& [value, name] : table)
        if (name == s)
            return value;
    fail(ErrorKind::invalid_argument, std::string("unknown ") + what + " '" + std::string(s) + "'");
}

template <class E, std::size_t N>
std::string_view name_of(E v, const std::array<std::pair<E, std::string_view>, N>& table)
{
    for (const auto& [value, name] : table)
        if (value == v)
            return name;
    return "?";
}

constexpr std::array<std::pair<AccessType, std::string_view>, 3> access_names{
    {{AccessType::read, "read"}, {AccessType::write, "write"}, {AccessType::scrub, "scrub"}}};
constexpr std::array<std::pair<Severity, std::string_view>, 2> severity_names{
    {{Severity::correctable, "correctable"}, {Severity::uncorrectable, "uncorrectable"}}};
constexpr std::array<std::pair<ChipDensity, std::string_view>, 3> density_names{
    {{ChipDensity::gb1, "1Gb"}, {ChipDensity::gb2, "2Gb"}, {ChipDensity::gb4, "4Gb"}}};
constexpr std::array<std::pair<TransferWidth, std::string_view>, 2> width_names{
    {{TransferWidth::x4, "x4"}, {TransferWidth::x8, "x8"}}};
constexpr std::array<std::pair<Platform, std::string_view>, 6> platform_names{{{Platform::A, "A"},
                                                                               {Platform::B, "B"},
                                                                               {Platform::C, "C"},
                                                                               {Platform::D, "D"},
                                                                               {Platform::E, "E"},
                                                                               {Platform::F, "F"}}};
constexpr std::array<std::pair<DeviceType, std::string_view>, 7> device_names{{{DeviceType::core, "core"},
                                                                               {DeviceType::CSA, "CSA"},
                                                                               {DeviceType::CSW, "CSW"},
                                                                               {DeviceType::ESW, "ESW"},
                                                                               {DeviceType::SSW, "SSW"},
                                                                               {DeviceType::FSW, "FSW"},
                                                                               {DeviceType::RSW, "RSW"}}};
constexpr std::array<std::pair<RootCause, std::string_view>, 7> cause_names{
    {{RootCause::maintenance, "maintenance"},
     {RootCause::hardware, "hardware"},
     {RootCause::misconfiguration, "misconfiguration"},
     {RootCause::bug, "bug"},
     {RootCause::accident, "accident"},
     {RootCause::capacity_planning, "capacity_planning"},
     {RootCause::undetermined, "undetermined"}}};
constexpr std::array<std::pair<Continent, std::string_view>, 6> continent_names{{{Continent::NA, "NA"},
                                                                                 {Continent::EU, "EU"},
                                                                                 {Continent::AS, "AS"},
                                                                                 {Continent::SA, "SA"},
                                                                                 {Continent::AF, "AF"},
                                                                                 {Continent::AU, "AU"}}};
constexpr std::array<std::pair<TicketKind, std::string_view>, 2> kind_names{
    {{TicketKind::repair, "repair"}, {TicketKind::maintenance, "maintenance"}}};

// Platform table: SSDs per server, PCIe version, capacity, mean data written/read.
const std::array<PlatformInfo, 6> platforms{{
    {Platform::A, 1, 1, 0.72, 27.2, 23.8},
    {Platform::B, 2, 1, 0.72, 48.5, 45.1},
    {Platform::C, 1, 2, 1.2, 37.8, 43.4},
    {Platform::D, 2, 2, 1.2, 18.9, 30.6},
    {Platform::E, 1, 2, 3.2, 23.9, 51.1},
    {Platform::F, 2, 2, 3.2, 14.8, 18.2},
}};

} // namespace

std::string_view to_string(AccessType v) { return name_of(v, access_names); }
std::string_view to_string(Severity v) { return name_of(v, severity_names); }
std::string_view to_string(ChipDensity v) { return name_of(v, density_names); }
std::string_view to_string(TransferWidth v) { return name_of(v, width_names); }
std::string_view to_string(Platform v) { return name_of(v, platform_names); }
std::string_view to_string(DeviceType v) { return name_of(v, device_names); }
std::string_view to_string(RootCause v) { return name_of(v, cause_names); }
std::string_view to_string(Continent v) { return name_of(v, continent_names); }
std::string_view to_string(TicketKind v) { return name_of(v, kind_names); }

template <> AccessType parse_enum<AccessType>(std::string_view s) { return lookup(s, access_names, "access_type"); }
template <> Severity parse_enum<Severity>(std::string_view s) { return lookup(s, severity_names, "severity"); }
template <> ChipDensity parse_enum<ChipDensity>(std::string_view s) { return lookup(s, density_names, "density"); }
template <> TransferWidth parse_enum<TransferWidth>(std::string_view s)
{
    return lookup(s, width_names, "transfer_width");
}
template <> Platform parse_enum<Platform>(std::string_view s) { return lookup(s, platform_names, "platform"); }
template <> DeviceType parse_enum<DeviceType>(std::string_view s) { return lookup(s, device_names, "device_type"); }
template <> RootCause parse_enum<RootCause>(std::string_view s) { return lookup(s, cause_names, "root_cause"); }
template <> Continent parse_enum<Continent>(std::string_view s) { return lookup(s, continent_names, "continent"); }
template <> TicketKind parse_enum<TicketKind>(std::string_view s) { return lookup(s, kind_names, "kind"); }

int density_gbit(ChipDensity d)
{
    switch (d) {
    case ChipDensity::gb1: return 1;
    case ChipDensity::gb2: return 2;
    case ChipDensity::gb4: return 4;
    }
    return 0;
}

const PlatformInfo& platform_info(Platform p) { return platforms[static_cast<std::size_t>(p)]; }

void validate(const MemErrorEvent& e)
{
    require(e.timestamp > 0, "timestamp must be positive");
    require(!e.server_id.empty(), "server_id must be non-empty");
    require(e.socket >= 0 && e.channel >= 0 && e.bank >= 0 && e.row >= 0 && e.column >= 0 && e.byte_offset >= 0,
            "location indices must be non-negative");
}

void validate(const ServerDesign& d)
{
    auto finite = [](double x) { return std::isfinite(x); };
    require(finite(d.capacity_gb) && finite(d.cpu_util_pct) && finite(d.mem_util_pct) && finite(d.age_years),
            "design factors must be finite");
    require(d.capacity_gb > 0, "capacity_gb must be positive");
    require(d.chips == 8 || d.chips == 16 || d.chips == 32 || d.chips == 48 || d.chips == 64,
            "chips must be one of 8, 16, 32, 48, 64");
    require(d.cpu_util_pct >= 0 && d.cpu_util_pct <= 100, "cpu_util_pct must lie in [0, 100]");
    require(d.mem_util_pct >= 0 && d.mem_util_pct <= 100, "mem_util_pct must lie in [0, 100]");
    require(d.age_years >= 0, "age_years must be non-negative");
    require(d.cpus >= 0, "cpus must be non-negative");
    const double max_capacity_gb = d.chips * density_gbit(d.density) / 8.0;
    require(d.capacity_gb <= max_capacity_gb + 1e-9,
            "capacity_gb exceeds what " + std::to_string(d.chips) + " chips of " + std::string(to_string(d.density)) +
                " can hold");
}

void validate(const SSDSnapshot& s)
{
    require(!s.ssd_id.empty(), "ssd_id must be non-empty");
    require(s.flash_written_tb >= 0 && s.flash_read_tb >= 0 && s.uncorrectable_errors >= 0 &&
                s.discarded_blocks >= 0 && s.os_sectors_written >= 0 && s.pages_copied >= 0 && s.erases_per_gc >= 0 &&
                s.dram_buffer_util_pct >= 0 && s.bus_power_w >= 0 && s.slot_index >= 0,
            "SSD counters must be non-negative");
}

void validate(const IncidentRecord& r)
{
    require(r.sev_level >= 1 && r.sev_level <= 3, "sev_level must be 1, 2 or 3");
    require(!r.root_causes.empty(), "root_cause must name at least one category");
    require(r.resolved >= r.start, "resolved before start");
}

void validate(const FiberRepairTicket& t)
{
    require(!t.link_id.empty(), "link must be non-empty");
    if (t.end)
        require(*t.end >= t.start, "end before start");
}

std::int64_t utc_month_index(EpochSeconds t)
{
    using namespace std::chrono;
    const sys_days day = floor<days>(sys_seconds{seconds{t}});
    const year_month_day ymd{day};
    return (static_cast<int>(ymd.year()) - 1970) * 12 + (static_cast<unsigned>(ymd.month()) - 1);
}

EpochSeconds utc_month_start(std::int64_t month_index)
{
    using namespace std::chrono;
    const auto y = static_cast<int>(1970 + (month_index >= 0 ? month_index / 12 : (month_index - 11) / 12));
    const auto m = static_cast<unsigned>(month_index - (y - 1970) * 12 + 1);
    const sys_days day{year{y} / month{m} / 1};
    return duration_cast<seconds>(day.time_since_epoch()).count();
}

std::string utc_month_label(std::int64_t month_index)
{
    const std::int64_t y = 1970 + (month_index >= 0 ? month_index / 12 : (month_index - 11) / 12);
    const std::int64_t m = month_index - (y - 1970) * 12 + 1;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%04lld-%02lld", static_cast<long long>(y), static_cast<long long>(m));
    return buf;
}

} // namespace fleetrel
