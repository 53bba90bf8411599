#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fleetrel {

using EpochSeconds = std::int64_t;

// ---------------------------------------------------------------------------
// DRAM
// ---------------------------------------------------------------------------

enum class AccessType { read, write, scrub };
enum class Severity { correctable, uncorrectable };

/// One DRAM error observation with its physical location.
struct MemErrorEvent
{
    EpochSeconds timestamp = 0;
    std::string server_id;
    int socket = 0;
    int channel = 0;
    int bank = 0;
    std::int64_t row = 0;
    std::int64_t column = 0;
    std::int64_t byte_offset = 0;
    AccessType access_type = AccessType::read;
    Severity severity = Severity::correctable;

    bool operator==(const MemErrorEvent&) const = default;
};

/// Validates timestamp > 0, non-negative location indices and a non-empty server id.
void validate(const MemErrorEvent& e);

enum class ChipDensity { gb1, gb2, gb4 };
enum class TransferWidth { x4, x8 };

/// Gigabits per chip for a density class.
int density_gbit(ChipDensity d);

/// Factor vector consumed by the logistic server-failure model.
struct ServerDesign
{
    double capacity_gb = 0;
    ChipDensity density = ChipDensity::gb1;
    int chips = 8;
    TransferWidth transfer_width = TransferWidth::x4;
    double cpu_util_pct = 0;
    double mem_util_pct = 0;
    double age_years = 0;
    int cpus = 0;
    std::optional<std::string> workload;

    bool operator==(const ServerDesign&) const = default;
};

/// Checks ranges and that chips x per-chip bits can hold the stated capacity.
void validate(const ServerDesign& d);

// ---------------------------------------------------------------------------
// SSD
// ---------------------------------------------------------------------------

enum class Platform { A, B, C, D, E, F };

struct PlatformInfo
{
    Platform platform;
    int ssds_per_server;
    int pcie_version;
    double capacity_tb;
    double mean_written_tb;
    double mean_read_tb;
};

/// Per-platform configuration from the studied fleet (capacity, PCIe generation,
/// mean lifetime flash traffic).
const PlatformInfo& platform_info(Platform p);

struct SSDSnapshot
{
    std::string ssd_id;
    Platform platform = Platform::A;
    int slot_index = 0;
    std::string server_id;
    double flash_written_tb = 0;
    double flash_read_tb = 0;
    std::int64_t uncorrectable_errors = 0;
    std::int64_t discarded_blocks = 0;
    double dram_buffer_util_pct = 0;
    double avg_temp_c = 0;
    double bus_power_w = 0;
    bool throttled = false;
    std::int64_t os_sectors_written = 0;
    double erases_per_gc = 0;
    std::int64_t pages_copied = 0;

    bool operator==(const SSDSnapshot&) const = default;
};

void validate(const SSDSnapshot& s);

// ---------------------------------------------------------------------------
// Network
// ---------------------------------------------------------------------------

enum class DeviceType { core, CSA, CSW, ESW, SSW, FSW, RSW };
enum class RootCause { maintenance, hardware, misconfiguration, bug, accident, capacity_planning, undetermined };
enum class Continent { NA, EU, AS, SA, AF, AU };
enum class TicketKind { repair, maintenance };

inline constexpr std::array<DeviceType, 7> all_device_types{DeviceType::core, DeviceType::CSA, DeviceType::CSW,
                                                            DeviceType::ESW,  DeviceType::SSW, DeviceType::FSW,
                                                            DeviceType::RSW};
inline constexpr std::array<RootCause, 7> all_root_causes{
    RootCause::maintenance, RootCause::hardware,          RootCause::misconfiguration, RootCause::bug,
    RootCause::accident,    RootCause::capacity_planning, RootCause::undetermined};
inline constexpr std::array<Continent, 6> all_continents{Continent::NA, Continent::EU, Continent::AS,
                                                         Continent::SA, Continent::AF, Continent::AU};

/// A network incident. An incident may be attributed to several root causes; it
/// then counts toward each of them in breakdowns.
struct IncidentRecord
{
    DeviceType device_type = DeviceType::RSW;
    int sev_level = 3;
    std::vector<RootCause> root_causes{RootCause::undetermined};
    EpochSeconds start = 0;
    EpochSeconds resolved = 0;

    bool operator==(const IncidentRecord&) const = default;
};

void validate(const IncidentRecord& r);

struct FiberRepairTicket
{
    std::string link_id;
    std::string vendor;
    Continent continent = Continent::NA;
    TicketKind kind = TicketKind::repair;
    EpochSeconds start = 0;
    std::optional<EpochSeconds> end;
    std::optional<std::int64_t> est_duration_s;

    bool is_open() const { return !end.has_value(); }
    /// Seconds between start and end; empty for open tickets.
    std::optional<std::int64_t> duration_s() const
    {
        if (!end)
            return std::nullopt;
        return *end - start;
    }

    bool operator==(const FiberRepairTicket&) const = default;
};

void validate(const FiberRepairTicket& t);

// ---------------------------------------------------------------------------
// enum <-> text. Parsing throws Error(invalid_argument) on unknown names.
// ---------------------------------------------------------------------------

std::string_view to_string(AccessType v);
std::string_view to_string(Severity v);
std::string_view to_string(ChipDensity v);
std::string_view to_string(TransferWidth v);
std::string_view to_string(Platform v);
std::string_view to_string(DeviceType v);
std::string_view to_string(RootCause v);
std::string_view to_string(Continent v);
std::string_view to_string(TicketKind v);

template <class E> E parse_enum(std::string_view s);

template <> AccessType parse_enum<AccessType>(std::string_view s);
template <> Severity parse_enum<Severity>(std::string_view s);
template <> ChipDensity parse_enum<ChipDensity>(std::string_view s);
template <> TransferWidth parse_enum<TransferWidth>(std::string_view s);
template <> Platform parse_enum<Platform>(std::string_view s);
template <> DeviceType parse_enum<DeviceType>(std::string_view s);
template <> RootCause parse_enum<RootCause>(std::string_view s);
template <> Continent parse_enum<Continent>(std::string_view s);
template <> TicketKind parse_enum<TicketKind>(std::string_view s);

// ---------------------------------------------------------------------------
// time
// ---------------------------------------------------------------------------

/// UTC calendar month key, months since 1970-01.
std::int64_t utc_month_index(EpochSeconds t);
/// Epoch seconds of the first instant of a month index.
EpochSeconds utc_month_start(std::int64_t month_index);
/// "YYYY-MM" for a month index.
std::string utc_month_label(std::int64_t month_index);

inline constexpr EpochSeconds seconds_per_day = 86400;
inline constexpr double seconds_per_hour = 3600.0;

} // namespace fleetrel
