#pragma once

#include "fleetrel/classify.hpp"
#include "fleetrel/generator.hpp"
#include "fleetrel/rng.hpp"
#include "fleetrel/trace_io.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace fleetrel {

inline constexpr std::int64_t page_size_bytes = 4096;

// ---------------------------------------------------------------------------
// page offlining
// ---------------------------------------------------------------------------

enum class RetryKind { none, fixed_delay };

struct OfflinePolicy
{
    /// Errors a page must show before it is taken offline.
    std::int64_t errors_before_offline = 1;
    /// Stop offlining (and ask for a repair) once offline memory exceeds this share of capacity.
    double cap_frac = 0.05;
    double initial_fail_prob = 0.06;
    RetryKind retry = RetryKind::none;
    std::int64_t retry_delay_s = 3600;
};

void validate(const OfflinePolicy& p);

/// Pages taken offline per host. Offlining is permanent, so the store only grows.
class OfflineStore
{
  public:
    bool contains(const std::string& host, std::int64_t page) const;
    /// Returns false if the page was already offline.
    bool insert(const std::string& host, std::int64_t page);
    std::size_t size() const;
    std::size_t pages_on(const std::string& host) const;
    const std::map<std::string, std::set<std::int64_t>>& hosts() const { return pages_; }

    /// One {"host", "page"} object per line, hosts and pages ascending.
    std::string to_jsonl() const;
    static OfflineStore from_jsonl(std::string_view text);

    bool operator==(const OfflineStore&) const = default;

  private:
    std::map<std::string, std::set<std::int64_t>> pages_;
};

struct RepairTicket
{
    std::string host;
    EpochSeconds time;
    std::int64_t offline_bytes;
};

struct OfflineSimConfig
{
    OfflinePolicy policy;
    DramGeometry geometry;
    /// Physical memory per host; 0 means the geometry's full size.
    std::int64_t capacity_bytes = 0;
    /// Offlining starts here; 0 means at the first error.
    EpochSeconds deploy_time = 0;
    int window_days = 30;
    OfflineStore initial_store;
};

struct TimelineRow
{
    std::int64_t day;
    std::int64_t errors;
    std::int64_t baseline_errors;
    std::int64_t pages_offline;
    std::int64_t tickets;
};

struct OfflineSimResult
{
    std::vector<TimelineRow> timeline;
    std::int64_t trace_errors = 0;
    std::int64_t observed = 0;
    std::int64_t suppressed = 0;
    std::int64_t pages_offlined = 0;
    std::int64_t failed_attempts = 0;
    std::vector<RepairTicket> tickets;
    /// 1 - observed / trace errors over the trailing window after deployment.
    double reduction = 0;
    OfflineStore store;
};

/**
 * Replays a classified trace against a page-offlining policy.
 *
 * Errors from socket and channel faults come from the server regardless of which
 * pages are offline; every other class is bound to its page and disappears once
 * that page is offline. Each offline attempt fails with initial_fail_prob.
 * The trace must be sorted by timestamp.
 */
OfflineSimResult run_offline_sim(std::span<const ClassifiedEvent> trace, const OfflineSimConfig& cfg,
                                 std::uint64_t seed);

/// day,errors,pages_offline,tickets
std::string timeline_csv(const OfflineSimResult& r);
Json to_json(const OfflineSimResult& r);

// ---------------------------------------------------------------------------
// physical page randomization
// ---------------------------------------------------------------------------

/**
 * Physical frames holding logical pages. Every frame is mapped, free or
 * offline; the logical-to-frame map is a bijection onto the mapped frames.
 */
class SimMemory
{
  public:
    enum class FrameState { free, mapped, offline };

    /// Logical page i starts in frame i; the remaining frames are free.
    SimMemory(std::int64_t total_frames, std::int64_t mapped_pages);

    std::int64_t total_frames() const { return static_cast<std::int64_t>(state_.size()); }
    std::int64_t mapped_pages() const { return static_cast<std::int64_t>(frame_of_.size()); }
    std::int64_t free_frames() const { return static_cast<std::int64_t>(free_.size()); }
    std::int64_t frame_of(std::int64_t logical) const;
    FrameState state(std::int64_t frame) const;
    std::int64_t wear(std::int64_t frame) const;
    const std::vector<std::int64_t>& wear_counts() const { return wear_; }
    std::size_t offline_count() const { return offline_; }

    /// One write to the frame behind a logical page.
    void write(std::int64_t logical, std::int64_t count = 1);

    /// Moves a page to a uniformly chosen free frame and releases its old frame.
    /// The copy costs the destination one write. Returns the new frame.
    std::int64_t randomize_page(std::int64_t logical, Rng& rng);
    /// Same, with the destination given as an index into the free pool.
    std::int64_t randomize_page_to(std::int64_t logical, std::int64_t free_slot);

    /// Retires a frame. A mapped frame's page is first moved to a random free frame.
    void offline_frame(std::int64_t frame, Rng& rng);

    /// Throws Error(data) describing the first broken invariant.
    void check_invariants() const;

  private:
    void take_free(std::int64_t frame);
    void give_free(std::int64_t frame);

    std::vector<FrameState> state_;
    std::vector<std::int64_t> frame_of_;
    std::vector<std::int64_t> page_in_;
    std::vector<std::int64_t> free_;
    std::vector<std::int64_t> free_pos_;
    std::vector<std::int64_t> wear_;
    std::size_t offline_ = 0;
};

struct RandomizationPlan
{
    std::int64_t capacity_bytes = std::int64_t{256} << 30;
    double utilization = 1.0;
    double period_days = 1.0;
    double page_latency_s = 374.9e-6;
    std::int64_t page_size = page_size_bytes;
};

void validate(const RandomizationPlan& p);

struct OverheadEstimate
{
    double pages_per_second = 0;
    /// Share of one core spent migrating pages.
    double overhead_fraction = 0;
};

/// (capacity x U / page size) pages spread over D days.
OverheadEstimate overhead_estimate(const RandomizationPlan& plan);

struct RandomizerSimConfig
{
    std::int64_t steps = 100000;
    /// Writes per randomization period; every mapped page moves once per period.
    std::int64_t writes_per_period = 1000;
    std::int64_t spare_frames = 1;
};

struct RandomizerSimResult
{
    std::vector<std::int64_t> wear_with;
    std::vector<std::int64_t> wear_without;
    double gini_with = 0;
    double gini_without = 0;
    std::int64_t migrations = 0;
    OverheadEstimate overhead;
};

/// Gini coefficient of non-negative values; 0 for an all-zero input.
double gini(std::span<const std::int64_t> values);

/**
 * Replays the same weighted write stream twice, once with periodic page
 * randomization and once without, and compares how evenly frames wear.
 */
RandomizerSimResult run_randomizer_sim(std::span<const double> write_weights, const RandomizationPlan& plan,
                                       const RandomizerSimConfig& cfg, std::uint64_t seed);

Json to_json(const OverheadEstimate& o);
Json to_json(const RandomizerSimResult& r);

} // namespace fleetrel
