#include "fleetrel/mitigation.hpp"

#include "fleetrel/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <sstream>
#include <tuple>

namespace fleetrel {

namespace {

bool server_level(ComponentClass c) { return c == ComponentClass::socket || c == ComponentClass::channel; }

std::int64_t day_of(EpochSeconds t) { return t >= 0 ? t / seconds_per_day : (t - seconds_per_day + 1) / seconds_per_day; }

struct HostState
{
    std::map<std::int64_t, std::int64_t> page_errors;
    std::int64_t offline_bytes = 0;
    bool stopped = false;
};

struct Retry
{
    EpochSeconds time;
    std::string host;
    std::int64_t page;

    bool operator>(const Retry& o) const { return std::tie(time, host, page) > std::tie(o.time, o.host, o.page); }
};

} // namespace

void validate(const OfflinePolicy& p)
{
    require(p.errors_before_offline >= 1, "errors_before_offline must be at least 1");
    require(p.cap_frac >= 0 && p.cap_frac <= 1, "cap_frac must lie in [0, 1]");
    require(p.initial_fail_prob >= 0 && p.initial_fail_prob <= 1, "initial_fail_prob must lie in [0, 1]");
    require(p.retry_delay_s > 0, "retry delay must be positive");
}

bool OfflineStore::contains(const std::string& host, std::int64_t page) const
{
    auto it = pages_.find(host);
    return it != pages_.end() && it->second.count(page) > 0;
}

bool OfflineStore::insert(const std::string& host, std::int64_t page) { return pages_[host].insert(page).second; }

std::size_t OfflineStore::size() const
{
    std::size_t n = 0;
    for (const auto& [h, p] : pages_)
        n += p.size();
    return n;
}

std::size_t OfflineStore::pages_on(const std::string& host) const
{
    auto it = pages_.find(host);
    return it == pages_.end() ? 0 : it->second.size();
}

std::string OfflineStore::to_jsonl() const
{
    std::string out;
    for (const auto& [host, pages] : pages_)
        for (auto p : pages)
            out += Json{{"host", host}, {"page", p}}.dump() + "\n";
    return out;
}

OfflineStore OfflineStore::from_jsonl(std::string_view text)
{
    OfflineStore s;
    std::istringstream in{std::string(text)};
    for_each_jsonl(in, [&](const Json& j, std::size_t line) {
        auto h = j.find("host");
        if (h == j.end() || !h->is_string() || h->get<std::string>().empty())
            throw ParseError(line, "host", "missing required field");
        auto p = j.find("page");
        if (p == j.end() || !p->is_number_integer() || p->get<std::int64_t>() < 0)
            throw ParseError(line, "page", "expected a non-negative integer");
        s.insert(h->get<std::string>(), p->get<std::int64_t>());
    });
    return s;
}

OfflineSimResult run_offline_sim(std::span<const ClassifiedEvent> trace, const OfflineSimConfig& cfg,
                                 std::uint64_t seed)
{
    validate(cfg.policy);
    require(cfg.window_days >= 1, "window_days must be at least 1");
    for (std::size_t i = 1; i < trace.size(); ++i)
        if (trace[i].event.timestamp < trace[i - 1].event.timestamp)
            fail(ErrorKind::invalid_argument, "offline simulation: trace is not sorted by time (record " +
                                                  std::to_string(i + 1) + ")");
    const auto& pol = cfg.policy;
    const std::int64_t capacity = cfg.capacity_bytes > 0 ? cfg.capacity_bytes : cfg.geometry.total_bytes();
    const double cap_bytes = pol.cap_frac * static_cast<double>(capacity);

    OfflineSimResult r;
    r.store = cfg.initial_store;
    if (trace.empty())
        return r;
    const EpochSeconds deploy = cfg.deploy_time > 0 ? cfg.deploy_time : trace.front().event.timestamp;

    Rng rng(substream_seed(seed, "offline"));
    std::map<std::string, HostState> hosts;
    for (const auto& [host, pages] : r.store.hosts())
        hosts[host].offline_bytes = static_cast<std::int64_t>(pages.size()) * page_size_bytes;
    std::priority_queue<Retry, std::vector<Retry>, std::greater<>> retries;

    auto attempt = [&](const std::string& host, std::int64_t page, EpochSeconds t) {
        auto& h = hosts[host];
        if (h.stopped || r.store.contains(host, page))
            return;
        if (rng.bernoulli(pol.initial_fail_prob)) {
            ++r.failed_attempts;
            if (pol.retry == RetryKind::fixed_delay)
                retries.push({t + pol.retry_delay_s, host, page});
            return;
        }
        r.store.insert(host, page);
        ++r.pages_offlined;
        h.offline_bytes += page_size_bytes;
        if (static_cast<double>(h.offline_bytes) > cap_bytes) {
            r.tickets.push_back({host, t, h.offline_bytes});
            h.stopped = true;
        }
    };

    const std::int64_t first_day = day_of(trace.front().event.timestamp);
    const std::int64_t last_day = day_of(trace.back().event.timestamp);
    r.timeline.resize(static_cast<std::size_t>(last_day - first_day + 1));
    for (std::size_t d = 0; d < r.timeline.size(); ++d)
        r.timeline[d] = {static_cast<std::int64_t>(d), 0, 0, 0, 0};

    for (const auto& ce : trace) {
        const auto& e = ce.event;
        while (!retries.empty() && retries.top().time <= e.timestamp) {
            const Retry rt = retries.top();
            retries.pop();
            attempt(rt.host, rt.page, rt.time);
        }
        const std::int64_t page = cfg.geometry.byte_address(e) / page_size_bytes;
        auto& row = r.timeline[static_cast<std::size_t>(day_of(e.timestamp) - first_day)];
        ++r.trace_errors;
        ++row.baseline_errors;
        if (!server_level(ce.component) && r.store.contains(e.server_id, page)) {
            ++r.suppressed;
            continue;
        }
        ++r.observed;
        ++row.errors;
        auto& h = hosts[e.server_id];
        if (e.timestamp >= deploy && ++h.page_errors[page] >= pol.errors_before_offline)
            attempt(e.server_id, page, e.timestamp);
        row.pages_offline = static_cast<std::int64_t>(r.store.size());
        row.tickets = static_cast<std::int64_t>(r.tickets.size());
    }
    // carry cumulative columns across quiet days
    for (std::size_t d = 1; d < r.timeline.size(); ++d) {
        r.timeline[d].pages_offline = std::max(r.timeline[d].pages_offline, r.timeline[d - 1].pages_offline);
        r.timeline[d].tickets = std::max(r.timeline[d].tickets, r.timeline[d - 1].tickets);
    }

    const std::int64_t from = std::max(day_of(deploy), last_day - cfg.window_days + 1) - first_day;
    std::int64_t base = 0;
    std::int64_t seen = 0;
    for (auto d = std::max<std::int64_t>(0, from); d < static_cast<std::int64_t>(r.timeline.size()); ++d) {
        base += r.timeline[static_cast<std::size_t>(d)].baseline_errors;
        seen += r.timeline[static_cast<std::size_t>(d)].errors;
    }
    r.reduction = base > 0 ? 1.0 - static_cast<double>(seen) / static_cast<double>(base) : 0.0;
    return r;
}

std::string timeline_csv(const OfflineSimResult& r)
{
    std::ostringstream os;
    os << "day,errors,pages_offline,tickets\n";
    for (const auto& t : r.timeline)
        os << t.day << ',' << t.errors << ',' << t.pages_offline << ',' << t.tickets << '\n';
    return os.str();
}

Json to_json(const OfflineSimResult& r)
{
    Json tickets = Json::array();
    for (const auto& t : r.tickets)
        tickets.push_back(Json{{"host", t.host}, {"time", t.time}, {"offline_bytes", t.offline_bytes}});
    return Json{{"trace_errors", r.trace_errors},       {"observed", r.observed},
                {"suppressed", r.suppressed},           {"pages_offlined", r.pages_offlined},
                {"failed_attempts", r.failed_attempts}, {"reduction", r.reduction},
                {"repair_tickets", tickets}};
}

// ----- SimMemory --------------------------------------------------------------

SimMemory::SimMemory(std::int64_t total_frames, std::int64_t mapped_pages)
{
    require(total_frames >= 1, "SimMemory: need at least one frame");
    require(mapped_pages >= 0 && mapped_pages <= total_frames, "SimMemory: more pages than frames");
    const auto n = static_cast<std::size_t>(total_frames);
    state_.assign(n, FrameState::free);
    page_in_.assign(n, -1);
    free_pos_.assign(n, -1);
    wear_.assign(n, 0);
    frame_of_.resize(static_cast<std::size_t>(mapped_pages));
    for (std::int64_t i = 0; i < mapped_pages; ++i) {
        frame_of_[static_cast<std::size_t>(i)] = i;
        page_in_[static_cast<std::size_t>(i)] = i;
        state_[static_cast<std::size_t>(i)] = FrameState::mapped;
    }
    for (std::int64_t f = mapped_pages; f < total_frames; ++f)
        give_free(f);
}

std::int64_t SimMemory::frame_of(std::int64_t logical) const
{
    require(logical >= 0 && logical < mapped_pages(), "logical page out of range");
    return frame_of_[static_cast<std::size_t>(logical)];
}

SimMemory::FrameState SimMemory::state(std::int64_t frame) const
{
    require(frame >= 0 && frame < total_frames(), "frame out of range");
    return state_[static_cast<std::size_t>(frame)];
}

std::int64_t SimMemory::wear(std::int64_t frame) const
{
    require(frame >= 0 && frame < total_frames(), "frame out of range");
    return wear_[static_cast<std::size_t>(frame)];
}

void SimMemory::write(std::int64_t logical, std::int64_t count)
{
    wear_[static_cast<std::size_t>(frame_of(logical))] += count;
}

void SimMemory::take_free(std::int64_t frame)
{
    const auto f = static_cast<std::size_t>(frame);
    const auto pos = static_cast<std::size_t>(free_pos_[f]);
    const std::int64_t last = free_.back();
    free_[pos] = last;
    free_pos_[static_cast<std::size_t>(last)] = static_cast<std::int64_t>(pos);
    free_.pop_back();
    free_pos_[f] = -1;
}

void SimMemory::give_free(std::int64_t frame)
{
    const auto f = static_cast<std::size_t>(frame);
    state_[f] = FrameState::free;
    page_in_[f] = -1;
    free_pos_[f] = static_cast<std::int64_t>(free_.size());
    free_.push_back(frame);
}

std::int64_t SimMemory::randomize_page(std::int64_t logical, Rng& rng)
{
    if (free_.empty())
        fail(ErrorKind::invalid_argument, "randomize_page: free pool is empty");
    return randomize_page_to(logical, static_cast<std::int64_t>(rng.below(free_.size())));
}

std::int64_t SimMemory::randomize_page_to(std::int64_t logical, std::int64_t free_slot)
{
    if (free_.empty())
        fail(ErrorKind::invalid_argument, "randomize_page: free pool is empty");
    require(free_slot >= 0 && free_slot < free_frames(), "randomize_page: free slot out of range");
    const std::int64_t old = frame_of(logical);
    const std::int64_t dest = free_[static_cast<std::size_t>(free_slot)];
    take_free(dest);
    state_[static_cast<std::size_t>(dest)] = FrameState::mapped;
    page_in_[static_cast<std::size_t>(dest)] = logical;
    frame_of_[static_cast<std::size_t>(logical)] = dest;
    ++wear_[static_cast<std::size_t>(dest)];
    give_free(old);
    return dest;
}

void SimMemory::offline_frame(std::int64_t frame, Rng& rng)
{
    const auto s = state(frame);
    if (s == FrameState::offline)
        return;
    if (s == FrameState::mapped) {
        const std::int64_t logical = page_in_[static_cast<std::size_t>(frame)];
        randomize_page(logical, rng);
    }
    take_free(frame);
    state_[static_cast<std::size_t>(frame)] = FrameState::offline;
    ++offline_;
}

void SimMemory::check_invariants() const
{
    const auto n = state_.size();
    std::vector<int> hits(n, 0);
    for (std::size_t l = 0; l < frame_of_.size(); ++l) {
        const auto f = frame_of_[l];
        if (f < 0 || static_cast<std::size_t>(f) >= n)
            fail(ErrorKind::data, "page " + std::to_string(l) + " maps outside memory");
        if (state_[static_cast<std::size_t>(f)] != FrameState::mapped)
            fail(ErrorKind::data, "page " + std::to_string(l) + " maps to a frame that is not mapped");
        if (page_in_[static_cast<std::size_t>(f)] != static_cast<std::int64_t>(l))
            fail(ErrorKind::data, "frame " + std::to_string(f) + " does not point back to page " + std::to_string(l));
        if (++hits[static_cast<std::size_t>(f)] > 1)
            fail(ErrorKind::data, "frame " + std::to_string(f) + " holds two pages");
    }
    std::size_t mapped = 0, free_count = 0, offline = 0;
    for (std::size_t f = 0; f < n; ++f) {
        switch (state_[f]) {
        case FrameState::mapped: ++mapped; break;
        case FrameState::free:
            ++free_count;
            if (free_pos_[f] < 0 || free_[static_cast<std::size_t>(free_pos_[f])] != static_cast<std::int64_t>(f))
                fail(ErrorKind::data, "free frame " + std::to_string(f) + " missing from the pool");
            break;
        case FrameState::offline:
            ++offline;
            if (free_pos_[f] >= 0)
                fail(ErrorKind::data, "offline frame " + std::to_string(f) + " is in the free pool");
            break;
        }
        if (wear_[f] < 0)
            fail(ErrorKind::data, "negative wear on frame " + std::to_string(f));
    }
    if (mapped != frame_of_.size() || free_count != free_.size() || offline != offline_)
        fail(ErrorKind::data, "frame state counts disagree with the page map or free pool");
}

// ----- randomization ------------------------------------------------------------

void validate(const RandomizationPlan& p)
{
    require(p.capacity_bytes > 0, "capacity must be positive");
    require(p.utilization >= 0 && p.utilization <= 1, "utilization U must lie in [0, 1]");
    require(p.period_days > 0 && std::isfinite(p.period_days), "period D must be positive");
    require(p.page_latency_s >= 0, "page latency must be non-negative");
    require(p.page_size > 0, "page size must be positive");
}

OverheadEstimate overhead_estimate(const RandomizationPlan& plan)
{
    validate(plan);
    OverheadEstimate o;
    const double pages = static_cast<double>(plan.capacity_bytes) * plan.utilization / static_cast<double>(plan.page_size);
    o.pages_per_second = pages / (plan.period_days * static_cast<double>(seconds_per_day));
    o.overhead_fraction = o.pages_per_second * plan.page_latency_s;
    return o;
}

double gini(std::span<const std::int64_t> values)
{
    if (values.empty())
        return 0.0;
    std::vector<double> x(values.begin(), values.end());
    std::sort(x.begin(), x.end());
    double total = 0, weighted = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        require(x[i] >= 0, "gini: values must be non-negative");
        total += x[i];
        weighted += static_cast<double>(i + 1) * x[i];
    }
    if (total == 0)
        return 0.0;
    const double n = static_cast<double>(x.size());
    return 2.0 * weighted / (n * total) - (n + 1.0) / n;
}

RandomizerSimResult run_randomizer_sim(std::span<const double> write_weights, const RandomizationPlan& plan,
                                       const RandomizerSimConfig& cfg, std::uint64_t seed)
{
    validate(plan);
    require(!write_weights.empty(), "randomizer: no pages");
    require(cfg.steps > 0, "randomizer: steps must be positive");
    require(cfg.writes_per_period > 0, "randomizer: writes_per_period must be positive");
    require(cfg.spare_frames >= 1, "randomizer: need at least one spare frame");
    std::vector<double> cumulative(write_weights.size());
    double total = 0;
    for (std::size_t i = 0; i < write_weights.size(); ++i) {
        require(std::isfinite(write_weights[i]) && write_weights[i] >= 0, "randomizer: weights must be non-negative");
        total += write_weights[i];
        cumulative[i] = total;
    }
    require(total > 0, "randomizer: weights are all zero");

    const auto pages = static_cast<std::int64_t>(write_weights.size());
    SimMemory with(pages + cfg.spare_frames, pages);
    SimMemory without(pages + cfg.spare_frames, pages);
    Rng writes(substream_seed(seed, "writes"));
    Rng moves(substream_seed(seed, "moves"));

    // spread one pass over all pages evenly across each period
    const double moves_per_write = static_cast<double>(pages) / static_cast<double>(cfg.writes_per_period);
    double owed = 0;
    std::int64_t next_page = 0;
    RandomizerSimResult r;
    for (std::int64_t s = 0; s < cfg.steps; ++s) {
        const double u = writes.uniform() * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto page = std::min<std::int64_t>(it - cumulative.begin(), pages - 1);
        with.write(page);
        without.write(page);
        for (owed += moves_per_write; owed >= 1.0; owed -= 1.0) {
            with.randomize_page(next_page, moves);
            ++r.migrations;
            next_page = (next_page + 1) % pages;
        }
    }
    r.wear_with = with.wear_counts();
    r.wear_without = without.wear_counts();
    r.gini_with = gini(r.wear_with);
    r.gini_without = gini(r.wear_without);
    r.overhead = overhead_estimate(plan);
    return r;
}

Json to_json(const OverheadEstimate& o)
{
    return Json{{"pages_per_second", o.pages_per_second}, {"overhead_fraction", o.overhead_fraction}};
}

Json to_json(const RandomizerSimResult& r)
{
    return Json{{"gini_with", r.gini_with},
                {"gini_without", r.gini_without},
                {"migrations", r.migrations},
                {"overhead", to_json(r.overhead)}};
}

} // namespace fleetrel
