#include "fleetrel/generator.hpp"

#include "fleetrel/error.hpp"
#include "fleetrel/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace fleetrel {

namespace {

constexpr EpochSeconds burst_budget_s = 14 * seconds_per_day;
constexpr EpochSeconds start_jitter_s = 10 * seconds_per_day;

template <std::size_t N> void check_weights(const std::array<double, N>& w, const std::string& field)
{
    double sum = 0;
    for (double x : w) {
        require(std::isfinite(x) && x >= 0, field + ": weights must be finite and non-negative");
        sum += x;
    }
    require(std::fabs(sum - 1.0) <= 1e-3, field + ": weights must sum to 1 (got " + std::to_string(sum) + ")");
}

template <std::size_t N> std::array<double, N> normalized(std::array<double, N> w)
{
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    for (auto& x : w)
        x /= sum;
    return w;
}

std::string numbered(const char* prefix, std::int64_t i, int width)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%0*lld", prefix, width, static_cast<long long>(i));
    return buf;
}

struct BurstWriter
{
    Rng& rng;
    const DramGenSpec& spec;
    const std::string& server;
    EpochSeconds month_end;
    std::vector<MemErrorEvent>& out;

    MemErrorEvent random_location()
    {
        const auto& g = spec.geometry;
        MemErrorEvent e;
        e.server_id = server;
        e.socket = static_cast<int>(rng.below(static_cast<std::uint64_t>(g.sockets)));
        e.channel = static_cast<int>(rng.below(static_cast<std::uint64_t>(g.channels)));
        e.bank = static_cast<int>(rng.below(static_cast<std::uint64_t>(g.banks)));
        e.row = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.rows)));
        e.column = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.columns)));
        e.byte_offset = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.bytes_per_column)));
        return e;
    }

    void emit(MemErrorEvent e, EpochSeconds& t, EpochSeconds gap_lo, EpochSeconds gap_hi)
    {
        t += gap_lo + static_cast<EpochSeconds>(rng.below(static_cast<std::uint64_t>(gap_hi - gap_lo + 1)));
        e.timestamp = std::min(t, month_end - 1);
        e.access_type = rng.bernoulli(0.1) ? AccessType::scrub : AccessType::read;
        e.severity = rng.bernoulli(spec.uncorrectable_prob) ? Severity::uncorrectable : Severity::correctable;
        out.push_back(std::move(e));
    }

    // Emits n errors from one faulty component. The first errors of a burst are
    // placed so the pattern that defines its class is always present.
    void write(ComponentClass c, std::int64_t n, EpochSeconds t0)
    {
        const auto& g = spec.geometry;
        EpochSeconds t = t0;
        const EpochSeconds slow_gap = std::max<EpochSeconds>(1, burst_budget_s / std::max<std::int64_t>(n, 1));
        const MemErrorEvent base = random_location();
        const auto row_off = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.rows)));
        const auto col_off = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.columns)));
        for (std::int64_t i = 0; i < n; ++i) {
            MemErrorEvent e = random_location();
            switch (c) {
            case ComponentClass::socket:
                e.socket = base.socket;
                if (i < 2)
                    e.channel = static_cast<int>((base.channel + i) % g.channels);
                emit(std::move(e), t, 1, slow_gap);
                break;
            case ComponentClass::channel:
                e.socket = base.socket;
                e.channel = base.channel;
                if (i < 2)
                    e.bank = static_cast<int>((base.bank + i) % g.banks);
                emit(std::move(e), t, 1, slow_gap);
                break;
            case ComponentClass::bank:
                e.socket = base.socket;
                e.channel = base.channel;
                e.bank = base.bank;
                if (i < 2)
                    e.row = (base.row + i) % g.rows;
                emit(std::move(e), t, 1, slow_gap);
                break;
            case ComponentClass::row:
                e = base;
                e.column = (col_off + i) % g.columns;
                e.byte_offset = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.bytes_per_column)));
                emit(std::move(e), t, 1, slow_gap);
                break;
            case ComponentClass::column:
                e = base;
                e.row = (row_off + i) % g.rows;
                e.byte_offset = static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(g.bytes_per_column)));
                emit(std::move(e), t, 1, slow_gap);
                break;
            case ComponentClass::cell:
                emit(base, t, i == 0 ? 0 : 1, i == 0 ? 0 : 60);
                break;
            case ComponentClass::spurious:
                // spaced past the cell window so scattered errors never pair up
                emit(std::move(e), t, 61, std::max<EpochSeconds>(61, slow_gap));
                break;
            }
        }
    }
};

std::uint64_t section_seed(std::uint64_t seed, std::string_view section, const std::string& key)
{
    return substream_seed(seed, std::string(section) + "/" + key);
}

std::int64_t pareto_count(const GeneratorSpec& spec, const std::string& server, int month)
{
    Rng rng(section_seed(spec.seed, "dram-count", server + "/" + std::to_string(month)));
    return static_cast<std::int64_t>(std::floor(rng.pareto(spec.dram.pareto_alpha, spec.dram.pareto_x_min)));
}

void generate_dram(const GeneratorSpec& spec, TraceBundle& b)
{
    const auto& d = spec.dram;
    const auto weights = normalized(d.class_weights);
    std::array<double, component_class_count> server_weights{};
    for (std::size_t c = 0; c < component_class_count; ++c)
        server_weights[c] = d.count_mode == DramCountMode::per_class
                                ? weights[c] / static_cast<double>(d.burst_sizes[c])
                                : weights[c];
    const auto first_month = utc_month_index(spec.start);
    for (std::int64_t s = 0; s < spec.fleet_size; ++s) {
        const std::string id = server_name(s);
        Rng rng(section_seed(spec.seed, "dram", id));
        for (int m = 0; m < spec.months; ++m) {
            const auto c = all_component_classes[rng.discrete(server_weights)];
            const std::int64_t n = d.count_mode == DramCountMode::per_class ? d.burst_sizes[static_cast<std::size_t>(c)]
                                                                            : pareto_count(spec, id, m);
            const EpochSeconds month_start = utc_month_start(first_month + m);
            const EpochSeconds t0 = month_start + static_cast<EpochSeconds>(rng.below(start_jitter_s));
            const std::size_t before = b.dram.size();
            BurstWriter w{rng, d, id, utc_month_start(first_month + m + 1), b.dram};
            w.write(c, n, t0);
            b.dram_truth.insert(b.dram_truth.end(), b.dram.size() - before, c);
        }
    }
}

void generate_ssd(const GeneratorSpec& spec, TraceBundle& b)
{
    const auto& s = spec.ssd;
    const std::int64_t servers = s.servers > 0 ? s.servers : spec.fleet_size;
    constexpr double sigma = 0.5;
    for (std::int64_t i = 0; i < servers; ++i) {
        const std::string id = server_name(i);
        Rng rng(section_seed(spec.seed, "ssd", id));
        const auto platform = static_cast<Platform>(rng.discrete(s.platform_mix));
        const auto& info = platform_info(platform);
        std::array<bool, 2> failed{false, false};
        if (rng.bernoulli(s.failure_prob)) {
            if (info.ssds_per_server == 1)
                failed[0] = true;
            else if (rng.bernoulli(s.pair_both_prob))
                failed = {true, true};
            else
                failed[rng.below(2)] = true;
        }
        for (int slot = 0; slot < info.ssds_per_server; ++slot) {
            SSDSnapshot x;
            x.ssd_id = id + "-ssd" + std::to_string(slot);
            x.platform = platform;
            x.slot_index = slot;
            x.server_id = id;
            x.flash_written_tb = info.mean_written_tb * rng.lognormal(-sigma * sigma / 2, sigma);
            x.flash_read_tb = info.mean_read_tb * rng.lognormal(-sigma * sigma / 2, sigma);
            x.uncorrectable_errors =
                failed[static_cast<std::size_t>(slot)]
                    ? std::max<std::int64_t>(1, std::llround(rng.weibull(s.weibull_shape, s.weibull_scale)))
                    : 0;
            x.discarded_blocks = std::llround(x.flash_written_tb * 1000.0 * rng.uniform(0.5, 1.5));
            x.dram_buffer_util_pct = rng.uniform(0.0, 100.0);
            x.avg_temp_c = rng.normal(40.0, 6.0);
            x.bus_power_w = std::max(0.0, rng.normal(8.0, 1.0));
            x.throttled = x.avg_temp_c > 55.0;
            const double ratio = s.coalescing * rng.uniform(0.9, 1.1);
            x.os_sectors_written = std::llround(x.flash_written_tb * 1e12 / (512.0 * ratio));
            x.erases_per_gc = rng.uniform(1.0, 4.0);
            x.pages_copied = std::llround(x.flash_written_tb * 1e12 / 4096.0 * rng.uniform(0.05, 0.2));
            b.ssd.push_back(std::move(x));
        }
    }
}

void generate_incidents(const GeneratorSpec& spec, TraceBundle& b)
{
    const auto& n = spec.net;
    const double window_s = n.days * static_cast<double>(seconds_per_day);
    for (auto type : all_device_types) {
        const auto pop_it = n.population.find(type);
        const std::int64_t pop = pop_it == n.population.end() ? 0 : pop_it->second;
        b.population[type] = pop;
        const auto rate_it = n.incident_rate.find(type);
        const double rate = rate_it == n.incident_rate.end() ? 0.0 : rate_it->second;
        if (pop == 0 || rate == 0)
            continue;
        Rng rng(section_seed(spec.seed, "net", std::string(to_string(type))));
        const double mean_gap = 365.0 * static_cast<double>(seconds_per_day) / (static_cast<double>(pop) * rate);
        for (double t = rng.exponential(mean_gap); t < window_s; t += rng.exponential(mean_gap)) {
            IncidentRecord r;
            r.device_type = type;
            r.sev_level = 1 + static_cast<int>(rng.discrete(n.sev_weights));
            r.root_causes = {all_root_causes[rng.discrete(n.root_cause_weights)]};
            if (rng.bernoulli(n.multi_cause_prob)) {
                auto w = n.root_cause_weights;
                w[static_cast<std::size_t>(r.root_causes.front())] = 0;
                if (std::accumulate(w.begin(), w.end(), 0.0) > 0)
                    r.root_causes.push_back(all_root_causes[rng.discrete(w)]);
            }
            r.start = spec.start + static_cast<EpochSeconds>(t);
            const double dur_h = rng.lognormal(std::log(n.resolution_median_h), n.resolution_sigma);
            r.resolved = r.start + std::max<EpochSeconds>(1, std::llround(dur_h * seconds_per_hour));
            b.incidents.push_back(std::move(r));
        }
    }
    std::stable_sort(b.incidents.begin(), b.incidents.end(),
                     [](const IncidentRecord& x, const IncidentRecord& y) { return x.start < y.start; });
}

void generate_fiber(const GeneratorSpec& spec, TraceBundle& b)
{
    const auto& f = spec.fiber;
    const double window_s = f.years * 365.0 * static_cast<double>(seconds_per_day);
    const EpochSeconds window_end = spec.start + static_cast<EpochSeconds>(window_s);
    for (std::int64_t l = 0; l < f.links; ++l) {
        const std::string id = numbered("link-", l, 5);
        Rng rng(section_seed(spec.seed, "fiber", id));
        const std::string vendor = numbered("vendor-", 1 + static_cast<std::int64_t>(rng.below(
                                                               static_cast<std::uint64_t>(f.vendors))),
                                            1);
        const auto continent = all_continents[rng.discrete(f.continent_weights)];
        const double mtbf_s = f.mtbf(rng.uniform()) * seconds_per_hour;
        const double mttr_s = f.mttr(rng.uniform()) * seconds_per_hour;
        // repairs arrive at the link's MTBF; planned maintenance is a separate stream
        // sized so that it makes up maintenance_frac of all tickets
        const std::size_t first = b.fiber.size();
        auto emit = [&](double mean_gap, TicketKind kind) {
            for (double t = rng.exponential(mean_gap); t < window_s; t += rng.exponential(mean_gap)) {
                FiberRepairTicket k;
                k.link_id = id;
                k.vendor = vendor;
                k.continent = continent;
                k.kind = kind;
                k.start = spec.start + static_cast<EpochSeconds>(t);
                const EpochSeconds end = k.start + std::max<EpochSeconds>(1, std::llround(rng.exponential(mttr_s)));
                if (end <= window_end)
                    k.end = end;
                if (kind == TicketKind::maintenance)
                    k.est_duration_s = std::llround(mttr_s);
                b.fiber.push_back(std::move(k));
            }
        };
        if (f.maintenance_frac < 1)
            emit(mtbf_s, TicketKind::repair);
        if (f.maintenance_frac > 0)
            emit(f.maintenance_frac < 1 ? mtbf_s * (1 - f.maintenance_frac) / f.maintenance_frac : mtbf_s,
                 TicketKind::maintenance);
        std::stable_sort(b.fiber.begin() + static_cast<std::ptrdiff_t>(first), b.fiber.end(),
                         [](const FiberRepairTicket& x, const FiberRepairTicket& y) { return x.start < y.start; });
    }
}

// ----- spec JSON ------------------------------------------------------------

template <class T> void read_opt(const Json& j, const char* key, T& out, const std::string& ctx)
{
    auto it = j.find(key);
    if (it == j.end())
        return;
    try {
        out = it->get<T>();
    } catch (const std::exception&) {
        fail(ErrorKind::parse, "generator spec: '" + ctx + key + "' has the wrong type");
    }
}

template <class E, std::size_t N, std::size_t M>
void read_keyed(const Json& j, const char* key, std::array<double, N>& out, const std::array<E, M>& order,
                const std::string& ctx)
{
    auto it = j.find(key);
    if (it == j.end())
        return;
    if (!it->is_object())
        fail(ErrorKind::parse, "generator spec: '" + ctx + key + "' must be an object");
    out.fill(0.0);
    for (const auto& [name, v] : it->items()) {
        E e{};
        try {
            e = parse_enum<E>(name);
        } catch (const Error& err) {
            fail(ErrorKind::parse, "generator spec: '" + ctx + key + "': " + err.what());
        }
        if (!v.is_number())
            fail(ErrorKind::parse, "generator spec: '" + ctx + key + "." + name + "' must be a number");
        const auto pos = static_cast<std::size_t>(std::find(order.begin(), order.end(), e) - order.begin());
        out[pos] = v.template get<double>();
    }
}

template <class E, std::size_t N> Json keyed(const std::array<double, N>& w, const std::array<E, N>& order)
{
    Json o = Json::object();
    for (std::size_t i = 0; i < N; ++i)
        o[std::string(to_string(order[i]))] = w[i];
    return o;
}

constexpr std::array<Platform, 6> all_platforms{Platform::A, Platform::B, Platform::C,
                                                Platform::D, Platform::E, Platform::F};

} // namespace

std::int64_t DramGeometry::byte_address(const MemErrorEvent& e) const
{
    std::int64_t a = e.socket;
    a = a * channels + e.channel;
    a = a * banks + e.bank;
    a = a * rows + e.row;
    a = a * columns + e.column;
    return a * bytes_per_column + e.byte_offset;
}

std::string server_name(std::int64_t index) { return numbered("srv-", index, 6); }

void validate(const GeneratorSpec& s)
{
    require(s.fleet_size > 0, "fleet_size must be positive");
    require(s.months >= 1, "months must be at least 1");
    require(s.start > 0, "start must be a positive epoch time");
    const auto& d = s.dram;
    check_weights(d.class_weights, "dram.class_weights");
    for (std::size_t c = 0; c < component_class_count; ++c)
        require(d.burst_sizes[c] >= 1, "dram.burst_sizes must be at least 1");
    require(d.pareto_alpha > 0 && d.pareto_x_min >= 1, "dram.pareto_alpha must be positive and pareto_x_min >= 1");
    require(d.uncorrectable_prob >= 0 && d.uncorrectable_prob <= 1, "dram.uncorrectable_prob must lie in [0, 1]");
    require(d.geometry.sockets > 0 && d.geometry.channels > 1 && d.geometry.banks > 1 && d.geometry.rows > 1 &&
                d.geometry.columns > 1 && d.geometry.bytes_per_column > 0,
            "dram.geometry needs at least two channels, banks, rows and columns");
    check_weights(s.ssd.platform_mix, "ssd.platform_mix");
    require(s.ssd.servers >= 0, "ssd.servers must be non-negative");
    require(s.ssd.failure_prob >= 0 && s.ssd.failure_prob <= 1, "ssd.failure_prob must lie in [0, 1]");
    require(s.ssd.pair_both_prob >= 0 && s.ssd.pair_both_prob <= 1, "ssd.pair_both_prob must lie in [0, 1]");
    require(s.ssd.weibull_shape > 0 && s.ssd.weibull_scale > 0, "ssd.weibull_shape and weibull_scale must be positive");
    require(s.ssd.coalescing > 0, "ssd.coalescing must be positive");
    check_weights(s.net.root_cause_weights, "network.root_cause_weights");
    check_weights(s.net.sev_weights, "network.sev_weights");
    for (const auto& [t, n] : s.net.population)
        require(n >= 0, "network.population must be non-negative");
    for (const auto& [t, r] : s.net.incident_rate)
        require(r >= 0 && std::isfinite(r), "network.incident_rate must be non-negative");
    require(s.net.multi_cause_prob >= 0 && s.net.multi_cause_prob <= 1, "network.multi_cause_prob must lie in [0, 1]");
    require(s.net.resolution_median_h > 0 && s.net.resolution_sigma >= 0, "network.resolution_* out of range");
    require(s.net.days > 0, "network.days must be positive");
    check_weights(s.fiber.continent_weights, "fiber.continent_weights");
    require(s.fiber.links >= 0 && s.fiber.vendors >= 1, "fiber.links must be >= 0 and fiber.vendors >= 1");
    require(s.fiber.mtbf.a > 0 && s.fiber.mttr.a > 0, "fiber.mtbf.a and fiber.mttr.a must be positive");
    require(s.fiber.years > 0, "fiber.years must be positive");
    require(s.fiber.maintenance_frac >= 0 && s.fiber.maintenance_frac <= 1, "fiber.maintenance_frac must lie in [0, 1]");
    require(s.designs.count >= 0, "designs.count must be non-negative");
}

Json to_json(const GeneratorSpec& s)
{
    Json bursts = Json::object();
    for (std::size_t c = 0; c < component_class_count; ++c)
        bursts[std::string(to_string(all_component_classes[c]))] = s.dram.burst_sizes[c];
    Json pop = Json::object();
    Json rate = Json::object();
    for (const auto& [t, n] : s.net.population)
        pop[std::string(to_string(t))] = n;
    for (const auto& [t, r] : s.net.incident_rate)
        rate[std::string(to_string(t))] = r;
    const auto& g = s.dram.geometry;
    return Json{
        {"seed", s.seed},
        {"fleet_size", s.fleet_size},
        {"start", s.start},
        {"months", s.months},
        {"dram",
         {{"enabled", s.dram.enabled},
          {"count_mode", s.dram.count_mode == DramCountMode::pareto ? "pareto" : "per_class"},
          {"class_weights", keyed(s.dram.class_weights, all_component_classes)},
          {"burst_sizes", bursts},
          {"pareto_alpha", s.dram.pareto_alpha},
          {"pareto_x_min", s.dram.pareto_x_min},
          {"uncorrectable_prob", s.dram.uncorrectable_prob},
          {"geometry",
           {{"sockets", g.sockets},
            {"channels", g.channels},
            {"banks", g.banks},
            {"rows", g.rows},
            {"columns", g.columns},
            {"bytes_per_column", g.bytes_per_column}}}}},
        {"ssd",
         {{"enabled", s.ssd.enabled},
          {"servers", s.ssd.servers},
          {"platform_mix", keyed(s.ssd.platform_mix, all_platforms)},
          {"failure_prob", s.ssd.failure_prob},
          {"pair_both_prob", s.ssd.pair_both_prob},
          {"weibull_shape", s.ssd.weibull_shape},
          {"weibull_scale", s.ssd.weibull_scale},
          {"coalescing", s.ssd.coalescing}}},
        {"network",
         {{"enabled", s.net.enabled},
          {"population", pop},
          {"incident_rate", rate},
          {"root_cause_weights", keyed(s.net.root_cause_weights, all_root_causes)},
          {"sev_weights", s.net.sev_weights},
          {"multi_cause_prob", s.net.multi_cause_prob},
          {"resolution_median_h", s.net.resolution_median_h},
          {"resolution_sigma", s.net.resolution_sigma},
          {"days", s.net.days}}},
        {"fiber",
         {{"enabled", s.fiber.enabled},
          {"links", s.fiber.links},
          {"vendors", s.fiber.vendors},
          {"continent_weights", keyed(s.fiber.continent_weights, all_continents)},
          {"mtbf", {{"a", s.fiber.mtbf.a}, {"b", s.fiber.mtbf.b}}},
          {"mttr", {{"a", s.fiber.mttr.a}, {"b", s.fiber.mttr.b}}},
          {"years", s.fiber.years},
          {"maintenance_frac", s.fiber.maintenance_frac}}},
        {"designs", {{"count", s.designs.count}, {"model", s.designs.model}}}};
}

GeneratorSpec generator_spec_from_json(const Json& j)
{
    if (!j.is_object())
        fail(ErrorKind::parse, "generator spec must be a JSON object");
    GeneratorSpec s;
    read_opt(j, "seed", s.seed, "");
    read_opt(j, "fleet_size", s.fleet_size, "");
    if (j.contains("start") && j["start"].is_string())
        s.start = parse_timestamp(j["start"].get<std::string>());
    else
        read_opt(j, "start", s.start, "");
    read_opt(j, "months", s.months, "");

    if (auto it = j.find("dram"); it != j.end()) {
        const Json& d = *it;
        read_opt(d, "enabled", s.dram.enabled, "dram.");
        if (d.contains("count_mode")) {
            const auto mode = d["count_mode"].is_string() ? d["count_mode"].get<std::string>() : "";
            if (mode == "pareto")
                s.dram.count_mode = DramCountMode::pareto;
            else if (mode == "per_class")
                s.dram.count_mode = DramCountMode::per_class;
            else
                fail(ErrorKind::parse, "generator spec: 'dram.count_mode' must be \"per_class\" or \"pareto\"");
        }
        read_keyed(d, "class_weights", s.dram.class_weights, all_component_classes, "dram.");
        if (auto b = d.find("burst_sizes"); b != d.end()) {
            if (!b->is_object())
                fail(ErrorKind::parse, "generator spec: 'dram.burst_sizes' must be an object");
            for (const auto& [name, v] : b->items()) {
                if (!v.is_number_integer())
                    fail(ErrorKind::parse, "generator spec: 'dram.burst_sizes." + name + "' must be an integer");
                s.dram.burst_sizes[static_cast<std::size_t>(parse_enum<ComponentClass>(name))] = v.get<std::int64_t>();
            }
        }
        read_opt(d, "pareto_alpha", s.dram.pareto_alpha, "dram.");
        read_opt(d, "pareto_x_min", s.dram.pareto_x_min, "dram.");
        read_opt(d, "uncorrectable_prob", s.dram.uncorrectable_prob, "dram.");
        if (auto g = d.find("geometry"); g != d.end()) {
            read_opt(*g, "sockets", s.dram.geometry.sockets, "dram.geometry.");
            read_opt(*g, "channels", s.dram.geometry.channels, "dram.geometry.");
            read_opt(*g, "banks", s.dram.geometry.banks, "dram.geometry.");
            read_opt(*g, "rows", s.dram.geometry.rows, "dram.geometry.");
            read_opt(*g, "columns", s.dram.geometry.columns, "dram.geometry.");
            read_opt(*g, "bytes_per_column", s.dram.geometry.bytes_per_column, "dram.geometry.");
        }
    }
    if (auto it = j.find("ssd"); it != j.end()) {
        const Json& d = *it;
        read_opt(d, "enabled", s.ssd.enabled, "ssd.");
        read_opt(d, "servers", s.ssd.servers, "ssd.");
        read_keyed(d, "platform_mix", s.ssd.platform_mix, all_platforms, "ssd.");
        read_opt(d, "failure_prob", s.ssd.failure_prob, "ssd.");
        read_opt(d, "pair_both_prob", s.ssd.pair_both_prob, "ssd.");
        read_opt(d, "weibull_shape", s.ssd.weibull_shape, "ssd.");
        read_opt(d, "weibull_scale", s.ssd.weibull_scale, "ssd.");
        read_opt(d, "coalescing", s.ssd.coalescing, "ssd.");
    }
    if (auto it = j.find("network"); it != j.end()) {
        const Json& d = *it;
        read_opt(d, "enabled", s.net.enabled, "network.");
        for (const char* key : {"population", "incident_rate"}) {
            auto m = d.find(key);
            if (m == d.end())
                continue;
            if (!m->is_object())
                fail(ErrorKind::parse, std::string("generator spec: 'network.") + key + "' must be an object");
            if (std::string(key) == "population")
                s.net.population.clear();
            else
                s.net.incident_rate.clear();
            for (const auto& [name, v] : m->items()) {
                const auto t = parse_enum<DeviceType>(name);
                if (!v.is_number())
                    fail(ErrorKind::parse, std::string("generator spec: 'network.") + key + "." + name +
                                               "' must be a number");
                if (std::string(key) == "population")
                    s.net.population[t] = v.get<std::int64_t>();
                else
                    s.net.incident_rate[t] = v.get<double>();
            }
        }
        read_keyed(d, "root_cause_weights", s.net.root_cause_weights, all_root_causes, "network.");
        read_opt(d, "sev_weights", s.net.sev_weights, "network.");
        read_opt(d, "multi_cause_prob", s.net.multi_cause_prob, "network.");
        read_opt(d, "resolution_median_h", s.net.resolution_median_h, "network.");
        read_opt(d, "resolution_sigma", s.net.resolution_sigma, "network.");
        read_opt(d, "days", s.net.days, "network.");
    }
    if (auto it = j.find("fiber"); it != j.end()) {
        const Json& d = *it;
        read_opt(d, "enabled", s.fiber.enabled, "fiber.");
        read_opt(d, "links", s.fiber.links, "fiber.");
        read_opt(d, "vendors", s.fiber.vendors, "fiber.");
        read_keyed(d, "continent_weights", s.fiber.continent_weights, all_continents, "fiber.");
        for (auto [key, curve] : {std::pair{"mtbf", &s.fiber.mtbf}, std::pair{"mttr", &s.fiber.mttr}}) {
            if (auto c = d.find(key); c != d.end()) {
                read_opt(*c, "a", curve->a, std::string("fiber.") + key + ".");
                read_opt(*c, "b", curve->b, std::string("fiber.") + key + ".");
            }
        }
        read_opt(d, "years", s.fiber.years, "fiber.");
        read_opt(d, "maintenance_frac", s.fiber.maintenance_frac, "fiber.");
    }
    if (auto it = j.find("designs"); it != j.end()) {
        read_opt(*it, "count", s.designs.count, "designs.");
        read_opt(*it, "model", s.designs.model, "designs.");
    }
    validate(s);
    return s;
}

TraceBundle generate_traces(const GeneratorSpec& spec)
{
    validate(spec);
    TraceBundle b;
    if (spec.dram.enabled)
        generate_dram(spec, b);
    if (spec.ssd.enabled)
        generate_ssd(spec, b);
    if (spec.net.enabled)
        generate_incidents(spec, b);
    if (spec.fiber.enabled)
        generate_fiber(spec, b);
    if (spec.designs.count > 0)
        b.designs = generate_design_samples(LogisticFailureModel::builtin(spec.designs.model), spec.designs.count,
                                            substream_seed(spec.seed, "designs"));
    return b;
}

std::vector<double> generate_dram_counts(const GeneratorSpec& spec)
{
    validate(spec);
    std::vector<double> counts;
    counts.reserve(static_cast<std::size_t>(spec.fleet_size) * static_cast<std::size_t>(spec.months));
    for (std::int64_t s = 0; s < spec.fleet_size; ++s)
        for (int m = 0; m < spec.months; ++m)
            counts.push_back(static_cast<double>(pareto_count(spec, server_name(s), m)));
    return counts;
}

std::vector<LabeledDesign> generate_design_samples(const LogisticFailureModel& model, std::int64_t count,
                                                   std::uint64_t seed)
{
    require(count >= 0, "design sample count must be non-negative");
    static constexpr std::array<ChipDensity, 3> densities{ChipDensity::gb1, ChipDensity::gb2, ChipDensity::gb4};
    static constexpr std::array<int, 5> chip_counts{8, 16, 32, 48, 64};
    static constexpr std::array<double, 4> fill{0.125, 0.25, 0.5, 1.0};
    Rng rng(seed);
    std::vector<LabeledDesign> out;
    out.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) {
        LabeledDesign s;
        auto& d = s.design;
        d.density = densities[rng.below(densities.size())];
        d.chips = chip_counts[rng.below(chip_counts.size())];
        d.capacity_gb = d.chips * density_gbit(d.density) / 8.0 * fill[rng.below(fill.size())];
        d.transfer_width = rng.bernoulli(0.5) ? TransferWidth::x8 : TransferWidth::x4;
        d.cpu_util_pct = rng.uniform(0.0, 100.0);
        d.mem_util_pct = rng.uniform(0.0, 100.0);
        d.age_years = rng.uniform(0.0, 10.0);
        d.cpus = 4 * static_cast<int>(rng.below(7));
        s.in_error_group = rng.bernoulli(model.predict(d));
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace fleetrel
