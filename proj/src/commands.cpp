#include "fleetrel/commands.hpp"

#include "fleetrel/classify.hpp"
#include "fleetrel/error.hpp"
#include "fleetrel/failure_model.hpp"
#include "fleetrel/generator.hpp"
#include "fleetrel/mitigation.hpp"
#include "fleetrel/network.hpp"
#include "fleetrel/ssd.hpp"
#include "fleetrel/stats.hpp"
#include "fleetrel/svg.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>

#ifndef FLEETREL_VERSION
#define FLEETREL_VERSION "0.0.0"
#endif

namespace fleetrel {

namespace {

namespace fs = std::filesystem;

std::string flag_of(const std::string& key)
{
    std::string f = "--" + key;
    std::replace(f.begin(), f.end(), '_', '-');
    return f;
}

class Params
{
  public:
    explicit Params(const Json& j) : j_(j)
    {
        if (!j_.is_object())
            fail(ErrorKind::invalid_argument, "parameters must be a JSON object");
    }

    bool has(const std::string& key) const { return j_.contains(key) && !j_[key].is_null(); }

    template <class T> T get(const std::string& key, T fallback) const
    {
        if (!has(key))
            return fallback;
        try {
            return j_[key].get<T>();
        } catch (const std::exception&) {
            fail(ErrorKind::invalid_argument, flag_of(key) + ": wrong value type");
        }
    }

    template <class T> T required(const std::string& key) const
    {
        if (!has(key))
            fail(ErrorKind::invalid_argument, "missing required option " + flag_of(key));
        return get<T>(key, T{});
    }

    std::vector<std::string> inputs() const
    {
        if (!has("input"))
            return {};
        const Json& v = j_["input"];
        if (v.is_string())
            return {v.get<std::string>()};
        std::vector<std::string> out;
        for (const auto& x : v) {
            if (!x.is_string())
                fail(ErrorKind::invalid_argument, "--input: expected file paths");
            out.push_back(x.get<std::string>());
        }
        return out;
    }

    std::vector<std::string> require_inputs() const
    {
        auto in = inputs();
        if (in.empty())
            fail(ErrorKind::invalid_argument, "missing required option --input");
        return in;
    }

    // checks a numeric option against a predicate, naming the flag on failure
    template <class T, class Pred> T checked(const std::string& key, T fallback, Pred ok, const char* what) const
    {
        const T v = get<T>(key, fallback);
        if (!ok(v))
            fail(ErrorKind::invalid_argument, flag_of(key) + " " + what);
        return v;
    }

    const Json& raw() const { return j_; }

  private:
    const Json& j_;
};

class Outputs
{
  public:
    Outputs(std::string dir, std::string format, bool svg) : dir_(std::move(dir)), format_(std::move(format)), svg_(svg)
    {
        if (format_ != "csv" && format_ != "json")
            fail(ErrorKind::invalid_argument, "--format must be csv or json, got '" + format_ + "'");
    }

    void put(const std::string& name, std::string_view content)
    {
        write_text_file((fs::path(dir_) / name).string(), content);
        files_.push_back(name);
    }
    void put_json(const std::string& name, const Json& j) { put(name, j.dump(2) + "\n"); }

    void chart(const std::string& name, const std::string& title, const std::string& x, const std::string& y,
               const std::vector<SvgSeries>& series)
    {
        if (svg_)
            put(name, line_chart_svg(title, x, y, series));
    }

    bool json() const { return format_ == "json"; }
    const std::vector<std::string>& files() const { return files_; }

  private:
    std::string dir_;
    std::string format_;
    bool svg_;
    std::vector<std::string> files_;
};

std::string fmt(double v)
{
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

template <class T> std::vector<T> read_all(const std::vector<std::string>& paths)
{
    std::vector<T> out;
    for (const auto& p : paths) {
        auto part = read_jsonl_file<T>(p);
        out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
    }
    return out;
}

Json read_json_file(const std::string& path)
{
    const std::string text = read_text_file(path);
    try {
        return Json::parse(text);
    } catch (const std::exception& e) {
        fail(ErrorKind::parse, path + ": not valid JSON (" + e.what() + ")");
    }
}

double nice_width(double range)
{
    if (!(range > 0))
        return 1.0;
    const double raw = range / 20.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (raw <= m * mag)
            return m * mag;
    return 10.0 * mag;
}

SvgSeries curve_series(const std::string& name, const BucketedSeries& c)
{
    return {name, c.centers, c.rates};
}

// ----- generate ----------------------------------------------------------------

Json cmd_generate(const Params& p, Outputs& out)
{
    GeneratorSpec spec;
    if (p.has("spec"))
        spec = generator_spec_from_json(read_json_file(p.get<std::string>("spec", "")));
    spec.seed = p.required<std::uint64_t>("seed");
    spec.fleet_size = p.get<std::int64_t>("fleet_size", spec.fleet_size);
    spec.months = p.get<int>("months", spec.months);
    spec.designs.count = p.get<std::int64_t>("designs", spec.designs.count);
    if (p.has("fleet_size") && spec.fleet_size <= 0)
        fail(ErrorKind::invalid_argument, "--fleet-size must be positive");
    validate(spec);
    const auto b = generate_traces(spec);
    const std::string ext = p.get<bool>("gzip", false) ? ".jsonl.gz" : ".jsonl";
    Json counts = Json::object();
    if (spec.dram.enabled) {
        out.put("dram" + ext, to_jsonl(b.dram));
        if (!out.json())
            out.put("dram.csv", to_csv(b.dram));
        counts["dram_errors"] = b.dram.size();
    }
    if (spec.ssd.enabled) {
        out.put("ssd" + ext, to_jsonl(b.ssd));
        if (!out.json())
            out.put("ssd.csv", to_csv(b.ssd));
        counts["ssd_snapshots"] = b.ssd.size();
    }
    if (spec.net.enabled) {
        out.put("incidents" + ext, to_jsonl(b.incidents));
        if (!out.json())
            out.put("incidents.csv", to_csv(b.incidents));
        Json pop = Json::object();
        for (const auto& [t, n] : b.population)
            pop[std::string(to_string(t))] = n;
        out.put_json("net_population.json", pop);
        counts["incidents"] = b.incidents.size();
    }
    if (spec.fiber.enabled) {
        out.put("fiber" + ext, to_jsonl(b.fiber));
        if (!out.json())
            out.put("fiber.csv", to_csv(b.fiber));
        std::string text;
        for (const auto& t : b.fiber)
            text += format_fiber_ticket(t) + "\n";
        out.put("fiber_tickets.txt", text);
        counts["fiber_tickets"] = b.fiber.size();
    }
    if (!b.designs.empty()) {
        out.put("designs" + ext, to_jsonl(b.designs));
        counts["designs"] = b.designs.size();
    }
    out.put_json("spec.json", to_json(spec));
    return Json{{"counts", counts}};
}

// ----- classify ----------------------------------------------------------------

Json cmd_classify(const Params& p, Outputs& out)
{
    const auto events = read_all<MemErrorEvent>(p.require_inputs());
    if (events.empty())
        fail(ErrorKind::data, "no DRAM errors in the input");
    ClassifyOptions opts;
    opts.threshold_k = p.checked<std::int64_t>("threshold_k", opts.threshold_k, [](auto v) { return v >= 1; },
                                                "must be at least 1");
    opts.cell_window_s = p.checked<std::int64_t>("cell_window_s", opts.cell_window_s, [](auto v) { return v >= 0; },
                                                  "must be non-negative");
    const auto classified = classify_fleet(events, opts);
    out.put("classified.jsonl", to_jsonl(classified));
    const auto report = summarize(classified);
    if (out.json())
        out.put_json("report.json", to_json(report));
    else
        out.put("report.csv", report_csv(report));
    return to_json(report);
}

// ----- fit ---------------------------------------------------------------------

std::vector<double> read_samples(const std::vector<std::string>& paths)
{
    std::vector<double> xs;
    for (const auto& path : paths) {
        const std::string text = read_text_file(path);
        const auto first = text.find_first_not_of(" \t\r\n");
        if (first != std::string::npos && text[first] == '{') {
            std::istringstream in(text);
            std::map<std::pair<std::string, std::int64_t>, double> per_server_month;
            bool ssd = false;
            try {
                for_each_jsonl(in, [&](const Json& j, std::size_t line) {
                    if (j.contains("ssd_id")) {
                        ssd = true;
                        const auto s = decode<SSDSnapshot>(j, line);
                        if (s.uncorrectable_errors > 0)
                            xs.push_back(static_cast<double>(s.uncorrectable_errors));
                    } else {
                        const auto e = decode<MemErrorEvent>(j, line);
                        per_server_month[{e.server_id, utc_month_index(e.timestamp)}] += 1;
                    }
                });
            } catch (const ParseError& e) {
                throw ParseError(e.line(), e.field(), e.detail() + " (" + path + ")");
            }
            if (!ssd)
                for (const auto& [k, n] : per_server_month)
                    xs.push_back(n);
            continue;
        }
        std::istringstream in(text);
        std::string line;
        std::size_t no = 0;
        while (std::getline(in, line)) {
            ++no;
            const auto b = line.find_first_not_of(" \t\r");
            if (b == std::string::npos || line[b] == '#')
                continue;
            try {
                std::size_t used = 0;
                xs.push_back(std::stod(line.substr(b), &used));
            } catch (const std::exception&) {
                fail(ErrorKind::parse, path + ": line " + std::to_string(no) + ": not a number");
            }
        }
    }
    return xs;
}

Json cmd_fit(const Params& p, Outputs& out)
{
    const auto kind = p.get<std::string>("kind", "logistic");
    const auto inputs = p.require_inputs();
    if (kind == "logistic") {
        const auto samples = read_all<LabeledDesign>(inputs);
        FitOptions opts;
        opts.ridge = p.checked<double>("ridge", 0.0, [](double v) { return v >= 0; }, "must be non-negative");
        opts.include_width8 = p.get<bool>("include_width8", false);
        opts.include_memory_pct = p.get<bool>("include_memory_pct", false);
        opts.max_iter = p.checked<int>("max_iter", opts.max_iter, [](int v) { return v >= 1; }, "must be positive");
        const auto fit = fit_logistic(samples, opts);
        out.put_json("model.json", to_json(fit.model));
        std::string csv = "name,estimate,std_error,z,p_value,significant\n";
        for (const auto& t : fit.terms)
            csv += std::string(coefficient_name(t.factor)) + "," + fmt(t.estimate) + "," + fmt(t.std_error) + "," +
                   fmt(t.z) + "," + fmt(t.p_value) + "," + (t.significant ? "yes" : "no") + "\n";
        if (out.json())
            out.put_json("fit.json", to_json(fit));
        else
            out.put("coefficients.csv", csv);
        return to_json(fit);
    }
    const auto xs = read_samples(inputs);
    std::optional<double> x_min;
    if (p.has("x_min"))
        x_min = p.get<double>("x_min", 0.0);
    Json j;
    if (kind == "pareto")
        j = to_json(fit_pareto(xs, x_min));
    else if (kind == "power_law")
        j = Json{{"exponent", fit_power_law_exponent(xs, x_min)}};
    else if (kind == "weibull")
        j = to_json(fit_weibull(xs));
    else if (kind == "skew") {
        const auto s = skew_summary(xs);
        j = Json{{"mean", s.mean},
                 {"median", s.median},
                 {"mean_to_median", s.mean_to_median},
                 {"top_1pct_share", s.top_share(0.01)},
                 {"top_10pct_share", s.top_share(0.10)}};
    } else
        fail(ErrorKind::invalid_argument, "--kind must be logistic, pareto, power_law, weibull or skew");
    j["samples"] = xs.size();
    out.put_json("fit.json", j);
    return j;
}

// ----- predict -----------------------------------------------------------------

LogisticFailureModel load_model(const std::string& ref)
{
    if (ref == "paper-2015" || !fs::exists(ref))
        return LogisticFailureModel::builtin(ref);
    try {
        return model_from_json(read_json_file(ref));
    } catch (const Error& e) {
        fail(e.kind(), ref + ": " + e.what());
    }
}

std::vector<ServerDesign> read_designs(const std::string& path)
{
    const std::string text = read_text_file(path);
    try {
        const Json j = Json::parse(text);
        if (j.is_array()) {
            std::vector<ServerDesign> out;
            std::size_t i = 0;
            for (const auto& d : j)
                out.push_back(decode<ServerDesign>(d, ++i));
            return out;
        }
        return {decode<ServerDesign>(j, 1)};
    } catch (const ParseError& e) {
        throw ParseError(e.line(), e.field(), e.detail() + " (" + path + ")");
    } catch (const nlohmann::json::exception&) {
        // not a single document: treat as JSONL
    }
    return read_jsonl_file<ServerDesign>(path);
}

Json cmd_predict(const Params& p, Outputs& out)
{
    const auto model = load_model(p.get<std::string>("model", "paper-2015"));
    const auto designs = read_designs(p.required<std::string>("design"));
    if (designs.empty())
        fail(ErrorKind::data, "--design: no designs in file");
    Json rates = Json::array();
    std::string csv = "index,rate\n";
    for (std::size_t i = 0; i < designs.size(); ++i) {
        const double f = predict_relative_rate(model, designs[i]);
        rates.push_back(f);
        csv += std::to_string(i) + "," + fmt(f) + "\n";
    }
    Json summary{{"model", model.name()}, {"rates", rates}};
    if (p.has("compare")) {
        const auto other = read_designs(p.get<std::string>("compare", ""));
        if (other.empty())
            fail(ErrorKind::data, "--compare: no designs in file");
        std::optional<int> decimals;
        if (p.has("report_decimals"))
            decimals = p.get<int>("report_decimals", 2);
        summary["comparison"] = to_json(compare_designs(model, designs.front(), other.front(), decimals));
        out.put_json("comparison.json", summary["comparison"]);
    }
    if (out.json())
        out.put_json("predictions.json", summary);
    else
        out.put("predictions.csv", csv);
    return summary;
}

// ----- ssd ---------------------------------------------------------------------

Json cmd_ssd(const Params& p, Outputs& out)
{
    const auto snaps = read_all<SSDSnapshot>(p.require_inputs());
    if (snaps.empty())
        fail(ErrorKind::data, "no SSD snapshots in the input");
    const double min_frac =
        p.checked<double>("min_frac", 0.001, [](double v) { return v >= 0 && v < 1; }, "must lie in [0, 1)");

    const auto platforms = summarize_platforms(snaps);
    Json plat = Json::array();
    std::string csv = "platform,ssds,failed,failure_rate,ci_low,ci_high,uber,mean_written_tb,mean_read_tb\n";
    for (const auto& s : platforms) {
        plat.push_back(to_json(s));
        csv += std::string(to_string(s.platform)) + "," + std::to_string(s.ssds) + "," + std::to_string(s.failed) +
               "," + fmt(s.failure_rate) + "," + fmt(s.failure_ci.low) + "," + fmt(s.failure_ci.high) + "," +
               fmt(s.uber) + "," + fmt(s.mean_written_tb) + "," + fmt(s.mean_read_tb) + "\n";
    }
    if (out.json())
        out.put_json("platforms.json", plat);
    else
        out.put("platforms.csv", csv);

    std::vector<SsdFactor> factors;
    if (p.has("factors")) {
        for (const auto& f : p.get<std::vector<std::string>>("factors", {}))
            factors.push_back(parse_enum<SsdFactor>(f));
    } else
        factors.assign(all_ssd_factors.begin(), all_ssd_factors.end());

    Json curves = Json::object();
    BucketedSeries written;
    bool have_written = false;
    for (auto f : factors) {
        double lo = INFINITY, hi = -INFINITY;
        for (const auto& s : snaps) {
            lo = std::min(lo, ssd_factor_value(s, f));
            hi = std::max(hi, ssd_factor_value(s, f));
        }
        const double width = p.has("bucket_width") && factors.size() == 1 ? p.get<double>("bucket_width", 1.0)
                                                                           : nice_width(hi - lo);
        if (!(width > 0))
            fail(ErrorKind::invalid_argument, "--bucket-width must be positive");
        const auto c = factor_curve(snaps, f, width, min_frac);
        const std::string name(to_string(f));
        out.put("curve_" + name + ".csv", curve_csv(c));
        out.chart("curve_" + name + ".svg", "SSD failure rate vs " + name, name, "failure rate",
                  {curve_series("rate", c)});
        curves[name] = Json{{"bucket_width", width}, {"buckets", c.size()}};
        if (f == SsdFactor::flash_written_tb) {
            written = c;
            have_written = true;
        }
    }

    Json phases;
    if (have_written) {
        try {
            phases = to_json(label_phases(written));
            phases["identified"] = true;
        } catch (const Error& e) {
            phases = Json{{"identified", false}, {"reason", e.what()}};
        }
        out.put_json("phases.json", phases);
    }

    Json pairs = Json::object();
    for (const auto& s : platforms) {
        if (platform_info(s.platform).ssds_per_server != 2)
            continue;
        std::vector<SSDSnapshot> mine;
        for (const auto& x : snaps)
            if (x.platform == s.platform)
                mine.push_back(x);
        const auto idx = build_pair_index(mine);
        if (idx.s_lower.empty() && idx.s_higher.empty())
            continue;
        pairs[std::string(to_string(s.platform))] = Json{{"s_lower", idx.s_lower.size()},
                                                         {"s_higher", idx.s_higher.size()},
                                                         {"conditional_both_fail", conditional_both_fail(idx)}};
    }
    out.put_json("pairs.json", pairs);

    double wa = 0;
    std::size_t wa_n = 0;
    for (const auto& s : snaps)
        if (s.os_sectors_written > 0) {
            wa += write_amplification_ratio(s);
            ++wa_n;
        }
    Json summary{{"snapshots", snaps.size()},
                 {"platforms", plat},
                 {"curves", curves},
                 {"phases", phases},
                 {"pairs", pairs},
                 {"mean_write_ratio", wa_n ? Json(wa / static_cast<double>(wa_n)) : Json(nullptr)}};
    out.put_json("summary.json", summary);
    return summary;
}

// ----- net ---------------------------------------------------------------------

std::vector<FiberRepairTicket> read_fiber(const std::string& path)
{
    if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".txt") == 0) {
        const std::string text = read_text_file(path);
        std::vector<FiberRepairTicket> out;
        std::string block;
        std::istringstream in(text);
        std::string line;
        std::size_t no = 0, block_start = 1;
        auto flush = [&] {
            if (block.find_first_not_of(" \t\r\n") != std::string::npos) {
                try {
                    out.push_back(parse_fiber_ticket(block));
                } catch (const Error& e) {
                    fail(e.kind(), path + ": ticket starting at line " + std::to_string(block_start) + ": " + e.what());
                }
            }
            block.clear();
        };
        while (std::getline(in, line)) {
            ++no;
            if (line.find_first_not_of(" \t\r") == std::string::npos) {
                flush();
                block_start = no + 1;
            } else
                block += line + "\n";
        }
        flush();
        return out;
    }
    return read_jsonl_file<FiberRepairTicket>(path);
}

Json curve_json(const ReliabilityCurve& c)
{
    return Json{{"entities", c.values.size()}, {"median", c.percentile(0.5)}, {"fit", to_json(c.fit)}};
}

std::string reliability_csv(const ReliabilityCurve& c)
{
    std::string csv = "p,value,fit\n";
    for (const auto& [pp, v] : c.points())
        csv += fmt(pp) + "," + fmt(v) + "," + fmt(c.fit(pp)) + "\n";
    return csv;
}

Json cmd_net(const Params& p, Outputs& out)
{
    Json summary = Json::object();
    const auto inputs = p.inputs();
    if (inputs.empty() && !p.has("fiber"))
        fail(ErrorKind::invalid_argument, "missing required option --input (or --fiber)");
    if (!inputs.empty()) {
        const auto incidents = read_all<IncidentRecord>(inputs);
        if (incidents.empty())
            fail(ErrorKind::data, "no incidents in the input");
        const auto pop_path = p.required<std::string>("population");
        const Json pj = read_json_file(pop_path);
        if (!pj.is_object())
            fail(ErrorKind::parse, pop_path + ": expected an object of device type -> population");
        std::map<DeviceType, std::int64_t> pop;
        for (const auto& [k, v] : pj.items()) {
            if (!v.is_number_integer())
                fail(ErrorKind::parse, pop_path + ": population of '" + k + "' must be an integer");
            try {
                pop[parse_enum<DeviceType>(k)] = v.get<std::int64_t>();
            } catch (const Error& e) {
                fail(ErrorKind::parse, pop_path + ": " + e.what());
            }
        }
        const auto report = device_type_report(incidents, pop);
        Json rep = Json::array();
        std::string csv = "device_type,i,n,r,mtbi_h,p75irt_h\n";
        for (const auto& r : report) {
            rep.push_back(to_json(r));
            csv += std::string(to_string(r.type)) + "," + std::to_string(r.stats.i) + "," +
                   std::to_string(r.stats.n) + "," + fmt(r.stats.r) + "," + (r.mtbi_h ? fmt(*r.mtbi_h) : "") + "," +
                   (r.p75irt_h ? fmt(*r.p75irt_h) : "") + "\n";
        }
        if (out.json())
            out.put_json("device_types.json", rep);
        else
            out.put("device_types.csv", csv);
        Json br = Json::object();
        for (const char* g : {"root_cause", "device_type", "sev_level"}) {
            const auto b = breakdown(incidents, parse_group_by(g));
            std::string bcsv = std::string(g) + ",fraction\n";
            for (const auto& [k, v] : b)
                bcsv += k + "," + fmt(v) + "\n";
            out.put(std::string("breakdown_") + g + ".csv", bcsv);
            br[g] = b;
        }
        summary["device_types"] = rep;
        summary["breakdown"] = br;
        summary["p75irt_h"] = resolution_percentile(incidents, 0.75);
    }
    if (p.has("fiber")) {
        const auto tickets = read_fiber(p.get<std::string>("fiber", ""));
        const auto links = link_stats(tickets);
        std::string csv = "link_id,vendor,continent,tickets,mtbf_h,mttr_h\n";
        std::vector<double> mtbf, mttr;
        for (const auto& l : links) {
            csv += l.link_id + "," + l.vendor + "," + std::string(to_string(l.continent)) + "," +
                   std::to_string(l.tickets) + "," + (l.mtbf_h ? fmt(*l.mtbf_h) : "") + "," +
                   (l.mttr_h ? fmt(*l.mttr_h) : "") + "\n";
            if (l.mtbf_h && *l.mtbf_h > 0)
                mtbf.push_back(*l.mtbf_h);
            if (l.mttr_h && *l.mttr_h > 0)
                mttr.push_back(*l.mttr_h);
        }
        out.put("links.csv", csv);
        Json groups = Json::object();
        for (bool by_vendor : {false, true}) {
            Json g = Json::array();
            for (const auto& r : group_reliability(links, by_vendor))
                g.push_back(to_json(r));
            groups[by_vendor ? "vendors" : "continents"] = g;
        }
        out.put_json("reliability.json", groups);
        summary["groups"] = groups;
        Json models = Json::object();
        if (mtbf.size() >= 3) {
            const auto c = percentile_curve(mtbf);
            out.put("mtbf_curve.csv", reliability_csv(c));
            models["edge_mtbf"] = curve_json(c);
            auto pts = c.points();
            SvgSeries data{"MTBF", {}, {}}, fitted{"fit", {}, {}};
            for (const auto& [pp, v] : pts) {
                data.x.push_back(pp);
                data.y.push_back(v);
                fitted.x.push_back(pp);
                fitted.y.push_back(c.fit(pp));
            }
            out.chart("mtbf_curve.svg", "Link MTBF by percentile", "percentile", "hours", {data, fitted});
        }
        if (mttr.size() >= 3) {
            const auto c = percentile_curve(mttr);
            out.put("mttr_curve.csv", reliability_csv(c));
            models["edge_mttr"] = curve_json(c);
        }
        std::vector<double> vmtbf, vmttr;
        for (const auto& g : group_reliability(links, true)) {
            if (g.mtbf_h && *g.mtbf_h > 0)
                vmtbf.push_back(*g.mtbf_h);
            if (g.mttr_h && *g.mttr_h > 0)
                vmttr.push_back(*g.mttr_h);
        }
        if (vmtbf.size() >= 3)
            models["vendor_mtbf"] = curve_json(percentile_curve(vmtbf));
        if (vmttr.size() >= 3)
            models["vendor_mttr"] = curve_json(percentile_curve(vmttr));
        out.put_json("models.json", models);
        summary["models"] = models;
        if (!mtbf.empty() && !mttr.empty()) {
            const double m1 = percentile_nearest_rank(mtbf, 0.5), m2 = percentile_nearest_rank(mttr, 0.5);
            const double threshold = p.get<double>("risk_threshold", 1e-4);
            const double risk = conditional_risk(m1, m2);
            Json rj{{"median_mtbf_h", m1},
                    {"median_mttr_h", m2},
                    {"conditional_risk", risk},
                    {"threshold", threshold},
                    {"below_threshold", conditional_risk_ok(risk, threshold)}};
            out.put_json("risk.json", rj);
            summary["risk"] = rj;
        }
    }
    out.put_json("summary.json", summary);
    return summary;
}

// ----- sim-offline -------------------------------------------------------------

std::vector<ClassifiedEvent> read_classified(const std::vector<std::string>& paths, const ClassifyOptions& opts)
{
    std::vector<ClassifiedEvent> out;
    for (const auto& path : paths) {
        const std::string text = read_text_file(path);
        const bool annotated = text.find("\"component\"") != std::string::npos;
        if (annotated) {
            auto part = read_jsonl_file<ClassifiedEvent>(path);
            out.insert(out.end(), part.begin(), part.end());
        } else {
            const auto events = read_jsonl_file<MemErrorEvent>(path);
            auto part = classify_fleet(events, opts);
            out.insert(out.end(), part.begin(), part.end());
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const ClassifiedEvent& a, const ClassifiedEvent& b) {
        return a.event.timestamp < b.event.timestamp;
    });
    return out;
}

Json cmd_sim_offline(const Params& p, Outputs& out)
{
    const auto seed = p.required<std::uint64_t>("seed");
    const auto trace = read_classified(p.require_inputs(), {});
    OfflineSimConfig cfg;
    auto& pol = cfg.policy;
    pol.cap_frac = p.checked<double>("cap_frac", pol.cap_frac, [](double v) { return v >= 0 && v <= 1; },
                                     "must lie in [0, 1]");
    pol.initial_fail_prob = p.checked<double>("fail_prob", pol.initial_fail_prob,
                                              [](double v) { return v >= 0 && v <= 1; }, "must lie in [0, 1]");
    pol.errors_before_offline = p.checked<std::int64_t>("errors_before_offline", pol.errors_before_offline,
                                                        [](auto v) { return v >= 1; }, "must be at least 1");
    const auto delay = p.checked<std::int64_t>("retry_delay_s", 0, [](auto v) { return v >= 0; },
                                                "must be non-negative");
    if (delay > 0) {
        pol.retry = RetryKind::fixed_delay;
        pol.retry_delay_s = delay;
    }
    cfg.window_days = p.checked<int>("window_days", cfg.window_days, [](int v) { return v >= 1; }, "must be positive");
    cfg.deploy_time = p.get<std::int64_t>("deploy_time", 0);
    if (p.has("capacity_gb"))
        cfg.capacity_bytes = static_cast<std::int64_t>(
            p.checked<double>("capacity_gb", 0, [](double v) { return v > 0; }, "must be positive") *
            static_cast<double>(std::int64_t{1} << 30));
    if (p.has("store")) {
        const auto path = p.get<std::string>("store", "");
        try {
            cfg.initial_store = OfflineStore::from_jsonl(read_text_file(path));
        } catch (const ParseError& e) {
            throw ParseError(e.line(), e.field(), e.detail() + " (" + path + ")");
        }
    }
    const auto r = run_offline_sim(trace, cfg, seed);
    out.put("timeline.csv", timeline_csv(r));
    out.put("offline_store.jsonl", r.store.to_jsonl());
    std::string tickets = "host,time,offline_bytes\n";
    for (const auto& t : r.tickets)
        tickets += t.host + "," + std::to_string(t.time) + "," + std::to_string(t.offline_bytes) + "\n";
    out.put("tickets.csv", tickets);
    SvgSeries obs{"observed", {}, {}}, base{"without offlining", {}, {}};
    for (const auto& t : r.timeline) {
        obs.x.push_back(static_cast<double>(t.day));
        obs.y.push_back(static_cast<double>(t.errors));
        base.x.push_back(static_cast<double>(t.day));
        base.y.push_back(static_cast<double>(t.baseline_errors));
    }
    out.chart("timeline.svg", "Errors per day", "day", "errors", {base, obs});
    const Json summary = to_json(r);
    out.put_json("summary.json", summary);
    return summary;
}

// ----- sim-randomize -----------------------------------------------------------

Json cmd_sim_randomize(const Params& p, Outputs& out)
{
    const auto seed = p.required<std::uint64_t>("seed");
    RandomizationPlan plan;
    plan.capacity_bytes = static_cast<std::int64_t>(
        p.checked<double>("capacity_gb", 256.0, [](double v) { return v > 0; }, "must be positive") *
        static_cast<double>(std::int64_t{1} << 30));
    plan.utilization =
        p.checked<double>("utilization", 1.0, [](double v) { return v >= 0 && v <= 1; }, "must lie in [0, 1]");
    plan.period_days = p.checked<double>("period_days", 1.0, [](double v) { return v > 0; }, "must be positive");
    plan.page_latency_s =
        p.checked<double>("latency_us", 374.9, [](double v) { return v >= 0; }, "must be non-negative") * 1e-6;

    RandomizerSimConfig cfg;
    cfg.steps = p.checked<std::int64_t>("steps", cfg.steps, [](auto v) { return v > 0; }, "must be positive");
    cfg.writes_per_period = p.checked<std::int64_t>("writes_per_period", cfg.writes_per_period,
                                                    [](auto v) { return v > 0; }, "must be positive");
    cfg.spare_frames =
        p.checked<std::int64_t>("spare_frames", 8, [](auto v) { return v >= 1; }, "must be at least 1");
    const auto pages = p.checked<std::int64_t>("pages", 64, [](auto v) { return v >= 1; }, "must be at least 1");
    const auto profile = p.get<std::string>("profile", "hot");
    std::vector<double> weights;
    if (profile == "hot") {
        weights.assign(static_cast<std::size_t>(pages), 0.0);
        weights[0] = 1.0;
    } else if (profile == "uniform")
        weights.assign(static_cast<std::size_t>(pages), 1.0);
    else
        weights = read_samples({profile});

    const auto r = run_randomizer_sim(weights, plan, cfg, seed);
    std::string csv = "frame,wear_with,wear_without\n";
    for (std::size_t f = 0; f < r.wear_with.size(); ++f)
        csv += std::to_string(f) + "," + std::to_string(r.wear_with[f]) + "," + std::to_string(r.wear_without[f]) +
               "\n";
    out.put("wear.csv", csv);
    SvgSeries a{"with randomization", {}, {}}, b{"without", {}, {}};
    auto w1 = r.wear_with, w2 = r.wear_without;
    std::sort(w1.begin(), w1.end());
    std::sort(w2.begin(), w2.end());
    for (std::size_t f = 0; f < w1.size(); ++f) {
        a.x.push_back(static_cast<double>(f));
        a.y.push_back(static_cast<double>(w1[f]));
        b.x.push_back(static_cast<double>(f));
        b.y.push_back(static_cast<double>(w2[f]));
    }
    out.chart("wear.svg", "Frame wear (sorted)", "frame rank", "writes", {a, b});
    const Json summary = to_json(r);
    out.put_json("summary.json", summary);
    return summary;
}

using Handler = std::function<Json(const Params&, Outputs&)>;

const std::map<std::string, Handler, std::less<>>& handlers()
{
    static const std::map<std::string, Handler, std::less<>> h{
        {"generate", cmd_generate},   {"classify", cmd_classify},       {"fit", cmd_fit},
        {"predict", cmd_predict},     {"ssd", cmd_ssd},                 {"net", cmd_net},
        {"sim-offline", cmd_sim_offline}, {"sim-randomize", cmd_sim_randomize}};
    return h;
}

Json input_list(const Json& params)
{
    Json inputs = Json::array();
    if (!params.is_object())
        return inputs;
    for (const char* key : {"input", "spec", "design", "compare", "population", "fiber", "store"}) {
        if (!params.contains(key))
            continue;
        const Json& v = params[key];
        if (v.is_array())
            for (const auto& x : v)
                inputs.push_back(x);
        else
            inputs.push_back(v);
    }
    if (params.contains("model") && params["model"].is_string() && params["model"] != "paper-2015")
        inputs.push_back(params["model"]);
    return inputs;
}

} // namespace

const std::vector<std::string>& command_names()
{
    static const std::vector<std::string> names{"generate", "classify", "fit",        "predict",
                                                "ssd",      "net",      "sim-offline", "sim-randomize"};
    return names;
}

bool command_is_stochastic(std::string_view name)
{
    return name == "generate" || name == "sim-offline" || name == "sim-randomize";
}

const char* library_version() { return FLEETREL_VERSION; }

Json run_command(std::string_view name, const Json& params, const std::string& out_dir)
{
    const auto& h = handlers();
    auto it = h.find(name);
    if (it == h.end())
        fail(ErrorKind::invalid_argument, "unknown command '" + std::string(name) + "'");
    if (out_dir.empty())
        fail(ErrorKind::invalid_argument, "missing output directory (--out)");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        fail(ErrorKind::io, "--out: cannot create directory '" + out_dir + "'");

    Json manifest{{"tool", "fleetrel"},
                  {"version", library_version()},
                  {"command", std::string(name)},
                  {"inputs", input_list(params)},
                  {"seed", params.is_object() && params.contains("seed") ? params["seed"] : Json(nullptr)},
                  {"params", params},
                  {"builtin_models", {{"paper-2015", to_json(LogisticFailureModel::published_2015())}}}};
    auto write_manifest = [&] {
        write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    };
    try {
        const Params p(params);
        Outputs out(out_dir, p.get<std::string>("format", "csv"), p.get<bool>("svg", false));
        Json summary = it->second(p, out);
        manifest["status"] = "ok";
        manifest["outputs"] = out.files();
        write_manifest();
        return summary;
    } catch (const std::exception& e) {
        manifest["status"] = "error";
        manifest["error"] = e.what();
        write_manifest();
        throw;
    }
}

} // namespace fleetrel
