// Command-line front end. Talks to the library only through fleetrel.h.
#include "fleetrel/fleetrel.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

using Json = nlohmann::ordered_json;

namespace {

enum class Kind { text, integer, real, flag, list };

struct Opt
{
    const char* flag;
    Kind kind;
    const char* help;
};

struct Command
{
    const char* name;
    const char* help;
    std::vector<Opt> opts;
};

const std::vector<Command>& commands()
{
    static const std::vector<Command> c{
        {"generate",
         "write synthetic fleet traces",
         {{"--spec", Kind::text, "generator spec (JSON)"},
          {"--fleet-size", Kind::integer, "servers in the synthetic fleet"},
          {"--months", Kind::integer, "months of DRAM errors"},
          {"--designs", Kind::integer, "labeled server designs to emit"},
          {"--gzip", Kind::flag, "gzip the JSONL outputs"}}},
        {"classify",
         "attribute DRAM errors to failed components",
         {{"--threshold-k", Kind::integer, "errors per row/column/bank before a device is blamed"},
          {"--cell-window-s", Kind::integer, "repeat window for a single cell, seconds"}}},
        {"fit",
         "fit a failure model or an error-count distribution",
         {{"--kind", Kind::text, "logistic | pareto | power_law | weibull | skew"},
          {"--x-min", Kind::real, "lower cutoff for pareto/power_law"},
          {"--ridge", Kind::real, "L2 penalty for logistic fits"},
          {"--include-width8", Kind::flag, "keep the transfer-width term"},
          {"--include-memory-pct", Kind::flag, "keep the memory-utilization term"},
          {"--max-iter", Kind::integer, "iteration cap"}}},
        {"predict",
         "relative failure rate of a server design",
         {{"--model", Kind::text, "built-in model name or model JSON path"},
          {"--design", Kind::text, "design file (JSON object, array or JSONL)"},
          {"--compare", Kind::text, "second design to compare against"},
          {"--report-decimals", Kind::integer, "round rates before comparing"}}},
        {"ssd",
         "flash failure curves, lifecycle phases and pair failures",
         {{"--factors", Kind::list, "factors to bucket (default: all)"},
          {"--bucket-width", Kind::real, "bucket width when one factor is given"},
          {"--min-frac", Kind::real, "drop buckets holding less than this share of devices"}}},
        {"net",
         "incident rates, breakdowns and link reliability",
         {{"--population", Kind::text, "device population per type (JSON)"},
          {"--fiber", Kind::text, "fiber repair tickets (.txt or JSONL)"},
          {"--risk-threshold", Kind::real, "acceptable conditional risk"}}},
        {"sim-offline",
         "replay an error trace with page offlining",
         {{"--cap-frac", Kind::real, "offline memory cap per host, fraction"},
          {"--fail-prob", Kind::real, "chance an offline attempt fails"},
          {"--errors-before-offline", Kind::integer, "errors on a page before it is retired"},
          {"--retry-delay-s", Kind::integer, "retry failed attempts after this delay"},
          {"--window-days", Kind::integer, "trailing window for the reduction figure"},
          {"--deploy-time", Kind::integer, "unix time offlining starts"},
          {"--capacity-gb", Kind::real, "memory per host, GiB"},
          {"--store", Kind::text, "offline store from a previous run"}}},
        {"sim-randomize",
         "physical page randomization: overhead and wear spread",
         {{"--capacity-gb", Kind::real, "memory per host, GiB"},
          {"--utilization", Kind::real, "fraction of memory in use"},
          {"--period-days", Kind::real, "days to move every page once"},
          {"--latency-us", Kind::real, "cost of moving one page, microseconds"},
          {"--pages", Kind::integer, "simulated pages"},
          {"--profile", Kind::text, "hot | uniform | path to per-page weights"},
          {"--steps", Kind::integer, "simulated writes"},
          {"--writes-per-period", Kind::integer, "writes per randomization period"},
          {"--spare-frames", Kind::integer, "free frames"}}},
    };
    return c;
}

std::string key_of(const char* flag)
{
    std::string k(flag + 2);
    for (char& ch : k)
        if (ch == '-')
            ch = '_';
    return k;
}

struct Bound
{
    const Command* cmd = nullptr;
    CLI::App* app = nullptr;
    std::vector<std::string> inputs;
    std::string out = "out";
    std::string format = "csv";
    std::string seed;
    bool svg = false;
    std::map<std::string, std::string> text;
    std::map<std::string, std::vector<std::string>> lists;
    std::map<std::string, bool> flags;
};

int fail_with(int code, const std::string& msg)
{
    std::fprintf(stderr, "fleetrel: %s\n", msg.c_str());
    return code;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Fleet reliability analysis"};
    app.set_version_flag("--version", std::string(fr_version()));
    app.require_subcommand(1);

    std::vector<Bound> bound;
    bound.reserve(commands().size());
    for (const auto& c : commands()) {
        auto& b = bound.emplace_back();
        b.cmd = &c;
        b.app = app.add_subcommand(c.name, c.help);
        auto* sub = b.app;
        if (std::string(c.name) != "generate" && std::string(c.name) != "sim-randomize") {
            auto* in = sub->add_option("--input,-i", b.inputs, "input trace file(s)");
            if (std::string(c.name) != "predict" && std::string(c.name) != "net")
                in->required();
        }
        sub->add_option("--out,-o", b.out, "output directory")->capture_default_str();
        sub->add_option("--format", b.format, "csv or json")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
        sub->add_flag("--svg", b.svg, "also draw SVG charts");
        sub->add_option("--seed", b.seed, "random seed");
        for (const auto& o : c.opts) {
            const std::string key = key_of(o.flag);
            switch (o.kind) {
            case Kind::flag: sub->add_flag(o.flag, b.flags[key], o.help); break;
            case Kind::list: sub->add_option(o.flag, b.lists[key], o.help); break;
            case Kind::integer: sub->add_option(o.flag, b.text[key], o.help)->check(CLI::Number); break;
            case Kind::real: sub->add_option(o.flag, b.text[key], o.help)->check(CLI::Number); break;
            case Kind::text: sub->add_option(o.flag, b.text[key], o.help); break;
            }
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    for (auto& b : bound) {
        if (!b.app->parsed())
            continue;
        const std::string name = b.cmd->name;
        Json params = Json::object();
        if (!b.inputs.empty())
            params["input"] = b.inputs;
        params["format"] = b.format;
        params["svg"] = b.svg;
        if (b.seed.empty()) {
            if (fr_command_is_stochastic(name.c_str()))
                return fail_with(2, name + " needs --seed so the run can be reproduced");
        } else {
            try {
                std::size_t used = 0;
                if (b.seed.find('-') != std::string::npos)
                    throw std::invalid_argument("negative");
                const unsigned long long s = std::stoull(b.seed, &used);
                if (used != b.seed.size())
                    throw std::invalid_argument("trailing");
                params["seed"] = static_cast<std::uint64_t>(s);
            } catch (const std::exception&) {
                return fail_with(2, "--seed must be a non-negative integer, got '" + b.seed + "'");
            }
        }
        for (const auto& o : b.cmd->opts) {
            const std::string key = key_of(o.flag);
            if (o.kind == Kind::flag) {
                if (b.flags[key])
                    params[key] = true;
                continue;
            }
            if (o.kind == Kind::list) {
                if (!b.lists[key].empty())
                    params[key] = b.lists[key];
                continue;
            }
            const std::string& v = b.text[key];
            if (v.empty())
                continue;
            if (o.kind == Kind::integer) {
                try {
                    std::size_t used = 0;
                    const long long n = std::stoll(v, &used);
                    if (used != v.size())
                        throw std::invalid_argument("trailing");
                    params[key] = n;
                } catch (const std::exception&) {
                    return fail_with(2, std::string(o.flag) + " must be an integer, got '" + v + "'");
                }
            } else if (o.kind == Kind::real)
                params[key] = std::stod(v);
            else
                params[key] = v;
        }

        char* summary = nullptr;
        const fr_status st = fr_run(name.c_str(), params.dump().c_str(), b.out.c_str(), &summary);
        if (st != FR_OK)
            return fail_with(st == FR_ERR_INVALID_ARGUMENT ? 2 : 1, fr_last_error());
        const Json s = Json::parse(summary);
        fr_string_free(summary);

        if (name == "predict") {
            for (const auto& r : s["rates"])
                std::printf("relative failure rate: %.2f\n", r.get<double>());
            if (s.contains("comparison")) {
                const auto& c = s["comparison"];
                std::printf("ratio: %.2f\nreduction: %.1f%%\n", c["ratio"].get<double>(),
                            100.0 * c["percent_reduction"].get<double>());
            }
        } else if (name == "sim-offline") {
            std::printf("reduction: %.1f%%\n", 100.0 * s["reduction"].get<double>());
        } else if (name == "sim-randomize") {
            std::printf("pages/s: %.0f\noverhead: %.1f%%\n", s["overhead"]["pages_per_second"].get<double>(),
                        100.0 * s["overhead"]["overhead_fraction"].get<double>());
        }
        std::printf("wrote %s\n", b.out.c_str());
        return 0;
    }
    return 2;
}
