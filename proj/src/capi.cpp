#include "fleetrel/fleetrel.h"

#include "fleetrel/commands.hpp"
#include "fleetrel/error.hpp"
#include "fleetrel/failure_model.hpp"
#include "fleetrel/mitigation.hpp"
#include "fleetrel/rng.hpp"

#include <cstdlib>
#include <cstring>
#include <new>
#include <sstream>

using namespace fleetrel;

struct fr_model
{
    LogisticFailureModel model;
};

struct fr_memory
{
    SimMemory mem;
    Rng rng;
};

namespace {

thread_local std::string last_error;

fr_status status_of(ErrorKind k)
{
    switch (k) {
    case ErrorKind::invalid_argument: return FR_ERR_INVALID_ARGUMENT;
    case ErrorKind::parse: return FR_ERR_PARSE;
    case ErrorKind::data: return FR_ERR_DATA;
    case ErrorKind::numeric: return FR_ERR_NUMERIC;
    case ErrorKind::io: return FR_ERR_IO;
    }
    return FR_ERR_INTERNAL;
}

template <class F> fr_status guard(F&& f)
{
    last_error.clear();
    try {
        f();
        return FR_OK;
    } catch (const Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const Json::exception& e) {
        last_error = e.what();
        return FR_ERR_PARSE;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return FR_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return FR_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown error";
        return FR_ERR_INTERNAL;
    }
}

void need(const void* p, const char* name)
{
    if (!p)
        fail(ErrorKind::invalid_argument, std::string(name) + " is NULL");
}

char* dup(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out)
        throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

ServerDesign design_of(const fr_design* d)
{
    need(d, "design");
    ServerDesign s;
    s.capacity_gb = d->capacity_gb;
    switch (d->density_gb) {
    case 1: s.density = ChipDensity::gb1; break;
    case 2: s.density = ChipDensity::gb2; break;
    case 4: s.density = ChipDensity::gb4; break;
    default: fail(ErrorKind::invalid_argument, "density_gb must be 1, 2 or 4");
    }
    s.chips = d->chips;
    if (d->transfer_width == 4)
        s.transfer_width = TransferWidth::x4;
    else if (d->transfer_width == 8)
        s.transfer_width = TransferWidth::x8;
    else
        fail(ErrorKind::invalid_argument, "transfer_width must be 4 or 8");
    s.cpu_util_pct = d->cpu_util_pct;
    s.mem_util_pct = d->mem_util_pct;
    s.age_years = d->age_years;
    s.cpus = d->cpus;
    return s;
}

} // namespace

extern "C" {

const char* fr_last_error(void) { return last_error.c_str(); }
const char* fr_version(void) { return library_version(); }
void fr_string_free(char* s) { std::free(s); }

fr_status fr_model_builtin(const char* name, fr_model** out)
{
    return guard([&] {
        need(name, "name");
        need(out, "out");
        *out = new fr_model{LogisticFailureModel::builtin(name)};
    });
}

fr_status fr_model_from_json(const char* json, fr_model** out)
{
    return guard([&] {
        need(json, "json");
        need(out, "out");
        *out = new fr_model{model_from_json(Json::parse(json))};
    });
}

fr_status fr_model_to_json(const fr_model* m, char** out)
{
    return guard([&] {
        need(m, "model");
        need(out, "out");
        *out = dup(to_json(m->model).dump());
    });
}

void fr_model_free(fr_model* m) { delete m; }

fr_status fr_model_predict(const fr_model* m, const fr_design* d, double* out_rate)
{
    return guard([&] {
        need(m, "model");
        need(out_rate, "out_rate");
        *out_rate = predict_relative_rate(m->model, design_of(d));
    });
}

fr_status fr_model_compare(const fr_model* m, const fr_design* a, const fr_design* b, int decimals,
                           fr_comparison* out)
{
    return guard([&] {
        need(m, "model");
        need(out, "out");
        std::optional<int> dec;
        if (decimals >= 0)
            dec = decimals;
        const auto c = compare_designs(m->model, design_of(a), design_of(b), dec);
        *out = fr_comparison{c.rate_a, c.rate_b, c.ratio, c.percent_reduction};
    });
}

fr_status fr_model_fit(const char* samples_jsonl, double ridge, fr_model** out, char** out_fit_json)
{
    return guard([&] {
        need(samples_jsonl, "samples_jsonl");
        need(out, "out");
        std::istringstream in(samples_jsonl);
        const auto samples = parse_jsonl<LabeledDesign>(in);
        FitOptions opts;
        opts.ridge = ridge;
        const auto fit = fit_logistic(samples, opts);
        std::string j = out_fit_json ? to_json(fit).dump() : std::string();
        auto* h = new fr_model{fit.model};
        if (out_fit_json) {
            try {
                *out_fit_json = dup(j);
            } catch (...) {
                delete h;
                throw;
            }
        }
        *out = h;
    });
}

fr_status fr_memory_create(int64_t total_frames, int64_t mapped_pages, uint64_t seed, fr_memory** out)
{
    return guard([&] {
        need(out, "out");
        *out = new fr_memory{SimMemory(total_frames, mapped_pages), Rng(substream_seed(seed, "memory"))};
    });
}

void fr_memory_free(fr_memory* m) { delete m; }

fr_status fr_memory_write(fr_memory* m, int64_t logical, int64_t count)
{
    return guard([&] {
        need(m, "memory");
        m->mem.write(logical, count);
    });
}

fr_status fr_memory_randomize(fr_memory* m, int64_t logical, int64_t* out_frame)
{
    return guard([&] {
        need(m, "memory");
        const auto f = m->mem.randomize_page(logical, m->rng);
        if (out_frame)
            *out_frame = f;
    });
}

fr_status fr_memory_offline(fr_memory* m, int64_t frame)
{
    return guard([&] {
        need(m, "memory");
        m->mem.offline_frame(frame, m->rng);
    });
}

fr_status fr_memory_frame_of(const fr_memory* m, int64_t logical, int64_t* out_frame)
{
    return guard([&] {
        need(m, "memory");
        need(out_frame, "out_frame");
        *out_frame = m->mem.frame_of(logical);
    });
}

fr_status fr_memory_wear(const fr_memory* m, int64_t frame, int64_t* out_wear)
{
    return guard([&] {
        need(m, "memory");
        need(out_wear, "out_wear");
        *out_wear = m->mem.wear(frame);
    });
}

fr_status fr_memory_check(const fr_memory* m)
{
    return guard([&] {
        need(m, "memory");
        m->mem.check_invariants();
    });
}

fr_status fr_overhead_estimate(double capacity_gb, double utilization, double period_days, double latency_s,
                               double* out_pages_per_second, double* out_overhead_fraction)
{
    return guard([&] {
        if (!(capacity_gb > 0))
            fail(ErrorKind::invalid_argument, "capacity must be positive");
        RandomizationPlan plan;
        plan.capacity_bytes = static_cast<std::int64_t>(capacity_gb * static_cast<double>(std::int64_t{1} << 30));
        plan.utilization = utilization;
        plan.period_days = period_days;
        plan.page_latency_s = latency_s;
        const auto e = overhead_estimate(plan);
        if (out_pages_per_second)
            *out_pages_per_second = e.pages_per_second;
        if (out_overhead_fraction)
            *out_overhead_fraction = e.overhead_fraction;
    });
}

fr_status fr_parse_fiber_ticket(const char* text, char** out_json)
{
    return guard([&] {
        need(text, "text");
        need(out_json, "out_json");
        *out_json = dup(to_json(parse_fiber_ticket(text)).dump());
    });
}

size_t fr_command_count(void) { return command_names().size(); }

const char* fr_command_name(size_t i)
{
    const auto& n = command_names();
    return i < n.size() ? n[i].c_str() : nullptr;
}

int fr_command_is_stochastic(const char* command) { return command && command_is_stochastic(command) ? 1 : 0; }

fr_status fr_run(const char* command, const char* params_json, const char* out_dir, char** out_summary)
{
    return guard([&] {
        need(command, "command");
        need(out_dir, "out_dir");
        Json params = Json::object();
        if (params_json && *params_json) {
            try {
                params = Json::parse(params_json);
            } catch (const Json::exception& e) {
                fail(ErrorKind::invalid_argument, std::string("parameters are not valid JSON: ") + e.what());
            }
        }
        const Json summary = run_command(command, params, out_dir);
        if (out_summary)
            *out_summary = dup(summary.dump(2));
    });
}

} // extern "C"
