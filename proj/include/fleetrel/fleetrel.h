#ifndef FLEETREL_H
#define FLEETREL_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(__GNUC__)
#define FR_API __attribute__((visibility("default")))
#else
#define FR_API
#endif

typedef enum fr_status
{
    FR_OK = 0,
    FR_ERR_INVALID_ARGUMENT = 1,
    FR_ERR_PARSE = 2,
    FR_ERR_DATA = 3,
    FR_ERR_NUMERIC = 4,
    FR_ERR_IO = 5,
    FR_ERR_INTERNAL = 6
} fr_status;

/* Message for the last failing call on this thread; "" if none. */
FR_API const char* fr_last_error(void);
FR_API const char* fr_version(void);
/* Frees strings returned through char** out-parameters. */
FR_API void fr_string_free(char* s);

typedef struct fr_design
{
    double capacity_gb;
    int density_gb; /* 1, 2 or 4 */
    int chips;
    int transfer_width; /* 4 or 8 */
    double cpu_util_pct;
    double mem_util_pct;
    double age_years;
    int cpus;
} fr_design;

typedef struct fr_comparison
{
    double rate_a;
    double rate_b;
    double ratio;
    double percent_reduction;
} fr_comparison;

typedef struct fr_model fr_model;

FR_API fr_status fr_model_builtin(const char* name, fr_model** out);
FR_API fr_status fr_model_from_json(const char* json, fr_model** out);
FR_API fr_status fr_model_to_json(const fr_model* m, char** out);
FR_API void fr_model_free(fr_model* m);
FR_API fr_status fr_model_predict(const fr_model* m, const fr_design* d, double* out_rate);
/* decimals < 0 compares unrounded rates */
FR_API fr_status fr_model_compare(const fr_model* m, const fr_design* a, const fr_design* b, int decimals,
                                  fr_comparison* out);
/* samples_jsonl: one design object per line with an added "in_error_group" bool. out_fit_json may be NULL. */
FR_API fr_status fr_model_fit(const char* samples_jsonl, double ridge, fr_model** out, char** out_fit_json);

typedef struct fr_memory fr_memory;

FR_API fr_status fr_memory_create(int64_t total_frames, int64_t mapped_pages, uint64_t seed, fr_memory** out);
FR_API void fr_memory_free(fr_memory* m);
FR_API fr_status fr_memory_write(fr_memory* m, int64_t logical, int64_t count);
FR_API fr_status fr_memory_randomize(fr_memory* m, int64_t logical, int64_t* out_frame);
FR_API fr_status fr_memory_offline(fr_memory* m, int64_t frame);
FR_API fr_status fr_memory_frame_of(const fr_memory* m, int64_t logical, int64_t* out_frame);
FR_API fr_status fr_memory_wear(const fr_memory* m, int64_t frame, int64_t* out_wear);
FR_API fr_status fr_memory_check(const fr_memory* m);

/* capacity in GiB, latency in seconds per page */
FR_API fr_status fr_overhead_estimate(double capacity_gb, double utilization, double period_days, double latency_s,
                                      double* out_pages_per_second, double* out_overhead_fraction);

/* Parses one fiber ticket and returns it as a JSON object. */
FR_API fr_status fr_parse_fiber_ticket(const char* text, char** out_json);

FR_API size_t fr_command_count(void);
FR_API const char* fr_command_name(size_t i);
FR_API int fr_command_is_stochastic(const char* command);

/*
 * Runs a pipeline command. params_json is an object of options ("input", "seed",
 * "format", ...). out_dir receives the artifacts and manifest.json. out_summary
 * may be NULL.
 */
FR_API fr_status fr_run(const char* command, const char* params_json, const char* out_dir, char** out_summary);

#ifdef __cplusplus
}
#endif

#endif
