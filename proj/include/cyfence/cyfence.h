#ifndef CYFENCE_H
#define CYFENCE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define CYF_API __declspec(dllexport)
#else
#define CYF_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cyf_status {
    CYF_OK = 0,
    CYF_E_INVALID_ARGUMENT = 1,
    CYF_E_EVALUATION_AT_POLE = 2,
    CYF_E_NO_CROSSOVER = 3,
    CYF_E_ABS_INACTIVE = 4,
    CYF_E_HARD_FAULT = 5,
    CYF_E_PARSE = 6,
    CYF_E_NOT_FOUND = 7,
    CYF_E_IO = 8,
    CYF_E_INTERNAL = 9
} cyf_status;

typedef enum cyf_run_status {
    CYF_RUN_COMPLETE = 0,
    CYF_RUN_INCOMPLETE = 1, /* stopped by max_t */
    CYF_RUN_ABORTED = 2
} cyf_run_status;

typedef struct cyf_scenario cyf_scenario;
typedef struct cyf_result cyf_result;
typedef struct cyf_sweep cyf_sweep;

typedef struct cyf_sweep_row {
    double value;
    int detected;
    double detection_time;
    double stop_distance;
    cyf_run_status status;
} cyf_sweep_row;

typedef struct cyf_bench_report {
    uint64_t iterations;
    double analytic_mean_us;
    double analytic_p99_us;
    double lut_mean_us;
    double lut_p99_us;
} cyf_bench_report;

/* Message for the last failing call on this thread. */
CYF_API const char* cyf_last_error(void);
CYF_API const char* cyf_status_string(cyf_status s);
/* Strings returned through char** out parameters are released with this. */
CYF_API void cyf_string_free(char* s);

CYF_API cyf_status cyf_scenario_default(cyf_scenario** out);
CYF_API cyf_status cyf_scenario_load(const char* path, cyf_scenario** out);
CYF_API cyf_status cyf_scenario_parse(const char* text, cyf_scenario** out);
CYF_API cyf_status cyf_scenario_set(cyf_scenario* sc, const char* section, const char* key, const char* value);
CYF_API cyf_status cyf_scenario_serialize(const cyf_scenario* sc, char** out);
CYF_API void cyf_scenario_free(cyf_scenario* sc);

/* An aborted simulation still returns CYF_OK; check cyf_result_status. */
CYF_API cyf_status cyf_run(const cyf_scenario* sc, cyf_result** out);
CYF_API cyf_run_status cyf_result_status(const cyf_result* r);
CYF_API double cyf_result_stop_distance(const cyf_result* r);
/* Returns 1 and sets *t when a detection happened, else 0. */
CYF_API int cyf_result_detection_time(const cyf_result* r, double* t);
CYF_API size_t cyf_result_row_count(const cyf_result* r);
CYF_API size_t cyf_result_detection_count(const cyf_result* r);
CYF_API size_t cyf_result_recovery_count(const cyf_result* r);
CYF_API size_t cyf_result_deadline_misses(const cyf_result* r);
CYF_API cyf_status cyf_result_csv(const cyf_result* r, char** out);
CYF_API cyf_status cyf_result_write_csv(const cyf_result* r, const char* path);
CYF_API cyf_status cyf_result_summary(const cyf_result* r, char** out);
CYF_API void cyf_result_free(cyf_result* r);

/* axis: Kp, Ki, Kd, setpoint or output. workers 0 = host cores. */
CYF_API cyf_status cyf_sweep_run(const cyf_scenario* sc, const char* axis, const double* values, size_t n,
                                 unsigned workers, cyf_sweep** out);
CYF_API size_t cyf_sweep_size(const cyf_sweep* s);
CYF_API cyf_status cyf_sweep_get(const cyf_sweep* s, size_t i, cyf_sweep_row* out);
CYF_API cyf_status cyf_sweep_csv(const cyf_sweep* s, char** out);
CYF_API cyf_status cyf_sweep_table(const cyf_sweep* s, char** out);
CYF_API void cyf_sweep_free(cyf_sweep* s);

/* speeds may be NULL to use the 5..35 m/s bins. */
CYF_API cyf_status cyf_margins_report(const cyf_scenario* sc, const double* speeds, size_t n, char** out,
                                      int* warnings);
CYF_API cyf_status cyf_bench(uint64_t iterations, cyf_bench_report* out);
CYF_API cyf_status cyf_bench_render(const cyf_bench_report* r, char** out);
CYF_API cyf_status cyf_write_tables(const cyf_scenario* base, const char* dir, unsigned workers, char** out);

#ifdef __cplusplus
}
#endif

#endif
