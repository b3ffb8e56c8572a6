#include "cyfence/cyfence.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "cyfence/error.hpp"
#include "cyfence/scenario.hpp"

struct cyf_scenario {
    cyf::SimConfig cfg;
};

struct cyf_result {
    cyf::ScenarioResult res;
};

struct cyf_sweep {
    cyf::SweepAxis axis;
    std::vector<cyf::SweepRow> rows;
};

namespace {

thread_local std::string g_error;

cyf_status map(cyf::Errc c) {
    switch (c) {
        case cyf::Errc::invalid_argument: return CYF_E_INVALID_ARGUMENT;
        case cyf::Errc::evaluation_at_pole: return CYF_E_EVALUATION_AT_POLE;
        case cyf::Errc::no_crossover: return CYF_E_NO_CROSSOVER;
        case cyf::Errc::abs_inactive: return CYF_E_ABS_INACTIVE;
        case cyf::Errc::hard_fault: return CYF_E_HARD_FAULT;
        case cyf::Errc::parse_error: return CYF_E_PARSE;
        case cyf::Errc::not_found: return CYF_E_NOT_FOUND;
        case cyf::Errc::io_error: return CYF_E_IO;
    }
    return CYF_E_INTERNAL;
}

template <class F>
cyf_status guard(F&& f) {
    try {
        g_error.clear();
        f();
        return CYF_OK;
    } catch (const cyf::Error& e) {
        g_error = e.what();
        return map(e.code());
    } catch (const std::exception& e) {
        g_error = e.what();
        return CYF_E_INTERNAL;
    }
}

cyf_status null_arg() {
    g_error = "null argument";
    return CYF_E_INVALID_ARGUMENT;
}

char* dup(const std::string& s) {
    char* p = static_cast<char*>(std::malloc(s.size() + 1));
    if (!p) throw std::bad_alloc();
    std::memcpy(p, s.c_str(), s.size() + 1);
    return p;
}

}  // namespace

extern "C" {

const char* cyf_last_error(void) { return g_error.c_str(); }

const char* cyf_status_string(cyf_status s) {
    switch (s) {
        case CYF_OK: return "ok";
        case CYF_E_INVALID_ARGUMENT: return "invalid argument";
        case CYF_E_EVALUATION_AT_POLE: return "evaluation at pole";
        case CYF_E_NO_CROSSOVER: return "no crossover";
        case CYF_E_ABS_INACTIVE: return "ABS inactive domain";
        case CYF_E_HARD_FAULT: return "hard fault";
        case CYF_E_PARSE: return "parse error";
        case CYF_E_NOT_FOUND: return "not found";
        case CYF_E_IO: return "I/O error";
        case CYF_E_INTERNAL: return "internal error";
    }
    return "unknown status";
}

void cyf_string_free(char* s) { std::free(s); }

cyf_status cyf_scenario_default(cyf_scenario** out) {
    if (!out) return null_arg();
    return guard([&] { *out = new cyf_scenario{}; });
}

cyf_status cyf_scenario_load(const char* path, cyf_scenario** out) {
    if (!path || !out) return null_arg();
    return guard([&] { *out = new cyf_scenario{cyf::load_scenario(path)}; });
}

cyf_status cyf_scenario_parse(const char* text, cyf_scenario** out) {
    if (!text || !out) return null_arg();
    return guard([&] { *out = new cyf_scenario{cyf::parse_scenario(text)}; });
}

cyf_status cyf_scenario_set(cyf_scenario* sc, const char* section, const char* key, const char* value) {
    if (!sc || !section || !key || !value) return null_arg();
    return guard([&] {
        cyf::SimConfig next = sc->cfg;
        cyf::set_scenario_value(next, section, key, value);
        sc->cfg = next;
    });
}

cyf_status cyf_scenario_serialize(const cyf_scenario* sc, char** out) {
    if (!sc || !out) return null_arg();
    return guard([&] { *out = dup(cyf::serialize_scenario(sc->cfg)); });
}

void cyf_scenario_free(cyf_scenario* sc) { delete sc; }

cyf_status cyf_run(const cyf_scenario* sc, cyf_result** out) {
    if (!sc || !out) return null_arg();
    return guard([&] { *out = new cyf_result{cyf::run_braking(sc->cfg)}; });
}

cyf_run_status cyf_result_status(const cyf_result* r) {
    return r ? static_cast<cyf_run_status>(r->res.status) : CYF_RUN_ABORTED;
}

double cyf_result_stop_distance(const cyf_result* r) { return r ? r->res.stop_distance : 0.0; }

int cyf_result_detection_time(const cyf_result* r, double* t) {
    if (!r || !r->res.detection_time) return 0;
    if (t) *t = *r->res.detection_time;
    return 1;
}

size_t cyf_result_row_count(const cyf_result* r) { return r ? r->res.rows.size() : 0; }
size_t cyf_result_detection_count(const cyf_result* r) { return r ? r->res.detection_events.size() : 0; }
size_t cyf_result_recovery_count(const cyf_result* r) { return r ? r->res.recovery_actions.size() : 0; }
size_t cyf_result_deadline_misses(const cyf_result* r) {
    return r ? static_cast<size_t>(r->res.deadline_misses) : 0;
}

cyf_status cyf_result_csv(const cyf_result* r, char** out) {
    if (!r || !out) return null_arg();
    return guard([&] {
        std::ostringstream os;
        cyf::write_csv(os, r->res);
        *out = dup(os.str());
    });
}

cyf_status cyf_result_write_csv(const cyf_result* r, const char* path) {
    if (!r || !path) return null_arg();
    return guard([&] {
        std::ofstream f(path, std::ios::binary);
        if (!f) throw cyf::Error(cyf::Errc::io_error, std::string("cannot write ") + path);
        cyf::write_csv(f, r->res);
        if (!f) throw cyf::Error(cyf::Errc::io_error, std::string("write failed: ") + path);
    });
}

cyf_status cyf_result_summary(const cyf_result* r, char** out) {
    if (!r || !out) return null_arg();
    return guard([&] { *out = dup(cyf::render_summary(r->res)); });
}

void cyf_result_free(cyf_result* r) { delete r; }

cyf_status cyf_sweep_run(const cyf_scenario* sc, const char* axis, const double* values, size_t n, unsigned workers,
                         cyf_sweep** out) {
    if (!sc || !axis || !out || (n > 0 && !values)) return null_arg();
    return guard([&] {
        const auto a = cyf::sweep_axis_from_string(axis);
        if (!a)
            throw cyf::Error(cyf::Errc::invalid_argument,
                             std::string("unknown axis '") + axis + "', expected Kp, Ki, Kd, setpoint or output");
        std::vector<double> v(values, values + n);
        *out = new cyf_sweep{*a, cyf::sweep(sc->cfg, *a, v, workers)};
    });
}

size_t cyf_sweep_size(const cyf_sweep* s) { return s ? s->rows.size() : 0; }

cyf_status cyf_sweep_get(const cyf_sweep* s, size_t i, cyf_sweep_row* out) {
    if (!s || !out) return null_arg();
    if (i >= s->rows.size()) {
        g_error = "sweep row index out of range";
        return CYF_E_INVALID_ARGUMENT;
    }
    const auto& r = s->rows[i];
    *out = cyf_sweep_row{r.value, r.detection_time.has_value() ? 1 : 0, r.detection_time.value_or(0.0),
                         r.stop_distance, static_cast<cyf_run_status>(r.status)};
    return CYF_OK;
}

cyf_status cyf_sweep_csv(const cyf_sweep* s, char** out) {
    if (!s || !out) return null_arg();
    return guard([&] {
        std::ostringstream os;
        cyf::write_sweep_csv(os, s->axis, s->rows);
        *out = dup(os.str());
    });
}

cyf_status cyf_sweep_table(const cyf_sweep* s, char** out) {
    if (!s || !out) return null_arg();
    return guard([&] { *out = dup(cyf::render_sweep_table(s->axis, s->rows)); });
}

void cyf_sweep_free(cyf_sweep* s) { delete s; }

cyf_status cyf_margins_report(const cyf_scenario* sc, const double* speeds, size_t n, char** out, int* warnings) {
    if (!sc || !out) return null_arg();
    return guard([&] {
        const auto v = speeds ? std::vector<double>(speeds, speeds + n) : cyf::speed_bins();
        const auto rep = cyf::margins_report(sc->cfg, v);
        if (warnings) *warnings = rep.warnings;
        *out = dup(rep.text);
    });
}

cyf_status cyf_bench(uint64_t iterations, cyf_bench_report* out) {
    if (!out) return null_arg();
    return guard([&] {
        const auto r = cyf::bench_monitor(iterations);
        *out = cyf_bench_report{r.iterations, r.analytic_mean_us, r.analytic_p99_us, r.lut_mean_us, r.lut_p99_us};
    });
}

cyf_status cyf_bench_render(const cyf_bench_report* r, char** out) {
    if (!r || !out) return null_arg();
    return guard([&] {
        *out = dup(cyf::render_bench({r->iterations, r->analytic_mean_us, r->analytic_p99_us, r->lut_mean_us,
                                      r->lut_p99_us}));
    });
}

cyf_status cyf_write_tables(const cyf_scenario* base, const char* dir, unsigned workers, char** out) {
    if (!base || !dir) return null_arg();
    return guard([&] {
        const auto text = cyf::write_tables(base->cfg, dir, workers);
        if (out) *out = dup(text);
    });
}

}  // extern "C"
