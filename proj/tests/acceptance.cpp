// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any failed. Usage: acceptance <path to cyfence cli>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "cyfence/attack.hpp"
#include "cyfence/controller.hpp"
#include "cyfence/error.hpp"
#include "cyfence/lti.hpp"
#include "cyfence/monitor.hpp"
#include "cyfence/plant.hpp"
#include "cyfence/scenario.hpp"
#include "cyfence/sim.hpp"
#include "oracles.hpp"

using namespace cyf;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[200];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

std::string cli_path;

// 1. Envelope exactness and LUT accuracy.
Outcome envelope_exactness() {
    Outcome o;
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> sp(0.0, 1.0), wn(0.1, 500.0), xi(0.05, 1.0), t0(0.0, 10.0), dt(0.0, 5.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        Envelope e{sp(rng), wn(rng), xi(rng), t0(rng), 0.0};
        const double t = e.t0 + dt(rng);
        const double hw = std::exp(-e.omega_n * e.xi * (t - e.t0));
        const Bounds b = envelope_bounds(e, t);
        const double lo = std::max(kSlipFloor, e.setpoint - hw), hi = std::min(kSlipCeil, e.setpoint + hw);
        worst = std::max({worst, std::abs(e.half_width(t) - hw), std::abs(b.lo - lo), std::abs(b.hi - hi)});
    }
    o.require(worst <= 1e-12, fmt("analytic error %.3g", worst));

    // LUT at the default 1 ms grid: every envelope the store serves, plus
    // random ones up to the rate where a^2 h^2 / 8 reaches 1e-3.
    const SimConfig cfg;
    const CdalStore store = CdalStore::create(cfg.plant, cfg.gains, cfg.monitor);
    std::vector<Envelope> envs;
    for (std::size_t b = 0; b < store.bins().size(); ++b) envs.push_back(store.envelope(b, 0.0));
    std::uniform_real_distribution<double> rate(0.1, std::sqrt(8e-3) / cfg.monitor.lut_resolution);
    for (int i = 0; i < 50; ++i) envs.push_back(Envelope{sp(rng), rate(rng), 1.0, 0.0, 0.0});
    double lut_worst = 0.0;
    for (const auto& e : envs) {
        const auto lut = lut_build(e, cfg.monitor.lut_resolution, cfg.monitor.lut_horizon);
        for (int j = 0; j <= 50000; ++j) {
            const double t = cfg.monitor.lut_horizon * j / 50000.0;
            const Bounds a = envelope_bounds(e, t), l = lut_bounds(e, lut, t);
            lut_worst = std::max({lut_worst, std::abs(a.lo - l.lo), std::abs(a.hi - l.hi)});
        }
    }
    o.require(lut_worst <= 1e-3, fmt("LUT error %.3g", lut_worst));
    if (o.ok) o.detail = fmt("analytic max err %.2g, LUT max err %.2g", worst, lut_worst);
    return o;
}

// 2. Margin solver against closed forms.
Outcome margin_oracle() {
    Outcome o;
    for (double k : {0.1, 1.0, 10.0, 1000.0}) {
        const auto m = loop_margins(make_tf({k}, {0.0, 1.0}));
        o.require(std::abs(m.omega_c - k) <= 1e-9 * std::max(1.0, k), fmt("k/s w_c %.12g for k=%g", m.omega_c, k));
        o.require(std::abs(m.phi_m - 90.0) <= 1e-9, fmt("k/s phi_m %.12g for k=%g", m.phi_m, k));
    }
    const auto d = loop_margins(make_tf({1.0}, {0.0, 1.0}, 0.01));
    const double d_ref = 90.0 - 0.01 * 180.0 / M_PI;
    o.require(std::abs(d.phi_m - d_ref) <= 1e-6, fmt("delayed integrator phi_m %.10g vs %.10g", d.phi_m, d_ref));
    const auto l = loop_margins(make_tf({1.0}, {0.0, 1.0, 1.0}));
    const double wc = oracle::unit_lag_integrator_wc(), pm = oracle::unit_lag_integrator_pm(wc);
    o.require(std::abs(l.omega_c - wc) <= 1e-4 && std::abs(l.omega_c - 0.78615) <= 1e-4,
              fmt("1/(s(s+1)) w_c %.8g vs %.8g", l.omega_c, wc));
    o.require(std::abs(l.phi_m - pm) <= 1e-4 && std::abs(l.phi_m - 51.827) <= 1e-3,
              fmt("1/(s(s+1)) phi_m %.8g vs %.8g", l.phi_m, pm));
    if (o.ok) o.detail = fmt("1/(s(s+1)): w_c %.6f, phi_m %.4f deg", l.omega_c, l.phi_m);
    return o;
}

// 3. 200 Hz Tustin realizations against a 10 kHz fine-step reference.
Outcome discretization_fidelity() {
    Outcome o;
    constexpr double dt = 0.005, h = 1e-4;
    const PlantParams p;
    oracle::SampledInput step{std::vector<double>(201, 1.0), dt};
    auto emb = discretize_tustin(emb_tf(p), dt);
    const auto emb_ref = oracle::lag_response(step, p.omega_act, p.tau, h, 1.0);
    double emb_err = 0.0;
    for (std::size_t k = 0; k < step.u.size(); ++k) emb_err = std::max(emb_err, std::abs(emb.step(1.0) - emb_ref[k]));
    emb_err /= oracle::max_abs(emb_ref);
    o.require(emb_err <= 0.02, fmt("EMB error %.3g of peak", emb_err));

    const PidGains g;
    oracle::SampledInput e{std::vector<double>(201, g.setpoint), dt};
    const auto pid_ref = oracle::pid_response(e, g.Kp, g.Ki, g.Kd, g.Tf, h, 1.0);
    const TorqueLimits wide{-1e12, 1e12};
    PidState s;
    double pid_err = 0.0;
    for (std::size_t k = 0; k < e.u.size(); ++k)
        pid_err = std::max(pid_err, std::abs(pid_step(s, g, e.u[k], dt, wide) - pid_ref[k]));
    pid_err /= oracle::max_abs(pid_ref);
    o.require(pid_err <= 0.02, fmt("PID error %.3g of peak", pid_err));
    if (o.ok) o.detail = fmt("max error: EMB %.2f%%, PID %.2f%% of peak", 100 * emb_err, 100 * pid_err);
    return o;
}

std::string csv_of(const ScenarioResult& r) {
    std::ostringstream os;
    write_csv(os, r);
    return os.str();
}

// 4. No false positives; the monitor does not perturb the loop.
Outcome zero_false_positives() {
    Outcome o;
    const SimConfig on;
    SimConfig off = on;
    off.monitor.monitor_enabled = false;
    const auto a = run_braking(on), b = run_braking(off);
    o.require(a.status == RunStatus::complete, "nominal run did not complete");
    o.require(a.detection_events.empty(), std::to_string(a.detection_events.size()) + " detection events");
    o.require(csv_of(a) == csv_of(b), "monitor on/off trajectories differ");
    if (o.ok) o.detail = fmt("%.0f iterations, 0 events, stop %.2f m", double(a.rows.size()), a.stop_distance);
    return o;
}

// 5. Detection time decreases with perturbation size.
Outcome detection_monotonicity() {
    Outcome o;
    const SimConfig base;
    std::string times;
    std::vector<SweepRow> sp_rows;
    for (const auto& block : table_blocks()) {
        if (block.axis == SweepAxis::output) continue;
        const auto rows = sweep(base, block.axis, block.values);
        times += std::string(times.empty() ? "" : " ") + to_string(block.axis) + "[";
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto& r = rows[i];
            times += fmt(i ? " %.3f" : "%.3f", r.detection_time.value_or(-1.0));
            o.require(r.detection_time && *r.detection_time < 2.0,
                      std::string(to_string(block.axis)) + fmt(" %g not detected within 2 s", r.value));
            if (i && r.detection_time && rows[i - 1].detection_time)
                o.require(*r.detection_time < *rows[i - 1].detection_time,
                          std::string(to_string(block.axis)) + fmt(" %g not faster than %g", r.value, rows[i - 1].value));
        }
        times += "]";
        if (block.axis == SweepAxis::setpoint) sp_rows = rows;
    }
    if (sp_rows.size() == 5 && sp_rows.front().detection_time && sp_rows.back().detection_time) {
        const double ratio = *sp_rows.front().detection_time / *sp_rows.back().detection_time;
        o.require(ratio >= 3.0, fmt("setpoint 0.1/0.9 ratio %.3g", ratio));
        times += fmt(" ratio %.2f", ratio);
    }
    o.detail = o.ok ? times : o.detail + " :: " + times;
    return o;
}

// 6. Recovery keeps the stopping distance close to nominal.
Outcome recovery_effectiveness() {
    Outcome o;
    const SimConfig base;
    SimConfig off = base;
    off.monitor.monitor_enabled = false;
    const double nominal = run_braking(base).stop_distance;
    const std::vector<double> sps{0.5, 0.9};
    const auto un = sweep(off, SweepAxis::setpoint, sps), se = sweep(base, SweepAxis::setpoint, sps);
    std::string d = fmt("nominal %.2f m", nominal);
    for (std::size_t i = 0; i < sps.size(); ++i) {
        const double du = un[i].stop_distance - nominal, ds = se[i].stop_distance - nominal;
        d += fmt("; sp %.1f: +%.2f m unsecured, +%.2f m secured", sps[i], du, ds);
        o.require(un[i].status == RunStatus::complete && se[i].status == RunStatus::complete,
                  fmt("sp %.1f run incomplete", sps[i]));
        o.require(ds < 0.04 * nominal, fmt("sp %.1f secured increase %.3g of nominal", sps[i], ds / nominal));
        if (sps[i] == 0.9) o.require(ds <= 0.2 * du, fmt("sp 0.9 secured/unsecured %.3g", ds / du));
    }
    o.detail = o.ok ? d : o.detail + " :: " + d;
    return o;
}

bool same_store(const CdalStore& a, const CdalStore& b) {
    if (!(a.nominal_gains() == b.nominal_gains()) || a.bins().size() != b.bins().size()) return false;
    for (std::size_t i = 0; i < a.bins().size(); ++i) {
        const auto &x = a.bins()[i], &y = b.bins()[i];
        if (x.speed != y.speed || x.omega_c != y.omega_c || x.phi_m != y.phi_m || x.xi != y.xi) return false;
    }
    return a.min_half_width() == b.min_half_width() && a.fingerprint() == b.fingerprint();
}

// 7. Nothing on the controller or attack side reaches the secure store.
Outcome isolation() {
    Outcome o;
    const SimConfig cfg;
    const CdalStore reference = CdalStore::create(cfg.plant, cfg.gains, cfg.monitor);
    CdalStore store = CdalStore::create(cfg.plant, cfg.gains, cfg.monitor);
    Validator validator(store, cfg.monitor);
    auto check = [&](const char* after) { o.require(same_store(store, reference), std::string("store changed after ") + after); };

    Controller primary(store.nominal_gains(), cfg.limits, cfg.dt);
    Controller backup(store.nominal_gains(), cfg.limits, cfg.dt);
    primary.step(0.05);
    check("Controller::step");
    PidGains tampered = primary.gains();
    tampered.Kp = 1e6;
    tampered.setpoint = 0.9;
    primary.step_with(tampered, 0.3);
    check("Controller::step_with");
    primary.engage(1000.0);
    check("Controller::engage");
    primary.reset();
    check("Controller::reset");
    PidState st;
    pid_step(st, tampered, 0.2, cfg.dt, cfg.limits);
    check("pid_step");

    const LoopView view{store.nominal_gains(), std::nullopt, 0.0};
    for (auto kind : {AttackKind::param_kp, AttackKind::param_ki, AttackKind::param_kd, AttackKind::setpoint,
                      AttackKind::output_override, AttackKind::deadline_delay}) {
        auto v = apply(AttackSpec{kind, kind == AttackKind::deadline_delay ? 0.006 : 0.9, 0.0}, view, 3, cfg.dt);
        v.gains.Ki = -1.0;
        check(to_string(kind));
    }
    o.require(view.gains == reference.nominal_gains(), "loop view gains changed");

    store.ingest({90.0, 30.0}, 0, 0.0);
    check("CdalStore::ingest");
    validator.restart(0.2);
    validator.semantic_check(0.9, 30.0, 0.3);
    validator.deadline_check(0.006, 0.005, 0.3);
    check("Validator");
    ActiveController active = ActiveController::primary;
    LoopHandles h{active, &backup, validator, 900.0};
    Recovery(RecoveryPolicy::switch_backup).recover(DetectionEvent{0.3, DetectionKind::semantic, 0.9, 0.13, 30}, h);
    backup.step(0.5);
    check("Recovery::recover");

    // Logged bounds are those of an untouched store on the same (v, t).
    SimConfig base = cfg;
    base.monitor.recovery = RecoveryPolicy::none;
    const CdalStore fresh = CdalStore::create(base.plant, base.gains, base.monitor);
    Validator expect(fresh, base.monitor);
    std::size_t checked = 0;
    for (const auto& spec : {AttackSpec{AttackKind::output_override, 0.7, 0.2}, AttackSpec{AttackKind::output_override, -0.6, 0.0},
                             AttackSpec{AttackKind::param_kp, 19000.0, 0.0}, AttackSpec{AttackKind::param_ki, 900000.0, 0.0},
                             AttackSpec{AttackKind::param_kd, 1700.0, 0.0}, AttackSpec{AttackKind::setpoint, 0.5, 0.0}}) {
        SimConfig c = base;
        c.attacks = {spec};
        const auto r = run_braking(c);
        for (const auto& row : r.rows) {
            const Bounds b = expect.bounds(row.v, row.t);
            o.require(row.bound_lo == b.lo && row.bound_hi == b.hi,
                      std::string(to_string(spec.kind)) + fmt(" altered bounds at t=%.3f", row.t));
            ++checked;
            if (!o.ok) break;
        }
    }
    if (o.ok) o.detail = fmt("store unchanged by every mutator; %.0f logged bound pairs checked", double(checked));
    return o;
}

// 8. DoS by delayed output.
Outcome dos_detection() {
    Outcome o;
    SimConfig c;
    const double t_start = 1.0;
    const auto first_active = static_cast<std::size_t>(std::llround(t_start / c.dt));
    c.attacks = {AttackSpec{AttackKind::deadline_delay, 0.006, t_start}};
    const auto r = run_braking(c);
    std::vector<std::size_t> flagged;
    for (std::size_t i = 0; i < r.rows.size(); ++i)
        if (r.rows[i].deadline) flagged.push_back(i);
    o.require(flagged.size() == 1 && flagged[0] == first_active,
              fmt("6 ms flagged %.0f times, first at row %.0f", double(flagged.size()), flagged.empty() ? -1.0 : double(flagged[0])));
    o.require(r.detection_time_rel && *r.detection_time_rel == 0.0, "6 ms detection not at attack start");

    SimConfig q = c;
    q.attacks = {AttackSpec{AttackKind::deadline_delay, 0.004, 0.0}};
    q.monitor.recovery = RecoveryPolicy::none;
    const auto rq = run_braking(q);
    o.require(rq.deadline_misses == 0, std::to_string(rq.deadline_misses) + " misses at 4 ms");
    o.require(!deadline_missed(0.005, 0.005) && deadline_missed(0.0050001, 0.005), "budget boundary");
    if (o.ok) o.detail = fmt("6 ms flagged at row %.0f only (t=%.3f s); 4 ms: 0 of %.0f rows", double(first_active),
                             r.rows[first_active].t, double(rq.rows.size()));
    return o;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// 9. Repeated runs are byte-identical; sweeps keep input order.
Outcome determinism() {
    Outcome o;
    const auto dir = std::filesystem::temp_directory_path() / ("cyfence_acc_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    SimConfig c;
    c.attacks = {AttackSpec{AttackKind::setpoint, 0.5, 0.3}};
    {
        std::ofstream(dir / "s.scenario") << serialize_scenario(c);
    }
    std::string detail;
    if (cli_path.empty()) {
        o.require(false, "cli path not given");
    } else {
        for (const char* out : {"a.csv", "b.csv"}) {
            const std::string cmd =
                "\"" + cli_path + "\" run \"" + (dir / "s.scenario").string() + "\" -o \"" + (dir / out).string() + "\" > /dev/null";
            o.require(std::system(cmd.c_str()) == 0, std::string("cli run failed for ") + out);
        }
        const auto a = slurp(dir / "a.csv"), b = slurp(dir / "b.csv");
        o.require(!a.empty() && a == b, "CSV outputs differ");
        o.require(a == csv_of(run_braking(c)), "CLI CSV differs from library CSV");
        detail = fmt("two CLI runs byte-identical (%.0f bytes)", double(a.size()));
    }
    std::filesystem::remove_all(dir);

    const std::vector<double> values{0.9, 0.1, 0.5, 0.3, 0.7, 0.2};
    const auto par = sweep(SimConfig{}, SweepAxis::setpoint, values, 4);
    const auto ser = sweep(SimConfig{}, SweepAxis::setpoint, values, 1);
    for (std::size_t i = 0; i < values.size(); ++i) {
        o.require(par[i].value == values[i], "sweep row order differs from input");
        o.require(par[i].detection_time == ser[i].detection_time && par[i].stop_distance == ser[i].stop_distance,
                  "parallel sweep differs from serial");
    }
    if (o.ok) o.detail = detail + "; sweep rows in input order";
    return o;
}

// 10. LUT path is cheaper than the analytic path.
Outcome bench_sanity() {
    Outcome o;
    const auto r = bench_monitor(1000000);
    o.require(r.lut_mean_us < r.analytic_mean_us, fmt("LUT mean %.4g us >= analytic %.4g us", r.lut_mean_us, r.analytic_mean_us));
    o.require(r.lut_mean_us < 5000.0 && r.analytic_mean_us < 5000.0, "mean cost above 5 ms");
    if (o.ok) o.detail = fmt("analytic %.4f us, LUT %.4f us per call", r.analytic_mean_us, r.lut_mean_us);
    return o;
}

struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1) cli_path = argv[1];
    set_warning_sink([](std::string_view) {});
    const std::vector<Criterion> all{
        {1, "envelope exactness", 1.0, envelope_exactness},
        {2, "margin solver oracle", 1.0, margin_oracle},
        {3, "discretization fidelity", 5.0, discretization_fidelity},
        {4, "zero false positives", 1.0, zero_false_positives},
        {5, "detection-time monotonicity", 30.0, detection_monotonicity},
        {6, "recovery effectiveness", 10.0, recovery_effectiveness},
        {7, "isolation contract", 1.0, isolation},
        {8, "DoS detection", 1.0, dos_detection},
        {9, "determinism", 5.0, determinism},
        {10, "bench sanity", 30.0, bench_sanity},
    };
    int failed = 0;
    for (const auto& c : all) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.ok = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > c.limit_s) {
            o.ok = false;
            o.detail += fmt(" (over the %.0f s runtime limit)", c.limit_s);
        }
        if (!o.ok) ++failed;
        std::printf("%s %2d %s: %s [%.2f s]\n", o.ok ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(all.size()) - failed, all.size());
    return failed ? 1 : 0;
}
