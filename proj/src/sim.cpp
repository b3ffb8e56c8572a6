#include "cyfence/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "cyfence/error.hpp"

namespace cyf {

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "dt must be > 0 s");
    if (!(v_stop >= 5.0)) throw Error(Errc::invalid_argument, "v_stop must be >= 5 m/s");
    if (!(v0 > v_stop)) throw Error(Errc::invalid_argument, "v0 must be > v_stop");
    if (!(max_t > 0.0)) throw Error(Errc::invalid_argument, "max_t must be > 0 s");
    if (!(lambda0 >= 0.0 && lambda0 < 1.0)) throw Error(Errc::invalid_argument, "lambda0 must lie in [0, 1)");
    if (substeps < 1) throw Error(Errc::invalid_argument, "substeps must be >= 1");
    if (attacks.size() > 1 && !allow_multiple_attacks)
        throw Error(Errc::invalid_argument, "more than one attack requires allow_multiple_attacks");
    plant.validate();
    gains.validate();
    limits.validate();
    for (const auto& a : attacks) a.validate();
    monitor.validate();
}

const char* to_string(RunStatus s) {
    switch (s) {
        case RunStatus::complete: return "complete";
        case RunStatus::incomplete: return "incomplete";
        case RunStatus::aborted: return "aborted";
    }
    return "?";
}

ScenarioResult run_braking(const SimConfig& cfg) {
    cfg.validate();
    const PlantParams& p = cfg.plant;
    const double dt = cfg.dt;

    // Design time: margins and envelopes go into the secure store.
    CdalStore store = CdalStore::create(p, cfg.gains, cfg.monitor);
    Validator validator(store, cfg.monitor);
    validator.restart(0.0);
    Recovery recovery(cfg.monitor.recovery);

    const double u_eq = equilibrium_command(p);
    Controller primary(cfg.gains, cfg.limits, dt);
    primary.engage(u_eq);
    std::optional<Controller> backup;
    if (cfg.monitor.backup_enabled) backup.emplace(store.nominal_gains(), cfg.limits, dt);
    ActiveController active = ActiveController::primary;

    DiscreteLti actuator = discretize_tustin(emb_tf(p), dt);
    actuator.reset_steady(u_eq);

    WheelState w{cfg.v0, cfg.v0 * (1.0 - cfg.lambda0) / p.r};
    ScenarioResult res;
    double last_cmd = u_eq;
    double first_attack = INFINITY;
    for (const auto& a : cfg.attacks) first_attack = std::min(first_attack, a.t_start);

    std::int64_t k = 0;
    double t = 0.0;
    try {
        for (;; ++k) {
            t = static_cast<double>(k) * dt;
            if (w.v <= cfg.v_stop) break;
            if (t >= cfg.max_t - 1e-12) {
                res.status = RunStatus::incomplete;
                break;
            }
            const Snapshot snap = store.ingest({w.omega, w.v}, k, t);

            LoopView view{primary.gains(), std::nullopt, 0.0};
            if (active == ActiveController::primary) view = apply(cfg.attacks, view, k, dt);

            double u_cmd = 0.0;
            switch (active) {
                case ActiveController::primary:
                    u_cmd = primary.step_with(view.gains, view.gains.setpoint - snap.lambda);
                    break;
                case ActiveController::backup:
                    u_cmd = backup->step(backup->gains().setpoint - snap.lambda);
                    break;
                case ActiveController::safe_stop: {
                    const double step = cfg.monitor.safe_stop_ramp * dt;
                    u_cmd = last_cmd + std::clamp(u_eq - last_cmd, -step, step);
                    break;
                }
            }
            double u_app = u_cmd;
            if (view.forced_output) u_app = *view.forced_output * cfg.limits.hi;
            last_cmd = u_app;
            const double elapsed = cfg.monitor.nominal_cost + view.extra_delay;

            const double torque = std::max(0.0, p.gain_scale * actuator.step(u_app));
            integrate_wheel(p, w, torque, dt, cfg.substeps);
            if (!std::isfinite(w.v) || !std::isfinite(w.omega)) {
                res.status = RunStatus::aborted;
                res.abort_row = static_cast<std::size_t>(k);
                res.abort_reason = "non-finite plant state";
                break;
            }

            CsvRow row{t, snap.v, snap.omega, snap.lambda, 0.0, 0.0, u_cmd, u_app, active, false, false, elapsed};
            const Bounds b = validator.bounds(snap.v, t);
            row.bound_lo = b.lo;
            row.bound_hi = b.hi;

            if (cfg.monitor.monitor_enabled) {
                std::vector<DetectionEvent> events;
                if (auto ev = validator.deadline_check(elapsed, cfg.monitor.budget, t)) {
                    row.deadline = true;
                    ++res.deadline_misses;
                    events.push_back(*ev);
                }
                if (auto ev = validator.semantic_check(snap.lambda, snap.v, t)) {
                    row.semantic = true;
                    events.push_back(*ev);
                }
                for (const auto& ev : events) {
                    res.detection_events.push_back(ev);
                    if (recovery.done() && cfg.monitor.recovery != RecoveryPolicy::none) continue;
                    LoopHandles h{active, backup ? &*backup : nullptr, validator, u_eq};
                    if (auto act = recovery.recover(ev, h)) res.recovery_actions.push_back(*act);
                }
            }
            res.rows.push_back(row);
            res.stop_distance += dt * (snap.v + w.v) / 2.0;
        }
    } catch (const Error& e) {
        res.status = RunStatus::aborted;
        res.abort_row = static_cast<std::size_t>(k);
        res.abort_reason = e.what();
    }
    res.t_end = t;
    res.v_end = w.v;
    if (!res.detection_events.empty()) {
        res.detection_time = res.detection_events.front().t;
        if (std::isfinite(first_attack)) res.detection_time_rel = *res.detection_time - first_attack;
    }
    return res;
}

std::optional<double> detection_time(const ScenarioResult& r) { return r.detection_time; }

StopDistance stop_distance(const ScenarioResult& r) {
    return {r.stop_distance, r.status != RunStatus::complete};
}

double trapezoid_distance(const std::vector<double>& t, const std::vector<double>& v) {
    if (t.size() != v.size()) throw Error(Errc::invalid_argument, "time and speed series differ in length");
    double d = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) d += (t[i] - t[i - 1]) * (v[i] + v[i - 1]) / 2.0;
    return d;
}

const char* to_string(SweepAxis a) {
    switch (a) {
        case SweepAxis::Kp: return "Kp";
        case SweepAxis::Ki: return "Ki";
        case SweepAxis::Kd: return "Kd";
        case SweepAxis::setpoint: return "setpoint";
        case SweepAxis::output: return "output";
    }
    return "?";
}

std::optional<SweepAxis> sweep_axis_from_string(const std::string& s) {
    for (auto a : {SweepAxis::Kp, SweepAxis::Ki, SweepAxis::Kd, SweepAxis::setpoint, SweepAxis::output})
        if (s == to_string(a)) return a;
    return std::nullopt;
}

SimConfig with_axis_attack(const SimConfig& base, SweepAxis axis, double value) {
    static constexpr AttackKind kinds[] = {AttackKind::param_kp, AttackKind::param_ki, AttackKind::param_kd,
                                           AttackKind::setpoint, AttackKind::output_override};
    AttackSpec a;
    if (!base.attacks.empty()) a = base.attacks.front();
    a.kind = kinds[static_cast<int>(axis)];
    a.value = value;
    SimConfig c = base;
    c.attacks = {a};
    return c;
}

std::vector<SweepRow> sweep(const SimConfig& base, SweepAxis axis, const std::vector<double>& values,
                            unsigned workers) {
    std::vector<SweepRow> rows(values.size());
    auto run_one = [&](std::size_t i) {
        SweepRow& row = rows[i];
        row.value = values[i];
        try {
            const auto r = run_braking(with_axis_attack(base, axis, values[i]));
            row.detection_time = r.detection_time;
            row.stop_distance = r.stop_distance;
            row.status = r.status;
            if (r.status == RunStatus::aborted) row.error = r.abort_reason;
        } catch (const std::exception& e) {
            row.status = RunStatus::aborted;
            row.error = e.what();
        }
    };
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, values.size()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < values.size(); ++i) run_one(i);
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < values.size();) run_one(i);
        });
    pool.clear();
    return rows;
}

}  // namespace cyf
