#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cyfence/attack.hpp"
#include "cyfence/controller.hpp"
#include "cyfence/monitor.hpp"
#include "cyfence/plant.hpp"

namespace cyf {

struct SimConfig {
    double dt = 0.005;      // s
    double v0 = 35.0;       // m/s
    double v_stop = 5.0;    // m/s
    double max_t = 20.0;    // s
    double lambda0 = 0.117;  // slip when the ABS takes over
    int substeps = 1;       // Euler substeps per dt for the wheel
    bool allow_multiple_attacks = false;
    PlantParams plant;
    PidGains gains;
    TorqueLimits limits;
    std::vector<AttackSpec> attacks;
    MonitorConfig monitor;

    void validate() const;
};

struct CsvRow {
    double t;
    double v;
    double omega;
    double lambda;
    double bound_lo;
    double bound_hi;
    double u_commanded;
    double u_applied;
    ActiveController active_controller;
    bool semantic;
    bool deadline;
    double elapsed_budget;
};

enum class RunStatus { complete, incomplete, aborted };

const char* to_string(RunStatus s);

struct ScenarioResult {
    std::vector<CsvRow> rows;
    RunStatus status = RunStatus::complete;
    std::string abort_reason;
    std::size_t abort_row = 0;
    double t_end = 0.0;  // state after the last iteration
    double v_end = 0.0;
    double stop_distance = 0.0;  // m
    std::vector<DetectionEvent> detection_events;
    std::vector<RecoveryAction> recovery_actions;
    std::optional<double> detection_time;  // from maneuver start
    std::optional<double> detection_time_rel;  // from the first attack start
    int deadline_misses = 0;
};

ScenarioResult run_braking(const SimConfig& cfg);

std::optional<double> detection_time(const ScenarioResult& r);

// Flags a run cut off by max_t as incomplete via the second member.
struct StopDistance {
    double meters;
    bool incomplete;
};
StopDistance stop_distance(const ScenarioResult& r);

double trapezoid_distance(const std::vector<double>& t, const std::vector<double>& v);

enum class SweepAxis { Kp, Ki, Kd, setpoint, output };

const char* to_string(SweepAxis a);
std::optional<SweepAxis> sweep_axis_from_string(const std::string& s);

// Replaces the scenario's attack list with one attack on the axis. Timing
// fields are taken from the first attack in base, if any.
SimConfig with_axis_attack(const SimConfig& base, SweepAxis axis, double value);

struct SweepRow {
    double value;
    std::optional<double> detection_time;
    double stop_distance = 0.0;
    RunStatus status = RunStatus::complete;
    std::string error;  // set when the run failed
};

// One run per value; rows come back in input order. workers = 0 uses the
// host core count.
std::vector<SweepRow> sweep(const SimConfig& base, SweepAxis axis, const std::vector<double>& values,
                            unsigned workers = 0);

}  // namespace cyf
