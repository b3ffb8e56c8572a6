#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cyfence/controller.hpp"
#include "cyfence/plant.hpp"

namespace cyf {

// Exponential bounds setpoint +- exp(-omega_n xi (t - t0)).
struct Envelope {
    double setpoint = 0.12;
    double omega_n = 1.0;  // rad/s
    double xi = 1.0;
    double t0 = 0.0;       // s
    double min_half_width = 0.0;

    double rate() const { return omega_n * xi; }
    double half_width(double t) const;  // raw exponential, no floor
    void validate() const;
};

struct Bounds {
    double lo;
    double hi;
    bool contains(double x) const { return x >= lo && x <= hi; }
};

constexpr double kSlipFloor = -0.01;
constexpr double kSlipCeil = 1.01;

Bounds envelope_bounds(const Envelope& env, double t);
double xi_from_margin(double phi_m);

class EnvelopeLut {
public:
    EnvelopeLut() = default;
    EnvelopeLut(std::vector<double> values, double resolution);

    // Half-width at elapsed time dt_env = t - t0, linearly interpolated.
    double half_width(double elapsed) const;
    double resolution() const { return resolution_; }
    double horizon() const { return resolution_ * static_cast<double>(values_.size() - 1); }
    const std::vector<double>& values() const { return values_; }
    double time_at(std::size_t i) const { return resolution_ * static_cast<double>(i); }

private:
    std::vector<double> values_;
    double resolution_ = 0.0;
    double inv_resolution_ = 0.0;
};

EnvelopeLut lut_build(const Envelope& env, double resolution, double horizon);
Bounds lut_bounds(const Envelope& env, const EnvelopeLut& lut, double t);

enum class RecoveryPolicy { none, switch_backup, safe_stop };

struct MonitorConfig {
    bool monitor_enabled = true;
    bool lut_enabled = false;
    RecoveryPolicy recovery = RecoveryPolicy::switch_backup;
    bool backup_enabled = true;
    double budget = 0.005;          // s
    double nominal_cost = 0.0005;   // s, modeled per-iteration compute time
    double min_half_width = 0.0054;
    double lut_resolution = 1e-3;   // s
    double lut_horizon = 5.0;       // s
    double safe_stop_ramp = 20000.0;  // controller units per s

    void validate() const;
};

struct BinParams {
    double speed;    // m/s
    double omega_c;  // rad/s
    double phi_m;    // deg
    double xi;
    double rate() const { return omega_c * xi; }
};

struct SensorReading {
    double omega;  // rad/s
    double v;      // m/s
};

struct Snapshot {
    std::int64_t iteration = -1;
    double t = 0.0;
    double omega = 0.0;
    double v = 0.0;
    double lambda = 0.0;
};

// Secure store. Gains and envelopes are written once by create() and only
// handed out as const references or copies afterwards.
class CdalStore {
public:
    static CdalStore create(const PlantParams& plant, const PidGains& nominal, const MonitorConfig& cfg);

    CdalStore(const CdalStore&) = default;
    CdalStore& operator=(const CdalStore&) = delete;

    const PidGains& nominal_gains() const { return gains_; }
    const std::vector<BinParams>& bins() const { return bins_; }
    double wheel_radius() const { return r_; }
    double min_half_width() const { return min_half_width_; }
    bool locked() const { return locked_; }

    std::size_t bin_index(double v) const;
    Envelope envelope(std::size_t bin, double t0) const;

    // Secure side only. One call per loop iteration, in increasing order.
    Snapshot ingest(const SensorReading& s, std::int64_t iteration, double t);
    Snapshot snapshot() const { return snap_; }

    // Hash over gains and envelope parameters, used by isolation checks.
    std::uint64_t fingerprint() const;

private:
    CdalStore() = default;

    PidGains gains_;
    std::vector<BinParams> bins_;
    double r_ = 0.0;
    double min_half_width_ = 0.0;
    bool locked_ = false;
    Snapshot snap_;
};

enum class DetectionKind { semantic, deadline };

const char* to_string(DetectionKind k);

struct DetectionEvent {
    double t;
    DetectionKind kind;
    double measured;  // slip, or elapsed time in s
    double bound;     // violated bound, or budget
    int speed_bin;    // m/s
};

class Validator {
public:
    Validator(const CdalStore& store, const MonitorConfig& cfg);

    // Epoch start of the envelope clock. Re-arms the semantic check.
    void restart(double t0);
    double t0() const { return t0_; }

    Bounds bounds(double v, double t) const;
    std::optional<DetectionEvent> semantic_check(double measured_slip, double v, double t);
    std::optional<DetectionEvent> deadline_check(double elapsed, double budget, double t) const;

private:
    const CdalStore& store_;
    bool use_lut_;
    std::vector<EnvelopeLut> luts_;
    double t0_ = 0.0;
    bool armed_ = true;
};

bool deadline_missed(double elapsed, double budget);

enum class ActiveController { primary = 0, backup = 1, safe_stop = 2 };

const char* to_string(ActiveController c);
const char* to_string(RecoveryPolicy p);

struct RecoveryAction {
    double t;
    RecoveryPolicy policy;
    ActiveController previous;
    ActiveController next;
};

// What the recovery step is allowed to touch in the running loop.
struct LoopHandles {
    ActiveController& active;
    Controller* backup;  // null when no backup is configured
    Validator& validator;
    double engage_command;
};

class Recovery {
public:
    explicit Recovery(RecoveryPolicy policy) : policy_(policy) {}

    // Returns the action taken, or nothing for policy none and repeat requests.
    std::optional<RecoveryAction> recover(const DetectionEvent& ev, LoopHandles& loop);
    bool done() const { return done_; }

private:
    RecoveryPolicy policy_;
    bool done_ = false;
};

}  // namespace cyf
