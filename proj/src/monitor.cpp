#include "cyfence/monitor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "cyfence/error.hpp"

namespace cyf {

double Envelope::half_width(double t) const { return std::exp(-omega_n * xi * (t - t0)); }

void Envelope::validate() const {
    if (!(omega_n > 0.0)) throw Error(Errc::invalid_argument, "omega_n must be > 0");
    if (!(xi > 0.0 && xi <= 1.0)) throw Error(Errc::invalid_argument, "xi must lie in (0, 1]");
    if (!(min_half_width >= 0.0 && min_half_width < 1.0))
        throw Error(Errc::invalid_argument, "min_half_width must lie in [0, 1)");
}

namespace {

Bounds make_bounds(double setpoint, double hw, double floor) {
    hw = std::max(hw, floor);
    return {std::max(setpoint - hw, kSlipFloor), std::min(setpoint + hw, kSlipCeil)};
}

}  // namespace

Bounds envelope_bounds(const Envelope& env, double t) {
    return make_bounds(env.setpoint, env.half_width(t), env.min_half_width);
}

double xi_from_margin(double phi_m) { return std::clamp(phi_m / 100.0, 0.05, 1.0); }

EnvelopeLut::EnvelopeLut(std::vector<double> values, double resolution)
    : values_(std::move(values)), resolution_(resolution), inv_resolution_(1.0 / resolution) {
    if (values_.size() < 2 || !(resolution > 0.0)) throw Error(Errc::invalid_argument, "bad lookup table");
}

double EnvelopeLut::half_width(double elapsed) const {
    if (elapsed <= 0.0) return values_.front();
    const double x = elapsed * inv_resolution_;
    const auto i = static_cast<std::size_t>(x);
    if (i >= values_.size() - 1) return values_.back();
    const double f = x - static_cast<double>(i);
    return values_[i] + f * (values_[i + 1] - values_[i]);
}

EnvelopeLut lut_build(const Envelope& env, double resolution, double horizon) {
    if (!(resolution > 0.0) || !(horizon > 0.0))
        throw Error(Errc::invalid_argument, "resolution and horizon must be > 0");
    if (resolution > horizon) throw Error(Errc::invalid_argument, "resolution exceeds horizon");
    // Linear interpolation of exp(-a t) is off by at most a^2 h^2 / 8.
    const double err = env.rate() * env.rate() * resolution * resolution / 8.0;
    if (err > 1e-3) warn("lookup table interpolation error up to " + std::to_string(err) + " at this resolution");
    const auto n = static_cast<std::size_t>(std::ceil(horizon / resolution - 1e-9));
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i) v[i] = std::exp(-env.rate() * resolution * static_cast<double>(i));
    return EnvelopeLut(std::move(v), resolution);
}

Bounds lut_bounds(const Envelope& env, const EnvelopeLut& lut, double t) {
    return make_bounds(env.setpoint, lut.half_width(t - env.t0), env.min_half_width);
}

void MonitorConfig::validate() const {
    if (!(budget > 0.0)) throw Error(Errc::invalid_argument, "budget must be > 0 s");
    if (!(nominal_cost >= 0.0)) throw Error(Errc::invalid_argument, "nominal_cost must be >= 0 s");
    if (!(min_half_width >= 0.0 && min_half_width < 1.0))
        throw Error(Errc::invalid_argument, "min_half_width must lie in [0, 1)");
    if (!(lut_resolution > 0.0) || !(lut_horizon > 0.0) || lut_resolution > lut_horizon)
        throw Error(Errc::invalid_argument, "lut_resolution and lut_horizon must be > 0 with resolution <= horizon");
    if (!(safe_stop_ramp > 0.0)) throw Error(Errc::invalid_argument, "safe_stop_ramp must be > 0");
}

CdalStore CdalStore::create(const PlantParams& plant, const PidGains& nominal, const MonitorConfig& cfg) {
    plant.validate();
    nominal.validate();
    cfg.validate();
    CdalStore s;
    s.gains_ = nominal;
    s.r_ = plant.r;
    s.min_half_width_ = cfg.min_half_width;
    for (const auto& m : margins_grid(plant, nominal, speed_bins())) {
        s.bins_.push_back({m.speed, m.margins.omega_c, m.margins.phi_m, xi_from_margin(m.margins.phi_m)});
        if (!(m.margins.phi_m > 0.0)) {
            std::ostringstream os;
            os << "phase margin " << m.margins.phi_m << " deg at " << m.speed << " m/s is not positive";
            warn(os.str());
        }
    }
    s.locked_ = true;
    return s;
}

std::size_t CdalStore::bin_index(double v) const {
    const double lo = bins_.front().speed, hi = bins_.back().speed;
    const double c = std::isfinite(v) ? std::clamp(std::round(v), lo, hi) : hi;
    return static_cast<std::size_t>(c - lo);
}

Envelope CdalStore::envelope(std::size_t bin, double t0) const {
    const auto& b = bins_.at(bin);
    return Envelope{gains_.setpoint, b.omega_c, b.xi, t0, min_half_width_};
}

Snapshot CdalStore::ingest(const SensorReading& s, std::int64_t iteration, double t) {
    if (iteration <= snap_.iteration) throw Error(Errc::invalid_argument, "sensor snapshot already taken this iteration");
    if (!(s.v > 0.0)) throw Error(Errc::abs_inactive, "ABS inactive domain: vehicle speed <= 0");
    snap_ = Snapshot{iteration, t, s.omega, s.v, (s.v - s.omega * r_) / s.v};
    return snap_;
}

std::uint64_t CdalStore::fingerprint() const {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&](double x) {
        auto bits = std::bit_cast<std::uint64_t>(x);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffu;
            h *= 1099511628211ull;
        }
    };
    for (double x : {gains_.Kp, gains_.Ki, gains_.Kd, gains_.Tf, gains_.setpoint, r_, min_half_width_}) mix(x);
    for (const auto& b : bins_)
        for (double x : {b.speed, b.omega_c, b.phi_m, b.xi}) mix(x);
    return h;
}

const char* to_string(DetectionKind k) { return k == DetectionKind::semantic ? "semantic" : "deadline"; }

const char* to_string(ActiveController c) {
    switch (c) {
        case ActiveController::primary: return "primary";
        case ActiveController::backup: return "backup";
        case ActiveController::safe_stop: return "safe_stop";
    }
    return "?";
}

const char* to_string(RecoveryPolicy p) {
    switch (p) {
        case RecoveryPolicy::none: return "none";
        case RecoveryPolicy::switch_backup: return "switch_backup";
        case RecoveryPolicy::safe_stop: return "safe_stop";
    }
    return "?";
}

Validator::Validator(const CdalStore& store, const MonitorConfig& cfg) : store_(store), use_lut_(cfg.lut_enabled) {
    if (use_lut_) {
        for (std::size_t i = 0; i < store.bins().size(); ++i)
            luts_.push_back(lut_build(store.envelope(i, 0.0), cfg.lut_resolution, cfg.lut_horizon));
    }
}

void Validator::restart(double t0) {
    t0_ = t0;
    armed_ = true;
}

Bounds Validator::bounds(double v, double t) const {
    const auto bin = store_.bin_index(v);
    const Envelope env = store_.envelope(bin, t0_);
    return use_lut_ ? lut_bounds(env, luts_[bin], t) : envelope_bounds(env, t);
}

std::optional<DetectionEvent> Validator::semantic_check(double measured, double v, double t) {
    const auto bin = store_.bin_index(v);
    const int speed = static_cast<int>(store_.bins()[bin].speed);
    if (!std::isfinite(measured)) {
        armed_ = false;
        return DetectionEvent{t, DetectionKind::semantic, measured, NAN, speed};
    }
    const Bounds b = bounds(v, t);
    if (b.contains(measured) || !armed_) return std::nullopt;
    // Report only the first exit of each envelope epoch.
    armed_ = false;
    return DetectionEvent{t, DetectionKind::semantic, measured, measured > b.hi ? b.hi : b.lo, speed};
}

bool deadline_missed(double elapsed, double budget) { return elapsed > budget; }

std::optional<DetectionEvent> Validator::deadline_check(double elapsed, double budget, double t) const {
    if (!deadline_missed(elapsed, budget)) return std::nullopt;
    return DetectionEvent{t, DetectionKind::deadline, elapsed, budget, -1};
}

std::optional<RecoveryAction> Recovery::recover(const DetectionEvent& ev, LoopHandles& loop) {
    if (policy_ == RecoveryPolicy::none) return std::nullopt;
    if (done_) {
        std::ostringstream os;
        os << "recovery already performed; request at t=" << ev.t << " s ignored";
        warn(os.str());
        return std::nullopt;
    }
    done_ = true;
    const ActiveController prev = loop.active;
    if (policy_ == RecoveryPolicy::switch_backup && loop.backup) {
        loop.backup->engage(loop.engage_command);
        loop.active = ActiveController::backup;
        loop.validator.restart(ev.t);
        return RecoveryAction{ev.t, RecoveryPolicy::switch_backup, prev, loop.active};
    }
    loop.active = ActiveController::safe_stop;
    return RecoveryAction{ev.t, RecoveryPolicy::safe_stop, prev, loop.active};
}

}  // namespace cyf
