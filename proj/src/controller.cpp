#include "cyfence/controller.hpp"

#include <algorithm>
#include <cmath>

#include "cyfence/error.hpp"

namespace cyf {

void PidGains::validate() const {
    for (double x : {Kp, Ki, Kd, Tf, setpoint})
        if (!std::isfinite(x)) throw Error(Errc::invalid_argument, "gains must be finite");
    if (!(Tf > 0.0)) throw Error(Errc::invalid_argument, "Tf must be > 0 s");
    if (!(setpoint > 0.0 && setpoint < 1.0)) throw Error(Errc::invalid_argument, "setpoint must lie in (0, 1)");
}

void TorqueLimits::validate() const {
    if (!(lo < hi)) throw Error(Errc::invalid_argument, "torque_min must be < torque_max");
}

double pid_step(PidState& s, const PidGains& g, double e, double dt, const TorqueLimits& lim) {
    if (!std::isfinite(e)) throw Error(Errc::hard_fault, "non-finite error input to controller");
    if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "dt must be > 0");

    const double integral = s.integral + g.Ki * dt / 2.0 * (e + s.prev_error);
    const double a = (2.0 * g.Tf - dt) / (2.0 * g.Tf + dt);
    const double deriv = a * s.deriv + 2.0 * g.Kd / (2.0 * g.Tf + dt) * (e - s.prev_error);
    const double u = g.Kp * e + integral + deriv;
    const double uc = std::clamp(u, lim.lo, lim.hi);

    // Integrating is allowed unless clamped with the error pushing further out.
    const bool winding = (u > lim.hi && e > 0.0) || (u < lim.lo && e < 0.0);
    s.saturated = winding;
    if (!winding) s.integral = integral;
    s.deriv = deriv;
    s.prev_error = e;
    return uc;
}

PidState reset() { return PidState{}; }
void reset(PidState& state) { state = PidState{}; }

RationalTf pid_tf(const PidGains& g) {
    return RationalTf{{g.Ki, g.Kp + g.Ki * g.Tf, g.Kp * g.Tf + g.Kd}, {0.0, 1.0, g.Tf}, 0.0};
}

Controller::Controller(const PidGains& gains, const TorqueLimits& limits, double dt)
    : gains_(gains), limits_(limits), dt_(dt) {
    gains_.validate();
    limits_.validate();
    if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "dt must be > 0");
}

void Controller::engage(double u0) {
    cyf::reset(state_);
    state_.integral = u0;
}

}  // namespace cyf
