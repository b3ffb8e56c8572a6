#pragma once

#include "cyfence/lti.hpp"

namespace cyf {

struct PidGains {
    double Kp = 3151.0;
    double Ki = 40400.0;
    double Kd = 30.5;
    double Tf = 0.1;  // s
    double setpoint = 0.12;

    void validate() const;
    bool operator==(const PidGains&) const = default;
};

// Controller output limits, in controller units.
struct TorqueLimits {
    double lo = 0.0;
    double hi = 4000.0;

    void validate() const;
};

struct PidState {
    double integral = 0.0;
    double deriv = 0.0;
    double prev_error = 0.0;
    bool saturated = false;
};

// One Tustin step of Kp + Ki/s + Kd s/(Tf s + 1). The integral is frozen
// while the output sits on a limit and the error pushes further into it.
double pid_step(PidState& state, const PidGains& gains, double error, double dt,
                const TorqueLimits& limits);

PidState reset();
void reset(PidState& state);

// Continuous R(s) = (Ki + (Kp + Ki Tf) s + (Kp Tf + Kd) s^2) / (s (Tf s + 1)).
RationalTf pid_tf(const PidGains& g);

class Controller {
public:
    Controller(const PidGains& gains, const TorqueLimits& limits, double dt);

    double step(double error) { return pid_step(state_, gains_, error, dt_, limits_); }
    double step_with(const PidGains& working, double error) {
        return pid_step(state_, working, error, dt_, limits_);
    }
    void reset() { cyf::reset(state_); }
    // Fresh state with the integral at u0, for bumpless engagement.
    void engage(double u0);

    const PidGains& gains() const { return gains_; }
    const PidState& state() const { return state_; }

private:
    PidGains gains_;
    TorqueLimits limits_;
    double dt_;
    PidState state_;
};

}  // namespace cyf
