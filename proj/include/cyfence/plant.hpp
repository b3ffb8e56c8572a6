#pragma once

#include <vector>

#include "cyfence/controller.hpp"
#include "cyfence/lti.hpp"

namespace cyf {

constexpr double kGravity = 9.81;

// Burckhardt curve mu(l) = c1 (1 - exp(-c2 l)) - c3 l.
// Defaults come from calibrate_friction() on the classic dry asphalt set
// (1.28, 23.99, 0.52), peak moved to (0.138, 0.8732).
struct FrictionCurve {
    double c1 = 0.9378606141;
    double c2 = 31.53551355;
    double c3 = 0.3810058745;

    double peak_lambda() const;
    double peak_mu() const;
    void validate(double setpoint) const;
};

struct FrictionValue {
    double mu;
    double dmu;
};

// Out-of-range slip is clamped to [0, 1] with a warning.
FrictionValue friction(const FrictionCurve& curve, double lambda);

// Moves the peak to peak_lambda through c2, then scales c1 and c3 together
// (which keeps the peak location) so that the peak friction equals peak_mu.
FrictionCurve calibrate_friction(const FrictionCurve& base, double peak_lambda, double peak_mu);

struct PlantParams {
    double r = 0.30;           // m
    double J = 1.0;            // kg m^2
    double m_quarter = 400.0;  // kg
    double Fz = 400.0 * kGravity;  // N
    double lambda_bar = 0.12;
    double v_bar = 30.0;       // m/s
    double omega_act = 70.0;   // rad/s
    double tau = 0.010;        // s
    // Brake torque in N m per controller output unit. Applies both to the
    // design model and to the simulated wheel.
    double gain_scale = 0.6101514613;
    FrictionCurve friction;

    double mu1() const;  // d mu / d lambda at lambda_bar
    void validate() const;
};

RationalTf single_corner_tf(const PlantParams& p);
RationalTf emb_tf(const PlantParams& p);
RationalTf loop_tf(const PlantParams& p, const PidGains& g);

struct SpeedMargins {
    double speed;
    LoopMargins margins;
};

std::vector<double> speed_bins();  // 5..35 m/s, 1 m/s apart
std::vector<SpeedMargins> margins_grid(const PlantParams& p, const PidGains& g, const std::vector<double>& speeds);

struct GainScaleTarget {
    double pm_lo = 30.0;        // deg, at v_ref
    double pm_hi = 80.0;
    double v_ref = 30.0;        // m/s
    double min_margin = 1.6;    // deg, over every speed bin
};

// Largest scale in (0, 1] that keeps every bin above min_margin, then
// checked against the [pm_lo, pm_hi] window at v_ref.
double calibrate_gain_scale(PlantParams p, const PidGains& g, const GainScaleTarget& target = {});

// Controller output that holds the wheel at lambda_bar: the torque balance
// of the slip dynamics with d(lambda)/dt = 0, divided by gain_scale.
double equilibrium_command(const PlantParams& p);

struct WheelState {
    double v;      // m/s
    double omega;  // rad/s
};

double slip(const WheelState& s, double r);

// Explicit Euler over dt split into substeps. The wheel speed is kept in
// [0, v/r]: it cannot spin backwards and cannot outrun the vehicle.
void integrate_wheel(const PlantParams& p, WheelState& s, double brake_torque, double dt, int substeps);

}  // namespace cyf
