#include "cyfence/plant.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "cyfence/error.hpp"

namespace cyf {

double FrictionCurve::peak_lambda() const { return std::log(c1 * c2 / c3) / c2; }

double FrictionCurve::peak_mu() const { return friction(*this, peak_lambda()).mu; }

void FrictionCurve::validate(double setpoint) const {
    if (!(c1 > 0.0 && c2 > 0.0 && c3 > 0.0)) throw Error(Errc::invalid_argument, "friction coefficients must be > 0");
    if (!(c1 * c2 > c3)) throw Error(Errc::invalid_argument, "friction curve has no interior maximum");
    const double lp = peak_lambda();
    if (!(lp > 0.0 && lp < 1.0)) throw Error(Errc::invalid_argument, "friction peak outside (0, 1)");
    if (std::abs(lp - setpoint) > 0.02) {
        std::ostringstream os;
        os << "friction peak at slip " << lp << " is more than 0.02 from the setpoint " << setpoint;
        throw Error(Errc::invalid_argument, os.str());
    }
    if (c1 * (1.0 - std::exp(-c2)) - c3 < 0.0) throw Error(Errc::invalid_argument, "friction is negative at slip 1");
}

FrictionValue friction(const FrictionCurve& c, double lambda) {
    if (!(lambda >= 0.0 && lambda <= 1.0)) {
        std::ostringstream os;
        os << "slip " << lambda << " clamped to [0, 1]";
        warn(os.str());
        lambda = std::isnan(lambda) ? 0.0 : std::clamp(lambda, 0.0, 1.0);
    }
    const double e = std::exp(-c.c2 * lambda);
    return {c.c1 * (1.0 - e) - c.c3 * lambda, c.c1 * c.c2 * e - c.c3};
}

FrictionCurve calibrate_friction(const FrictionCurve& base, double peak_lambda, double peak_mu) {
    if (!(peak_lambda > 0.0 && peak_lambda < 1.0) || !(peak_mu > 0.0))
        throw Error(Errc::invalid_argument, "calibration targets out of range");
    // ln(c1 c2 / c3) / c2 decreases in c2 once c2 > e c3 / c1.
    const double k = base.c1 / base.c3;
    double lo = std::exp(1.0) / k, hi = 1e4;
    auto peak = [&](double c2) { return std::log(k * c2) / c2; };
    if (peak(lo) < peak_lambda || peak(hi) > peak_lambda)
        throw Error(Errc::invalid_argument, "peak slip target not reachable");
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (peak(mid) > peak_lambda)
            lo = mid;
        else
            hi = mid;
    }
    FrictionCurve c = base;
    c.c2 = 0.5 * (lo + hi);
    const double s = peak_mu / c.peak_mu();
    c.c1 *= s;
    c.c3 *= s;
    return c;
}

double PlantParams::mu1() const { return cyf::friction(friction, lambda_bar).dmu; }

void PlantParams::validate() const {
    for (double x : {r, J, m_quarter, Fz, v_bar, omega_act, tau, gain_scale})
        if (!(x > 0.0) || !std::isfinite(x))
            throw Error(Errc::invalid_argument, "plant parameters must be finite and > 0");
    if (!(lambda_bar > 0.0 && lambda_bar < 1.0)) throw Error(Errc::invalid_argument, "lambda_bar must lie in (0, 1)");
    friction.validate(lambda_bar);
}

RationalTf single_corner_tf(const PlantParams& p) {
    const double gain = p.gain_scale * p.r / (p.J * p.v_bar);
    const double pole = p.mu1() * (p.Fz / (p.m_quarter * p.v_bar)) *
                        (1.0 - p.lambda_bar + p.m_quarter * p.r * p.r / p.J);
    return RationalTf{{gain}, {pole, 1.0}, 0.0};
}

RationalTf emb_tf(const PlantParams& p) { return RationalTf{{p.omega_act}, {p.omega_act, 1.0}, p.tau}; }

RationalTf loop_tf(const PlantParams& p, const PidGains& g) {
    return series(series(pid_tf(g), single_corner_tf(p)), emb_tf(p));
}

std::vector<double> speed_bins() {
    std::vector<double> v;
    for (int s = 5; s <= 35; ++s) v.push_back(s);
    return v;
}

std::vector<SpeedMargins> margins_grid(const PlantParams& p, const PidGains& g, const std::vector<double>& speeds) {
    std::vector<SpeedMargins> out;
    out.reserve(speeds.size());
    for (double v : speeds) {
        if (!(v >= 5.0)) throw Error(Errc::invalid_argument, "margin speeds must be >= 5 m/s");
        PlantParams q = p;
        q.v_bar = v;
        out.push_back({v, loop_margins(loop_tf(q, g))});
    }
    return out;
}

namespace {

double min_margin(const PlantParams& p, const PidGains& g, const std::vector<double>& speeds) {
    double m = INFINITY;
    for (const auto& s : margins_grid(p, g, speeds)) m = std::min(m, s.margins.phi_m);
    return m;
}

}  // namespace

double calibrate_gain_scale(PlantParams p, const PidGains& g, const GainScaleTarget& target) {
    const auto speeds = speed_bins();
    auto f = [&](double k) {
        p.gain_scale = k;
        return min_margin(p, g, speeds) - target.min_margin;
    };
    double k = 1.0;
    if (f(1.0) < 0.0) {
        double lo = 1e-3, hi = 1.0;
        if (f(lo) < 0.0) throw Error(Errc::invalid_argument, "no gain scale meets the margin target");
        for (int i = 0; i < 60; ++i) {
            const double mid = std::sqrt(lo * hi);
            if (f(mid) >= 0.0)
                lo = mid;
            else
                hi = mid;
        }
        k = lo;
    }
    p.gain_scale = k;
    p.v_bar = target.v_ref;
    const double pm = loop_margins(loop_tf(p, g)).phi_m;
    if (pm < target.pm_lo || pm > target.pm_hi) {
        std::ostringstream os;
        os << "calibrated gain scale " << k << " gives phase margin " << pm << " deg at " << target.v_ref
           << " m/s, outside [" << target.pm_lo << ", " << target.pm_hi << "]";
        throw Error(Errc::invalid_argument, os.str());
    }
    return k;
}

double equilibrium_command(const PlantParams& p) {
    const double mu = friction(p.friction, p.lambda_bar).mu;
    const double torque = (p.J / p.r) * (mu * p.Fz / p.m_quarter) *
                          (1.0 - p.lambda_bar + p.m_quarter * p.r * p.r / p.J);
    return torque / p.gain_scale;
}

double slip(const WheelState& s, double r) { return (s.v - s.omega * r) / s.v; }

void integrate_wheel(const PlantParams& p, WheelState& s, double brake_torque, double dt, int substeps) {
    const double h = dt / substeps;
    for (int i = 0; i < substeps; ++i) {
        const double l = std::clamp(slip(s, p.r), 0.0, 1.0);
        const double fx = friction(p.friction, l).mu * p.Fz;
        s.omega += h * (p.r * fx - brake_torque) / p.J;
        s.v -= h * fx / p.m_quarter;
        s.omega = std::clamp(s.omega, 0.0, std::max(s.v, 0.0) / p.r);
    }
}

}  // namespace cyf
