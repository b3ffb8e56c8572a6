#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "cyfence/controller.hpp"
#include "cyfence/error.hpp"
#include "oracles.hpp"

using namespace cyf;

namespace {
const TorqueLimits kWide{-1e12, 1e12};
constexpr double kDt = 0.005;
}  // namespace

TEST(Pid, PureProportional) {
    PidState s;
    EXPECT_DOUBLE_EQ(pid_step(s, {1.0, 0.0, 0.0, 0.1, 0.12}, 0.5, kDt, kWide), 0.5);
}

TEST(Pid, UnitIntegral) {
    PidState s;
    const PidGains g{0.0, 1.0, 0.0, 0.1, 0.12};
    s.prev_error = 1.0;  // error already at 1 before the first sample
    double u = 0.0;
    for (int k = 0; k < 200; ++k) u = pid_step(s, g, 1.0, kDt, kWide);
    EXPECT_NEAR(u, 1.0, 1e-9);
}

TEST(Pid, NominalStepMatchesContinuous) {
    // Closed form of Kp e + Ki e t + (Kd/Tf) e exp(-t/Tf) for a step e.
    const PidGains g;
    const double e = 0.12;
    PidState s;
    std::vector<double> u;
    for (int k = 0; k <= 100; ++k) u.push_back(pid_step(s, g, e, kDt, kWide));
    for (double t : {0.05, 0.1, 0.5}) {
        const double ref = e * (g.Kp + g.Ki * t + g.Kd / g.Tf * std::exp(-t / g.Tf));
        const auto k = static_cast<std::size_t>(std::llround(t / kDt));
        EXPECT_NEAR(u[k], ref, 0.02 * std::abs(ref)) << "t=" << t;
    }
}

TEST(Pid, NominalStepMatchesFineStep) {
    const PidGains g;
    oracle::SampledInput in{std::vector<double>(201, 0.12), kDt};
    const auto ref = oracle::pid_response(in, g.Kp, g.Ki, g.Kd, g.Tf, 1e-4, 1.0);
    const double peak = oracle::max_abs(ref);
    PidState s;
    for (std::size_t k = 0; k < in.u.size(); ++k)
        EXPECT_NEAR(pid_step(s, g, in.u[k], kDt, kWide), ref[k], 0.02 * peak) << k;
}

TEST(Pid, ExactTrapezoidalPi) {
    const PidGains g{2.0, 30.0, 0.0, 0.1, 0.12};
    PidState s;
    double sum = 0.0, prev = 0.0;
    for (int k = 0; k < 300; ++k) {
        const double e = std::sin(0.05 * k) + 0.3;
        sum += (e + prev) * kDt / 2.0;
        prev = e;
        const double ref = g.Kp * e + g.Ki * sum;
        EXPECT_NEAR(pid_step(s, g, e, kDt, kWide), ref, 1e-12 * std::max(1.0, std::abs(ref)));
    }
}

TEST(Pid, Clamps) {
    PidState s;
    const TorqueLimits lim{0.0, 4000.0};
    EXPECT_EQ(pid_step(s, PidGains{}, 10.0, kDt, lim), 4000.0);
    EXPECT_TRUE(s.saturated);
    PidState s2;
    EXPECT_EQ(pid_step(s2, PidGains{}, -10.0, kDt, lim), 0.0);
}

TEST(Pid, AntiWindupFreezesIntegral) {
    const TorqueLimits lim{0.0, 4000.0};
    PidState s;
    s.integral = 3900.0;
    double last = s.integral;
    for (int k = 0; k < 50; ++k) {
        pid_step(s, PidGains{}, 0.5, kDt, lim);
        EXPECT_LE(std::abs(s.integral), std::abs(last));
        last = s.integral;
    }
    // Error reversing unfreezes it. The first trapezoid still averages in
    // the old error; after that the integral unwinds.
    pid_step(s, PidGains{}, -0.01, kDt, lim);
    EXPECT_NE(s.integral, last);
    last = s.integral;
    pid_step(s, PidGains{}, -0.01, kDt, lim);
    EXPECT_LT(s.integral, last);
}

TEST(Pid, NonFiniteErrorIsHardFault) {
    PidState s;
    try {
        pid_step(s, PidGains{}, std::numeric_limits<double>::quiet_NaN(), kDt, kWide);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::hard_fault);
    }
}

TEST(Pid, Deterministic) {
    PidState a, b;
    for (int k = 0; k < 1000; ++k) {
        const double e = std::cos(0.01 * k) * 0.1;
        ASSERT_EQ(pid_step(a, PidGains{}, e, kDt, kWide), pid_step(b, PidGains{}, e, kDt, kWide));
    }
}

TEST(Reset, ZeroErrorGivesZeroOutput) {
    PidState s;
    for (int k = 0; k < 20; ++k) pid_step(s, PidGains{}, 0.3, kDt, kWide);
    reset(s);
    for (int k = 0; k < 20; ++k) EXPECT_EQ(pid_step(s, PidGains{}, 0.0, kDt, kWide), 0.0);
}

TEST(Reset, Idempotent) {
    PidState s;
    pid_step(s, PidGains{}, 0.3, kDt, kWide);
    reset(s);
    const PidState once = s;
    reset(s);
    EXPECT_EQ(s.integral, once.integral);
    EXPECT_EQ(s.deriv, once.deriv);
    EXPECT_EQ(s.prev_error, once.prev_error);
    EXPECT_EQ(s.saturated, once.saturated);
}

TEST(Reset, BackupReplaysFreshPrimary) {
    Controller primary(PidGains{}, TorqueLimits{}, kDt), backup(PidGains{}, TorqueLimits{}, kDt);
    for (int k = 0; k < 30; ++k) backup.step(0.05 * std::sin(k));
    backup.reset();
    for (int k = 0; k < 200; ++k) {
        const double e = 0.02 * std::sin(0.3 * k);
        ASSERT_EQ(primary.step(e), backup.step(e));
    }
}

TEST(PidTf, MatchesIdealForm) {
    const PidGains g;
    const auto tf = pid_tf(g);
    for (double w : {0.5, 10.0, 300.0}) {
        const std::complex<double> s(0.0, w);
        const auto ref = g.Kp + g.Ki / s + g.Kd * s / (g.Tf * s + 1.0);
        EXPECT_NEAR(std::abs(freq_response(tf, w) - ref), 0.0, 1e-10 * std::abs(ref));
    }
}

TEST(Gains, Validation) {
    EXPECT_THROW((PidGains{1, 1, 1, 0.0, 0.12}.validate()), Error);
    EXPECT_THROW((PidGains{1, 1, 1, 0.1, 1.0}.validate()), Error);
    EXPECT_NO_THROW(PidGains{}.validate());
}
