#pragma once

#include <complex>
#include <cstddef>
#include <deque>
#include <vector>

namespace cyf {

// Polynomial in s, ascending powers.
using Poly = std::vector<double>;

struct RationalTf {
    Poly num;
    Poly den;
    double delay = 0.0;  // s

    void validate() const;
    std::size_t num_degree() const;
    std::size_t den_degree() const;
};

RationalTf make_tf(Poly num, Poly den, double delay = 0.0);

Poly poly_mul(const Poly& a, const Poly& b);
std::complex<double> poly_eval(const Poly& p, std::complex<double> s);

std::complex<double> freq_response(const RationalTf& tf, double omega);
RationalTf series(const RationalTf& a, const RationalTf& b);

struct LoopMargins {
    double omega_c = 0.0;  // rad/s
    double phi_m = 0.0;    // deg
};

// Scan range and resolution for the crossover search.
constexpr double kScanLo = 1e-3;
constexpr double kScanHi = 1e6;
constexpr int kScanPoints = 2000;

double crossover_frequency(const RationalTf& L);
double phase_margin(const RationalTf& L, double omega_c);
LoopMargins loop_margins(const RationalTf& L);

// Difference equation y[k] = sum b_i u[k-i] - sum_{i>=1} a_i y[k-i], a_0 = 1,
// fed through an input FIFO of delay_samples.
class DiscreteLti {
public:
    DiscreteLti(std::vector<double> b, std::vector<double> a, double dt, std::size_t delay_samples = 0);

    double step(double u);
    void reset();
    // Put every stored sample at the steady state for a constant input.
    void reset_steady(double u);
    // Fill the input history (FIFO included) with u and the output history with y.
    void prime(double u, double y);

    const std::vector<double>& input_coeffs() const { return b_; }
    const std::vector<double>& output_coeffs() const { return a_; }
    double dt() const { return dt_; }
    std::size_t delay_samples() const { return fifo_.size(); }
    double dc_gain() const;

private:
    std::vector<double> b_, a_;
    double dt_;
    std::deque<double> fifo_;
    std::vector<double> u_hist_, y_hist_;  // most recent first
};

DiscreteLti discretize_tustin(const RationalTf& tf, double dt);

}  // namespace cyf
