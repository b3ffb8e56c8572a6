#include "cyfence/lti.hpp"

#include <cmath>
#include <numbers>

#include "cyfence/error.hpp"

namespace cyf {

namespace {

std::size_t degree(const Poly& p) {
    std::size_t d = p.size();
    while (d > 0 && p[d - 1] == 0.0) --d;
    return d == 0 ? 0 : d - 1;
}

double wrap_pi(double a) {
    while (a > std::numbers::pi) a -= 2 * std::numbers::pi;
    while (a < -std::numbers::pi) a += 2 * std::numbers::pi;
    return a;
}

RationalTf without_delay(const RationalTf& tf) {
    RationalTf r = tf;
    r.delay = 0.0;
    return r;
}

}  // namespace

void RationalTf::validate() const {
    bool any = false;
    for (double c : den) any = any || c != 0.0;
    if (!any) throw Error(Errc::invalid_argument, "transfer function denominator is zero");
    if (den.back() == 0.0) throw Error(Errc::invalid_argument, "leading denominator coefficient is zero");
    if (!(delay >= 0.0)) throw Error(Errc::invalid_argument, "delay must be >= 0");
    for (double c : num)
        if (!std::isfinite(c)) throw Error(Errc::invalid_argument, "non-finite numerator coefficient");
    for (double c : den)
        if (!std::isfinite(c)) throw Error(Errc::invalid_argument, "non-finite denominator coefficient");
}

std::size_t RationalTf::num_degree() const { return degree(num); }
std::size_t RationalTf::den_degree() const { return degree(den); }

RationalTf make_tf(Poly num, Poly den, double delay) {
    if (num.empty()) num = {0.0};
    RationalTf tf{std::move(num), std::move(den), delay};
    tf.validate();
    return tf;
}

Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly r(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    return r;
}

std::complex<double> poly_eval(const Poly& p, std::complex<double> s) {
    std::complex<double> acc = 0.0;
    for (std::size_t i = p.size(); i-- > 0;) acc = acc * s + p[i];
    return acc;
}

std::complex<double> freq_response(const RationalTf& tf, double omega) {
    if (!(omega > 0.0)) throw Error(Errc::invalid_argument, "omega must be > 0");
    const std::complex<double> s(0.0, omega);
    const auto d = poly_eval(tf.den, s);
    if (d == 0.0) throw Error(Errc::evaluation_at_pole, "evaluation at pole");
    auto g = poly_eval(tf.num, s) / d;
    if (tf.delay != 0.0) g *= std::polar(1.0, -omega * tf.delay);
    return g;
}

RationalTf series(const RationalTf& a, const RationalTf& b) {
    return RationalTf{poly_mul(a.num, b.num), poly_mul(a.den, b.den), a.delay + b.delay};
}

double crossover_frequency(const RationalTf& L) {
    // Magnitude does not depend on the delay, so scan the rational part only.
    const RationalTf R = without_delay(L);
    const double lg_lo = std::log(kScanLo), lg_hi = std::log(kScanHi);
    auto grid = [&](int i) { return std::exp(lg_lo + (lg_hi - lg_lo) * i / (kScanPoints - 1)); };
    auto f = [&](double w) { return std::abs(freq_response(R, w)) - 1.0; };

    int last = -1;
    double prev = f(grid(0));
    for (int i = 1; i < kScanPoints; ++i) {
        const double cur = f(grid(i));
        if (prev == 0.0 || (prev > 0.0) != (cur > 0.0)) last = i - 1;
        prev = cur;
    }
    if (last < 0) throw Error(Errc::no_crossover, "no crossover in [1e-3, 1e6] rad/s");

    double lo = grid(last), hi = grid(last + 1);
    const double f_lo = f(lo);
    if (f_lo == 0.0) return lo;
    for (int it = 0; it < 200 && hi / lo - 1.0 > 1e-15; ++it) {
        const double mid = std::sqrt(lo * hi);
        const double fm = f(mid);
        if (fm == 0.0) return mid;
        if ((fm > 0.0) == (f_lo > 0.0))
            lo = mid;
        else
            hi = mid;
    }
    return std::abs(f(lo)) <= std::abs(f(hi)) ? lo : hi;
}

double phase_margin(const RationalTf& L, double omega_c) {
    if (!(omega_c > 0.0)) throw Error(Errc::invalid_argument, "omega_c must be > 0");
    // Unwrap the rational part along the scan grid, then add the exact delay lag.
    const RationalTf R = without_delay(L);
    const double lg_lo = std::log(kScanLo), lg_hi = std::log(kScanHi);
    double w = kScanLo;
    double prev = std::arg(freq_response(R, w));
    double phase = prev;
    for (int i = 1; i < kScanPoints; ++i) {
        const double wi = std::exp(lg_lo + (lg_hi - lg_lo) * i / (kScanPoints - 1));
        if (wi >= omega_c) break;
        const double a = std::arg(freq_response(R, wi));
        phase += wrap_pi(a - prev);
        prev = a;
        w = wi;
    }
    if (omega_c > w) {
        const double a = std::arg(freq_response(R, omega_c));
        phase += wrap_pi(a - prev);
    }
    phase -= omega_c * L.delay;
    return 180.0 + phase * 180.0 / std::numbers::pi;
}

LoopMargins loop_margins(const RationalTf& L) {
    const double wc = crossover_frequency(L);
    return {wc, phase_margin(L, wc)};
}

DiscreteLti::DiscreteLti(std::vector<double> b, std::vector<double> a, double dt, std::size_t delay_samples)
    : b_(std::move(b)), a_(std::move(a)), dt_(dt), fifo_(delay_samples, 0.0) {
    if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "dt must be > 0");
    if (a_.empty() || a_[0] == 0.0) throw Error(Errc::invalid_argument, "a[0] must be nonzero");
    if (b_.empty()) b_ = {0.0};
    if (a_[0] != 1.0) {
        const double a0 = a_[0];
        for (double& c : a_) c /= a0;
        for (double& c : b_) c /= a0;
    }
    reset();
}

void DiscreteLti::reset() {
    for (double& x : fifo_) x = 0.0;
    u_hist_.assign(b_.size() > 1 ? b_.size() - 1 : 0, 0.0);
    y_hist_.assign(a_.size() > 1 ? a_.size() - 1 : 0, 0.0);
}

double DiscreteLti::dc_gain() const {
    double nb = 0.0, na = 0.0;
    for (double c : b_) nb += c;
    for (double c : a_) na += c;
    if (na == 0.0) throw Error(Errc::invalid_argument, "block has no finite DC gain");
    return nb / na;
}

void DiscreteLti::reset_steady(double u) { prime(u, dc_gain() * u); }

void DiscreteLti::prime(double u, double y) {
    for (double& x : fifo_) x = u;
    for (double& x : u_hist_) x = u;
    for (double& x : y_hist_) x = y;
}

double DiscreteLti::step(double u) {
    if (!fifo_.empty()) {
        fifo_.push_back(u);
        u = fifo_.front();
        fifo_.pop_front();
    }
    double y = b_[0] * u;
    for (std::size_t i = 1; i < b_.size(); ++i) y += b_[i] * u_hist_[i - 1];
    for (std::size_t i = 1; i < a_.size(); ++i) y -= a_[i] * y_hist_[i - 1];
    if (!u_hist_.empty()) {
        for (std::size_t i = u_hist_.size() - 1; i > 0; --i) u_hist_[i] = u_hist_[i - 1];
        u_hist_[0] = u;
    }
    if (!y_hist_.empty()) {
        for (std::size_t i = y_hist_.size() - 1; i > 0; --i) y_hist_[i] = y_hist_[i - 1];
        y_hist_[0] = y;
    }
    return y;
}

DiscreteLti discretize_tustin(const RationalTf& tf, double dt) {
    tf.validate();
    if (!(dt > 0.0)) throw Error(Errc::invalid_argument, "dt must be > 0");
    const std::size_t n = tf.den_degree();
    if (tf.num_degree() > n) throw Error(Errc::invalid_argument, "transfer function is not proper");

    // s = c (1 - q) / (1 + q), q = z^-1. Multiply through by (1 + q)^n.
    const double c = 2.0 / dt;
    auto map = [&](const Poly& p) {
        Poly out(n + 1, 0.0);
        for (std::size_t i = 0; i <= n && i < p.size(); ++i) {
            if (p[i] == 0.0) continue;
            Poly term{p[i] * std::pow(c, static_cast<double>(i))};
            for (std::size_t k = 0; k < i; ++k) term = poly_mul(term, {1.0, -1.0});
            for (std::size_t k = i; k < n; ++k) term = poly_mul(term, {1.0, 1.0});
            for (std::size_t k = 0; k < term.size(); ++k) out[k] += term[k];
        }
        return out;
    };
    const double samples = tf.delay / dt;
    const auto d = static_cast<std::size_t>(std::llround(samples));
    return DiscreteLti(map(tf.num), map(tf.den), dt, d);
}

}  // namespace cyf
