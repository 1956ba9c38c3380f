#include "bowsim/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bowsim {

namespace {

constexpr double kPi = std::numbers::pi;

double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }

// Head integral over [0, W0] with the w = tan(theta) substitution; the
// integrand must be given as f(w).
double head_tan(const std::function<double(double)>& f, double W0,
                const QuadratureSpec& spec, double scale_hint) {
    const double th1 = std::atan(W0);
    auto g = [&](double th) {
        const double c = std::cos(th);
        const double w = std::tan(th);
        return f(w) / (c * c);
    };
    return integrate_gk(g, 0.0, th1, spec.relative_tolerance, spec.max_subdivisions,
                        scale_hint);
}

// Oscillatory tail int_W0^inf amp(w) * osc(w*T) dw, split at the zeros of the
// oscillating factor, Euler-accelerated. zero0_phase is the phase of the first
// zero (pi/2 for cos, pi for sin).
double oscillatory_tail(const std::function<double(double)>& amp,
                        const std::function<double(double)>& osc, double T,
                        double W0, double zero0_phase, const QuadratureSpec& spec,
                        double scale_hint) {
    auto f = [&](double w) { return amp(w) * osc(w * T); };
    if (T <= 0.0) {
        // no oscillation: integrate by octaves until the increments die out
        double acc = 0.0, a = W0;
        for (int k = 0; k < 60; ++k) {
            const double b = 2.0 * a;
            const double seg = integrate_gk(f, a, b, spec.relative_tolerance,
                                            spec.max_subdivisions / 4, scale_hint);
            acc += seg;
            if (std::abs(seg) < 0.25 * spec.relative_tolerance *
                                    std::max(std::abs(acc), scale_hint))
                return acc;
            a = b;
        }
        return acc;
    }
    // first zero at or beyond W0
    const double period = kPi / T;
    double z = (std::ceil((W0 * T - zero0_phase) / kPi) * kPi + zero0_phase) / T;
    if (z <= W0) z += period;
    double acc = integrate_gk(f, W0, z, spec.relative_tolerance,
                              spec.max_subdivisions, scale_hint);
    std::vector<double> terms;
    terms.reserve(48);
    const double floor = 1e-3 * spec.relative_tolerance *
                         std::max(std::abs(acc), std::max(scale_hint, 1e-30));
    for (int k = 0; k < 48; ++k) {
        double val, err;
        gk15_panel(f, z, z + period, val, err);
        if (err > 1e-3 * std::abs(val) + 1e-300) {
            val = integrate_gk(f, z, z + period, 1e-12, 64, scale_hint);
        }
        terms.push_back(val);
        z += period;
        if (std::abs(val) < floor) break;
    }
    return acc + euler_sum_alternating(terms);
}

double auto_W0(double T, const QuadratureSpec& spec) {
    if (spec.tail_switch > 0.0) return spec.tail_switch;
    if (T <= 0.0) return 4.0;
    return clamp(8.0 * kPi / T, 1.0, 64.0);
}

} // namespace

namespace reduced {

double u_reduced(double a, double T, const QuadratureSpec& spec) {
    spec.validate();
    a = std::abs(a);
    T = std::abs(T);
    if (a == 0.0 && T == 0.0) return 0.0;
    const double W0 = auto_W0(T, spec);
    auto integrand = [&](double w) {
        const double damp = (a > 0.0) ? std::exp(-w * a) : 1.0;
        return 2.0 * (1.0 - damp * std::cos(w * T)) / (w * (w + 1.0));
    };
    // the 1 - exp*cos factor cancels the 1/w endpoint; rewrite for w -> 0
    auto integrand_safe = [&](double w) {
        if (w > 1e-8) return integrand(w);
        // 1 - e^{-wa} cos(wT) = w a + w^2 (T^2 - a^2)/2 + O(w^3)
        return 2.0 * (a + 0.5 * w * (T * T - a * a)) / (w + 1.0);
    };
    const double head = head_tan(integrand_safe, W0, spec, 0.0);
    const double const_tail = 2.0 * std::log((W0 + 1.0) / W0);
    auto amp = [&](double w) {
        const double damp = (a > 0.0) ? std::exp(-w * a) : 1.0;
        return 2.0 * damp / (w * (w + 1.0));
    };
    auto osc = [](double phi) { return std::cos(phi); };
    const double scale = std::max(std::abs(head) + const_tail, 1e-12);
    const double osc_tail =
        oscillatory_tail(amp, osc, T, W0, 0.5 * kPi, spec, scale);
    return head + const_tail - osc_tail;
}

double v_reduced(double T, const QuadratureSpec& spec) {
    spec.validate();
    if (T == 0.0) return kPi;
    T = std::abs(T);
    const double W0 = auto_W0(T, spec);
    auto f = [&](double w) { return 2.0 * std::sin(w * T) / (w + 1.0); };
    const double head = head_tan(f, W0, spec, kPi);
    auto amp = [](double w) { return 2.0 / (w + 1.0); };
    auto osc = [](double phi) { return std::sin(phi); };
    const double tail = oscillatory_tail(amp, osc, T, W0, kPi, spec, kPi);
    return head + tail;
}

double slope_reduced(double a, double T, const QuadratureSpec& spec) {
    spec.validate();
    T = std::abs(T);
    const double W0 = auto_W0(T, spec);
    auto f = [&](double w) {
        return 2.0 * std::exp(-w * a) * std::cos(w * T) / (w + 1.0);
    };
    const double head = head_tan(f, W0, spec, 0.0);
    auto amp = [&](double w) { return 2.0 * std::exp(-w * a) / (w + 1.0); };
    auto osc = [](double phi) { return std::cos(phi); };
    const double scale = std::max(std::abs(head), 1e-12);
    const double tail = oscillatory_tail(amp, osc, T, W0, 0.5 * kPi, spec, scale);
    return head + tail;
}

} // namespace reduced

double eval_u(double y, double tau, const StringModel& model,
              const QuadratureSpec& spec) {
    const Scales sc = derive_scales(model);
    const double a = sc.gamma * std::abs(y) / model.s;
    const double T = sc.gamma * tau;
    return sc.xi * reduced::u_reduced(a, T, spec);
}

double eval_x(double tau, const StringModel& model, const QuadratureSpec& spec) {
    return eval_u(0.0, tau, model, spec);
}

double eval_velocity(double tau, const StringModel& model,
                     const QuadratureSpec& spec) {
    const Scales sc = derive_scales(model);
    return sc.gamma * sc.xi * reduced::v_reduced(sc.gamma * tau, spec);
}

double eval_particle_energy(double tau, const StringModel& model,
                            const QuadratureSpec& spec) {
    const double v = eval_velocity(tau, model, spec);
    return -0.5 * model.m * v * v + model.V;
}

double eval_string_slope(double y, double tau, const StringModel& model,
                         const QuadratureSpec& spec) {
    if (y == 0.0)
        throw std::domain_error("eval_string_slope: y must be nonzero");
    const Scales sc = derive_scales(model);
    const double a = sc.gamma * std::abs(y) / model.s;
    const double sgn = (y > 0.0) ? 1.0 : -1.0;
    return sgn * (sc.gamma * sc.xi / model.s) *
           reduced::slope_reduced(a, sc.gamma * tau, spec);
}

LimitingX limiting_x(double tau, const StringModel& model,
                     const QuadratureSpec& spec) {
    const Scales sc = derive_scales(model);
    const double T = sc.gamma * tau;
    if (T <= 0.01) return {sc.xi * kPi * T, AsymptoticBranch::small_tau};
    if (T >= 100.0) return {2.0 * sc.xi * std::log(T), AsymptoticBranch::large_tau};
    return {eval_x(tau, model, spec), AsymptoticBranch::interpolated};
}

double invert_x(double x, const StringModel& model, const QuadratureSpec& spec) {
    if (x < 0.0) throw std::domain_error("invert_x: x must be >= 0");
    if (x == 0.0) return 0.0;
    const Scales sc = derive_scales(model);
    auto xr = [&](double T) { return reduced::u_reduced(0.0, T, spec); };
    const double target = x / sc.xi;
    double lo = 0.0, hi = std::max(target / kPi, 1e-12);
    while (xr(hi) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw std::runtime_error("invert_x: bracketing failed");
    }
    // bisection with a secant refinement; x(T) is strictly increasing
    double flo = (lo > 0.0 ? xr(lo) : 0.0) - target;
    double fhi = xr(hi) - target;
    for (int it = 0; it < 200 && (hi - lo) > 1e-10 * std::max(hi, 1e-30); ++it) {
        double mid = 0.5 * (lo + hi);
        if (it % 3 == 2 && fhi != flo) {
            const double sec = hi - fhi * (hi - lo) / (fhi - flo);
            if (sec > lo && sec < hi) mid = sec;
        }
        const double fm = xr(mid) - target;
        if (fm < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
            fhi = fm;
        }
    }
    return 0.5 * (lo + hi) / sc.gamma;
}

std::vector<ProfilePoint> profile_batch(const StringModel& model,
                                        const std::vector<double>& gamma_taus,
                                        const std::vector<double>& y_over_xi,
                                        const QuadratureSpec& spec) {
    const Scales sc = derive_scales(model);
    std::vector<ProfilePoint> out;
    out.reserve(gamma_taus.size() * y_over_xi.size());
    for (double gt : gamma_taus) {
        for (double yx : y_over_xi) {
            const double y = yx * sc.xi;
            const double u = eval_u(y, gt / sc.gamma, model, spec);
            out.push_back({yx, gt, u / sc.xi});
        }
    }
    return out;
}

} // namespace bowsim
