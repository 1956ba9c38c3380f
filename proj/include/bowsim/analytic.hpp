#ifndef BOWSIM_ANALYTIC_HPP
#define BOWSIM_ANALYTIC_HPP

#include <vector>

#include "bowsim/core.hpp"
#include "bowsim/quadrature.hpp"

namespace bowsim {

/// String displacement u(y,tau) of the flat-barrier bow solution,
///   u = xi * int_0^inf [2g/(w(w+g))] (1 - exp(-w|y|/s) cos(w tau)) dw.
/// Evaluated by adaptive quadrature below the tail switch and a
/// zero-of-cosine split with Euler acceleration above it.
double eval_u(double y, double tau, const StringModel& model,
              const QuadratureSpec& spec = {});

/// Particle path x(tau) = u(0,tau).
double eval_x(double tau, const StringModel& model, const QuadratureSpec& spec = {});

/// dx/dtau; tends to sqrt(2V/m) as tau -> 0+ (the delta-well condition).
double eval_velocity(double tau, const StringModel& model,
                     const QuadratureSpec& spec = {});

/// E_p(tau) = -(m/2)(dx/dtau)^2 + V; zero at tau = 0, V at tau -> inf.
double eval_particle_energy(double tau, const StringModel& model,
                            const QuadratureSpec& spec = {});

/// du/dy; odd in y, y != 0 required.
double eval_string_slope(double y, double tau, const StringModel& model,
                         const QuadratureSpec& spec = {});

enum class AsymptoticBranch { small_tau, interpolated, large_tau };

struct LimitingX {
    double value;
    AsymptoticBranch branch;
};

/// Piecewise asymptotic form of x(tau): pi*gamma*tau*xi for gamma*tau <= 0.01,
/// 2*xi*ln(gamma*tau) for gamma*tau >= 100, full quadrature (flagged) between.
LimitingX limiting_x(double tau, const StringModel& model,
                     const QuadratureSpec& spec = {});

/// Invert the monotone map x(tau); relative tolerance 1e-10 on tau.
double invert_x(double x, const StringModel& model, const QuadratureSpec& spec = {});

struct ProfilePoint {
    double y_over_xi;
    double gamma_tau;
    double u_over_xi;
};

/// Batch profile rows (y/xi, gamma_tau, u/xi) for a rectangular grid of
/// requested curves; row-major over gamma_tau, then y.
std::vector<ProfilePoint> profile_batch(const StringModel& model,
                                        const std::vector<double>& gamma_taus,
                                        const std::vector<double>& y_over_xi,
                                        const QuadratureSpec& spec = {});

namespace reduced {
// Reduced-unit kernels (gamma = xi = s = 1); exposed for tests and the solver.
double u_reduced(double a, double T, const QuadratureSpec& spec);
double v_reduced(double T, const QuadratureSpec& spec);
double slope_reduced(double a, double T, const QuadratureSpec& spec);
}

} // namespace bowsim

#endif
