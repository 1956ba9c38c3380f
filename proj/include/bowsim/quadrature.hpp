#ifndef BOWSIM_QUADRATURE_HPP
#define BOWSIM_QUADRATURE_HPP

#include <functional>
#include <stdexcept>
#include <vector>

namespace bowsim {

struct QuadratureFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct QuadratureSpec {
    double relative_tolerance = 1e-10;
    int max_subdivisions = 4000;
    double tail_switch = 0.0;  // omega above which the split tail scheme takes over; 0 = auto

    void validate() const {
        if (!(relative_tolerance > 0.0) || relative_tolerance > 1e-3)
            throw QuadratureFailure("QuadratureSpec: relative_tolerance must be in (0, 1e-3]");
        if (max_subdivisions < 8)
            throw QuadratureFailure("QuadratureSpec: max_subdivisions too small");
    }
};

/// Adaptive Gauss-Kronrod (G7,K15) on a finite interval.
/// `scale_hint` guards the relative test when the integral is near zero.
double integrate_gk(const std::function<double(double)>& f, double a, double b,
                    double rel_tol, int max_subdivisions, double scale_hint = 0.0);

/// Single non-adaptive K15 panel with embedded error estimate.
void gk15_panel(const std::function<double(double)>& f, double a, double b,
                double& value, double& error);

/// Euler-transformed sum of an alternating-sign series given its raw terms.
double euler_sum_alternating(const std::vector<double>& terms);

} // namespace bowsim

#endif
