#ifndef BOWSIM_KERNEL_SOLVER_HPP
#define BOWSIM_KERNEL_SOLVER_HPP

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "bowsim/core.hpp"

namespace bowsim {

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonConvergenceError : SolverError {
    NonConvergenceError(const std::string& what, double best)
        : SolverError(what), best_residual(best) {}
    double best_residual;
};
struct RunawayTrajectoryError : SolverError {
    using SolverError::SolverError;
};
struct GridError : SolverError {
    using SolverError::SolverError;
};

/// Graded imaginary-time grid in reduced units (gamma*tau); nodes[0] = 0.
struct TauGrid {
    std::vector<double> nodes;
    double grading = 2.0;

    static TauGrid graded(int n, double tau_max_gamma, double grading = 2.0);
    void validate() const;
    int size() const { return static_cast<int>(nodes.size()); }
    double tau_max() const { return nodes.back(); }
};

struct PotentialSpec {
    enum class Kind { flat, linear_tilt, custom };
    Kind kind = Kind::flat;
    double force = 0.0;  // linear tilt: F = e*E0, pulls the barrier down at x > 0
    std::function<double(double)> dVdx;  // custom V'(x), physical units
    double x_min = 0.0, x_max = 0.0;     // declared domain for custom potentials

    static PotentialSpec flat_barrier() { return {}; }
    static PotentialSpec linear_tilt(double eE0);
    static PotentialSpec custom(std::function<double(double)> dvdx, double x_min,
                                double x_max);
};

struct SolverOptions {
    double tol = 1e-9;       // algebraic residual target (reduced units)
    int max_newton = 40;
    // 1: v ~ c/t; 2: v ~ c/t + d/t^3. The single-term closure leaves a small
    // boundary layer at tau_max that breaks strict monotonicity of v, so the
    // two-term form is the default.
    int tail_fit_order = 2;
};

struct TrajectorySolution {
    TauGrid grid;
    std::vector<double> x;  // x/xi at the nodes
    std::vector<double> v;  // v/(gamma*xi) at the nodes; v[0] = pi
    Scales scales;
    double V = 0.0, hbar = 1.0;
    bool converged = false;
    double residual_norm = 0.0;
    bool truncated = false;  // trajectory exits the barrier at exit_index
    int exit_index = -1;     // v = 0 for i >= exit_index when truncated
    double tail_c = 0.0, tail_d = 0.0;  // v ~ c/T + d/T^3 beyond tau_max
    bool validity_warning = false;

    double x_at_gamma_tau(double gt) const;   // reduced, linear interpolation
    double v_at_gamma_tau(double gt) const;
};

/// Discrete weights W with (W v)_i ~ (1/pi) PV int_0^tau_max v(t1)
/// [1/(t_i - t1) - 1/(t_i + t1)] dt1 for piecewise-linear v (the even
/// extension x(-tau) = x(tau) folds the full-line kernel onto t1 >= 0).
/// Row 0 is zero (the node tau = 0 carries the boundary condition).
/// The closure of the tail beyond tau_max is separate (see SolverOptions).
Eigen::MatrixXd assemble_pv_kernel(const TauGrid& grid);

TrajectorySolution solve_flat(const StringModel& model, const TauGrid& grid,
                              const SolverOptions& opt = {});
TrajectorySolution solve_general(const StringModel& model,
                                 const PotentialSpec& potential,
                                 const TauGrid& grid,
                                 const SolverOptions& opt = {});

struct StringField {
    std::vector<double> y_gamma_over_s;  // reduced |y| grid (y*gamma/s), >= 0
    std::vector<double> gamma_tau;
    std::vector<double> u_over_xi;  // [iy * ntau + it]
    Scales scales;
    std::string source_id;

    double at(int iy, int it) const {
        return u_over_xi[static_cast<size_t>(iy) * gamma_tau.size() + it];
    }
};

/// Harmonic (Poisson-kernel) extension of the even-in-tau boundary data x(tau)
/// into the half plane (|y|/s, tau); u(0,tau) = x(tau).
StringField reconstruct_field(const TrajectorySolution& traj,
                              const std::vector<double>& y_gamma_over_s,
                              const std::vector<double>& gamma_tau);

namespace detail {

// Nonuniform 3-point derivative weights at the grid node i (one-sided at the
// last node).
void derivative_row(const TauGrid& grid, int i, int idx[3], double w[3]);

// Tail closure pieces: fit map (order x n) giving (c[,d]) = cmap * v from the
// last decade of nodes, and per-row factors so that
// tail_i = f1[i]*c + f2[i]*d.
struct TailClosure {
    Eigen::MatrixXd cmap;
    Eigen::VectorXd f1, f2;
    int order;
};
TailClosure make_tail_closure(const TauGrid& grid, int order);

// Reduced equation right-hand side factor: (pi^2/2) * f_red(x') with
// f_red = -xi V'(x)/V.
double reduced_force(const PotentialSpec& pot, const StringModel& model,
                     const Scales& sc, double x_reduced);

} // namespace detail

} // namespace bowsim

#endif
