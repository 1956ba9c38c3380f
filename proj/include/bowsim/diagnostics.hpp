#ifndef BOWSIM_DIAGNOSTICS_HPP
#define BOWSIM_DIAGNOSTICS_HPP

#include <string>
#include <vector>

#include "bowsim/core.hpp"
#include "bowsim/kernel_solver.hpp"

namespace bowsim {

struct GridCoverageError : SolverError {
    using SolverError::SolverError;
};

/// Energy components at one imaginary time, in lab units. The string kinetic
/// part is stored as a positive magnitude; the imaginary-time sign convention
/// enters E_total = E_particle + E_string_elastic - E_string_kinetic.
struct EnergyBreakdown {
    double gamma_tau;
    double E_particle;
    double E_string_elastic;
    double E_string_kinetic;
    double E_total;
};

/// Quadrature over the field's y-grid (same tail closure as the field) of the
/// string energy densities, via the conjugate-Poisson and Poisson transforms
/// of the trajectory velocity.
EnergyBreakdown energy_breakdown(const TrajectorySolution& traj,
                                 const StringField& field, double gamma_tau);

/// E = (m gamma/pi) int_0^inf dt1 v(t1) int_0^inf v(t2) dt2/(t1+t2)
/// by tensor product integration on the graded grid with the trajectory's
/// tail closure. Lab units.
double total_energy_double_integral(const TrajectorySolution& traj);

struct ActionSample {
    double x_over_xi;
    double action;      // in units of hbar
    double wkb_action;  // (2|x|/hbar) sqrt(2 m V)
    double ratio;
};

struct ActionCurve {
    std::vector<ActionSample> samples;
    double ratio_at(double x_over_xi) const;  // monotone interpolation
};

/// Cumulative -4T/hbar along the trajectory, reparametrized to x; T includes
/// the particle and the string kinetic parts.
ActionCurve action_curve(const TrajectorySolution& traj, const StringModel& model);

struct FieldSweepEntry {
    double eE0;             // lab units, energy/length
    double eE0_xi_over_V;   // reduced field
    double bow_energy;      // lab units
    double gamma_tau0;      // half-decay time of v
    bool beyond_quantum_limit;  // eE0 >= F_c = V/xi_q
    bool converged;
    std::string error;
};

struct FieldSweepResult {
    std::vector<FieldSweepEntry> entries;
    /// field where the bow energy crosses V/2 (log-linear interpolation);
    /// NaN when the sweep does not bracket it
    double crossover_eE0_xi_over_V;
};

/// Solve the tilted problem for each field and evaluate the bow energy.
/// Entries run in a small worker pool; per-entry solver failures are recorded,
/// not thrown.
FieldSweepResult bow_energy_sweep(const StringModel& model,
                                  const std::vector<double>& eE0_values,
                                  const TauGrid& grid,
                                  const SolverOptions& opt = {});

/// Wide logarithmic y-grid (reduced y*gamma/s) suitable for the energy
/// quadratures.
std::vector<double> default_energy_y_grid();

} // namespace bowsim

#endif
