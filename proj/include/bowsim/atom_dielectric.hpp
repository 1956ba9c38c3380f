#ifndef BOWSIM_ATOM_DIELECTRIC_HPP
#define BOWSIM_ATOM_DIELECTRIC_HPP

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bowsim {

struct ScenarioError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ZeroVelocityError : ScenarioError {
    using ScenarioError::ScenarioError;
};

/// Single-relaxation (Debye) dielectric with a phonon scale above the dipole
/// relaxation frequency.
struct DielectricModel {
    double eps0 = 2.0;
    double eps_inf = 1.0;
    double omega0 = 1e-6;    // dipole relaxation frequency
    double omega_ph = 1e-3;  // phonon frequency
    void validate() const;
};

struct AtomDielectricScenario {
    double R = 1e4;        // atom-surface distance
    double a_B = 1.0;      // Bohr radius (sets the length unit)
    double V_ryd = 1.0;    // rydberg energy (sets the energy unit)
    double hbar = 1.0;
    DielectricModel dielectric;
    double hbar_c_over_e2 = 137.036;

    void validate() const;
    double electron_mass() const { return hbar * hbar / (2.0 * V_ryd * a_B * a_B); }
    double e_squared() const { return 2.0 * V_ryd * a_B; }

    /// Parameters of Fig.-5 type maps: V/(hbar w0) = 1e6, V/(hbar w_ph) = 1e3,
    /// a_B = 1 Angstrom unit, eps0 = 2.
    static AtomDielectricScenario fig5_preset(double R_over_aB = 1e4);
};

/// A value from an order-of-magnitude formula carries the estimate tag;
/// exact-formula outputs do not.
struct Estimate {
    double value;
    bool order_of_magnitude;
};

enum class Regime { large_R_ohmic, intermediate_R_nonohmic, small_R_nonohmic };

std::string regime_label(Regime r);

struct RegimeReport {
    Regime regime;
    double R_small_to_intermediate;  // a_B V/(hbar w_ph)
    double R_intermediate_to_large;  // a_B V/(hbar w0)
    double effective_damping;        // gamma (ohmic) or 1/tau0 (nonohmic)
    double coherence_length;
    bool near_boundary;  // within a factor 3 of a band edge
};

/// Debye permittivity eps(w) = eps_inf + (eps0-eps_inf)/(1 - i w/w0).
std::complex<double> epsilon(double omega, const DielectricModel& d);

struct OhmicDamping {
    double gamma;
    bool outside_large_R;  // formula evaluated outside its regime of validity
};

/// hbar*gamma/V = (eps0-eps_inf)/(2(1+eps0)^2) * (V/hbar w0) * (a_B/R)^3.
OhmicDamping damping_ohmic(const AtomDielectricScenario& scn);

RegimeReport classify_regime(const AtomDielectricScenario& scn);

/// Piecewise coherence length: a_B (V/hbar w_ph)^2 (small R),
/// a_B (R/a_B)^2 (intermediate), a_B (hbar w0/V)(R/a_B)^3 (large R).
Estimate coherence_length(const AtomDielectricScenario& scn);

struct RepulsionBound {
    double R_max;
    bool capped_at_band_edge;
};

/// Largest R with xi(R) <= L (the bow state needs xi below the surface size).
RepulsionBound repulsion_layer_bound(const AtomDielectricScenario& scn, double L);

/// Calibrated so that eps0 = 2 with hydrogen alpha = 9 a_B^3/2 reproduces the
/// -37.3 V (a_B/R)^4 coefficient.
double default_vdw_phi(double eps0);

double hydrogen_polarizability(double a_B);

/// U = -(3 hbar c alpha / 8 pi R^4) (eps0-1)/(eps0+1) phi(eps0).
/// Valid for R > c/Omega_0 ~ 500 Angstrom; `far_field_valid` reports that check.
double vdw_energy(const AtomDielectricScenario& scn, double alpha,
                  const std::function<double(double)>& phi,
                  bool* far_field_valid = nullptr);

/// e E_bow = (V/xi) sqrt(hbar gamma_eff / V).
Estimate bow_field_estimate(const AtomDielectricScenario& scn, double xi,
                            double gamma_eff, bool* semiclassical = nullptr);

/// Usual vacuum Lamb shift, delta E ~ V g^3 ln(1/g).
Estimate lamb_shift_usual(double g, double V_ryd);

/// Dielectric contribution: (hbar gamma/2 pi) ln(hbar c/e^2) at large R;
/// hbar/tau0 at small R (order of magnitude).
Estimate lamb_shift_dielectric(const AtomDielectricScenario& scn, double gamma_eff);

/// Friction power: m gamma v^2 (ohmic), (e^2/R^2)|v| (intermediate),
/// e^2 w_ph^2/|v| (small R).
double dissipation_rate(double velocity, const AtomDielectricScenario& scn);

/// tau0 = (hbar/V)(R/a_B)^2 (intermediate) or (hbar/V)(V/hbar w_ph)^2 (small R).
Estimate nonohmic_tau0(const AtomDielectricScenario& scn);

struct RegimeMapRow {
    double log10_R_over_aB;
    double log10_xi_over_aB;
    std::string regime;
};

/// Fig.-5 style map rows; default sweep R/a_B in [10^0.5, 10^7] at
/// `points_per_decade` samples per decade.
std::vector<RegimeMapRow> regime_map(const AtomDielectricScenario& preset,
                                     double log10_R_min = 0.5,
                                     double log10_R_max = 7.0,
                                     int points_per_decade = 20);

} // namespace bowsim

#endif
