#include "bowsim/atom_dielectric.hpp"

#include <cmath>
#include <numbers>

namespace bowsim {

namespace {
constexpr double kPi = std::numbers::pi;
// default_vdw_phi calibration: 37.3 = phi * 3*137.036*(9/2)*2/(8 pi * 3)
constexpr double kPhiHydrogenEps2 = 0.76009696;
}  // namespace

void DielectricModel::validate() const {
    if (!(eps0 > eps_inf) || !(eps_inf >= 1.0))
        throw ScenarioError("DielectricModel: need eps0 > eps_inf >= 1");
    if (!(omega0 > 0.0) || !(omega0 < omega_ph))
        throw ScenarioError("DielectricModel: need 0 < omega0 < omega_ph");
}

void AtomDielectricScenario::validate() const {
    dielectric.validate();
    if (!(R > a_B))
        throw ScenarioError("AtomDielectricScenario: R must exceed a_B");
    if (!(a_B > 0.0) || !(V_ryd > 0.0) || !(hbar > 0.0))
        throw ScenarioError("AtomDielectricScenario: positive scales required");
}

AtomDielectricScenario AtomDielectricScenario::fig5_preset(double R_over_aB) {
    AtomDielectricScenario scn;
    scn.a_B = 1.0;
    scn.V_ryd = 1.0;
    scn.hbar = 1.0;
    scn.R = R_over_aB * scn.a_B;
    scn.dielectric.eps0 = 2.0;
    scn.dielectric.eps_inf = 1.0;
    scn.dielectric.omega0 = 1e-6;   // V/(hbar w0) = 1e6
    scn.dielectric.omega_ph = 1e-3; // V/(hbar w_ph) = 1e3
    return scn;
}

std::string regime_label(Regime r) {
    switch (r) {
        case Regime::large_R_ohmic: return "large_R_ohmic";
        case Regime::intermediate_R_nonohmic: return "intermediate_R_nonohmic";
        case Regime::small_R_nonohmic: return "small_R_nonohmic";
    }
    return "?";
}

std::complex<double> epsilon(double omega, const DielectricModel& d) {
    d.validate();
    const std::complex<double> den(1.0, -omega / d.omega0);
    return d.eps_inf + (d.eps0 - d.eps_inf) / den;
}

OhmicDamping damping_ohmic(const AtomDielectricScenario& scn) {
    scn.validate();
    const auto& d = scn.dielectric;
    const double ratio = scn.a_B / scn.R;
    const double hg_over_V = (d.eps0 - d.eps_inf) /
                             (2.0 * (1.0 + d.eps0) * (1.0 + d.eps0)) *
                             (scn.V_ryd / (scn.hbar * d.omega0)) *
                             ratio * ratio * ratio;
    OhmicDamping out;
    out.gamma = hg_over_V * scn.V_ryd / scn.hbar;
    out.outside_large_R = scn.R < scn.a_B * scn.V_ryd / (scn.hbar * d.omega0);
    return out;
}

RegimeReport classify_regime(const AtomDielectricScenario& scn) {
    scn.validate();
    RegimeReport rep;
    rep.R_small_to_intermediate =
        scn.a_B * scn.V_ryd / (scn.hbar * scn.dielectric.omega_ph);
    rep.R_intermediate_to_large =
        scn.a_B * scn.V_ryd / (scn.hbar * scn.dielectric.omega0);
    if (scn.R >= rep.R_intermediate_to_large) {
        rep.regime = Regime::large_R_ohmic;
        rep.effective_damping = damping_ohmic(scn).gamma;
    } else if (scn.R >= rep.R_small_to_intermediate) {
        rep.regime = Regime::intermediate_R_nonohmic;
        const double r = scn.R / scn.a_B;
        rep.effective_damping = scn.V_ryd / (scn.hbar * r * r);  // 1/tau0
    } else {
        rep.regime = Regime::small_R_nonohmic;
        const double w = scn.hbar * scn.dielectric.omega_ph / scn.V_ryd;
        rep.effective_damping = (scn.V_ryd / scn.hbar) * w * w;  // 1/tau0
    }
    rep.coherence_length = coherence_length(scn).value;
    rep.near_boundary =
        (scn.R > rep.R_small_to_intermediate / 3.0 &&
         scn.R < rep.R_small_to_intermediate * 3.0) ||
        (scn.R > rep.R_intermediate_to_large / 3.0 &&
         scn.R < rep.R_intermediate_to_large * 3.0);
    return rep;
}

Estimate coherence_length(const AtomDielectricScenario& scn) {
    scn.validate();
    const double R1 = scn.a_B * scn.V_ryd / (scn.hbar * scn.dielectric.omega_ph);
    const double R2 = scn.a_B * scn.V_ryd / (scn.hbar * scn.dielectric.omega0);
    const double r = scn.R / scn.a_B;
    double xi;
    if (scn.R >= R2) {
        xi = scn.a_B * (scn.hbar * scn.dielectric.omega0 / scn.V_ryd) * r * r * r;
    } else if (scn.R >= R1) {
        xi = scn.a_B * r * r;
    } else {
        const double q = scn.V_ryd / (scn.hbar * scn.dielectric.omega_ph);
        xi = scn.a_B * q * q;
    }
    return {xi, true};
}

RepulsionBound repulsion_layer_bound(const AtomDielectricScenario& scn, double L) {
    scn.validate();
    if (!(L > 0.0)) throw ScenarioError("repulsion_layer_bound: L must be positive");
    const double R1 = scn.a_B * scn.V_ryd / (scn.hbar * scn.dielectric.omega_ph);
    const double R2 = scn.a_B * scn.V_ryd / (scn.hbar * scn.dielectric.omega0);
    const double plateau = coherence_length(
        [&] { auto s = scn; s.R = std::max(1.5 * scn.a_B, 0.5 * R1); return s; }())
        .value;
    if (L < plateau)
        throw ScenarioError(
            "repulsion_layer_bound: no R in the regime bands satisfies xi <= L");
    // intermediate band: xi = a_B (R/a_B)^2  =>  R = a_B sqrt(L/a_B)
    const double R_int = scn.a_B * std::sqrt(L / scn.a_B);
    if (R_int < R2) return {std::max(R_int, R1), false};
    return {R2, true};  // beyond the right edge the map continues as R^3
}

double default_vdw_phi(double /*eps0*/) { return kPhiHydrogenEps2; }

double hydrogen_polarizability(double a_B) { return 4.5 * a_B * a_B * a_B; }

double vdw_energy(const AtomDielectricScenario& scn, double alpha,
                  const std::function<double(double)>& phi,
                  bool* far_field_valid) {
    scn.validate();
    const double eps0 = scn.dielectric.eps0;
    const double hbar_c = scn.hbar_c_over_e2 * scn.e_squared();
    const double R4 = std::pow(scn.R, 4);
    const double U = -(3.0 * hbar_c * alpha / (8.0 * kPi * R4)) *
                     ((eps0 - 1.0) / (eps0 + 1.0)) * phi(eps0);
    if (far_field_valid) {
        // R > c/Omega_0 with Omega_0 ~ V/hbar: c = 137.036 e^2/hbar
        const double c_over_Omega0 =
            scn.hbar_c_over_e2 * scn.e_squared() / scn.V_ryd;
        *far_field_valid = scn.R > c_over_Omega0;
    }
    return U;
}

Estimate bow_field_estimate(const AtomDielectricScenario& scn, double xi,
                            double gamma_eff, bool* semiclassical) {
    scn.validate();
    if (!(xi > 0.0)) throw ScenarioError("bow_field_estimate: xi must be positive");
    const double hg_over_V = scn.hbar * gamma_eff / scn.V_ryd;
    if (semiclassical) *semiclassical = hg_over_V < 1.0;
    return {(scn.V_ryd / xi) * std::sqrt(hg_over_V), true};
}

Estimate lamb_shift_usual(double g, double V_ryd) {
    if (!(g > 0.0) || !(g < 1.0))
        throw ScenarioError("lamb_shift_usual: coupling must satisfy 0 < g < 1");
    return {V_ryd * g * g * g * std::log(1.0 / g), true};
}

Estimate lamb_shift_dielectric(const AtomDielectricScenario& scn,
                               double gamma_eff) {
    const RegimeReport rep = classify_regime(scn);
    if (gamma_eff == 0.0) return {0.0, rep.regime != Regime::large_R_ohmic};
    if (rep.regime == Regime::large_R_ohmic) {
        return {(scn.hbar * gamma_eff / (2.0 * kPi)) *
                    std::log(scn.hbar_c_over_e2),
                false};
    }
    return {scn.hbar * gamma_eff, true};  // ~ hbar/tau0
}

double dissipation_rate(double velocity, const AtomDielectricScenario& scn) {
    const RegimeReport rep = classify_regime(scn);
    const double e2 = scn.e_squared();
    switch (rep.regime) {
        case Regime::large_R_ohmic: {
            const double gamma = damping_ohmic(scn).gamma;
            return scn.electron_mass() * gamma * velocity * velocity;
        }
        case Regime::intermediate_R_nonohmic:
            if (velocity == 0.0)
                throw ZeroVelocityError(
                    "dissipation_rate: nonohmic friction undefined at v = 0");
            return (e2 / (scn.R * scn.R)) * std::abs(velocity);
        case Regime::small_R_nonohmic:
            if (velocity == 0.0)
                throw ZeroVelocityError(
                    "dissipation_rate: nonohmic friction undefined at v = 0");
            return e2 * scn.dielectric.omega_ph * scn.dielectric.omega_ph /
                   std::abs(velocity);
    }
    throw ScenarioError("dissipation_rate: unreachable");
}

Estimate nonohmic_tau0(const AtomDielectricScenario& scn) {
    const RegimeReport rep = classify_regime(scn);
    if (rep.regime == Regime::large_R_ohmic)
        throw ScenarioError("nonohmic_tau0: scenario is in the ohmic regime");
    return {1.0 / rep.effective_damping, true};
}

std::vector<RegimeMapRow> regime_map(const AtomDielectricScenario& preset,
                                     double log10_R_min, double log10_R_max,
                                     int points_per_decade) {
    if (points_per_decade < 1)
        throw ScenarioError("regime_map: points_per_decade must be >= 1");
    std::vector<RegimeMapRow> rows;
    const int npts = static_cast<int>(
        std::lround((log10_R_max - log10_R_min) * points_per_decade)) + 1;
    for (int i = 0; i < npts; ++i) {
        const double lg =
            log10_R_min + (log10_R_max - log10_R_min) * i / (npts - 1);
        AtomDielectricScenario scn = preset;
        scn.R = scn.a_B * std::pow(10.0, lg);
        const RegimeReport rep = classify_regime(scn);
        rows.push_back({lg, std::log10(rep.coherence_length / scn.a_B),
                        regime_label(rep.regime)});
    }
    return rows;
}

} // namespace bowsim
