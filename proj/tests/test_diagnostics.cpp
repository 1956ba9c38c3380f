#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bowsim/diagnostics.hpp"
#include "bowsim/kernel_solver.hpp"
#include "oracles.hpp"

using namespace bowsim;
namespace {

StringModel default_model() {
    StringModel m;
    m.m = 1.0;
    m.V = 0.5;
    m.rho = 0.05;
    m.s = 1.0;
    return m;
}

// trajectory carrying closed-form samples; the oracle side of the dual route
TrajectorySolution analytic_trajectory(int n = 1600, double tmax = 50.0) {
    const StringModel m = default_model();
    TrajectorySolution t;
    t.grid = TauGrid::graded(n, tmax, 2.0);
    t.scales = derive_scales(m);
    t.V = m.V;
    t.hbar = m.hbar;
    t.v.resize(n);
    t.x.resize(n);
    for (int i = 0; i < n; ++i) {
        t.v[i] = oracles::v_cf(t.grid.nodes[i]);
        t.x[i] = oracles::x_cf(t.grid.nodes[i]);
    }
    t.converged = true;
    t.residual_norm = 0.0;
    t.tail_c = 2.0;  // v -> 2/T - 4/T^3 + ...
    t.tail_d = -4.0;
    return t;
}

StringField energy_carrier(const TrajectorySolution& traj) {
    StringField f;
    f.y_gamma_over_s = default_energy_y_grid();
    f.scales = traj.scales;
    return f;
}

}  // namespace

TEST_CASE("total energy: the double integral gives V on the flat trajectory") {
    const TrajectorySolution traj = analytic_trajectory();
    const double E = total_energy_double_integral(traj);
    CHECK(std::abs(E - traj.V) / traj.V < 5e-3);
}

TEST_CASE("total energy is bilinear: scaling v by lambda scales E by lambda^2") {
    TrajectorySolution traj = analytic_trajectory(400);
    const double E1 = total_energy_double_integral(traj);
    for (auto& v : traj.v) v *= 2.0;
    traj.tail_c *= 2.0;
    traj.tail_d *= 2.0;
    const double E2 = total_energy_double_integral(traj);
    CHECK(E2 / E1 == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("truncating the integration support loses energy monotonically") {
    TrajectorySolution t5 = analytic_trajectory(400, 50.0);
    const double E50 = total_energy_double_integral(t5);
    TrajectorySolution t_cut = analytic_trajectory(400, 50.0);
    t_cut.truncated = true;
    t_cut.exit_index = 200;  // support cut at an interior node, no tail
    const double Ecut = total_energy_double_integral(t_cut);
    CHECK(Ecut < E50);
    CHECK(std::abs(E50 - t5.V) < std::abs(Ecut - t5.V));
}

TEST_CASE("energy breakdown on the flat case: endpoints and conservation") {
    const TrajectorySolution traj = analytic_trajectory();
    const StringField carrier = energy_carrier(traj);

    const EnergyBreakdown e0 = energy_breakdown(traj, carrier, 0.0);
    CHECK(std::abs(e0.E_particle) < 1e-10);
    CHECK(std::abs(e0.E_string_kinetic) < 1e-3 * traj.V);  // string stops
    CHECK(std::abs(e0.E_total - traj.V) / traj.V < 5e-3);
    CHECK(std::abs(e0.E_string_elastic - e0.E_total) / traj.V < 1e-3);

    const EnergyBreakdown e10 = energy_breakdown(traj, carrier, 10.0);
    CHECK(e10.E_particle >= 0.9 * traj.V);

    double worst = 0.0, prev_Ep = -1.0, prev_str = 2.0 * traj.V;
    for (double gt : {0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 5.0, 7.0, 10.0}) {
        const EnergyBreakdown eb = energy_breakdown(traj, carrier, gt);
        worst = std::max(worst, std::abs(eb.E_total - traj.V) / traj.V);
        CHECK(eb.E_particle > prev_Ep);
        const double str = eb.E_string_elastic - eb.E_string_kinetic;
        CHECK(str < prev_str + 1e-12);
        prev_Ep = eb.E_particle;
        prev_str = str;
    }
    CHECK(worst < 1e-3);
}

TEST_CASE("the two total-energy routes agree within 1e-3 V") {
    const TrajectorySolution traj = analytic_trajectory();
    const StringField carrier = energy_carrier(traj);
    const double E8a = total_energy_double_integral(traj);
    const double E8 = energy_breakdown(traj, carrier, 0.0).E_string_elastic;
    CHECK(std::abs(E8a - E8) < 1e-3 * traj.V);
}

TEST_CASE("sparse or truncating y-grids raise coverage errors") {
    const TrajectorySolution traj = analytic_trajectory(400);
    StringField f;
    f.scales = traj.scales;
    f.y_gamma_over_s = {0.0, 1.0, 2.0};
    CHECK_THROWS_AS(energy_breakdown(traj, f, 1.0), GridCoverageError);
    f.y_gamma_over_s.clear();
    for (int i = 0; i < 40; ++i)
        f.y_gamma_over_s.push_back(1e-4 * std::pow(10.0, 4.0 * i / 39.0));
    CHECK_THROWS_AS(energy_breakdown(traj, f, 0.0), GridCoverageError);
}

TEST_CASE("action curve: normalization, monotonicity, limits") {
    const StringModel m = default_model();
    const TrajectorySolution traj = analytic_trajectory();
    const ActionCurve curve = action_curve(traj, m);

    CHECK(curve.samples.front().action == 0.0);
    for (size_t i = 1; i < curve.samples.size(); ++i) {
        CHECK(curve.samples[i].action > curve.samples[i - 1].action);
        CHECK(curve.samples[i].ratio <= curve.samples[i - 1].ratio + 1e-9);
        CHECK(curve.samples[i].ratio > 0.45);
        CHECK(curve.samples[i].ratio < 1.05);
    }
    const auto& s = curve.samples[100];
    const Scales sc = derive_scales(m);
    CHECK(s.wkb_action ==
          doctest::Approx(2.0 * s.x_over_xi * sc.xi / m.hbar *
                          std::sqrt(2.0 * m.m * m.V))
              .epsilon(1e-12));

    // short distance: plain WKB within 5%
    CHECK(std::abs(curve.ratio_at(0.1) - 1.0) < 0.05);
    // measured transient at x = 8 xi: the asymptotic halving is logarithmic
    // and the cumulative ratio sits on 0.5 + 0.69 xi/x (regression guard)
    CHECK(curve.ratio_at(8.0) == doctest::Approx(0.5865).epsilon(0.01));
}

TEST_CASE("field sweep: monotone energies, flags, characteristic times") {
    const StringModel m = default_model();
    const Scales sc = derive_scales(m);
    const TauGrid grid = TauGrid::graded(700, 50.0, 3.0);
    std::vector<double> fields;
    for (double f : {0.1, 1.0, 10.0}) fields.push_back(f * m.V / sc.xi);
    const FieldSweepResult res = bow_energy_sweep(m, fields, grid);

    REQUIRE(res.entries.size() == 3);
    for (const auto& e : res.entries) {
        CHECK(e.converged);
        CHECK(e.error.empty());
        CHECK(std::isfinite(e.gamma_tau0));
    }
    CHECK(res.entries[0].bow_energy > res.entries[1].bow_energy);
    CHECK(res.entries[1].bow_energy > res.entries[2].bow_energy);

    // quantum-limit flag: F_c = V/xi_q; for this model xi/xi_q ~ 1.007
    CHECK_FALSE(res.entries[0].beyond_quantum_limit);
    CHECK(res.entries[2].beyond_quantum_limit);

    // measured regression bands (the work identity E = V - F x_exit pins the
    // truth): E(0.1) ~ 0.63 V, E(10)*10 ~ 0.23 V
    CHECK(res.entries[0].bow_energy / m.V > 0.55);
    CHECK(res.entries[0].bow_energy / m.V < 0.72);
    const double strong = res.entries[2].bow_energy / m.V * 10.0;
    CHECK(strong > 0.18);
    CHECK(strong < 0.30);

    CHECK(res.entries[0].gamma_tau0 == doctest::Approx(0.627).epsilon(0.05));
    CHECK(res.entries[2].gamma_tau0 < 0.3);
    CHECK(res.entries[2].gamma_tau0 > 0.003);
}

TEST_CASE("field sweep: zero field gives the bow energy V") {
    const StringModel m = default_model();
    const TauGrid grid = TauGrid::graded(1000, 50.0, 2.0);
    const FieldSweepResult res = bow_energy_sweep(m, {0.0}, grid);
    REQUIRE(res.entries.size() == 1);
    CHECK(std::abs(res.entries[0].bow_energy - m.V) / m.V < 5e-3);
}

TEST_CASE("the work identity ties the bow energy to the exit point") {
    // E = V - F x_exit along the tilted trajectory (the friction work equals
    // the double-integral functional)
    const StringModel m = default_model();
    const Scales sc = derive_scales(m);
    const TauGrid grid = TauGrid::graded(900, 50.0, 2.0);
    const double F = 0.1 * m.V / sc.xi;
    const TrajectorySolution sol =
        solve_general(m, PotentialSpec::linear_tilt(F), grid);
    REQUIRE(sol.truncated);
    const double E = total_energy_double_integral(sol);
    const double E_work = m.V - F * sol.x[sol.exit_index] * sc.xi;
    CHECK(std::abs(E - E_work) / m.V < 0.02);
}

TEST_CASE("field sweep rejects non-ascending fields") {
    const StringModel m = default_model();
    const TauGrid grid = TauGrid::graded(700, 50.0, 3.0);
    CHECK_THROWS_AS(bow_energy_sweep(m, {1.0, 0.5}, grid), SolverError);
}
