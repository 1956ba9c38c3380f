#include "bowsim/diagnostics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <thread>

namespace bowsim {

namespace {

constexpr double kPi = std::numbers::pi;

const double kGx16[16] = {
    0.005299532504175031, 0.027712488463383712, 0.067184398806084128,
    0.122297795822498445, 0.191061877798678115, 0.270991611171386371,
    0.359198224610370542, 0.452493745081181231, 0.547506254918818769,
    0.640801775389629458, 0.729008388828613629, 0.808938122201321885,
    0.877702204177501555, 0.932815601193915872, 0.972287511536616288,
    0.994700467495824969};
const double kGw16[16] = {
    0.013576229705877047, 0.031126761969323946, 0.047579255841246392,
    0.062314485627766936, 0.074797994408288368, 0.084578259697501269,
    0.091301707522461794, 0.094725305227534248, 0.094725305227534248,
    0.091301707522461794, 0.084578259697501269, 0.074797994408288368,
    0.062314485627766936, 0.047579255841246392, 0.031126761969323946,
    0.013576229705877047};
const double kGx4[4] = {0.069431844202973712, 0.330009478207571868,
                        0.669990521792428132, 0.930568155797026288};
const double kGw4[4] = {0.173927422568726929, 0.326072577431273071,
                        0.326072577431273071, 0.173927422568726929};

// Conjugate-Poisson (Q) and Poisson (P) transforms of the odd-extended
// trajectory velocity at reduced (tau, a):
//   Q = int_0^inf v(t1) [ (t1-tau)/((t1-tau)^2+a^2) + (t1+tau)/((t1+tau)^2+a^2) ] dt1
//   P = int_0^inf v(t1) [ a/((t1-tau)^2+a^2)        - a/((t1+tau)^2+a^2)        ] dt1
// Product integration on the grid, Gauss tail with v ~ c/t + d/t^3 beyond.
void qp_transforms(const TrajectorySolution& traj, double tau, double a,
                   double& Q, double& P) {
    const auto& t = traj.grid.nodes;
    const int n = traj.grid.size();
    Q = 0.0;
    P = 0.0;
    const int jmax = traj.truncated ? traj.exit_index : n - 1;
    for (int j = 0; j < jmax; ++j) {
        const double ta = t[j], tb = t[j + 1], h = tb - ta;
        const double beta = (traj.v[j + 1] - traj.v[j]) / h;
        const double alpha = traj.v[j] - beta * ta;
        for (int sgn = 0; sgn < 2; ++sgn) {
            const double ctr = sgn == 0 ? tau : -tau;
            const double w1 = ta - ctr, w2 = tb - ctr;
            const double vl = alpha + beta * ctr;
            const double l1 = 0.5 * std::log(w1 * w1 + a * a);
            const double l2 = 0.5 * std::log(w2 * w2 + a * a);
            const double at1 = std::atan2(w1, a), at2 = std::atan2(w2, a);
            const double qc = vl * (l2 - l1) + beta * ((w2 - w1) - a * (at2 - at1));
            const double pc = vl * (at2 - at1) + beta * a * (l2 - l1);
            Q += qc;
            P += (sgn == 0) ? pc : -pc;
        }
    }
    if (!traj.truncated && (traj.tail_c != 0.0 || traj.tail_d != 0.0)) {
        const double T = traj.grid.tau_max();
        for (int q = 0; q < 16; ++q) {
            const double u = kGx16[q];
            const double t1 = T / u;
            const double jac = T / (u * u);
            const double vt = traj.tail_c / t1 + traj.tail_d / (t1 * t1 * t1);
            const double dm = t1 - tau, dp = t1 + tau;
            Q += kGw16[q] * vt * jac *
                 (dm / (dm * dm + a * a) + dp / (dp * dp + a * a));
            P += kGw16[q] * vt * jac *
                 (a / (dm * dm + a * a) - a / (dp * dp + a * a));
        }
    }
}

struct StringEnergies {
    double elastic_over_V;
    double kinetic_over_V;
};

// Integrate Q^2 and P^2 over a in log space with analytic closures:
// below a_min the integrand is A + B ln a (exact antiderivative), beyond a_max
// Q ~ cQ/a.
StringEnergies string_energies(const TrajectorySolution& traj, double tau,
                               const std::vector<double>& a_grid,
                               double coverage_tol = 1e-3) {
    std::vector<double> Q(a_grid.size()), P(a_grid.size());
    for (size_t i = 0; i < a_grid.size(); ++i)
        qp_transforms(traj, tau, a_grid[i], Q[i], P[i]);

    auto log_trapz = [&](const std::vector<double>& F2) {
        double acc = 0.0;
        for (size_t i = 1; i < a_grid.size(); ++i) {
            const double dl = std::log(a_grid[i] / a_grid[i - 1]);
            acc += 0.5 * dl * (F2[i] * a_grid[i] + F2[i - 1] * a_grid[i - 1]);
        }
        return acc;
    };
    std::vector<double> Q2(Q.size()), P2(P.size());
    for (size_t i = 0; i < Q.size(); ++i) {
        Q2[i] = Q[i] * Q[i];
        P2[i] = P[i] * P[i];
    }
    double Eel = log_trapz(Q2);
    double Ekin = log_trapz(P2);

    // [0, a_min]: F = A + B ln a -> int F^2 da = a [(F - B)^2 + B^2]
    {
        const double dl = std::log(a_grid[1] / a_grid[0]);
        const double Bq = (Q[1] - Q[0]) / dl;
        Eel += a_grid[0] * ((Q[0] - Bq) * (Q[0] - Bq) + Bq * Bq);
        const double Bp = (P[1] - P[0]) / dl;
        Ekin += a_grid[0] * ((P[0] - Bp) * (P[0] - Bp) + Bp * Bp);
    }
    // beyond a_max
    const double amax = a_grid.back();
    const double cQ = Q.back() * amax;
    const double elastic_tail = cQ * cQ / amax;
    Eel += elastic_tail;
    Ekin += P.back() * P.back() * amax / 3.0;

    if (elastic_tail > coverage_tol * std::max(Eel, 1e-300))
        throw GridCoverageError(
            "energy_breakdown: y-grid truncates more than 0.1% of the elastic "
            "energy integrand");

    const double p4 = kPi * kPi * kPi * kPi;
    return {Eel / p4, Ekin / p4};
}

std::vector<double> field_a_grid(const StringField& field) {
    std::vector<double> a;
    a.reserve(field.y_gamma_over_s.size());
    for (double y : field.y_gamma_over_s)
        if (y > 0.0) a.push_back(y);
    std::sort(a.begin(), a.end());
    if (a.size() < 8)
        throw GridCoverageError("energy_breakdown: y-grid too sparse");
    return a;
}

}  // namespace

std::vector<double> default_energy_y_grid() {
    std::vector<double> a(160);
    const double lo = std::log(1e-6), hi = std::log(1e4);
    for (size_t i = 0; i < a.size(); ++i)
        a[i] = std::exp(lo + (hi - lo) * double(i) / (a.size() - 1));
    return a;
}

EnergyBreakdown energy_breakdown(const TrajectorySolution& traj,
                                 const StringField& field, double gamma_tau) {
    if (!traj.converged)
        throw SolverError("energy_breakdown: trajectory not converged");
    const auto a_grid = field_a_grid(field);
    const StringEnergies se = string_energies(traj, gamma_tau, a_grid);
    const double v = traj.v_at_gamma_tau(gamma_tau);  // reduced
    const double Ep_over_V = 1.0 - v * v / (kPi * kPi);
    EnergyBreakdown out;
    out.gamma_tau = gamma_tau;
    out.E_particle = Ep_over_V * traj.V;
    out.E_string_elastic = se.elastic_over_V * traj.V;
    out.E_string_kinetic = se.kinetic_over_V * traj.V;
    out.E_total = out.E_particle + out.E_string_elastic - out.E_string_kinetic;
    return out;
}

double total_energy_double_integral(const TrajectorySolution& traj) {
    if (!traj.converged)
        throw SolverError("total_energy_double_integral: trajectory not converged");
    const auto& t = traj.grid.nodes;
    const int n = traj.grid.size();
    if (t[1] > 1e-2)
        throw SolverError(
            "total_energy_double_integral: grid grading insufficient near the "
            "origin");
    const int jmax = traj.truncated ? traj.exit_index : n - 1;

    // Gauss points and weighted values per cell
    std::vector<double> s, p;
    s.reserve(4 * jmax);
    p.reserve(4 * jmax);
    for (int j = 0; j < jmax; ++j) {
        const double h = t[j + 1] - t[j];
        for (int q = 0; q < 4; ++q) {
            const double sq = t[j] + h * kGx4[q];
            const double vq =
                traj.v[j] + (traj.v[j + 1] - traj.v[j]) * kGx4[q];
            s.push_back(sq);
            p.push_back(h * kGw4[q] * vq);
        }
    }
    double I = 0.0;
    const size_t K = s.size();
    for (size_t k = 0; k < K; ++k) {
        const double sk = s[k], pk = p[k];
        double row = 0.0;
        for (size_t l = 0; l < K; ++l) row += p[l] / (sk + s[l]);
        I += pk * row;
    }

    if (!traj.truncated && traj.tail_c != 0.0) {
        const double T = traj.grid.tau_max();
        const double c = traj.tail_c, d = traj.tail_d;
        // cross term: 2 int_0^T v(t1) [ int_T^inf (c/t2 + d/t2^3)/(t1+t2) dt2 ] dt1
        double cross = 0.0;
        for (size_t k = 0; k < K; ++k) {
            const double t1 = s[k];
            double inner = (c / t1) * std::log1p(t1 / T);
            for (int q = 0; q < 16; ++q) {
                const double u = kGx16[q];
                const double t2 = T / u;
                inner += kGw16[q] * (d / (t2 * t2 * t2)) / (t1 + t2) * T / (u * u);
            }
            cross += p[k] * inner;
        }
        I += 2.0 * cross;
        // both tails; the d part is negligible at this order
        I += c * c * 2.0 * std::log(2.0) / T;
    }
    // E/V = (2/pi^3) I
    return (2.0 / (kPi * kPi * kPi)) * I * traj.V;
}

ActionCurve action_curve(const TrajectorySolution& traj, const StringModel& model) {
    if (!traj.converged)
        throw SolverError("action_curve: trajectory not converged");
    const Scales sc = derive_scales(model);
    const auto& t = traj.grid.nodes;
    const int n = traj.grid.size();
    const int jmax = traj.truncated ? traj.exit_index + 1 : n;

    // string kinetic magnitude per node via the Poisson transform
    std::vector<double> a_grid(72);
    {
        const double lo = std::log(1e-6), hi = std::log(1e4);
        for (size_t i = 0; i < a_grid.size(); ++i)
            a_grid[i] = std::exp(lo + (hi - lo) * double(i) / (a_grid.size() - 1));
    }
    std::vector<double> bracket(jmax);  // v'^2/pi^2 + Ts/V
    for (int i = 0; i < jmax; ++i) {
        const StringEnergies se = string_energies(traj, t[i], a_grid, 1.0);
        bracket[i] =
            traj.v[i] * traj.v[i] / (kPi * kPi) + se.kinetic_over_V;
    }
    // A(tau) = (4V/(hbar gamma)) int_0^tau bracket dT
    const double pref = 4.0 * model.V / (model.hbar * sc.gamma);
    const double wkb_pref = pref / kPi;  // A_WKB = (4V/(hbar gamma pi)) x'
    ActionCurve curve;
    curve.samples.resize(jmax);
    double acc = 0.0;
    for (int i = 0; i < jmax; ++i) {
        if (i > 0)
            acc += 0.5 * (t[i] - t[i - 1]) * (bracket[i] + bracket[i - 1]);
        ActionSample& smp = curve.samples[i];
        smp.x_over_xi = traj.x[i];
        smp.action = pref * acc;
        smp.wkb_action = wkb_pref * traj.x[i];
        smp.ratio = (i == 0) ? 1.0 : smp.action / smp.wkb_action;
    }
    return curve;
}

double ActionCurve::ratio_at(double x_over_xi) const {
    if (samples.empty()) throw SolverError("ActionCurve: empty");
    auto cmp = [](const ActionSample& s, double x) { return s.x_over_xi < x; };
    auto it = std::lower_bound(samples.begin(), samples.end(), x_over_xi, cmp);
    if (it == samples.begin()) return it->ratio;
    if (it == samples.end())
        throw SolverError("ActionCurve: x beyond the sampled trajectory");
    const auto& s1 = *it;
    const auto& s0 = *(it - 1);
    const double w = (x_over_xi - s0.x_over_xi) / (s1.x_over_xi - s0.x_over_xi);
    const double A = s0.action + w * (s1.action - s0.action);
    const double Aw = s0.wkb_action + w * (s1.wkb_action - s0.wkb_action);
    return A / Aw;
}

FieldSweepResult bow_energy_sweep(const StringModel& model,
                                  const std::vector<double>& eE0_values,
                                  const TauGrid& grid, const SolverOptions& opt) {
    for (size_t i = 1; i < eE0_values.size(); ++i)
        if (eE0_values[i] <= eE0_values[i - 1])
            throw SolverError("bow_energy_sweep: fields must be positive ascending");
    const Scales sc = derive_scales(model);
    const double Fc = model.V / sc.xi_q;

    FieldSweepResult result;
    result.entries.resize(eE0_values.size());

    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const size_t i = next.fetch_add(1);
            if (i >= eE0_values.size()) return;
            FieldSweepEntry& e = result.entries[i];
            e.eE0 = eE0_values[i];
            e.eE0_xi_over_V = e.eE0 * sc.xi / model.V;
            e.beyond_quantum_limit = e.eE0 >= Fc;
            try {
                const TrajectorySolution traj =
                    (e.eE0 == 0.0)
                        ? solve_flat(model, grid, opt)
                        : solve_general(model, PotentialSpec::linear_tilt(e.eE0),
                                        grid, opt);
                e.bow_energy = total_energy_double_integral(traj);
                // half-decay time of v
                e.gamma_tau0 = std::numeric_limits<double>::infinity();
                const auto& t = traj.grid.nodes;
                for (size_t j = 1; j < traj.v.size(); ++j) {
                    if (traj.v[j] <= 0.5 * kPi) {
                        const double w =
                            (0.5 * kPi - traj.v[j - 1]) /
                            (traj.v[j] - traj.v[j - 1]);
                        e.gamma_tau0 = t[j - 1] + w * (t[j] - t[j - 1]);
                        break;
                    }
                }
                e.converged = traj.converged;
            } catch (const SolverError& err) {
                e.converged = false;
                e.error = err.what();
            }
        }
    };
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const size_t nthreads =
        std::min<size_t>(std::max(1u, hw), eE0_values.size());
    if (nthreads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (size_t i = 0; i < nthreads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // monotone energies: measured crossover where E = V/2
    result.crossover_eE0_xi_over_V = std::numeric_limits<double>::quiet_NaN();
    for (size_t i = 1; i < result.entries.size(); ++i) {
        const auto& e0 = result.entries[i - 1];
        const auto& e1 = result.entries[i];
        if (!e0.converged || !e1.converged) continue;
        const double half = 0.5 * model.V;
        if (e0.bow_energy >= half && e1.bow_energy < half &&
            e0.eE0_xi_over_V > 0.0) {
            const double l0 = std::log(e0.eE0_xi_over_V),
                         l1 = std::log(e1.eE0_xi_over_V);
            const double w = (e0.bow_energy - half) /
                             (e0.bow_energy - e1.bow_energy);
            result.crossover_eE0_xi_over_V = std::exp(l0 + w * (l1 - l0));
            break;
        }
    }
    return result;
}

} // namespace bowsim
