#include "bowsim/kernel_solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bowsim {

namespace {

constexpr double kPi = std::numbers::pi;

std::vector<double> cumtrapz(const std::vector<double>& t,
                             const std::vector<double>& v) {
    std::vector<double> x(t.size(), 0.0);
    for (size_t i = 1; i < t.size(); ++i)
        x[i] = x[i - 1] + 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
    return x;
}

// 16-point Gauss-Legendre on (0,1], used for tail integrals after the
// substitution t1 = tau_max / u.
const double kGx[16] = {
    0.005299532504175031, 0.027712488463383712, 0.067184398806084128,
    0.122297795822498445, 0.191061877798678115, 0.270991611171386371,
    0.359198224610370542, 0.452493745081181231, 0.547506254918818769,
    0.640801775389629458, 0.729008388828613629, 0.808938122201321885,
    0.877702204177501555, 0.932815601193915872, 0.972287511536616288,
    0.994700467495824969};
const double kGw[16] = {
    0.013576229705877047, 0.031126761969323946, 0.047579255841246392,
    0.062314485627766936, 0.074797994408288368, 0.084578259697501269,
    0.091301707522461794, 0.094725305227534248, 0.094725305227534248,
    0.091301707522461794, 0.084578259697501269, 0.074797994408288368,
    0.062314485627766936, 0.047579255841246392, 0.031126761969323946,
    0.013576229705877047};

}  // namespace

TauGrid TauGrid::graded(int n, double tau_max_gamma, double grading) {
    if (n < 32) throw GridError("TauGrid: need at least 32 nodes");
    if (!(grading >= 1.0)) throw GridError("TauGrid: grading exponent must be >= 1");
    TauGrid g;
    g.grading = grading;
    g.nodes.resize(n);
    for (int j = 0; j < n; ++j)
        g.nodes[j] = tau_max_gamma * std::pow(double(j) / (n - 1), grading);
    g.validate();
    return g;
}

void TauGrid::validate() const {
    if (nodes.size() < 32) throw GridError("TauGrid: too few nodes");
    if (nodes.front() != 0.0) throw GridError("TauGrid: first node must be 0");
    for (size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i] > nodes[i - 1]))
            throw GridError("TauGrid: nodes must be strictly increasing");
    if (nodes.back() < 50.0)
        throw GridError("TauGrid: tau_max must be >= 50/gamma");
    int near = 0;
    for (double t : nodes)
        if (t <= 5.0) ++near;
    if (near < 50)
        throw GridError("TauGrid: need at least 10 nodes per unit of 1/gamma on "
                        "[0, 5/gamma]");
}

PotentialSpec PotentialSpec::linear_tilt(double eE0) {
    PotentialSpec p;
    p.kind = Kind::linear_tilt;
    p.force = eE0;
    return p;
}

PotentialSpec PotentialSpec::custom(std::function<double(double)> dvdx,
                                    double x_min, double x_max) {
    PotentialSpec p;
    p.kind = Kind::custom;
    p.dVdx = std::move(dvdx);
    p.x_min = x_min;
    p.x_max = x_max;
    return p;
}

Eigen::MatrixXd assemble_pv_kernel(const TauGrid& grid) {
    grid.validate();
    const auto& t = grid.nodes;
    const int n = grid.size();
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        const double ti = t[i];
        for (int j = 0; j + 1 < n; ++j) {
            const double a = t[j], b = t[j + 1], h = b - a;
            // singular part: int (alpha + beta t1)/(ti - t1) dt1
            //   = v_lin(ti) * [ln|ti-a| - ln|ti-b|] - (v_b - v_a),
            // ln terms at the node itself cancel pairwise and are dropped.
            const double La = (j == i) ? 0.0 : std::log(std::abs(ti - a));
            const double Lb = (j + 1 == i) ? 0.0 : std::log(std::abs(ti - b));
            const double L = La - Lb;
            double wa = (b - ti) / h * L + 1.0;
            double wb = (ti - a) / h * L - 1.0;
            // folded part: - int (alpha + beta t1)/(ti + t1) dt1
            const double Lf = std::log(ti + b) - std::log(ti + a);
            wa += -((b + ti) / h * Lf - 1.0);
            wb += -(-(ti + a) / h * Lf + 1.0);
            W(i, j) += wa / kPi;
            W(i, j + 1) += wb / kPi;
        }
    }
    return W;
}

namespace detail {

void derivative_row(const TauGrid& grid, int i, int idx[3], double w[3]) {
    // Backward-biased stencil: the history side determines v(tau), and the
    // one-sided form suppresses the odd-even mode that central differences
    // cannot see.
    const auto& t = grid.nodes;
    const int n = grid.size();
    (void)n;
    int i0 = i - 2;
    if (i0 < 0) i0 = 0;
    const double t0 = t[i0], t1 = t[i0 + 1], t2 = t[i0 + 2], te = t[i];
    idx[0] = i0;
    idx[1] = i0 + 1;
    idx[2] = i0 + 2;
    w[0] = (2 * te - t1 - t2) / ((t0 - t1) * (t0 - t2));
    w[1] = (2 * te - t0 - t2) / ((t1 - t0) * (t1 - t2));
    w[2] = (2 * te - t0 - t1) / ((t2 - t0) * (t2 - t1));
}

TailClosure make_tail_closure(const TauGrid& grid, int order) {
    if (order != 1 && order != 2)
        throw SolverError("tail_fit_order must be 1 or 2");
    const auto& t = grid.nodes;
    const int n = grid.size();
    const double T = grid.tau_max();

    std::vector<int> idx;
    for (int j = 0; j < n; ++j)
        if (t[j] >= T / 10.0) idx.push_back(j);
    if (static_cast<int>(idx.size()) < order + 2)
        throw GridError("tail closure: too few nodes in the last decade");

    // least squares of v*t ~ c + d/t^2 over the last decade
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd A(m, order);
    for (int r = 0; r < m; ++r) {
        A(r, 0) = 1.0;
        if (order == 2) A(r, 1) = 1.0 / (t[idx[r]] * t[idx[r]]);
    }
    Eigen::MatrixXd M =
        (A.transpose() * A).ldlt().solve(A.transpose());  // order x m
    TailClosure tc;
    tc.order = order;
    tc.cmap = Eigen::MatrixXd::Zero(order, n);
    for (int r = 0; r < m; ++r)
        for (int q = 0; q < order; ++q) tc.cmap(q, idx[r]) = M(q, r) * t[idx[r]];

    tc.f1 = Eigen::VectorXd::Zero(n);
    tc.f2 = Eigen::VectorXd::Zero(n);
    for (int i = 1; i < n - 1; ++i) {
        const double s = t[i];
        tc.f1(i) = (1.0 / (kPi * s)) * std::log((T - s) / (T + s));
        const double im = 1.0 / (2 * s * T * T) + 1.0 / (s * s * T) +
                          std::log((T - s) / T) / (s * s * s);
        const double ip = 1.0 / (2 * s * T * T) - 1.0 / (s * s * T) +
                          std::log((T + s) / T) / (s * s * s);
        tc.f2(i) = (im - ip) / kPi;
    }
    return tc;
}

double reduced_force(const PotentialSpec& pot, const StringModel& model,
                     const Scales& sc, double x_reduced) {
    switch (pot.kind) {
        case PotentialSpec::Kind::flat: return 0.0;
        case PotentialSpec::Kind::linear_tilt:
            return pot.force * sc.xi / model.V;
        case PotentialSpec::Kind::custom: {
            const double x = x_reduced * sc.xi;
            if (x < pot.x_min || x > pot.x_max)
                throw RunawayTrajectoryError(
                    "solve_general: trajectory left the declared potential domain");
            return -pot.dVdx(x) * sc.xi / model.V;
        }
    }
    return 0.0;
}

} // namespace detail

namespace {

struct Discretization {
    const TauGrid* grid;
    Eigen::MatrixXd W;        // grid part of the PV kernel
    Eigen::MatrixXd D;        // derivative rows
    detail::TailClosure tail;
    Eigen::MatrixXd A_tailed; // -D + W + tail coupling

    explicit Discretization(const TauGrid& g, int tail_order) : grid(&g) {
        const int n = g.size();
        W = assemble_pv_kernel(g);
        D = Eigen::MatrixXd::Zero(n, n);
        for (int i = 1; i < n; ++i) {
            int idx[3];
            double w[3];
            detail::derivative_row(g, i, idx, w);
            for (int k = 0; k < 3; ++k) D(i, idx[k]) += w[k];
        }
        tail = detail::make_tail_closure(g, tail_order);
        A_tailed = -D + W;
        A_tailed.noalias() += tail.f1 * tail.cmap.row(0);
        if (tail.order == 2) A_tailed.noalias() += tail.f2 * tail.cmap.row(1);
        // The PV row at the endpoint has no right neighbour to cancel its
        // singular log; replace it by consistency with the fitted tail:
        // v(T) = c/T + d/T^3.
        const double T = g.tau_max();
        A_tailed.row(n - 1) = -tail.cmap.row(0) / T;
        if (tail.order == 2) A_tailed.row(n - 1) -= tail.cmap.row(1) / (T * T * T);
        A_tailed(n - 1, n - 1) += 1.0;
    }
};

// residual of the reduced equation rows 1..n_free-1 given v (and zero beyond),
// plus the constraint row 0
Eigen::VectorXd equation_residual(const Discretization& dz,
                                  const Eigen::MatrixXd& Aop, int n_free,
                                  const Eigen::VectorXd& v,
                                  const StringModel& model, const Scales& sc,
                                  const PotentialSpec& pot,
                                  const std::vector<double>& x) {
    Eigen::VectorXd R = Aop.topRows(n_free) * v;
    R(0) = v(0) - kPi;
    // full solves carry the tail-consistency row at the endpoint, which has
    // no force term
    const int last_eom =
        (n_free == dz.grid->size()) ? n_free - 1 : n_free;
    for (int i = 1; i < last_eom; ++i)
        R(i) -= 0.5 * kPi * kPi *
                detail::reduced_force(pot, model, sc, x[i]);
    return R;
}

// damped Newton on the rows 0..n_free-1 with v fixed to zero beyond; for flat
// and linear tilts the system is linear and converges in one step
void newton_solve(const Discretization& dz, const Eigen::MatrixXd& Aop,
                  int n_free, Eigen::VectorXd& v, const StringModel& model,
                  const Scales& sc, const PotentialSpec& pot,
                  const SolverOptions& opt, double& residual_out) {
    const auto& t = dz.grid->nodes;
    const int n = dz.grid->size();
    const bool nonlinear = (pot.kind == PotentialSpec::Kind::custom);

    auto xs_of = [&](const Eigen::VectorXd& vv) {
        std::vector<double> vstd(vv.data(), vv.data() + n);
        return cumtrapz(t, vstd);
    };

    std::vector<double> x = xs_of(v);
    Eigen::VectorXd R = equation_residual(dz, Aop, n_free, v, model, sc, pot, x);
    double rn = R.cwiseAbs().maxCoeff();
    double best = rn;

    for (int it = 0; it < opt.max_newton; ++it) {
        if (rn < opt.tol) break;
        Eigen::MatrixXd J = Aop.topLeftCorner(n_free, n_free);
        J.row(0).setZero();
        J(0, 0) = 1.0;
        if (nonlinear) {
            // chain rule through x = Trap v : dR_i/dv_j -= (pi^2/2) f'(x_i) Trap_ij
            const double hx = 1e-6 * std::max(1.0, std::abs(x[n_free - 1]));
            const int last_eom = (n_free == n) ? n_free - 1 : n_free;
            for (int i = 1; i < last_eom; ++i) {
                const double f1 =
                    detail::reduced_force(pot, model, sc, x[i] + hx);
                const double f0 =
                    detail::reduced_force(pot, model, sc, x[i] - hx);
                const double fp = 0.5 * (f1 - f0) / hx;
                if (fp == 0.0) continue;
                // trapezoid weights for x_i
                double acc = 0.0;
                (void)acc;
                for (int j = 0; j <= i; ++j) {
                    double wq = 0.0;
                    if (j > 0) wq += 0.5 * (t[j] - t[j - 1]);
                    if (j < i) wq += 0.5 * (t[j + 1] - t[j]);
                    J(i, j) -= 0.5 * kPi * kPi * fp * wq;
                }
            }
        }
        Eigen::VectorXd step =
            J.partialPivLu().solve(-R.head(n_free));
        double lambda = 1.0;
        for (int half = 0; half < 12; ++half) {
            Eigen::VectorXd vt = v;
            vt.head(n_free) += lambda * step;
            std::vector<double> xt = xs_of(vt);
            Eigen::VectorXd Rt =
                equation_residual(dz, Aop, n_free, vt, model, sc, pot, xt);
            const double rt = Rt.cwiseAbs().maxCoeff();
            if (rt < rn || !nonlinear) {
                v = vt;
                x = xt;
                R = Rt;
                rn = rt;
                break;
            }
            lambda *= 0.5;
            if (half == 11) {
                residual_out = best;
                throw NonConvergenceError(
                    "solve_general: damped Newton stalled", best);
            }
        }
        best = std::min(best, rn);
        if (!nonlinear) break;  // linear problem: one step is exact
    }
    residual_out = rn;
    if (rn >= opt.tol * 10.0 && nonlinear)
        throw NonConvergenceError("solve_general: residual above tolerance", rn);
}

// one-sided residual of the equation at the wall node (free-boundary check)
double wall_residual(const Discretization& dz, int k, const Eigen::VectorXd& v,
                     double kappa) {
    const auto& t = dz.grid->nodes;
    const double* tv = t.data();
    const double t0 = tv[k - 2], t1 = tv[k - 1], t2 = tv[k];
    const double w0 = (2 * t2 - t1 - t2) / ((t0 - t1) * (t0 - t2));
    const double w1 = (2 * t2 - t0 - t2) / ((t1 - t0) * (t1 - t2));
    const double vdot = w0 * v(k - 2) + w1 * v(k - 1);  // v(k) = 0
    return -vdot + dz.W.row(k).dot(v) - kappa;
}

TrajectorySolution finish(const Discretization& dz, const StringModel& model,
                          const Scales& sc, const Eigen::VectorXd& v,
                          bool truncated, int exit_index, double residual,
                          const SolverOptions& opt, bool validity_warning) {
    TrajectorySolution out;
    out.grid = *dz.grid;
    out.scales = sc;
    out.V = model.V;
    out.hbar = model.hbar;
    out.v.assign(v.data(), v.data() + dz.grid->size());
    out.x = cumtrapz(dz.grid->nodes, out.v);
    out.converged = residual < opt.tol * 10.0;
    out.residual_norm = residual;
    out.truncated = truncated;
    out.exit_index = exit_index;
    if (!truncated) {
        Eigen::VectorXd coef = dz.tail.cmap * v;
        out.tail_c = coef(0);
        out.tail_d = (dz.tail.order == 2) ? coef(1) : 0.0;
    }
    out.validity_warning = validity_warning;
    return out;
}

}  // namespace

double TrajectorySolution::x_at_gamma_tau(double gt) const {
    const auto& t = grid.nodes;
    auto it = std::upper_bound(t.begin(), t.end(), gt);
    if (it == t.begin()) return x.front();
    if (it == t.end()) {
        if (truncated) return x.back();
        return x.back() + tail_c * std::log(gt / t.back());
    }
    const size_t j = static_cast<size_t>(it - t.begin());
    const double w = (gt - t[j - 1]) / (t[j] - t[j - 1]);
    return x[j - 1] + w * (x[j] - x[j - 1]);
}

double TrajectorySolution::v_at_gamma_tau(double gt) const {
    const auto& t = grid.nodes;
    auto it = std::upper_bound(t.begin(), t.end(), gt);
    if (it == t.begin()) return v.front();
    if (it == t.end()) {
        if (truncated) return 0.0;
        return tail_c / gt + tail_d / (gt * gt * gt);
    }
    const size_t j = static_cast<size_t>(it - t.begin());
    const double w = (gt - t[j - 1]) / (t[j] - t[j - 1]);
    return v[j - 1] + w * (v[j] - v[j - 1]);
}

TrajectorySolution solve_flat(const StringModel& model, const TauGrid& grid,
                              const SolverOptions& opt) {
    return solve_general(model, PotentialSpec::flat_barrier(), grid, opt);
}

TrajectorySolution solve_general(const StringModel& model,
                                 const PotentialSpec& potential,
                                 const TauGrid& grid, const SolverOptions& opt) {
    model.validate();
    const Scales sc = derive_scales(model);
    grid.validate();

    Discretization dz(grid, opt.tail_fit_order);
    const int n = grid.size();

    bool warn = !sc.semiclassical;
    if (potential.kind == PotentialSpec::Kind::linear_tilt &&
        potential.force >= model.V / sc.xi_q)
        warn = true;  // field at or beyond the quantum limit F_c

    // full solve with the tail closure
    Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i)
        v(i) = kPi / (1.0 + grid.nodes[i]);  // rough initial shape
    double res = 0.0;
    newton_solve(dz, dz.A_tailed, n, v, model, sc, potential, opt, res);

    bool crossing = false;
    for (int i = 1; i < n; ++i)
        if (v(i) <= 0.0) {
            crossing = true;
            break;
        }
    if (!crossing)
        return finish(dz, model, sc, v, false, -1, res, opt, warn);

    // The trajectory leaves the barrier at finite time (v -> 0). Locate the
    // exit node by the sign change of the one-sided equation residual at the
    // wall, then solve with v = 0 enforced beyond it.
    const double kappa =
        0.5 * kPi * kPi *
        ((potential.kind == PotentialSpec::Kind::linear_tilt)
             ? potential.force * sc.xi / model.V
             : 0.0);
    const Eigen::MatrixXd A_notail = -dz.D + dz.W;  // v == 0 beyond the wall
    auto wall_solve = [&](int k, double& rwall) {
        Eigen::VectorXd vk = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < k; ++i) vk(i) = kPi * (1.0 - double(i) / k);
        double r = 0.0;
        newton_solve(dz, A_notail, k, vk, model, sc, potential, opt, r);
        if (potential.kind == PotentialSpec::Kind::custom) {
            // one-sided residual with the custom force at the wall
            std::vector<double> vstd(vk.data(), vk.data() + n);
            auto x = cumtrapz(grid.nodes, vstd);
            const double f =
                0.5 * kPi * kPi *
                detail::reduced_force(potential, model, sc, x[k]);
            rwall = wall_residual(dz, k, vk, f);
        } else {
            rwall = wall_residual(dz, k, vk, kappa);
        }
        return vk;
    };

    int klo = -1, khi = -1;
    double rw = 0.0;
    Eigen::VectorXd vbest;
    int k = 6;
    while (k <= n - 2) {
        Eigen::VectorXd vk = wall_solve(k, rw);
        if (rw > 0.0) {
            klo = k;
        } else {
            khi = k;
            vbest = vk;
            break;
        }
        k = std::max(k + 1, static_cast<int>(std::lround(k * 1.35)));
    }
    if (khi < 0) {
        // no admissible wall found; report the untruncated solution
        return finish(dz, model, sc, v, false, -1, res, opt, warn);
    }
    if (klo < 0) klo = 5;
    while (khi - klo > 1) {
        const int km = (klo + khi) / 2;
        Eigen::VectorXd vk = wall_solve(km, rw);
        if (rw > 0.0) {
            klo = km;
        } else {
            khi = km;
            vbest = vk;
        }
    }
    double rfin = 0.0;
    Eigen::VectorXd vfin = wall_solve(klo, rfin);
    // keep the last positive-residual wall (equation side); its solution stays
    // nonnegative up to the wall
    for (int i = klo; i < n; ++i) vfin(i) = 0.0;
    std::vector<double> vstd(vfin.data(), vfin.data() + n);
    auto x = cumtrapz(grid.nodes, vstd);
    Eigen::VectorXd R =
        equation_residual(dz, A_notail, klo, vfin, model, sc, potential, x);
    return finish(dz, model, sc, vfin, true, klo, R.cwiseAbs().maxCoeff(), opt,
                  warn);
}

StringField reconstruct_field(const TrajectorySolution& traj,
                              const std::vector<double>& y_gamma_over_s,
                              const std::vector<double>& gamma_tau) {
    if (!traj.converged)
        throw SolverError("reconstruct_field: trajectory not converged");
    const auto& t = traj.grid.nodes;
    const int n = traj.grid.size();
    const double T = traj.grid.tau_max();

    StringField f;
    f.y_gamma_over_s = y_gamma_over_s;
    f.gamma_tau = gamma_tau;
    f.scales = traj.scales;
    f.u_over_xi.assign(y_gamma_over_s.size() * gamma_tau.size(), 0.0);

    for (size_t iy = 0; iy < y_gamma_over_s.size(); ++iy) {
        const double a = std::abs(y_gamma_over_s[iy]);
        for (size_t it = 0; it < gamma_tau.size(); ++it) {
            const double tau = gamma_tau[it];
            double u;
            if (a == 0.0) {
                u = traj.x_at_gamma_tau(tau);
            } else {
                // (1/pi) int_0^T x(t1) [P_a(tau - t1) + P_a(tau + t1)] dt1,
                // product integration on piecewise-linear x
                double acc = 0.0;
                for (int j = 0; j + 1 < n; ++j) {
                    const double ta = t[j], tb = t[j + 1], h = tb - ta;
                    const double beta = (traj.x[j + 1] - traj.x[j]) / h;
                    const double alpha = traj.x[j] - beta * ta;
                    for (int sgn = 0; sgn < 2; ++sgn) {
                        const double ctr = sgn == 0 ? tau : -tau;
                        const double w1 = ta - ctr, w2 = tb - ctr;
                        const double vl = alpha + beta * ctr;
                        const double at1 = std::atan2(w1, a),
                                     at2 = std::atan2(w2, a);
                        const double l1 = 0.5 * std::log(w1 * w1 + a * a),
                                     l2 = 0.5 * std::log(w2 * w2 + a * a);
                        acc += vl * (at2 - at1) + beta * a * (l2 - l1);
                    }
                }
                // tail beyond the grid: x = x_T + c ln(t1/T) + (d/2)(1/T^2 - 1/t1^2)
                // (constant x for truncated trajectories)
                const double xT = traj.x.back();
                const double halfpi = 0.5 * kPi;
                auto atabove = [&](double ctr) {
                    return halfpi - std::atan2(T - ctr, a);
                };
                acc += xT * (atabove(tau) + atabove(-tau));
                if (!traj.truncated &&
                    (traj.tail_c != 0.0 || traj.tail_d != 0.0)) {
                    for (int q = 0; q < 16; ++q) {
                        const double uu = kGx[q];
                        const double t1 = T / uu;
                        const double jac = T / (uu * uu);
                        const double xt =
                            traj.tail_c * std::log(t1 / T) +
                            0.5 * traj.tail_d * (1.0 / (T * T) - 1.0 / (t1 * t1));
                        const double ker =
                            a / (a * a + (tau - t1) * (tau - t1)) +
                            a / (a * a + (tau + t1) * (tau + t1));
                        acc += kGw[q] * xt * ker * jac;
                    }
                }
                u = acc / kPi;
            }
            f.u_over_xi[iy * gamma_tau.size() + it] = u;
        }
    }
    return f;
}

} // namespace bowsim
