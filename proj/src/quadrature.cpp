#include "bowsim/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace bowsim {

namespace {

// K15 abscissae/weights on [-1,1]; G7 is the odd-index subset.
const double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
const double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
const double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

}  // namespace

void gk15_panel(const std::function<double(double)>& f, double a, double b,
                double& value, double& error) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    for (int j = 0; j < 7; ++j) {
        fv[j] = f(c - h * kXgk[j]);
        fv[14 - j] = f(c + h * kXgk[j]);
    }
    fv[7] = f(c);
    double resk = kWgk[7] * fv[7];
    double resg = kWg[3] * fv[7];
    for (int j = 0; j < 7; ++j) resk += kWgk[j] * (fv[j] + fv[14 - j]);
    for (int j = 0; j < 3; ++j) resg += kWg[j] * (fv[2 * j + 1] + fv[13 - 2 * j]);
    value = resk * h;
    error = std::abs((resk - resg) * h);
}

double integrate_gk(const std::function<double(double)>& f, double a, double b,
                    double rel_tol, int max_subdivisions, double scale_hint) {
    if (a == b) return 0.0;
    struct Seg { double err, a, b, val; };
    auto cmp = [](const Seg& x, const Seg& y) { return x.err < y.err; };
    std::priority_queue<Seg, std::vector<Seg>, decltype(cmp)> heap(cmp);

    double v0, e0;
    gk15_panel(f, a, b, v0, e0);
    heap.push({e0, a, b, v0});
    double total = v0, total_err = e0;
    int used = 1;
    while (used < max_subdivisions) {
        const double scale = std::max(std::abs(total), scale_hint);
        if (total_err <= rel_tol * std::max(scale, 1e-300)) return total;
        Seg s = heap.top();
        heap.pop();
        const double m = 0.5 * (s.a + s.b);
        double v1, e1, v2, e2;
        gk15_panel(f, s.a, m, v1, e1);
        gk15_panel(f, m, s.b, v2, e2);
        total += v1 + v2 - s.val;
        total_err += e1 + e2 - s.err;
        heap.push({e1, s.a, m, v1});
        heap.push({e2, m, s.b, v2});
        ++used;
    }
    const double scale = std::max(std::abs(total), scale_hint);
    if (total_err <= rel_tol * std::max(scale, 1e-300)) return total;
    throw QuadratureFailure("integrate_gk: tolerance not met within max_subdivisions");
}

double euler_sum_alternating(const std::vector<double>& terms) {
    if (terms.empty()) return 0.0;
    // Partial sums, then repeated adjacent averaging; the last diagonal entry
    // is the accelerated limit.
    std::vector<double> row(terms.size());
    double s = 0.0;
    for (size_t i = 0; i < terms.size(); ++i) {
        s += terms[i];
        row[i] = s;
    }
    while (row.size() > 1) {
        for (size_t i = 0; i + 1 < row.size(); ++i) row[i] = 0.5 * (row[i] + row[i + 1]);
        row.pop_back();
    }
    return row[0];
}

} // namespace bowsim
