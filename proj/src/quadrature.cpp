#include "fwdsmile/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace fwdsmile {

namespace {

// 15-point Kronrod abscissae/weights with the embedded 7-point Gauss rule
// (nonnegative half; odd indices are the Gauss nodes).
constexpr double xgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double wgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double a, b;
    double value;
    double error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b, long& n_evals) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const double fc = f(c);
    double resk = wgk[7] * fc;
    double resg = wg[3] * fc;
    for (int j = 0; j < 7; ++j) {
        const double f1 = f(c - h * xgk[j]);
        const double f2 = f(c + h * xgk[j]);
        resk += wgk[j] * (f1 + f2);
        if (j % 2 == 1) resg += wg[(j - 1) / 2] * (f1 + f2);
    }
    n_evals += 15;
    const double value = resk * h;
    if (!std::isfinite(value))
        throw NumericError("quadrature: integrand produced a non-finite value");
    return Panel{a, b, value, std::abs((resk - resg) * h)};
}

// Worst-error-first ordering with a deterministic tie-break on the left
// endpoint, so the subdivision sequence is reproducible.
bool worse(const Panel& x, const Panel& y) {
    if (x.error != y.error) return x.error > y.error;
    return x.a < y.a;
}

} // namespace

QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double abs_tol, double rel_tol, int max_subdivisions) {
    if (!(b > a)) throw DomainError("integrate_adaptive: requires b > a");
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0))
        throw DomainError("integrate_adaptive: tolerances must be positive");
    if (max_subdivisions <= 0)
        throw DomainError("integrate_adaptive: max_subdivisions must be positive");

    long n_evals = 0;
    std::vector<Panel> active;
    std::vector<Panel> frozen;  // panels too narrow to split further
    const auto cmp = [](const Panel& x, const Panel& y) { return worse(y, x); };  // max-heap on error
    active.push_back(gk15(f, a, b, n_evals));

    double total_value = active.front().value;
    double total_error = active.front().error;
    int splits = 0;
    while (total_error > std::max(abs_tol, rel_tol * std::abs(total_value))
           && splits < max_subdivisions && !active.empty()) {
        std::pop_heap(active.begin(), active.end(), cmp);
        const Panel worst = active.back();
        active.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(worst.a < mid && mid < worst.b)) {
            frozen.push_back(worst);  // width at machine resolution
            continue;
        }
        total_value -= worst.value;
        total_error -= worst.error;
        for (const Panel& half : {gk15(f, worst.a, mid, n_evals), gk15(f, mid, worst.b, n_evals)}) {
            total_value += half.value;
            total_error += half.error;
            active.push_back(half);
            std::push_heap(active.begin(), active.end(), cmp);
        }
        ++splits;
    }

    // Fixed-order reduction: sum panels left to right for reproducibility.
    active.insert(active.end(), frozen.begin(), frozen.end());
    std::sort(active.begin(), active.end(),
              [](const Panel& x, const Panel& y) { return x.a < y.a; });
    double value = 0.0, error = 0.0;
    for (const Panel& panel : active) {
        value += panel.value;
        error += panel.error;
    }
    const bool converged = error <= std::max(abs_tol, rel_tol * std::abs(value));
    return QuadResult{value, error, n_evals, converged};
}

} // namespace fwdsmile
