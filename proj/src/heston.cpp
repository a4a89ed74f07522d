#include "fwdsmile/heston.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fwdsmile {

namespace {

// exp(z) - 1 without cancellation near z = 0. The 5-term tail keeps the
// relative truncation error below 1e-22 inside the series radius.
cd expm1c(cd z) {
    if (std::abs(z) < 1e-4) {
        return z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z * (1.0 / 24.0 + z / 120.0))));
    }
    return std::exp(z) - 1.0;
}

// Shared pieces of A, B and their u-derivatives, written gamma-free:
//   pw   = -u (1-u) xi^2          (= m^2 - d^2)
//   s    = m + d,  diff = m - d = pw / s
//   em   = 1 - e^{-d tau}
//   twod = s - diff (= 2d),  denom = twod + diff * em
// so that B = pw em / (xi^2 denom) and the log in A is log(denom/twod).
// Dividing pw by s instead of subtracting d from m makes diff exact where
// pw vanishes and keeps u in {0, 1} an exact zero of A and B.
struct ABCore {
    cd m, d, pw, s, diff, em, twod, denom;
};

ABCore ab_core(cd u, double tau, const HestonParams& p) {
    ABCore c;
    const double xi2 = p.xi * p.xi;
    c.m = p.kappa - p.rho * p.xi * u;
    c.pw = -u * (1.0 - u) * xi2;
    c.d = std::sqrt(c.m * c.m - c.pw);  // principal branch: Re d >= 0
    c.s = c.m + c.d;
    if (std::abs(c.s) <= 1e-14 * (std::abs(c.m) + std::abs(c.d)))
        throw DomainError("d_gamma: degenerate input, kappa - rho xi u + d = 0");
    c.diff = (c.pw == cd(0.0)) ? cd(0.0) : c.pw / c.s;
    c.em = -expm1c(-c.d * tau);
    c.twod = c.s - c.diff;
    c.denom = c.twod + c.diff * c.em;
    return c;
}

// log(denom(tau)/twod) on the branch reached continuously from
// denom(0)/twod = 1, following sigma -> denom(sigma) with argument steps
// kept below pi/2 (refining the sampling until they are).
cd tracked_log_ratio(const ABCore& c, double tau) {
    constexpr long cap = 1L << 22;
    long n = 1 + static_cast<long>(std::abs(c.d.imag()) * tau / 0.7);
    if (n < 1 || n > cap)
        throw NumericError("ab_functions: branch-tracking grid exceeds cap");
    for (;; n *= 2) {
        if (n > cap)
            throw NumericError("ab_functions: branch tracking failed to refine");
        double total_arg = 0.0;
        cd prev(1.0, 0.0);
        cd w;
        bool ok = true;
        for (long j = 1; j <= n; ++j) {
            double sigma = tau * static_cast<double>(j) / static_cast<double>(n);
            w = (c.twod + c.diff * (-expm1c(-c.d * sigma))) / c.twod;
            if (w == cd(0.0))
                throw NumericError("ab_functions: log argument vanished along the path");
            double step = std::arg(w / prev);
            if (std::abs(step) > 0.5 * std::numbers::pi) {
                ok = false;
                break;
            }
            total_arg += step;
            prev = w;
        }
        if (ok) return cd(std::log(std::abs(w)), total_arg);
    }
}

// log E[exp(B V_t)] continued to complex B; requires Re(1 - 2 beta B) > 0,
// which holds whenever Re B is inside the real domain of the variance law.
cd log_variance_mgf(cd B, const VarianceLawParams& vl) {
    cd w = 1.0 - 2.0 * vl.beta * B;
    if (!(w.real() > 0.0))
        throw NumericError("variance law: branch guard violated, Re(1 - 2 beta B) <= 0");
    return vl.lambda * vl.beta * B / w - 0.5 * vl.q * std::log(w);
}

double log_variance_mgf_real(double B, const VarianceLawParams& vl) {
    return vl.lambda * vl.beta * B / (1.0 - 2.0 * vl.beta * B)
         - 0.5 * vl.q * std::log1p(-2.0 * vl.beta * B);
}

double real_part_checked(cd z, const char* what) {
    if (std::abs(z.imag()) > 1e-8 * (1.0 + std::abs(z.real()))) {
        std::ostringstream os;
        os << what << ": imaginary residue " << z.imag() << " exceeds tolerance";
        throw NumericError(os.str());
    }
    return z.real();
}

// d/du log E[exp(u X_tau^{(t)})] at real u, analytic chain rule.
double lambda_prime_unscaled(double w, const ForwardTenor& tenor, const HestonParams& p);

double lambda_unscaled(double w, const ForwardTenor& tenor, const HestonParams& p) {
    ABValues ab = ab_functions(cd(w, 0.0), tenor.tau, p);
    auto vl = VarianceLawParams::from(p, tenor.t);
    double B = real_part_checked(ab.B, "forward_lmgf (B)");
    return real_part_checked(ab.A, "forward_lmgf (A)") + log_variance_mgf_real(B, vl);
}

double lambda_prime_unscaled(double w, const ForwardTenor& tenor, const HestonParams& p) {
    const double tau = tenor.tau;
    const double xi2 = p.xi * p.xi;
    const cd u(w, 0.0);
    const cd m = p.kappa - p.rho * p.xi * u;
    const cd pw = -u * (1.0 - u) * xi2;
    const cd d = std::sqrt(m * m - pw);
    if (std::abs(d) < 1e-6 * (std::abs(m) + p.xi)) {
        // The chain has a removable 0/0 at d = 0; a central difference on
        // the log-mgf is accurate enough there (the function is smooth).
        double h = 1e-6 * std::max(1.0, std::abs(w));
        return (lambda_unscaled(w + h, tenor, p) - lambda_unscaled(w - h, tenor, p)) / (2.0 * h);
    }
    const cd mp = cd(-p.rho * p.xi, 0.0);
    const cd pwp = (2.0 * u - 1.0) * xi2;
    const cd dp = (2.0 * m * mp - pwp) / (2.0 * d);
    const cd s = m + d;
    if (std::abs(s) <= 1e-14 * (std::abs(m) + std::abs(d)))
        throw DomainError("forward_lmgf_deriv: degenerate input, kappa - rho xi u + d = 0");
    const cd sp = mp + dp;
    const cd diff = (pw == cd(0.0)) ? cd(0.0) : pw / s;
    const cd diffp = (pwp * s - pw * sp) / (s * s);
    const cd eneg = std::exp(-d * tau);
    const cd em = -expm1c(-d * tau);
    const cd emp = tau * dp * eneg;
    const cd twod = s - diff;
    const cd twodp = sp - diffp;
    const cd denom = twod + diff * em;
    const cd denomp = twodp + diffp * em + diff * emp;
    const cd B = pw * em / (xi2 * denom);
    const cd Bp = (pwp * em + pw * emp) / (xi2 * denom) - B * denomp / denom;
    const cd Lp = denomp / denom - twodp / twod;
    const cd Ap = p.kappa * p.theta / xi2 * (diffp * tau - 2.0 * Lp);
    // A', B and B' are real on the real axis; unwrap them before the
    // variance-law factors, whose pole at 2 beta B = 1 would otherwise
    // amplify the rounding-level imaginary parts without bound.
    const double b = real_part_checked(B, "forward_lmgf_deriv (B)");
    const double bp = real_part_checked(Bp, "forward_lmgf_deriv (B')");
    const double ap = real_part_checked(Ap, "forward_lmgf_deriv (A')");
    const auto vl = VarianceLawParams::from(p, tenor.t);
    const double z = 1.0 - 2.0 * vl.beta * b;
    const double gp = vl.lambda * vl.beta / (z * z) + vl.q * vl.beta / z;
    return ap + gp * bp;
}

} // namespace

HestonParams::HestonParams(double kappa_, double theta_, double xi_, double rho_, double v_)
    : kappa(kappa_), theta(theta_), xi(xi_), rho(rho_), v(v_) {
    if (!std::isfinite(kappa) || kappa <= 0.0)
        throw DomainError("HestonParams: kappa must be positive");
    if (!std::isfinite(theta) || theta <= 0.0)
        throw DomainError("HestonParams: theta must be positive");
    if (!std::isfinite(xi) || xi <= 0.0)
        throw DomainError("HestonParams: xi must be positive");
    if (!std::isfinite(rho) || std::abs(rho) >= 1.0)
        throw DomainError("HestonParams: rho must lie in (-1, 1)");
    if (!std::isfinite(v) || v <= 0.0)
        throw DomainError("HestonParams: v must be positive");
}

bool HestonParams::feller_equality(double rel_tol) const noexcept {
    return std::abs(feller_gap()) <= rel_tol * std::max(4.0 * kappa * theta, xi * xi);
}

ForwardTenor::ForwardTenor(double t_, double tau_, double k_) : t(t_), tau(tau_), k(k_) {
    if (!std::isfinite(t) || t <= 0.0)
        throw DomainError("ForwardTenor: t must be positive");
    if (!std::isfinite(tau) || tau <= 0.0)
        throw DomainError("ForwardTenor: tau must be positive");
    if (!std::isfinite(k))
        throw DomainError("ForwardTenor: k must be finite");
}

VarianceLawParams VarianceLawParams::from(const HestonParams& p, double t) {
    VarianceLawParams vl;
    vl.beta = beta_t(p, t);
    vl.q = 4.0 * p.kappa * p.theta / (p.xi * p.xi);
    vl.lambda = p.v * std::exp(-p.kappa * t) / vl.beta;
    return vl;
}

double beta_t(const HestonParams& p, double t) {
    if (!std::isfinite(t) || t <= 0.0)
        throw DomainError("beta_t: t must be positive");
    return p.xi * p.xi * (-std::expm1(-p.kappa * t)) / (4.0 * p.kappa);
}

DGamma d_gamma(cd u, const HestonParams& p) {
    const cd m = p.kappa - p.rho * p.xi * u;
    const cd d = std::sqrt(m * m + u * (1.0 - u) * (p.xi * p.xi));
    const cd s = m + d;
    if (std::abs(s) <= 1e-14 * (std::abs(m) + std::abs(d)))
        throw DomainError("d_gamma: degenerate input, kappa - rho xi u + d = 0");
    return DGamma{d, (m - d) / s};
}

ABValues ab_functions(cd u, double tau, const HestonParams& p) {
    if (!std::isfinite(tau) || tau <= 0.0)
        throw DomainError("ab_functions: tau must be positive");
    // u in {0, 1}: B solves a Riccati equation started at zero whose constant
    // term vanishes, so A and B are identically zero; returning that exactly
    // also sidesteps the gamma degeneracy that can sit at u = 1.
    if (-u * (1.0 - u) == cd(0.0)) return ABValues{cd(0.0), cd(0.0)};
    ABCore c = ab_core(u, tau, p);
    cd B = c.pw * c.em / ((p.xi * p.xi) * c.denom);
    cd L = tracked_log_ratio(c, tau);
    cd A = p.kappa * p.theta / (p.xi * p.xi) * (c.diff * tau - 2.0 * L);
    return ABValues{A, B};
}

ExtendedReal variance_mgf(double u, double t, const HestonParams& p) {
    const auto vl = VarianceLawParams::from(p, t);
    if (!std::isfinite(u)) throw DomainError("variance_mgf: u must be finite");
    if (u >= 1.0 / (2.0 * vl.beta)) return ExtendedReal::infinity();
    const double lv = log_variance_mgf_real(u, vl);
    if (lv > 709.0)
        throw NumericError("variance_mgf: moment is finite but exceeds double range");
    return ExtendedReal::finite(std::exp(lv));
}

ExtendedReal explosion_time(double u, const HestonParams& p) {
    if (!std::isfinite(u)) throw DomainError("explosion_time: u must be finite");
    if (u >= 0.0 && u <= 1.0) return ExtendedReal::infinity();
    const double m = p.kappa - p.rho * p.xi * u;
    const double D = p.xi * p.xi * (u - 1.0) * u - m * m;  // = -d^2
    if (D <= 0.0) {
        // d real; outside [0,1] this forces d < |m|, so m never vanishes here
        const double d = std::sqrt(-D);
        if (m > 0.0) return ExtendedReal::infinity();
        if (d == 0.0) return ExtendedReal::finite(-2.0 / m);
        return ExtendedReal::finite(std::log((m - d) / (m + d)) / d);
    }
    const double rt = std::sqrt(D);
    const double rxk = -m;  // rho xi u - kappa
    if (rxk == 0.0) return ExtendedReal::finite(std::numbers::pi / rt);
    const double base = (rxk < 0.0) ? std::numbers::pi : 0.0;
    return ExtendedReal::finite(2.0 / rt * (base + std::atan(rt / rxk)));
}

bool forward_lmgf_is_finite(double u, const ForwardTenor& tenor, const HestonParams& p) {
    const ExtendedReal ts = explosion_time(u, p);
    if (ts.is_finite() && !(tenor.tau < ts.value())) return false;
    const ABValues ab = ab_functions(cd(u, 0.0), tenor.tau, p);
    const double B = real_part_checked(ab.B, "forward_lmgf_is_finite");
    return B < 1.0 / (2.0 * beta_t(p, tenor.t));
}

ExtendedReal forward_lmgf(double u, const ForwardTenor& tenor, const HestonParams& p,
                          double scale) {
    if (!std::isfinite(scale) || scale <= 0.0)
        throw DomainError("forward_lmgf: scale must be positive");
    const double w = u / scale;
    if (!forward_lmgf_is_finite(w, tenor, p)) return ExtendedReal::infinity();
    return ExtendedReal::finite(scale * lambda_unscaled(w, tenor, p));
}

double forward_lmgf_deriv(double u, const ForwardTenor& tenor, const HestonParams& p,
                          double scale) {
    if (!std::isfinite(scale) || scale <= 0.0)
        throw DomainError("forward_lmgf_deriv: scale must be positive");
    const double w = u / scale;
    if (!forward_lmgf_is_finite(w, tenor, p))
        throw DomainError("forward_lmgf_deriv: u outside the finite domain");
    return lambda_prime_unscaled(w, tenor, p);
}

cd forward_lmgf_complex(cd z, const ForwardTenor& tenor, const HestonParams& p) {
    if (!forward_lmgf_is_finite(z.real(), tenor, p))
        throw DomainError("forward_lmgf_complex: Re z outside the finite domain");
    const ABValues ab = ab_functions(z, tenor.tau, p);
    return ab.A + log_variance_mgf(ab.B, VarianceLawParams::from(p, tenor.t));
}

DomainInterval forward_lmgf_domain(const ForwardTenor& tenor, const HestonParams& p,
                                   double scale, double tol) {
    if (!std::isfinite(scale) || scale <= 0.0)
        throw DomainError("forward_lmgf_domain: scale must be positive");
    if (!(tol > 0.0)) throw DomainError("forward_lmgf_domain: tol must be positive");
    const auto finite_at = [&](double u) { return forward_lmgf_is_finite(u / scale, tenor, p); };

    double lo = scale;  // the martingale moment, always interior
    if (!finite_at(lo))
        throw NumericError("forward_lmgf_domain: martingale moment not finite");
    double hi = std::max(2.0 * scale, 1.0);
    while (finite_at(hi)) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) throw NumericError("forward_lmgf_domain: no upper explosion located");
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (finite_at(mid) ? lo : hi) = mid;
    }
    const double upper = lo;

    double nhi = 0.0;
    double nlo = -std::max(scale, 1.0);
    while (finite_at(nlo)) {
        nhi = nlo;
        nlo *= 2.0;
        if (nlo < -1e12) throw NumericError("forward_lmgf_domain: no lower explosion located");
    }
    while (nhi - nlo > tol) {
        const double mid = 0.5 * (nlo + nhi);
        (finite_at(mid) ? nhi : nlo) = mid;
    }
    return DomainInterval{nhi, upper};
}

double saddlepoint(double k, const ForwardTenor& tenor, const HestonParams& p) {
    if (!std::isfinite(k) || k == 0.0)
        throw DomainError("saddlepoint: k must be nonzero");
    const DomainInterval dom = forward_lmgf_domain(tenor, p, 1.0, 1e-12);
    const auto g = [&](double w) { return lambda_prime_unscaled(w, tenor, p) - k; };

    // Lambda' is strictly increasing and diverges at both endpoints, so the
    // sign of g at w = 0 picks the side holding the unique root.
    double lo, hi, glo, ghi;
    const double g0 = g(0.0);
    if (g0 == 0.0) return 0.0;
    if (g0 < 0.0) {
        lo = 0.0;
        glo = g0;
        hi = dom.upper;
        ghi = g(hi);
    } else {
        hi = 0.0;
        ghi = g0;
        lo = dom.lower;
        glo = g(lo);
    }
    if (!(glo < 0.0 && ghi > 0.0)) {
        std::ostringstream os;
        os << "saddlepoint: bracket failure, g(" << lo << ")=" << glo << ", g(" << hi
           << ")=" << ghi << ", k=" << k;
        throw NumericError(os.str());
    }

    const double tol = 1e-12 * std::max(1.0, std::abs(k));
    double w = 0.5 * (lo + hi);
    double gw = g(w);
    double w_prev = (std::abs(glo) < std::abs(ghi)) ? lo : hi;
    double g_prev = (std::abs(glo) < std::abs(ghi)) ? glo : ghi;
    for (int it = 0; it < 300; ++it) {
        if (std::abs(gw) < tol) return w * std::sqrt(tenor.tau);
        if (gw < 0.0) {
            lo = w;
            glo = gw;
        } else {
            hi = w;
            ghi = gw;
        }
        // secant step, safeguarded back to bisection when it leaves the bracket
        double cand = w - gw * (w - w_prev) / (gw - g_prev);
        if (!std::isfinite(cand) || cand <= lo || cand >= hi) cand = 0.5 * (lo + hi);
        w_prev = w;
        g_prev = gw;
        w = cand;
        gw = g(w);
    }
    throw NumericError("saddlepoint: solver failed to converge");
}

double e_tau(double k, const ForwardTenor& tenor, const HestonParams& p) {
    const double ustar = saddlepoint(k, tenor, p);
    const double rt = std::sqrt(tenor.tau);
    const ABValues ab = ab_functions(cd(ustar / rt, 0.0), tenor.tau, p);
    const double B = real_part_checked(ab.B, "e_tau");
    return (1.0 - 2.0 * beta_t(p, tenor.t) * B) * std::pow(tenor.tau, -0.25);
}

} // namespace fwdsmile
