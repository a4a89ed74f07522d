#include "fwdsmile/bsm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace fwdsmile {

namespace {

constexpr double sqrt2 = std::numbers::sqrt2;
const double sqrt_two_pi = std::sqrt(2.0 * std::numbers::pi);

// Bracketing root-finder with hybrid bisection / inverse-quadratic steps
// (Brent). Requires fa * fb <= 0; stops when |f| <= ftol or the bracket is
// resolved to machine precision.
template <typename F>
double brent(F f, double a, double b, double fa, double fb, double ftol) {
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    double c = a, fc = fa, d = b - a, e = d;
    for (int iter = 0; iter < 200; ++iter) {
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if (std::abs(fc) < std::abs(fb)) {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        const double tol1 = 2.0 * 1.1e-16 * std::abs(b);
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0 || std::abs(fb) <= ftol) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
    }
    throw NumericError("implied vol: root-finder failed to converge");
}

template <typename Price>
double invert_vol(Price price_of, double target, const char* what) {
    // vol bracket [1e-8, 10], expanded on demand
    double lo = 1e-8, hi = 10.0;
    double flo = price_of(lo) - target;
    double fhi = price_of(hi) - target;
    int guard = 0;
    while (flo > 0.0 && lo > 1e-14) {
        lo *= 1e-2;
        flo = price_of(lo) - target;
        if (++guard > 10) break;
    }
    while (fhi < 0.0 && hi < 1e6) {
        hi *= 2.0;
        fhi = price_of(hi) - target;
        if (++guard > 60) break;
    }
    if (!(flo <= 0.0 && fhi >= 0.0)) {
        std::ostringstream os;
        os << what << ": could not bracket the volatility for price " << target;
        throw NumericError(os.str());
    }
    // the residual tolerance is relative to the target so that tiny
    // out-of-the-money prices (far below any fixed absolute scale) are still
    // resolved to full precision rather than accepted at the bracket edge
    return brent([&](double s) { return price_of(s) - target; }, lo, hi, flo, fhi,
                 1e-13 * target);
}

} // namespace

BsQuote::BsQuote(double k_, double tau_, double sigma_) : k(k_), tau(tau_), sigma(sigma_) {
    if (!std::isfinite(k)) throw DomainError("BsQuote: k must be finite");
    if (!std::isfinite(tau) || tau <= 0.0) throw DomainError("BsQuote: tau must be positive");
    if (!std::isfinite(sigma) || sigma <= 0.0) throw DomainError("BsQuote: sigma must be positive");
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x / sqrt2); }

double bs_call(double k, double tau, double sigma) {
    if (!(tau > 0.0)) throw DomainError("bs_call: tau must be positive");
    if (!(sigma > 0.0)) throw DomainError("bs_call: sigma must be positive");
    const double st = sigma * std::sqrt(tau);
    const double dp = -k / st + 0.5 * st;
    const double dm = dp - st;
    return norm_cdf(dp) - std::exp(k) * norm_cdf(dm);
}

double bs_put(double k, double tau, double sigma) {
    if (!(tau > 0.0)) throw DomainError("bs_put: tau must be positive");
    if (!(sigma > 0.0)) throw DomainError("bs_put: sigma must be positive");
    const double st = sigma * std::sqrt(tau);
    const double dp = -k / st + 0.5 * st;
    const double dm = dp - st;
    return std::exp(k) * norm_cdf(-dm) - norm_cdf(-dp);
}

double implied_vol(double price, double k, double tau) {
    if (!(tau > 0.0)) throw DomainError("implied_vol: tau must be positive");
    const double intrinsic = std::max(-std::expm1(k), 0.0);
    if (!(price > intrinsic) || !(price < 1.0))
        throw DomainError("implied_vol: price outside the open no-arbitrage bounds");
    // in-the-money quotes carry their information in the extrinsic part, so
    // strip the intrinsic via parity and invert the out-of-the-money put:
    // the solver tolerance then scales with the extrinsic value itself
    if (k < 0.0)
        return invert_vol([&](double s) { return bs_put(k, tau, s); }, price - intrinsic,
                          "implied_vol");
    return invert_vol([&](double s) { return bs_call(k, tau, s); }, price, "implied_vol");
}

double implied_vol_put(double price, double k, double tau) {
    if (!(tau > 0.0)) throw DomainError("implied_vol_put: tau must be positive");
    const double intrinsic = std::max(std::expm1(k), 0.0);
    if (!(price > intrinsic) || !(price < std::exp(k)))
        throw DomainError("implied_vol_put: price outside the open no-arbitrage bounds");
    if (k > 0.0)
        return invert_vol([&](double s) { return bs_call(k, tau, s); }, price - intrinsic,
                          "implied_vol_put");
    return invert_vol([&](double s) { return bs_put(k, tau, s); }, price, "implied_vol_put");
}

ImpliedVolResult implied_vol_checked(double price, double k, double tau) {
    const double intrinsic = std::max(-std::expm1(k), 0.0);
    return ImpliedVolResult{implied_vol(price, k, tau), price - intrinsic < 1e-15};
}

ImpliedVolResult implied_vol_put_checked(double price, double k, double tau) {
    const double intrinsic = std::max(std::expm1(k), 0.0);
    return ImpliedVolResult{implied_vol_put(price, k, tau), price - intrinsic < 1e-15};
}

double bs_forward_smalltau(double k, double tau, double sigma) {
    if (k == 0.0) throw DomainError("bs_forward_smalltau: k must be nonzero");
    if (!(tau > 0.0)) throw DomainError("bs_forward_smalltau: tau must be positive");
    if (!(sigma > 0.0)) throw DomainError("bs_forward_smalltau: sigma must be positive");
    const double s2t = sigma * sigma * tau;
    const double intrinsic = (k < 0.0) ? -std::expm1(k) : 0.0;
    const double lead = std::exp(0.5 * k - k * k / (2.0 * s2t)) * std::pow(s2t, 1.5)
                      / (k * k * sqrt_two_pi);
    return intrinsic + lead * (1.0 - (3.0 / (k * k) + 0.125) * s2t);
}

double bs_atm_smalltau(double tau, double sigma) {
    if (!(tau > 0.0)) throw DomainError("bs_atm_smalltau: tau must be positive");
    if (!(sigma >= 0.0)) throw DomainError("bs_atm_smalltau: sigma must be nonnegative");
    const double st = sigma * std::sqrt(tau);
    return (st - st * st * st / 24.0) / sqrt_two_pi;
}

} // namespace fwdsmile
