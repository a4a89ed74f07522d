#include "fwdsmile/asymptotics.hpp"

#include <cmath>
#include <numbers>

namespace fwdsmile {

namespace {

const double sqrt_two_pi = std::sqrt(2.0 * std::numbers::pi);

// The expansion degenerates at the money (the constant smile term diverges
// like log k^2); refuse the band rather than return garbage.
constexpr double atm_exclusion = 1e-4;

} // namespace

double rate_function(double k, double beta) {
    if (!(beta > 0.0)) throw DomainError("rate_function: beta must be positive");
    return std::abs(k) / std::sqrt(beta);
}

double b1_hat(double u, const HestonParams& p) {
    return u * (u * u * p.rho * p.xi - 2.0) / 4.0;
}

double b1_hat_prime(double u, const HestonParams& p) {
    return (3.0 * u * u * p.rho * p.xi - 2.0) / 4.0;
}

CoefficientSet otm_coefficients(double k, double t, const HestonParams& p) {
    if (!std::isfinite(k) || std::abs(k) < atm_exclusion)
        throw DomainError("otm_coefficients: |k| < 1e-4 lies in the at-the-money exclusion band");
    if (!std::isfinite(t) || t <= 0.0)
        throw DomainError("otm_coefficients: t must be positive");

    const double kap = p.kappa, th = p.theta, xi = p.xi, v = p.v;
    const double xi2 = xi * xi;
    const double ak = std::abs(k);
    const double bt = beta_t(p, t);
    const double ekt = std::exp(-kap * t);
    const double ekth = std::exp(-0.5 * kap * t);

    CoefficientSet c;
    c.beta = bt;
    c.lambda_star = ak / std::sqrt(bt);
    c.a0 = (k > 0.0 ? 1.0 : -1.0) / std::sqrt(bt);
    c.a1 = -c.a0 * std::sqrt(v) * ekth / (2.0 * std::sqrt(ak) * std::pow(bt, 0.25));
    const double b1h = b1_hat(c.a0, p);
    const double b1hp = b1_hat_prime(c.a0, p);
    c.a2 = -kap * th / (k * xi2) - b1h / c.a0;
    c.a3 = (2.0 * bt * c.a1 * c.a1 * c.a1 / (xi2 * xi2 * v * v))
         * (xi2 * v * bt / ekt * (ak * xi2 * std::sqrt(bt) * b1h - k * xi2 * b1hp - kap * th)
            + std::pow(2.0 * kap * th * bt / ekt, 2) - xi2 * xi2 * v * v / 16.0);
    c.e0 = -2.0 * c.a1 / c.a0;
    c.zeta = 2.0 * std::sqrt(v) * ekth / std::pow(c.e0, 1.5);
    c.r = 0.5 * c.a1 * c.a1 - kap * th / (ak * xi2 * std::sqrt(bt));
    c.e1 = -2.0 * bt * c.r;
    c.e2 = -2.0 * bt * (c.a1 * c.a2 + c.a0 * c.a3 + c.a1 * b1hp);
    const double e0 = c.e0;
    c.psi0 = c.a0 * v * ekt / (e0 * e0 * e0)
           * (e0 * e0 + c.a0 * bt * (3.0 * c.a1 * e0 - 2.0 * c.a0 * c.e1));
    c.psi1 = -4.0 * c.a0 * v * bt * ekt / (e0 * e0 * e0 * e0);
    c.psi2 = v * ekt / (2.0 * e0 * e0 * e0 * e0)
           * (4.0 * c.a0 * bt * (3.0 * c.a0 * c.e1 - 4.0 * c.a1 * e0) - 5.0 * e0 * e0);
    c.psi3 = 8.0 * v * bt * ekt / (e0 * e0 * e0 * e0 * e0);
    c.psi4 = v * ekt / (2.0 * e0 * e0 * e0)
           * ((c.e1 * c.e1 - e0 * c.e2) / bt - 2.0 * c.a0 * c.a1 * e0 * c.e1
              + 2.0 * e0 * e0 * c.r);
    const double qbar = 4.0 * kap * th * bt / xi2;
    c.phi2a = c.psi2 - 0.5 * c.psi0 * c.psi0 - qbar * (2.0 * kap * th + xi2) / (e0 * e0 * xi2)
            - qbar * c.a0 * c.psi0 / e0;
    c.phi2b = c.psi3 - c.psi0 * c.psi1 - qbar * c.a0 * c.psi1 / e0;
    c.phi2c = -0.5 * c.psi1 * c.psi1;
    c.z1 = c.psi4 - c.a3 * k - (2.0 * kap * th / xi2) * (c.e1 / e0);
    const double z2 = c.zeta * c.zeta;
    c.p1 = e0 + c.phi2a / z2 + 3.0 * c.phi2b / (z2 * z2) + 15.0 * c.phi2c / (z2 * z2 * z2);
    c.c0 = 2.0 * std::abs(c.a1 * k);
    c.c1 = (v * ekt / e0) * (c.a0 * c.a1 - c.e1 / (2.0 * bt * e0)) - c.a2 * k;
    c.c2 = std::pow(e0, -2.0 * kap * th / xi2);
    c.c3 = c.z1 + c.p1;
    return c;
}

double price_expansion(double k, double t, double tau, const HestonParams& p,
                       bool with_correction) {
    if (!(tau > 0.0)) throw DomainError("price_expansion: tau must be positive");
    const CoefficientSet c = otm_coefficients(k, t, p);
    const double intrinsic = (k < 0.0) ? -std::expm1(k) : 0.0;
    const double expo = -c.lambda_star / std::sqrt(tau) + c.c0 / std::pow(tau, 0.25) + c.c1 + k;
    const double pref = c.beta
                      * std::pow(tau, 7.0 / 8.0 - p.theta * p.kappa / (2.0 * p.xi * p.xi))
                      * c.c2 / (c.zeta * sqrt_two_pi);
    const double corr = 1.0 + (with_correction ? c.c3 * std::pow(tau, 0.25) : 0.0);
    return intrinsic + std::exp(expo) * pref * corr;
}

SmileExpansion smile_coefficients(double k, double t, const HestonParams& p) {
    const CoefficientSet c = otm_coefficients(k, t, p);
    SmileExpansion s;
    // v0 and v1 in their direct closed forms: even in k, independent of rho.
    s.v0 = std::sqrt(c.beta) * std::abs(k) / 2.0;
    s.v1 = std::exp(-0.5 * p.kappa * t) * std::pow(c.beta, 0.25)
         * std::sqrt(p.v * std::abs(k)) / 2.0;
    s.feller_equality = p.feller_equality();
    s.max_valid_order = s.feller_equality ? 3 : 1;
    if (s.feller_equality) {
        const double v0 = s.v0, v1 = s.v1;
        const double v2 = (2.0 * v0 * v0 / (k * k))
                            * std::log(std::exp(c.c1) * c.c2 * c.beta * k * k
                                       / (c.zeta * std::pow(v0, 1.5)))
                        + v0 * v0 / k + v1 * v1 / v0;
        const double v3 = (v0 / (k * k)) * (2.0 * c.c3 * v0 - 3.0 * v1)
                        + (v1 / v0) * (2.0 * v2 - v1 * v1 / v0);
        s.v2 = v2;
        s.v3 = v3;
    }
    return s;
}

SmileValue smile_expansion(double k, double t, double tau, const HestonParams& p, int order) {
    if (order < 0 || order > 3)
        throw DomainError("smile_expansion: order must be in {0, 1, 2, 3}");
    if (!(tau > 0.0)) throw DomainError("smile_expansion: tau must be positive");
    const SmileExpansion s = smile_coefficients(k, t, p);
    if (order > s.max_valid_order)
        throw DomainError(
            "smile_expansion: orders 2-3 require 4 kappa theta = xi^2; refusing to truncate silently");
    double var = s.v0 / std::sqrt(tau);
    if (order >= 1) var += s.v1 / std::pow(tau, 0.25);
    if (order >= 2) var += *s.v2;
    if (order >= 3) var += *s.v3 * std::pow(tau, 0.25);
    if (!(var > 0.0))
        throw NumericError("smile_expansion: truncated variance is not positive at this tenor");
    return SmileValue{var, std::sqrt(var)};
}

cd measure_changed_cf(double u, double k, double t, double tau, const HestonParams& p) {
    const ForwardTenor tenor(t, tau, k);
    const double wstar = saddlepoint(k, tenor, p) / std::sqrt(tau);
    const double lam_star = forward_lmgf(wstar, tenor, p, 1.0).value();
    const double eighth = std::pow(tau, -0.125);
    const cd z(wstar, u * eighth);
    return std::exp(cd(0.0, -u * k * eighth) + forward_lmgf_complex(z, tenor, p) - lam_star);
}

double u_star_prefactor(double k, double t, double tau, const HestonParams& p) {
    const ForwardTenor tenor(t, tau, k);
    const double wstar = saddlepoint(k, tenor, p) / std::sqrt(tau);
    const double lam = forward_lmgf(wstar, tenor, p, 1.0).value();
    return std::exp(lam - k * wstar);
}

} // namespace fwdsmile
