#pragma once

#include <complex>

#include "fwdsmile/errors.hpp"
#include "fwdsmile/extended_real.hpp"

namespace fwdsmile {

using cd = std::complex<double>;

// Heston dynamics under the pricing measure with zero rates:
//   dS = S sqrt(V) dW,   dV = kappa (theta - V) dt + xi sqrt(V) dZ,
//   d<W,Z> = rho dt,  V_0 = v.
// The Feller condition 2 kappa theta >= xi^2 is deliberately not required.
struct HestonParams {
    double kappa;  // mean-reversion speed (1/years)
    double theta;  // long-run variance
    double xi;     // volatility of variance
    double rho;    // spot/variance correlation, |rho| < 1
    double v;      // initial variance

    HestonParams(double kappa_, double theta_, double xi_, double rho_, double v_);

    // 4*kappa*theta - xi^2. Zero marks the regime where the higher-order
    // smile terms exist; positive is the strict regime needed by the ATM
    // first-order term.
    double feller_gap() const noexcept { return 4.0 * kappa * theta - xi * xi; }
    bool feller_equality(double rel_tol = 1e-12) const noexcept;
};

// Forward-start contract on X = log S_{t+tau} - log S_t with log-strike k.
struct ForwardTenor {
    double t;    // forward-start date (years), > 0
    double tau;  // remaining maturity (years), > 0
    double k;    // log-strike

    ForwardTenor(double t_, double tau_, double k_);
};

// The time-t variance is distributed as beta * chi'^2(q, lambda): a scaled
// noncentral chi-square.
struct VarianceLawParams {
    double q;       // degrees of freedom, 4 kappa theta / xi^2
    double lambda;  // noncentrality, v e^{-kappa t} / beta
    double beta;    // scale, xi^2 (1 - e^{-kappa t}) / (4 kappa)

    static VarianceLawParams from(const HestonParams& p, double t);
};

// xi^2 (1 - e^{-kappa t}) / (4 kappa); the scale of the time-t variance law.
double beta_t(const HestonParams& p, double t);

struct DGamma {
    cd d;      // sqrt((kappa - rho xi u)^2 + u (1-u) xi^2), branch Re d >= 0
    cd gamma;  // (m - d) / (m + d) with m = kappa - rho xi u
};

// Throws DomainError at the pole m + d = 0, where gamma degenerates.
DGamma d_gamma(cd u, const HestonParams& p);

struct ABValues {
    cd A;
    cd B;
};

// Building blocks of the spot log-mgf: log E[exp(u X_tau) | V_0 = w] =
// A(u,tau) + B(u,tau) w. The logarithm inside A is tracked continuously in
// the time variable so no branch jump can enter silently; a tracking
// breakdown raises NumericError rather than returning a wrong sheet.
ABValues ab_functions(cd u, double tau, const HestonParams& p);

// E[exp(u V_t)]; +infinity for u >= 1/(2 beta_t). Throws NumericError when
// the moment is finite but exceeds double range.
ExtendedReal variance_mgf(double u, double t, const HestonParams& p);

// Moment explosion time of the spot log-mgf:
// sup{ tau >= 0 : log E[exp(u X_tau)] < infinity }; +infinity when the
// moment never explodes (always the case for u in [0, 1]).
ExtendedReal explosion_time(double u, const HestonParams& p);

// True when the unscaled forward log-mgf is finite at real u.
bool forward_lmgf_is_finite(double u, const ForwardTenor& tenor, const HestonParams& p);

// Forward log-mgf Lambda(u, a) = a log E[exp(u X / a)] of the forward
// log-return X over (t, t+tau]. scale = 1 is the raw log-mgf, scale =
// sqrt(tau) the small-maturity rescaling. +infinity outside the finite
// domain; the strike field of the tenor is ignored here.
ExtendedReal forward_lmgf(double u, const ForwardTenor& tenor, const HestonParams& p,
                          double scale);

// d/du of u -> Lambda(u, scale) at real u inside the finite domain, via the
// analytic chain rule through A, B and the variance law (finite-difference
// fallback only in the removable d ~ 0 configuration).
double forward_lmgf_deriv(double u, const ForwardTenor& tenor, const HestonParams& p,
                          double scale);

// Analytic continuation of the unscaled forward log-mgf to complex z with
// Re z inside the finite real domain. DomainError outside the strip;
// NumericError if the variance-law branch guard trips.
cd forward_lmgf_complex(cd z, const ForwardTenor& tenor, const HestonParams& p);

struct DomainInterval {
    double lower;  // < 0
    double upper;  // > scale (the martingale moment is always interior)
};

// Endpoints of the finite domain of u -> Lambda(u, scale), each located by
// bisection to absolute tolerance tol.
DomainInterval forward_lmgf_domain(const ForwardTenor& tenor, const HestonParams& p,
                                   double scale, double tol = 1e-12);

// Rescaled saddlepoint u* solving d/du Lambda(u, sqrt(tau)) = k, strictly
// inside the finite domain. Requires k != 0.
double saddlepoint(double k, const ForwardTenor& tenor, const HestonParams& p);

// e_tau = (1 - 2 beta_t Bhat(u*)) tau^{-1/4} with Bhat(u) = B(u/sqrt(tau), tau)
// evaluated at the rescaled saddlepoint.
double e_tau(double k, const ForwardTenor& tenor, const HestonParams& p);

} // namespace fwdsmile
