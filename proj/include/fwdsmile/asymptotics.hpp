#pragma once

#include <optional>

#include "fwdsmile/heston.hpp"

namespace fwdsmile {

// Large-deviations rate of the forward log-return at the sqrt(tau) scale:
// |k| / sqrt(beta).
double rate_function(double k, double beta);

// First-order coefficient of the rescaled B expansion: u (u^2 rho xi - 2)/4,
// and its derivative in u.
double b1_hat(double u, const HestonParams& p);
double b1_hat_prime(double u, const HestonParams& p);

// Closed-form coefficient cascade of the small-maturity out-of-the-money
// machinery: saddlepoint expansion (a), curvature expansion (e), Gaussian
// width (zeta), characteristic-function corrections (psi, phi2), prefactor
// corrections (z1, p1), and the price-expansion constants (c).
struct CoefficientSet {
    double a0, a1, a2, a3;
    double zeta, r;
    double e0, e1, e2;
    double psi0, psi1, psi2, psi3, psi4;
    double phi2a, phi2b, phi2c;
    double z1, p1;
    double c0, c1, c2, c3;
    double lambda_star;
    double beta;
};

// Requires |k| >= 1e-4 (the expansion is singular at the money) and t > 0.
CoefficientSet otm_coefficients(double k, double t, const HestonParams& p);

// Small-maturity forward-start call expansion:
// (1-e^k)1_{k<0} + exp(-lambda*/sqrt(tau) + c0/tau^{1/4} + c1 + k)
//   * beta tau^{7/8 - theta kappa/(2 xi^2)} c2/(zeta sqrt(2 pi))
//   * (1 + c3 tau^{1/4}).
double price_expansion(double k, double t, double tau, const HestonParams& p,
                       bool with_correction = true);

struct SmileExpansion {
    double v0;
    double v1;
    std::optional<double> v2;  // present only under the 4 kappa theta = xi^2 gate
    std::optional<double> v3;
    int max_valid_order;       // 1, or 3 under the gate
    bool feller_equality;
};

// Forward-smile coefficients; v2/v3 exist only when 4 kappa theta = xi^2
// (within the gate tolerance), mirroring the two-case expansion.
SmileExpansion smile_coefficients(double k, double t, const HestonParams& p);

struct SmileValue {
    double variance;  // sigma^2 at the requested order
    double vol;
};

// sigma^2 = v0/sqrt(tau) + v1/tau^{1/4} [+ v2 + v3 tau^{1/4}], truncated at
// the requested order; orders 2-3 outside the gate raise DomainError rather
// than silently truncating.
SmileValue smile_expansion(double k, double t, double tau, const HestonParams& p, int order);

// Characteristic function of the rescaled, recentered forward log-return
// under the saddlepoint change of measure:
// exp(-iuk/tau^{1/8} + Lambda(w* + iu tau^{-1/8}) - Lambda(w*)) with
// Lambda the unscaled log-mgf and w* the unscaled saddlepoint.
cd measure_changed_cf(double u, double k, double t, double tau, const HestonParams& p);

// exp(Lambda(w*) - k w*): the exact exponential prefactor of the tail
// estimate, used to test its closed-form expansion.
double u_star_prefactor(double k, double t, double tau, const HestonParams& p);

} // namespace fwdsmile
