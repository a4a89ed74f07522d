#pragma once

#include "fwdsmile/bsm.hpp"
#include "fwdsmile/heston.hpp"
#include "fwdsmile/quadrature.hpp"

namespace fwdsmile {

enum class DigitalSide { above, below };

struct PriceResult {
    double price = 0.0;
    double est_error = 0.0;
    long n_evals = 0;
    bool near_intrinsic = false;       // extrinsic value below 1e-15
    bool truncation_dominated = false;  // tail envelope above abs_tol/10 at the cut
};

// E[(e^X - e^k)^+] of the forward log-return via the damped transform
//   e^{-alpha k}/pi * Int_0^inf Re[e^{-iuk} exp(Lambda(nu+iu)) /
//   ((alpha+iu)(nu+iu))] du,  nu = alpha + 1,
// with residue corrections when alpha < 0. Auto damping centers the contour
// on the saddlepoint for out-of-the-money strikes, which keeps the integral
// at the scale of the price itself (no cancellation in the tails); explicit
// damping must keep the moment 1 + alpha finite and off the poles {0, -1}.
PriceResult forward_call(const ForwardTenor& tenor, const HestonParams& p,
                         const QuadratureSettings& q);

// E[(e^k - e^X)^+]; priced on a negative-damping contour for k < 0 so that
// tiny out-of-the-money values are produced directly, without parity.
PriceResult forward_put(const ForwardTenor& tenor, const HestonParams& p,
                        const QuadratureSettings& q);

// P(X >= k) or P(X <= k); the two sides use opposite-sign contours, so
// their sum being 1 is a genuine cross-check rather than an identity.
PriceResult forward_digital(const ForwardTenor& tenor, const HestonParams& p,
                            const QuadratureSettings& q, DigitalSide side);

struct SmileQuote {
    double sigma;
    bool near_intrinsic;
    PriceResult price;  // the out-of-the-money instrument that was inverted
};

// Implied volatility of the forward-start price at the tenor's strike.
// Inverts the out-of-the-money instrument (call for k >= 0, put for k < 0).
double forward_smile(const ForwardTenor& tenor, const HestonParams& p,
                     const QuadratureSettings& q);
SmileQuote forward_smile_quote(const ForwardTenor& tenor, const HestonParams& p,
                               const QuadratureSettings& q);

} // namespace fwdsmile
