#pragma once

#include "fwdsmile/errors.hpp"

namespace fwdsmile {

// A Black-Scholes implied-vol quote on the normalized forward (spot 1, zero
// rates): log-strike k, maturity tau, annualized volatility sigma.
struct BsQuote {
    double k;
    double tau;
    double sigma;

    BsQuote(double k_, double tau_, double sigma_);
};

// Standard normal cdf via the complementary error function (relative error
// below 1e-15 in double precision everywhere, including the far tails).
double norm_cdf(double x);

// N(d+) - e^k N(d-),  d+- = -k/(sigma sqrt(tau)) +- sigma sqrt(tau)/2.
double bs_call(double k, double tau, double sigma);

// e^k N(-d-) - N(-d+); priced directly (not via parity) so that tiny
// out-of-the-money time values survive in floating point.
double bs_put(double k, double tau, double sigma);

// Unique sigma with bs_call(k, tau, sigma) = price; requires
// (1 - e^k)^+ < price < 1.
double implied_vol(double price, double k, double tau);

// Unique sigma with bs_put(k, tau, sigma) = price; requires
// (e^k - 1)^+ < price < e^k.
double implied_vol_put(double price, double k, double tau);

// Inversion result carrying the deep-out-of-the-money quality flag: when the
// price sits within 1e-15 of intrinsic, the vol is noise-dominated.
struct ImpliedVolResult {
    double sigma;
    bool near_intrinsic;
};
ImpliedVolResult implied_vol_checked(double price, double k, double tau);
ImpliedVolResult implied_vol_put_checked(double price, double k, double tau);

// Small-maturity expansion of the Black-Scholes call at fixed k != 0:
// (1-e^k)1_{k<0} + e^{k/2 - k^2/(2 sigma^2 tau)} (sigma^2 tau)^{3/2} /
// (k^2 sqrt(2 pi)) * [1 - (3/k^2 + 1/8) sigma^2 tau].
double bs_forward_smalltau(double k, double tau, double sigma);

// At-the-money small-maturity expansion: (sigma sqrt(tau) -
// sigma^3 tau^{3/2}/24) / sqrt(2 pi).
double bs_atm_smalltau(double tau, double sigma);

} // namespace fwdsmile
