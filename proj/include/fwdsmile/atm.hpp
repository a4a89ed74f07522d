#pragma once

#include <optional>

#include "fwdsmile/extended_real.hpp"
#include "fwdsmile/heston.hpp"

namespace fwdsmile {

// Kummer confluent hypergeometric M(alpha, mu, z) for z >= 0: power series
// up to z = 60, large-z asymptotic expansion beyond. DomainError for a
// nonpositive-integer mu or negative z; NumericError when the value
// overflows double range.
double kummer_m(double alpha, double mu, double z);

// Fractional moment of the time-t variance, Delta(t, p) = E[V_t^p]. Finite
// iff p > -2 kappa theta / xi^2 strictly; +infinity otherwise.
ExtendedReal delta_moment(double t, double p_exponent, const HestonParams& params);

enum class AtmRegime {
    feller_strict,  // 4 kappa theta > xi^2: the first-order term exists
    degenerate,     // otherwise: E[V_t^{-1/2}] diverges, order zero only
};

struct AtmExpansion {
    double sigma0;                 // E[sqrt(V_t)]
    std::optional<double> sigma1;  // slope in tau; absent when degenerate
    AtmRegime regime;
};

// At-the-money forward implied-vol expansion sigma(tau) = sigma0 +
// sigma1 tau + o(tau), built from fractional moments of V_t.
AtmExpansion atm_expansion(double t, const HestonParams& params);

// index 0 -> sigma0; index 1 -> sigma1, raising DomainError in the
// degenerate regime where that coefficient does not exist.
double atm_from_future_vol_moments(int index, double t, const HestonParams& params);

} // namespace fwdsmile
