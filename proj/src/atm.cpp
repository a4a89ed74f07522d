#include "fwdsmile/atm.hpp"

#include <cmath>
#include <limits>

namespace fwdsmile {

namespace {

// Above this the power series needs enough terms that cancellation and cost
// both favor the asymptotic expansion.
constexpr double series_cut = 60.0;

bool is_nonpositive_integer(double mu) {
    return mu <= 0.0 && mu == std::floor(mu);
}

// sum_n (alpha)_n z^n / ((mu)_n n!), by term recurrence.
double kummer_series(double alpha, double mu, double z) {
    double term = 1.0;
    double sum = 1.0;
    for (int n = 0; n < 10000; ++n) {
        term *= (alpha + n) * z / ((mu + n) * (n + 1));
        sum += term;
        if (std::abs(term) < 1e-16 * std::abs(sum)) return sum;
    }
    throw NumericError("kummer_m: series did not converge within 10000 terms");
}

// Large-z tail sum_n (mu-alpha)_n (1-alpha)_n / (n! z^n), truncated at the
// smallest term (the series is asymptotic, not convergent).
double kummer_asymptotic_tail(double alpha, double mu, double z) {
    double term = 1.0;
    double sum = 1.0;
    double prev = 1.0;
    for (int n = 0; n < 200; ++n) {
        term *= (mu - alpha + n) * (1.0 - alpha + n) / ((n + 1) * z);
        if (std::abs(term) > prev) break;
        sum += term;
        prev = std::abs(term);
        if (prev < 1e-16 * std::abs(sum)) break;
    }
    return sum;
}

void validate_kummer_args(double alpha, double mu, double z) {
    if (!std::isfinite(alpha) || !std::isfinite(mu) || !std::isfinite(z))
        throw DomainError("kummer_m: arguments must be finite");
    if (is_nonpositive_integer(mu))
        throw DomainError("kummer_m: mu must not be a nonpositive integer");
    if (z < 0.0) throw DomainError("kummer_m: z must be nonnegative");
}

// log(e^{-z} M(alpha, mu, z)) for alpha, mu > 0; stable for every z >= 0
// because the e^z growth cancels analytically in the large-z branch.
double log_e_minus_z_m(double alpha, double mu, double z) {
    if (z <= series_cut) return std::log(kummer_series(alpha, mu, z)) - z;
    const double tail = kummer_asymptotic_tail(alpha, mu, z);
    return std::lgamma(mu) - std::lgamma(alpha) + (alpha - mu) * std::log(z) + std::log(tail);
}

} // namespace

double kummer_m(double alpha, double mu, double z) {
    validate_kummer_args(alpha, mu, z);
    if (z <= series_cut) return kummer_series(alpha, mu, z);
    if (alpha <= 0.0 || mu <= 0.0)
        throw NumericError("kummer_m: large-z evaluation requires positive alpha and mu");
    const double log_val = z + log_e_minus_z_m(alpha, mu, z);
    if (log_val >= std::log(std::numeric_limits<double>::max()))
        throw NumericError("kummer_m: value overflows double range");
    return std::exp(log_val);
}

ExtendedReal delta_moment(double t, double p_exponent, const HestonParams& params) {
    if (!std::isfinite(t) || t <= 0.0) throw DomainError("delta_moment: t must be positive");
    if (!std::isfinite(p_exponent)) throw DomainError("delta_moment: exponent must be finite");
    const double b = 2.0 * params.kappa * params.theta / (params.xi * params.xi);
    if (p_exponent <= -b) return ExtendedReal::infinity();
    const double beta = beta_t(params, t);
    const double z = params.v * std::exp(-params.kappa * t) / (2.0 * beta);
    const double log_delta = p_exponent * std::log(2.0 * beta)
                           + std::lgamma(b + p_exponent) - std::lgamma(b)
                           + log_e_minus_z_m(b + p_exponent, b, z);
    const double val = std::exp(log_delta);
    if (!std::isfinite(val))
        throw NumericError("delta_moment: finite moment exceeds double range");
    return ExtendedReal::finite(val);
}

AtmExpansion atm_expansion(double t, const HestonParams& params) {
    AtmExpansion out;
    out.sigma0 = delta_moment(t, 0.5, params).value();
    const bool strict = params.feller_gap() > 0.0;
    out.regime = strict ? AtmRegime::feller_strict : AtmRegime::degenerate;
    if (strict) {
        const double m_minus = delta_moment(t, -0.5, params).value();
        out.sigma1 = 0.25 * m_minus
                       * (params.kappa * params.theta
                          + params.xi * params.xi * (params.rho * params.rho - 4.0) / 24.0)
                   + 0.125 * out.sigma0 * (params.rho * params.xi - 2.0 * params.kappa);
    }
    return out;
}

double atm_from_future_vol_moments(int index, double t, const HestonParams& params) {
    if (index != 0 && index != 1)
        throw DomainError("atm_from_future_vol_moments: index must be 0 or 1");
    const AtmExpansion e = atm_expansion(t, params);
    if (index == 0) return e.sigma0;
    if (!e.sigma1)
        throw DomainError(
            "atm_from_future_vol_moments: the first-order coefficient requires 4 kappa theta > xi^2");
    return *e.sigma1;
}

} // namespace fwdsmile
