#pragma once

#include <functional>
#include <optional>

#include "fwdsmile/errors.hpp"

namespace fwdsmile {

// Controls for the Fourier inversion integrals. damping is the payoff-
// damping parameter alpha (auto-selected when unset); truncation is the
// upper integration limit (auto-extended when unset).
struct QuadratureSettings {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    std::optional<double> damping;
    std::optional<double> truncation;
    int max_subdivisions = 2000;

    void validate() const {
        if (!(abs_tol > 0.0)) throw DomainError("QuadratureSettings: abs_tol must be positive");
        if (!(rel_tol > 0.0)) throw DomainError("QuadratureSettings: rel_tol must be positive");
        if (truncation && !(*truncation > 0.0))
            throw DomainError("QuadratureSettings: truncation must be positive");
        if (max_subdivisions <= 0)
            throw DomainError("QuadratureSettings: max_subdivisions must be positive");
    }
};

struct QuadResult {
    double value;
    double est_error;
    long n_evals;
    bool converged;
};

// Globally adaptive quadrature on [a, b] with a 15-point Kronrod rule nested
// over 7-point Gauss; per-panel error is |high - low|, and the worst panel is
// split until the error sum meets max(abs_tol, rel_tol * |value|). The final
// value is summed over panels in fixed left-to-right order, so equal inputs
// reproduce bitwise-equal outputs.
QuadResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                              double abs_tol, double rel_tol, int max_subdivisions);

} // namespace fwdsmile
