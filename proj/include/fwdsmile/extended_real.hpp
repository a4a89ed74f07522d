#pragma once

#include <cmath>
#include <limits>

#include "fwdsmile/errors.hpp"

namespace fwdsmile {

// A finite double or a tagged +infinity. Whether a moment exists is a
// semantic question, so infinity is a distinct state rather than a sentinel
// float: arithmetic on an infinite value is impossible without an explicit
// unwrap, and the tag cannot be produced by overflow.
class ExtendedReal {
public:
    static ExtendedReal finite(double v) {
        if (!std::isfinite(v))
            throw DomainError("ExtendedReal::finite requires a finite value");
        return ExtendedReal(v, true);
    }
    static ExtendedReal infinity() noexcept { return ExtendedReal(0.0, false); }

    bool is_finite() const noexcept { return finite_; }

    // Throws when the value is infinite; use is_finite() to branch first.
    double value() const {
        if (!finite_)
            throw NumericError("ExtendedReal: attempted to unwrap an infinite value");
        return value_;
    }

    // Lossy view for ordering/printing only.
    double value_or_inf() const noexcept {
        return finite_ ? value_ : std::numeric_limits<double>::infinity();
    }

private:
    ExtendedReal(double v, bool finite) noexcept : value_(v), finite_(finite) {}

    double value_;
    bool finite_;
};

} // namespace fwdsmile
