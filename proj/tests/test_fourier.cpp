#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "fwdsmile/fourier.hpp"

using namespace fwdsmile;

namespace {

HestonParams p5() { return HestonParams(1.0, 0.07, 0.52, -0.8, 0.07); }
HestonParams pfig() { return HestonParams(1.0, 0.07, 0.4, -0.6, 0.07); }

constexpr double kTau12 = 1.0 / 12.0;
constexpr double kTau24 = 1.0 / 24.0;

QuadratureSettings qdef() { return QuadratureSettings{}; }

} // namespace

TEST_CASE("vanilla prices match frozen references") {
    const auto p = p5();
    const auto q = qdef();

    const auto c_otm = forward_call(ForwardTenor(1.0, kTau12, 0.2), p, q);
    CHECK(std::abs(c_otm.price - 0.0006124049669296688643) < 2e-10);
    CHECK(c_otm.n_evals > 0);
    CHECK(!c_otm.near_intrinsic);
    CHECK(!c_otm.truncation_dominated);

    const auto c_itm = forward_call(ForwardTenor(1.0, kTau12, -0.2), p, q);
    CHECK(std::abs(c_itm.price - 0.18246519469128487767) < 2e-10);

    const auto put_otm = forward_put(ForwardTenor(1.0, kTau12, -0.2), p, q);
    CHECK(std::abs(put_otm.price - 0.0011959477692667363377) < 2e-10);

    const auto c_atm = forward_call(ForwardTenor(1.0, kTau12, 0.0), p, q);
    CHECK(std::abs(c_atm.price - 0.025063894236095905804) < 2e-10);

    const auto c_fort = forward_call(ForwardTenor(1.0, kTau24, 0.2), p, q);
    CHECK(std::abs(c_fort.price - 0.0001233654118464628002) < 2e-10);
}

TEST_CASE("put-call parity emerges from independent contours") {
    const auto p = p5();
    const auto q = qdef();
    for (double k : {-0.2, -0.05, 0.05, 0.2}) {
        const ForwardTenor tenor(1.0, kTau12, k);
        const double c = forward_call(tenor, p, q).price;
        const double put = forward_put(tenor, p, q).price;
        CHECK(std::abs(c - put - (1.0 - std::exp(k))) < 1e-9);
    }
}

TEST_CASE("explicit damping choices agree with the automatic contour") {
    const auto p = p5();

    const ForwardTenor call_tenor(1.0, kTau12, 0.2);
    const double c_auto = forward_call(call_tenor, p, qdef()).price;
    for (double alpha : {2.0, 3.5, 5.0}) {
        QuadratureSettings q;
        q.damping = alpha;
        CHECK(std::abs(forward_call(call_tenor, p, q).price - c_auto) < 5e-10);
    }

    // negative damping prices the call through residue corrections
    {
        QuadratureSettings q;
        q.damping = -3.0;
        const double c_itm = forward_call(ForwardTenor(1.0, kTau12, -0.2), p, q).price;
        CHECK(std::abs(c_itm - 0.18246519469128487767) < 1e-9);
    }

    const ForwardTenor put_tenor(1.0, kTau12, -0.2);
    const double put_auto = forward_put(put_tenor, p, qdef()).price;
    for (double alpha : {-2.5, -4.0}) {
        QuadratureSettings q;
        q.damping = alpha;
        CHECK(std::abs(forward_put(put_tenor, p, q).price - put_auto) < 5e-10);
    }
}

TEST_CASE("explicit damping is rejected on poles and outside the moment domain") {
    const auto p = p5();
    const ForwardTenor tenor(1.0, kTau12, 0.2);
    for (double alpha : {0.0, -1.0, 25.0, -20.0}) {
        QuadratureSettings q;
        q.damping = alpha;
        CHECK_THROWS_AS(forward_call(tenor, p, q), DomainError);
    }
}

TEST_CASE("digitals: frozen value, complementarity, side rules") {
    const auto p = p5();
    const auto q = qdef();

    const auto above = forward_digital(ForwardTenor(1.0, kTau12, 0.2), p, q, DigitalSide::above);
    CHECK(std::abs(above.price - 0.0088589966184783888233) < 2e-10);

    for (double k : {-0.1, 0.1}) {
        const ForwardTenor tenor(1.0, kTau12, k);
        const double up = forward_digital(tenor, p, q, DigitalSide::above).price;
        const double dn = forward_digital(tenor, p, q, DigitalSide::below).price;
        CHECK(up > 0.0);
        CHECK(dn > 0.0);
        CHECK(std::abs(up + dn - 1.0) < 1e-9);
    }

    const double nearer =
        forward_digital(ForwardTenor(1.0, kTau12, 0.1), p, q, DigitalSide::above).price;
    CHECK(nearer > above.price);

    QuadratureSettings qd;
    qd.damping = 2.0;
    const auto above_explicit =
        forward_digital(ForwardTenor(1.0, kTau12, 0.2), p, qd, DigitalSide::above);
    CHECK(std::abs(above_explicit.price - above.price) < 5e-10);

    qd.damping = -2.0;
    CHECK_THROWS_AS(forward_digital(ForwardTenor(1.0, kTau12, 0.2), p, qd, DigitalSide::above),
                    DomainError);
    qd.damping = 1.0;
    CHECK_THROWS_AS(forward_digital(ForwardTenor(1.0, kTau12, 0.2), p, qd, DigitalSide::below),
                    DomainError);
    qd.damping = 0.0;
    CHECK_THROWS_AS(forward_digital(ForwardTenor(1.0, kTau12, 0.2), p, qd, DigitalSide::above),
                    DomainError);
}

TEST_CASE("deep out-of-the-money values stay on the large-deviations scale") {
    const auto p = p5();
    const auto res = forward_call(ForwardTenor(1.0, 1e-3, 0.3), p, qdef());
    CHECK(res.price > 0.0);
    CHECK(res.price < 1e-15);
    // sqrt(tau) log(price) must sit near the rate -|k|/sqrt(beta) = -1.45129
    const double scaled_log = std::sqrt(1e-3) * std::log(res.price);
    const double rate = 0.3 / std::sqrt(0.04273134977681049906);
    CHECK(std::abs(scaled_log + rate) / rate < 0.12);
}

TEST_CASE("smile quotes invert the out-of-the-money instrument") {
    const auto p = p5();
    const auto q = qdef();

    const ForwardTenor call_side(1.0, kTau12, 0.2);
    const auto quote_c = forward_smile_quote(call_side, p, q);
    CHECK(quote_c.price.price == forward_call(call_side, p, q).price);
    CHECK(std::abs(bs_call(0.2, kTau12, quote_c.sigma) - quote_c.price.price) < 1e-9);
    CHECK(forward_smile(call_side, p, q) == quote_c.sigma);
    CHECK(!quote_c.near_intrinsic);

    const ForwardTenor put_side(1.0, kTau12, -0.2);
    const auto quote_p = forward_smile_quote(put_side, p, q);
    CHECK(quote_p.price.price == forward_put(put_side, p, q).price);
    CHECK(std::abs(bs_put(-0.2, kTau12, quote_p.sigma) - quote_p.price.price) < 1e-9);

    const auto deep = forward_smile_quote(ForwardTenor(1.0, 1e-3, 0.3), p, q);
    CHECK(deep.near_intrinsic);
    CHECK(deep.sigma > 0.0);
    CHECK(std::isfinite(deep.sigma));
}

TEST_CASE("at-the-money smile matches the frozen reference") {
    const auto quote = forward_smile_quote(ForwardTenor(1.0, kTau12, 0.0), pfig(), qdef());
    CHECK(std::abs(quote.price.price - 0.026977206238814582135) < 2e-10);
    CHECK(std::abs(quote.sigma - 0.23429353257085550468) < 5e-8);
}

TEST_CASE("failure modes surface as exceptions and flags") {
    const auto p = p5();
    const ForwardTenor tenor(1.0, kTau12, 0.2);

    QuadratureSettings starved;
    starved.max_subdivisions = 2;
    CHECK_THROWS_AS(forward_call(tenor, p, starved), NumericError);

    QuadratureSettings cut;
    cut.truncation = 3.0;
    const auto res = forward_call(tenor, p, cut);
    CHECK(res.truncation_dominated);

    QuadratureSettings bad;
    bad.abs_tol = 0.0;
    CHECK_THROWS_AS(forward_call(tenor, p, bad), DomainError);
}
