#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>

#include "fwdsmile/asymptotics.hpp"
#include "fwdsmile/fourier.hpp"

using namespace fwdsmile;

namespace {

HestonParams p5() { return HestonParams(1.0, 0.07, 0.52, -0.8, 0.07); }
HestonParams pfel() { return HestonParams(1.0, 0.07, std::sqrt(0.28), -0.8, 0.07); }

constexpr double kBeta5 = 0.04273134977681049906;

} // namespace

TEST_CASE("rate function is the even cone |k|/sqrt(beta)") {
    CHECK(rate_function(0.2, kBeta5) ==
          doctest::Approx(0.96751273461317019).epsilon(1e-13));
    CHECK(rate_function(-0.2, kBeta5) == rate_function(0.2, kBeta5));
    CHECK(rate_function(0.4, kBeta5) == doctest::Approx(2.0 * rate_function(0.2, kBeta5)));
}

TEST_CASE("b1_hat closed form and derivative consistency") {
    const auto p = p5();
    const double rx = p.rho * p.xi;
    for (double u : {-3.0, 0.7, 4.8375636730658509}) {
        CHECK(b1_hat(u, p) == doctest::Approx(u * (u * u * rx - 2.0) / 4.0).epsilon(1e-14));
        const double h = 1e-6;
        const double fd = (b1_hat(u + h, p) - b1_hat(u - h, p)) / (2.0 * h);
        CHECK(b1_hat_prime(u, p) == doctest::Approx(fd).epsilon(1e-7));
    }
}

TEST_CASE("coefficient cascade matches the frozen reference at k = 0.2") {
    const auto C = otm_coefficients(0.2, 1.0, p5());

    CHECK(C.a0 == doctest::Approx(4.8375636730658509).epsilon(1e-12));
    CHECK(C.a1 == doctest::Approx(-1.9089599943410563).epsilon(1e-12));
    CHECK(C.a2 == doctest::Approx(1.6394316200356501).epsilon(1e-12));
    CHECK(C.a3 == doctest::Approx(-1.1066938463008589).epsilon(1e-12));
    CHECK(C.e0 == doctest::Approx(0.78922371811645226).epsilon(1e-12));
    CHECK(C.e1 == doctest::Approx(0.37941808485835594).epsilon(1e-12));
    CHECK(C.e2 == doctest::Approx(-0.54775678677902999).epsilon(1e-12));
    CHECK(C.zeta == doctest::Approx(0.45775340356698914).epsilon(1e-12));
    CHECK(C.r == doctest::Approx(-4.4395752397255072).epsilon(1e-12));
    CHECK(C.psi0 == doctest::Approx(-0.27122175468567674).epsilon(1e-12));
    CHECK(C.psi1 == doctest::Approx(-0.05488281029940918).epsilon(1e-12));
    CHECK(C.psi2 == doctest::Approx(0.21311742165081228).epsilon(1e-12));
    CHECK(C.psi3 == doctest::Approx(0.028750110249614678).epsilon(1e-12));
    CHECK(C.psi4 == doctest::Approx(0.35322024852051183).epsilon(1e-12));
    CHECK(C.phi2a == doctest::Approx(0.14207828110054152).epsilon(1e-12));
    CHECK(C.phi2b == doctest::Approx(0.028750110249614678).epsilon(1e-12));
    CHECK(C.phi2c == doctest::Approx(-0.0015060614331804672).epsilon(1e-12));
    CHECK(C.z1 == doctest::Approx(0.32565079290675228).epsilon(1e-12));
    CHECK(C.p1 == doctest::Approx(0.97617299902479373).epsilon(1e-12));
    CHECK(C.c0 == doctest::Approx(0.76358399773642252).epsilon(1e-12));
    CHECK(C.c1 == doctest::Approx(-0.81275153932251196).epsilon(1e-12));
    CHECK(C.c2 == doctest::Approx(1.130380834794552).epsilon(1e-12));
    CHECK(C.c3 == doctest::Approx(1.301823791931546).epsilon(1e-12));
    CHECK(C.lambda_star == doctest::Approx(0.96751273461317019).epsilon(1e-12));
    CHECK(C.beta == doctest::Approx(kBeta5).epsilon(1e-14));
}

TEST_CASE("cascade symmetry across the strike sign") {
    const auto p = p5();
    for (double k : {0.08, 0.2, 0.35}) {
        const auto cp = otm_coefficients(k, 1.0, p);
        const auto cm = otm_coefficients(-k, 1.0, p);
        CHECK(cm.a0 == doctest::Approx(-cp.a0).epsilon(1e-14));
        CHECK(cm.a1 == doctest::Approx(-cp.a1).epsilon(1e-14));
        CHECK(cm.lambda_star == doctest::Approx(cp.lambda_star).epsilon(1e-14));
        CHECK(cp.c0 == doctest::Approx(2.0 * std::abs(cp.a1 * k)).epsilon(1e-13));
        CHECK(cm.c0 == doctest::Approx(cp.c0).epsilon(1e-13));
        CHECK(cp.zeta > 0.0);
        CHECK(cm.zeta == doctest::Approx(cp.zeta).epsilon(1e-13));
    }
}

TEST_CASE("the at-the-money band and bad inputs are rejected") {
    CHECK_THROWS_AS(otm_coefficients(0.0, 1.0, p5()), DomainError);
    CHECK_THROWS_AS(otm_coefficients(5e-5, 1.0, p5()), DomainError);
    CHECK_THROWS_AS(otm_coefficients(0.2, 0.0, p5()), DomainError);
    CHECK_THROWS_AS(smile_expansion(5e-5, 1.0, 1e-3, p5(), 1), DomainError);
}

TEST_CASE("smile coefficients: frozen values and the Feller-equality gate") {
    SUBCASE("generic parameters stop at order one") {
        const auto s = smile_coefficients(0.2, 1.0, p5());
        CHECK(s.v0 == doctest::Approx(0.020671562538136903).epsilon(1e-12));
        CHECK(s.v1 == doctest::Approx(0.016314487445625173).epsilon(1e-12));
        CHECK(!s.v2.has_value());
        CHECK(!s.v3.has_value());
        CHECK(s.max_valid_order == 1);
        CHECK(!s.feller_equality);
    }

    SUBCASE("on the gate all four coefficients exist") {
        const auto sp = smile_coefficients(0.2, 1.0, pfel());
        CHECK(sp.feller_equality);
        CHECK(sp.max_valid_order == 3);
        CHECK(sp.v0 == doctest::Approx(0.021035312956549764032).epsilon(1e-12));
        CHECK(sp.v1 == doctest::Approx(0.016457401712793774359).epsilon(1e-12));
        CHECK(sp.v2.value() == doctest::Approx(0.0051320277360717949256).epsilon(1e-11));
        CHECK(sp.v3.value() == doctest::Approx(6.0294203006846301878e-5).epsilon(1e-9));

        const auto sm = smile_coefficients(-0.2, 1.0, pfel());
        CHECK(sm.v2.value() == doctest::Approx(0.02629803822458851965).epsilon(1e-11));
        CHECK(sm.v3.value() == doctest::Approx(0.016619949768210324856).epsilon(1e-11));
    }
}

TEST_CASE("v0 and v1 are even in the strike and blind to correlation") {
    for (double rho : {-0.8, 0.0, 0.8}) {
        const HestonParams p(1.0, 0.07, 0.52, rho, 0.07);
        for (double k : {0.1, 0.25}) {
            const auto sp = smile_coefficients(k, 1.0, p);
            const auto sm = smile_coefficients(-k, 1.0, p);
            const auto ref = smile_coefficients(k, 1.0, p5());
            CHECK(std::abs(sp.v0 - sm.v0) <= 1e-14);
            CHECK(std::abs(sp.v1 - sm.v1) <= 1e-14);
            CHECK(std::abs(sp.v0 - ref.v0) <= 1e-14);
            CHECK(std::abs(sp.v1 - ref.v1) <= 1e-14);
        }
    }
}

TEST_CASE("smile expansion assembles the requested order and refuses invalid ones") {
    const double tau = 1e-3;
    const double rt = std::sqrt(tau);
    const double qt = std::pow(tau, 0.25);

    const auto s1 = smile_expansion(0.2, 1.0, tau, p5(), 1);
    CHECK(s1.variance ==
          doctest::Approx(0.020671562538136903 / rt + 0.016314487445625173 / qt)
              .epsilon(1e-12));
    CHECK(s1.vol == doctest::Approx(std::sqrt(s1.variance)).epsilon(1e-15));

    const auto s0 = smile_expansion(0.2, 1.0, tau, p5(), 0);
    CHECK(s0.variance == doctest::Approx(0.020671562538136903 / rt).epsilon(1e-12));

    const auto s3 = smile_expansion(0.2, 1.0, tau, pfel(), 3);
    CHECK(s3.variance ==
          doctest::Approx(0.021035312956549764032 / rt + 0.016457401712793774359 / qt +
                          0.0051320277360717949256 + 6.0294203006846301878e-5 * qt)
              .epsilon(1e-12));

    CHECK_THROWS_AS(smile_expansion(0.2, 1.0, tau, p5(), 2), DomainError);
    CHECK_THROWS_AS(smile_expansion(0.2, 1.0, tau, p5(), 3), DomainError);
    CHECK_THROWS_AS(smile_expansion(0.2, 1.0, tau, p5(), -1), DomainError);
    CHECK_THROWS_AS(smile_expansion(0.2, 1.0, tau, pfel(), 4), DomainError);
}

TEST_CASE("price expansion: frozen values, intrinsic floor, correction factor") {
    const auto p = p5();
    const double tau = 1.0 / 12.0;

    CHECK(price_expansion(0.2, 1.0, tau, p) ==
          doctest::Approx(0.00088205764743227967163).epsilon(1e-11));
    CHECK(price_expansion(0.3, 1.0, 1e-3, p) ==
          doctest::Approx(2.4493188478425630902e-22).epsilon(1e-11));

    const double itm = price_expansion(-0.2, 1.0, tau, p);
    CHECK(itm > 1.0 - std::exp(-0.2));

    const auto C = otm_coefficients(0.2, 1.0, p);
    const double plain = price_expansion(0.2, 1.0, tau, p, false);
    CHECK(price_expansion(0.2, 1.0, tau, p, true) / plain ==
          doctest::Approx(1.0 + C.c3 * std::pow(tau, 0.25)).epsilon(1e-13));
}

TEST_CASE("price expansion converges to the transform price") {
    const auto p = p5();
    const QuadratureSettings q;
    double prev = 1e300;
    for (double tau : {1.0 / 12.0, 1.0 / 24.0, 1.0 / 100.0}) {
        const double fr = forward_call(ForwardTenor(1.0, tau, 0.2), p, q).price;
        const double gap = std::abs(price_expansion(0.2, 1.0, tau, p) / fr - 1.0);
        CHECK(gap < prev);
        prev = gap;
    }
}

TEST_CASE("expansion residuals shrink at the advertised rates") {
    const auto p = p5();
    const double tau = 1e-3;
    const double qt = std::pow(tau, 0.25);
    const auto C = otm_coefficients(0.2, 1.0, p);
    const ForwardTenor tenor(1.0, tau, 0.2);

    const double ustar = saddlepoint(0.2, tenor, p);
    const double series = C.a0 + C.a1 * qt + C.a2 * qt * qt + C.a3 * qt * qt * qt;
    CHECK(std::abs(ustar - series) <= 3.0 * tau);

    const double e = e_tau(0.2, tenor, p);
    const double eser = C.e0 + C.e1 * qt + C.e2 * qt * qt;
    CHECK(std::abs(e - eser) <= 1.0 * std::pow(tau, 0.75));
}

TEST_CASE("tilted characteristic function: normalization and Gaussian limit") {
    const auto p = p5();
    const double tau = 1e-3;

    CHECK(std::abs(measure_changed_cf(0.0, 0.2, 1.0, tau, p) - cd(1.0, 0.0)) < 1e-13);

    const auto C = otm_coefficients(0.2, 1.0, p);
    const double u = 1.0;
    const double tilt = 4.0 * C.a0 * p.theta * p.kappa * C.beta / (C.e0 * p.xi * p.xi);
    const cd phi1(0.0, u * (C.psi0 + tilt) + u * u * u * C.psi1);
    const double phi2 = u * u * C.phi2a + std::pow(u, 4) * C.phi2b + std::pow(u, 6) * C.phi2c;
    const cd model = std::exp(-0.5 * C.zeta * C.zeta * u * u) *
                     (1.0 + phi1 * std::pow(tau, 0.125) + phi2 * std::sqrt(std::sqrt(tau)));
    const cd cf = measure_changed_cf(u, 0.2, 1.0, tau, p);
    CHECK(std::abs(cf - model) <= 0.3 * std::pow(tau, 0.375));
}

TEST_CASE("saddlepoint prefactor matches its frozen value and closed-form model") {
    const auto p = p5();
    const double tau = 1e-3;

    const double pref = u_star_prefactor(0.2, 1.0, tau, p);
    CHECK(pref == doctest::Approx(4.9039664746996084254e-12).epsilon(1e-10));

    const auto C = otm_coefficients(0.2, 1.0, p);
    const double qt = std::pow(tau, 0.25);
    const double model_log = -C.lambda_star / std::sqrt(tau) + C.c0 / qt + C.c1 -
                             p.kappa * p.theta / (2.0 * p.xi * p.xi) * std::log(tau) +
                             std::log(C.c2) + std::log1p(C.z1 * qt);
    CHECK(std::abs(std::log(pref) - model_log) < 0.01);
}
