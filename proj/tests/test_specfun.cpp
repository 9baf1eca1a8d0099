// SPDX-License-Identifier: Apache-2.0
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "cavscat/specfun.hpp"
#include "support/reference_bessel.hpp"

using namespace cavscat;
using namespace cavscat::specfun;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double j_prime(int n, double z) {
    return n == 0 ? -bessel_j(1, z) : bessel_j(n - 1, z) - n / z * bessel_j(n, z);
}
double y_prime(int n, double z) {
    return n == 0 ? -bessel_y(1, z) : bessel_y(n - 1, z) - n / z * bessel_y(n, z);
}

} // namespace

TEST_CASE("bessel_j small-argument limits and frozen value") {
    CHECK_THAT(bessel_j(0, 1e-8), WithinAbs(1.0, 1e-12));
    CHECK(std::abs(bessel_j(1, 1e-8)) < 1e-8);
    // reference value computed from the integral-representation evaluator
    CHECK_THAT(bessel_j(0, 1.0), WithinAbs(0.76519768655796655145, 1e-13));
    CHECK_THAT(bessel_j(0, 1.0),
               WithinAbs(static_cast<double>(refbessel::bessel_j(0, 1.0L)), 1e-13));
}

TEST_CASE("bessel_j/y domain errors") {
    CHECK_THROWS_AS(bessel_j(0, 0.0), std::domain_error);
    CHECK_THROWS_AS(bessel_j(0, -1.0), std::domain_error);
    CHECK_THROWS_AS(bessel_j(-1, 1.0), std::domain_error);
    CHECK_THROWS_AS(bessel_y(0, 0.0), std::domain_error);
    CHECK_THROWS_AS(bessel_y(2, -3.0), std::domain_error);
    CHECK_THROWS_AS(hankel1(0, 0.0), std::domain_error);
    CHECK_THROWS_AS(hankel1_prime(1, -1.0), std::domain_error);
    CHECK_THROWS_AS(bessel_k0(0.0), std::domain_error);
    CHECK_THROWS_AS(bessel_k0(-2.0), std::domain_error);
}

TEST_CASE("bessel_y small-argument behavior") {
    // Y0 diverges logarithmically: (2/pi)(ln(z/2) + gamma)
    const double z = 1e-10;
    const double expected = 2.0 / pi * (std::log(0.5 * z) + euler_gamma);
    CHECK(bessel_y(0, z) < -10.0);
    CHECK_THAT(bessel_y(0, z), WithinAbs(expected, 1e-8));
    // Y1 ~ -2/(pi z)
    const double z1 = 1e-6;
    CHECK_THAT(bessel_y(1, z1) / (-2.0 / (pi * z1)), WithinAbs(1.0, 1e-6));
}

TEST_CASE("Wronskian at z = 1 pins the J/Y pair") {
    const double w = bessel_j(1, 1.0) * bessel_y(0, 1.0) - bessel_j(0, 1.0) * bessel_y(1, 1.0);
    CHECK_THAT(w, WithinAbs(2.0 / pi, 1e-12));
    CHECK_THAT(w, WithinAbs(0.63661977236758134308, 1e-12));
    CHECK_THAT(bessel_y(0, 1.0), WithinAbs(0.088256964215676957983, 1e-13));
}

TEST_CASE("hankel1 composition, small-argument expansion, derivative recurrence") {
    const complexd h = hankel1(3, 2.5);
    CHECK(h.real() == bessel_j(3, 2.5));
    CHECK(h.imag() == bessel_y(3, 2.5));

    // frozen: H0(1e-3) = 0.999999750000015625 - 4.471416611375923269 i
    const complexd h0 = hankel1(0, 1e-3);
    CHECK_THAT(h0.real(), WithinAbs(0.999999750000015625, 1e-12));
    CHECK_THAT(h0.imag(), WithinAbs(-4.471416611375923269, 1e-9));
    // matches 1 + (2i/pi)(gamma + ln(z/2)) up to O(z^2 ln z)
    const complexd leading =
        1.0 + complexd(0.0, 2.0 / pi) * (euler_gamma + std::log(0.5e-3));
    CHECK(std::abs(h0 - leading) < 1e-5);

    const complexd lhs = hankel1_prime(0, 0.5);
    const complexd rhs = -hankel1(1, 0.5);
    CHECK(std::abs(lhs - rhs) == 0.0);
}

TEST_CASE("K0 against the Hankel identity and asymptotics") {
    // K0(x) = (i pi / 2) H0^{(1)}(i x) at x = 1, both routes independent
    CHECK_THAT(bessel_k0(1.0),
               WithinAbs(static_cast<double>(refbessel::k0_via_hankel(1.0L)), 1e-10));
    CHECK_THAT(bessel_k0(1.0), WithinAbs(0.42102443824070833334, 1e-13));

    // decay like sqrt(pi/2x) e^{-x}: within 1% at x = 50
    const double x = 50.0;
    const double asym = std::sqrt(pi / (2.0 * x)) * std::exp(-x);
    CHECK_THAT(bessel_k0(x) / asym, WithinAbs(1.0, 0.01));

    // K0(x) -> -ln(x/2) - gamma + O(x^2)
    const double xs = 1e-3;
    CHECK_THAT(bessel_k0(xs), WithinAbs(-std::log(0.5 * xs) - euler_gamma, 1e-5));
}

TEST_CASE("K0/H0 relation holds on [0.1, 10]") {
    for (double x = 0.1; x <= 10.0; x *= 1.9) {
        CHECK_THAT(bessel_k0(x),
                   WithinAbs(static_cast<double>(refbessel::k0_via_hankel(
                                 static_cast<long double>(x))),
                             1e-10 * std::max(1.0, bessel_k0(x))));
    }
}

TEST_CASE("accuracy against the slow reference evaluator") {
    for (int n : {0, 1, 2, 5, 10}) {
        for (double z : {1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1000.0}) {
            const double jr = static_cast<double>(refbessel::bessel_j(n, z));
            CHECK_THAT(bessel_j(n, z), WithinAbs(jr, 1e-12));
            const double yr = static_cast<double>(refbessel::bessel_y(n, z));
            // |Y| is huge at small z; the 1e-12 contract is absolute where
            // |Y| <= 1 and relative beyond
            CHECK_THAT(bessel_y(n, z), WithinAbs(yr, 1e-12 * std::max(1.0, std::abs(yr))));
        }
    }
    for (double x : {1e-3, 0.1, 1.0, 10.0, 100.0, 690.0}) {
        const double kr = static_cast<double>(refbessel::bessel_k0(x));
        CHECK_THAT(bessel_k0(x), WithinRel(kr, 1e-12));
    }
}

TEST_CASE("Wronskian property over orders and a log grid") {
    double worst = 0.0;
    for (int nu = 0; nu <= 5; ++nu) {
        for (int i = 0; i < 30; ++i) {
            const double z = 1e-3 * std::pow(1e5, i / 29.0);
            const double w = bessel_j(nu, z) * y_prime(nu, z) - j_prime(nu, z) * bessel_y(nu, z);
            worst = std::max(worst, std::abs(w - 2.0 / (pi * z)));
        }
    }
    CHECK(worst < 1e-10);
}

TEST_CASE("derivative recurrence matches centered finite differences") {
    for (int nu : {0, 1, 3, 5}) {
        for (double z : {0.7, 3.0, 17.0, 80.0}) {
            const double h = 1e-6 * z;
            const double fd_j = (bessel_j(nu, z + h) - bessel_j(nu, z - h)) / (2.0 * h);
            CHECK_THAT(j_prime(nu, z), WithinAbs(fd_j, 1e-6 * std::max(1.0, std::abs(fd_j))));
            const double fd_y = (bessel_y(nu, z + h) - bessel_y(nu, z - h)) / (2.0 * h);
            CHECK_THAT(y_prime(nu, z), WithinAbs(fd_y, 1e-6 * std::max(1.0, std::abs(fd_y))));
            const complexd hp = hankel1_prime(nu, z);
            CHECK_THAT(hp.real(), WithinAbs(fd_j, 1e-6 * std::max(1.0, std::abs(fd_j))));
            CHECK_THAT(hp.imag(), WithinAbs(fd_y, 1e-6 * std::max(1.0, std::abs(fd_y))));
        }
    }
}
