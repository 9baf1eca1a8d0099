// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "cavscat/common.hpp"

// Real-argument Bessel/Hankel kernels for the tube amplitudes and the
// image-sum oracle.  Backed by the C++17 mathematical special functions;
// the contract (absolute error <= 1e-12 for z <= 1e3, orders <= 10) is
// checked in the test suite against a slow integral-representation
// reference evaluator.

namespace cavscat::specfun {

namespace detail {
inline void require_positive(double z, const char* fn) {
    if (!(z > 0.0))
        throw std::domain_error(std::string(fn) + ": argument must be > 0");
}
inline void require_order(int order, const char* fn) {
    if (order < 0)
        throw std::domain_error(std::string(fn) + ": order must be >= 0");
}
} // namespace detail

/// Bessel function of the first kind J_order(z), z > 0.
inline double bessel_j(int order, double z) {
    detail::require_order(order, "bessel_j");
    detail::require_positive(z, "bessel_j");
    return std::cyl_bessel_j(static_cast<double>(order), z);
}

/// Bessel function of the second kind Y_order(z), z > 0.
inline double bessel_y(int order, double z) {
    detail::require_order(order, "bessel_y");
    detail::require_positive(z, "bessel_y");
    return std::cyl_neumann(static_cast<double>(order), z);
}

/// Hankel function of the first kind, H_order^(1)(z) = J + iY.
inline complexd hankel1(int order, double z) {
    return {bessel_j(order, z), bessel_y(order, z)};
}

/// Derivative of H_order^(1) from the recurrence H'_l = H_{l-1} - (l/z) H_l,
/// with H_{-1} = -H_1.
inline complexd hankel1_prime(int order, double z) {
    detail::require_order(order, "hankel1_prime");
    detail::require_positive(z, "hankel1_prime");
    if (order == 0)
        return -hankel1(1, z);
    return hankel1(order - 1, z) - (static_cast<double>(order) / z) * hankel1(order, z);
}

/// Modified Bessel function K_0(x), x > 0.
inline double bessel_k0(double x) {
    detail::require_positive(x, "bessel_k0");
    return std::cyl_bessel_k(0.0, x);
}

} // namespace cavscat::specfun
