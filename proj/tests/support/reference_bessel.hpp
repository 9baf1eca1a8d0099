// SPDX-License-Identifier: Apache-2.0
#pragma once

// Slow high-precision reference evaluators for the Bessel kernels, used as
// the independent oracle for the fast implementations.  Everything here is
// built from integral representations and defining power series in long
// double arithmetic; no code is shared with the library path.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace refbessel {

inline constexpr long double kPi = 3.14159265358979323846264338327950288L;
inline constexpr long double kGamma = 0.57721566490153286060651209008240243L;

namespace detail {

// 64-point Gauss-Legendre nodes via Newton on the Legendre recurrence.
inline void gl64(std::vector<long double>& x, std::vector<long double>& w) {
    const int n = 64;
    x.assign(n, 0.0L);
    w.assign(n, 0.0L);
    for (int i = 0; i < n / 2; ++i) {
        long double xi = std::cos(kPi * (i + 0.75L) / (n + 0.5L));
        long double dp = 0.0L;
        for (int it = 0; it < 200; ++it) {
            long double p0 = 1.0L, p1 = xi;
            for (int j = 2; j <= n; ++j) {
                const long double p2 = ((2.0L * j - 1.0L) * xi * p1 - (j - 1.0L) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (xi * p1 - p0) / (xi * xi - 1.0L);
            const long double dx = p1 / dp;
            xi -= dx;
            if (std::abs(dx) < 1e-19L)
                break;
        }
        x[i] = -xi;
        x[n - 1 - i] = xi;
        w[i] = w[n - 1 - i] = 2.0L / ((1.0L - xi * xi) * dp * dp);
    }
}

template <class F>
long double integrate(F f, long double a, long double b, int segments) {
    static std::vector<long double> gx, gw;
    if (gx.empty())
        gl64(gx, gw);
    long double total = 0.0L;
    const long double h = (b - a) / segments;
    for (int s = 0; s < segments; ++s) {
        const long double mid = a + h * (s + 0.5L);
        const long double half = 0.5L * h;
        long double acc = 0.0L;
        for (std::size_t i = 0; i < gx.size(); ++i)
            acc += gw[i] * f(mid + half * gx[i]);
        total += acc * half;
    }
    return total;
}

} // namespace detail

/// J_n(z) = (1/2pi) int_0^{2pi} cos(n t - z sin t) dt; the trapezoid rule
/// on the periodic integrand converges super-geometrically.
inline long double bessel_j(int n, long double z) {
    const int N = 512 + 8 * static_cast<int>(z) + 16 * n;
    long double acc = 0.0L;
    for (int j = 0; j < N; ++j) {
        const long double t = 2.0L * kPi * (j + 0.5L) / N;
        acc += std::cos(n * t - z * std::sin(t));
    }
    return acc / N;
}

/// Y_n(z) = (1/pi) int_0^pi sin(z sin t - n t) dt
///        - (1/pi) int_0^inf [e^{nt} + (-1)^n e^{-nt}] e^{-z sinh t} dt.
inline long double bessel_y(int n, long double z) {
    const int segs = 8 + static_cast<int>(z / 8);
    const long double osc = detail::integrate(
        [&](long double t) { return std::sin(z * std::sin(t) - n * t); }, 0.0L, kPi, segs);

    // upper limit: z sinh T - n T > 120 guarantees a negligible remainder
    long double T = 2.0L;
    while (z * std::sinh(T) - n * T < 120.0L && T < 60.0L)
        T += 0.5L;
    const long double sign = (n % 2 == 0) ? 1.0L : -1.0L;
    const long double tail = detail::integrate(
        [&](long double t) {
            return (std::exp(n * t) + sign * std::exp(-n * t)) * std::exp(-z * std::sinh(t));
        },
        0.0L, T, 24 + n);
    return (osc - tail) / kPi;
}

/// K_0(x) = int_0^inf e^{-x cosh t} dt.
inline long double bessel_k0(long double x) {
    long double T = 2.0L;
    while (x * (std::cosh(T) - 1.0L) < 120.0L && T < 60.0L)
        T += 0.5L;
    return std::exp(-x) * detail::integrate(
                              [&](long double t) {
                                  return std::exp(-x * (std::cosh(t) - 1.0L));
                              },
                              0.0L, T, 24);
}

/// Defining power series of J_0 for complex argument (long double complex).
inline std::complex<long double> j0_series(std::complex<long double> z) {
    const std::complex<long double> q = -z * z / 4.0L;
    std::complex<long double> term(1.0L, 0.0L), sum(1.0L, 0.0L);
    for (int k = 1; k < 200; ++k) {
        term *= q / static_cast<long double>(k * k);
        sum += term;
        if (std::abs(term) < 1e-24L * std::abs(sum))
            break;
    }
    return sum;
}

/// Small-argument series of Y_0 for complex argument (principal log):
/// Y_0 = (2/pi)[(ln(z/2) + gamma) J_0 + sum_{k>=1} (-1)^{k+1} H_k q^k / (k!)^2].
inline std::complex<long double> y0_series(std::complex<long double> z) {
    const std::complex<long double> q = z * z / 4.0L;
    std::complex<long double> term(1.0L, 0.0L), sum(0.0L, 0.0L);
    long double harmonic = 0.0L;
    long double sign = 1.0L;
    for (int k = 1; k < 200; ++k) {
        term *= q / static_cast<long double>(k * k);
        harmonic += 1.0L / k;
        sum += sign * harmonic * term;
        sign = -sign;
        if (std::abs(term) < 1e-24L * (std::abs(sum) + 1.0L))
            break;
    }
    return (2.0L / kPi) * ((std::log(z / 2.0L) + kGamma) * j0_series(z) + sum);
}

/// (i pi / 2) H_0^{(1)}(i x): equals K_0(x), evaluated through the complex
/// series route for the identity cross-check.
inline long double k0_via_hankel(long double x) {
    const std::complex<long double> z(0.0L, x);
    const std::complex<long double> h = j0_series(z) + std::complex<long double>(0.0L, 1.0L) * y0_series(z);
    const std::complex<long double> v = std::complex<long double>(0.0L, kPi / 2.0L) * h;
    return v.real();
}

} // namespace refbessel
