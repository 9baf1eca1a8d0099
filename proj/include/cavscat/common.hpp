// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace cavscat {

using complexd = std::complex<double>;

/// Euler's constant gamma.
inline constexpr double euler_gamma = 0.57721566490153286;

/// Speed of light in vacuum [m/s], used for the frequency <-> wavenumber map.
inline constexpr double speed_of_light = 299792458.0;

inline constexpr double pi = 3.14159265358979323846;

/// Real wavenumber squared coincides with a visible eigenvalue.
struct pole_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Requested evaluation point violates the basis-cutoff safety margin.
struct cutoff_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Mode enumeration would exceed the configured maximum basis size.
struct resource_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Amplitude denominator is numerically singular.
struct singular_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Perturbative estimate requested for a mode that is not isolated.
struct isolation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Statistic requested on a sample that is too small.
struct sample_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// File input/output failure.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace cavscat
