// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <utility>

#include "cavscat/common.hpp"
#include "cavscat/specfun.hpp"

// Boundary-condition coefficients of the point coupling, the point and
// finite-radius tube scattering amplitudes, and the antenna-radius
// parameter identification between them.

namespace cavscat::coupling {

/// Coefficients (A, B, C, D) of the line-to-plane boundary conditions
///
///   phi1'(0-) = A phi1(0-) + B L0(Phi2)
///   L1(Phi2)  = C phi1(0-) + D L0(Phi2)
///
/// Only the time-reversal-invariant real branch B = 2 pi C is
/// constructible here.  Logarithms of lengths are taken in meters.
struct CouplingParams {
    double A = 0.0; // [1/m]
    double B = 0.0; // [1/sqrt(m)]
    double C = 0.0; // [1/sqrt(m)]
    double D = 0.0; // dimensionless (log of meters)
};

struct AmplitudePair {
    complexd r; // reflection
    complexd t; // transmission
};

/// Antenna-radius identification A = 1/(2a), D = -ln a, BC = 1/a with the
/// real-branch split B = 2 pi C = sqrt(2 pi / a).
inline CouplingParams identify_parameters(double radius_m) {
    if (!(radius_m > 0.0))
        throw std::domain_error("identify_parameters: radius must be > 0");
    CouplingParams p;
    p.A = 1.0 / (2.0 * radius_m);
    p.D = -std::log(radius_m);
    p.B = std::sqrt(2.0 * pi / radius_m);
    p.C = p.B / (2.0 * pi);
    return p;
}

/// Plane-wave reflection/transmission of the point coupling:
/// r = -D-/D+, t = 2iCk/D+ with
/// D+- = (A +- ik)[1 + (2i/pi)(gamma - D + ln(k/2))] + (2i/pi) BC.
inline AmplitudePair point_amplitudes(const CouplingParams& p, double k) {
    if (!(k > 0.0))
        throw std::domain_error("point_amplitudes: k must be > 0");
    const complexd bracket =
        1.0 + complexd(0.0, 2.0 / pi) * (euler_gamma - p.D + std::log(0.5 * k));
    const complexd bc_term = complexd(0.0, 2.0 / pi) * (p.B * p.C);
    const complexd dplus = complexd(p.A, k) * bracket + bc_term;
    const complexd dminus = complexd(p.A, -k) * bracket + bc_term;
    if (std::abs(dplus) < 1e-14)
        throw singular_error("point_amplitudes: denominator numerically singular");
    return {-dminus / dplus, complexd(0.0, 2.0 * p.C * k) / dplus};
}

/// Partial-wave amplitudes of a radius-a tube attached to the plane:
/// r_a = -Da-/Da+, t_a = 4i sqrt(2ka/pi)/Da+ with
/// Da+- = (1 +- 2ika) H_l(ka) + 2ka H_l'(ka).
inline AmplitudePair tube_amplitudes(double radius_m, int ell, double k) {
    if (!(radius_m > 0.0))
        throw std::domain_error("tube_amplitudes: radius must be > 0");
    if (!(k > 0.0))
        throw std::domain_error("tube_amplitudes: k must be > 0");
    if (ell < 0)
        throw std::domain_error("tube_amplitudes: ell must be >= 0");
    const double ka = k * radius_m;
    const complexd h = specfun::hankel1(ell, ka);
    const complexd hp = specfun::hankel1_prime(ell, ka);
    const complexd two_ika(0.0, 2.0 * ka);
    const complexd dplus = (1.0 + two_ika) * h + 2.0 * ka * hp;
    const complexd dminus = (1.0 - two_ika) * h + 2.0 * ka * hp;
    if (std::abs(dplus) < 1e-14)
        throw singular_error("tube_amplitudes: denominator numerically singular");
    return {-dminus / dplus,
            complexd(0.0, 4.0) * std::sqrt(2.0 * ka / pi) / dplus};
}

/// |r_point - r_tube| for the s-wave at wavenumber k, radius a; goes to
/// zero in the long-wave regime ka << 1.
inline double low_energy_mismatch(double radius_m, double k) {
    const AmplitudePair pt = point_amplitudes(identify_parameters(radius_m), k);
    const AmplitudePair tb = tube_amplitudes(radius_m, 0, k);
    return std::abs(pt.r - tb.r);
}

/// Generalized boundary values of the interior field u = b G(., x0; k):
/// L0 = -b/(2 pi), L1 = b xi.
inline std::pair<complexd, complexd> greens_boundary_values(complexd b, complexd xi) {
    return {-b / (2.0 * pi), b * xi};
}

/// Residuals of the two boundary conditions; both vanish iff the coupling
/// conditions hold for the given field data.
inline std::pair<complexd, complexd> bc_residual(const CouplingParams& p, complexd phi1,
                                                 complexd dphi1, complexd L0, complexd L1) {
    return {dphi1 - p.A * phi1 - p.B * L0, L1 - p.C * phi1 - p.D * L0};
}

} // namespace cavscat::coupling
