// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cavscat/common.hpp"
#include "cavscat/specfun.hpp"

// Rectangle Dirichlet eigenbasis, Weyl counting, and the regularized
// Green's function xi(x0; k) together with an independent method-of-images
// oracle on the imaginary energy axis.

namespace cavscat::billiard {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

/// Rectangular cavity [0,c1] x [0,c2], side lengths in meters.
struct Rectangle {
    double c1;
    double c2;

    Rectangle(double c1_m, double c2_m) : c1(c1_m), c2(c2_m) {
        if (!(c1 > 0.0) || !(c2 > 0.0))
            throw std::domain_error("Rectangle: side lengths must be > 0");
    }

    double area() const { return c1 * c2; }
    double perimeter() const { return 2.0 * (c1 + c2); }

    bool contains_closed(Point p) const {
        return p.x >= 0.0 && p.x <= c1 && p.y >= 0.0 && p.y <= c2;
    }
    bool contains_open(Point p) const {
        return p.x > 0.0 && p.x < c1 && p.y > 0.0 && p.y < c2;
    }
};

struct ModeIndex {
    int n;
    int m;

    ModeIndex(int n_, int m_) : n(n_), m(m_) {
        if (n < 1 || m < 1)
            throw std::domain_error("ModeIndex: indices must be >= 1");
    }
};

struct Mode {
    double lambda; // eigenvalue [1/m^2]
    int n;
    int m;
};

/// Dirichlet eigenvalue lambda_{nm} = (n pi / c1)^2 + (m pi / c2)^2.
inline double eigenvalue(const Rectangle& rect, ModeIndex idx) {
    const double kx = idx.n * pi / rect.c1;
    const double ky = idx.m * pi / rect.c2;
    return kx * kx + ky * ky;
}

/// Normalized Dirichlet eigenfunction (2/sqrt(c1 c2)) sin(n pi x/c1) sin(m pi y/c2).
inline double eigenfunction(const Rectangle& rect, ModeIndex idx, Point pt) {
    if (!rect.contains_closed(pt))
        throw std::domain_error("eigenfunction: point outside the closed rectangle");
    const double norm = 2.0 / std::sqrt(rect.area());
    return norm * std::sin(idx.n * pi * pt.x / rect.c1) * std::sin(idx.m * pi * pt.y / rect.c2);
}

/// Two-term Weyl counting with corner correction:
/// Nbar(E) = |M| E / 4pi - P sqrt(E) / 4pi + 1/4.
inline double weyl_mean_counting(const Rectangle& rect, double energy) {
    if (!(energy > 0.0))
        throw std::domain_error("weyl_mean_counting: energy must be > 0");
    return rect.area() * energy / (4.0 * pi) -
           rect.perimeter() * std::sqrt(energy) / (4.0 * pi) + 0.25;
}

namespace detail {

/// Inverse of the smooth counting function: lambda such that Nbar(lambda) = x.
inline double weyl_counting_inverse(double area, double perimeter, double x) {
    const double s = (perimeter + std::sqrt(perimeter * perimeter +
                                            16.0 * pi * area * (x - 0.25))) /
                     (2.0 * area);
    return s * s;
}

/// Nodes/weights of n-point Gauss-Legendre quadrature on [-1, 1].
inline void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    nodes.assign(n, 0.0);
    weights.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int j = 2; j <= n; ++j) {
                const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15)
                break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
}

} // namespace detail

/// All modes with lambda <= cutoff, sorted ascending by lambda with
/// (n, m) lexicographic tie-break.  Degenerate eigenvalues appear once
/// per mode.
inline std::vector<Mode> enumerate_modes(const Rectangle& rect, double cutoff,
                                         std::size_t max_modes = 4000000) {
    const double lam11 = eigenvalue(rect, ModeIndex(1, 1));
    if (!(cutoff > lam11))
        throw std::domain_error("enumerate_modes: cutoff must exceed the lowest eigenvalue");

    // Weyl estimate guards the allocation before the full scan.
    const double est = rect.area() * cutoff / (4.0 * pi);
    if (est > 1.05 * static_cast<double>(max_modes) + 1000.0)
        throw resource_error("enumerate_modes: estimated mode count exceeds max_modes");

    std::vector<Mode> modes;
    modes.reserve(static_cast<std::size_t>(std::max(16.0, est * 1.05)));
    const int nmax = static_cast<int>(std::floor(rect.c1 * std::sqrt(cutoff) / pi));
    for (int n = 1; n <= nmax; ++n) {
        const double kx2 = (n * pi / rect.c1) * (n * pi / rect.c1);
        const double rem = cutoff - kx2;
        if (rem <= 0.0)
            break;
        const int mmax = static_cast<int>(std::floor(rect.c2 * std::sqrt(rem) / pi));
        for (int m = 1; m <= mmax; ++m) {
            const double ky = m * pi / rect.c2;
            modes.push_back({kx2 + ky * ky, n, m});
            if (modes.size() > max_modes)
                throw resource_error("enumerate_modes: mode count exceeds max_modes");
        }
    }
    std::sort(modes.begin(), modes.end(), [](const Mode& a, const Mode& b) {
        if (a.lambda != b.lambda)
            return a.lambda < b.lambda;
        if (a.n != b.n)
            return a.n < b.n;
        return a.m < b.m;
    });
    return modes;
}

/// A set of modes sharing one eigenvalue (within grouping tolerance),
/// i.e. one pole of the Green's function.
struct PoleGroup {
    double lambda = 0.0;        // representative eigenvalue
    double weight = 0.0;        // sum of |phi(x0)|^2 over the group
    int n = 0, m = 0;           // lexicographically smallest member
    std::size_t first = 0;      // first row in the evaluator's term list
    std::size_t count = 0;      // number of member rows
};

struct GreenEvaluatorOptions {
    double window_fraction = 0.5;     // rank fraction where the cosine taper starts
    std::size_t max_modes = 4000000;
    double visibility_threshold = 1e-10; // relative to the peak weight 4/|M|
};

/// Precomputed mode data for the regularized Green's function
///
///   xi(x0; k) = sum_n [ |phi_n(x0)|^2 / (lambda_n - k^2) - 1/(4 pi n) ]
///
/// summed in ascending-lambda rank order.  The stored basis is truncated at
/// `cutoff`; the remainder of the series is completed analytically with the
/// two-term Weyl model, which also fixes the additive normalization so that
/// xi(x0; i kappa) -> -(gamma + ln(kappa/2))/(2 pi) at large kappa (lengths
/// in meters).  A cosine taper over the top rank fraction suppresses the
/// truncation-edge oscillation of the partial sums.
class GreenEvaluator {
public:
    GreenEvaluator(const Rectangle& rect, Point x0, double cutoff,
                   GreenEvaluatorOptions opts = {})
        : rect_(rect), x0_(x0), cutoff_(cutoff), opts_(opts) {
        if (!rect.contains_open(x0))
            throw std::domain_error("GreenEvaluator: x0 must be strictly interior");
        modes_ = enumerate_modes(rect, cutoff, opts.max_modes);
        const std::size_t n = modes_.size();
        lambda_.resize(n);
        weight_.resize(n);
        sigma_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            lambda_[i] = modes_[i].lambda;
            const double phi = eigenfunction(rect, ModeIndex(modes_[i].n, modes_[i].m), x0);
            weight_[i] = phi * phi;
        }
        build_window();
        build_groups();
    }

    const Rectangle& rect() const { return rect_; }
    Point x0() const { return x0_; }
    double cutoff() const { return cutoff_; }
    std::size_t size() const { return lambda_.size(); }
    const std::vector<Mode>& modes() const { return modes_; }
    const std::vector<double>& lambdas() const { return lambda_; }
    const std::vector<double>& weights() const { return weight_; }

    /// Largest |k^2| the evaluator may be queried at.
    double safety_margin() const { return cutoff_ / 25.0; }

    /// Distinct visible poles (weight above the visibility threshold),
    /// ascending in lambda.
    const std::vector<PoleGroup>& visible_groups() const { return visible_; }

    /// All pole groups including invisible ones.
    const std::vector<PoleGroup>& groups() const { return groups_; }

    /// Regularized Green's function at complex energy ksq = k^2.
    complexd xi_eval(complexd ksq) const {
        check_point(ksq);
        if (ksq.imag() == 0.0)
            return complexd(xi_core(ksq.real(), nullptr), 0.0);
        return xi_core(ksq, nullptr);
    }

    /// Real-axis evaluation; imaginary part is identically zero there.
    double xi_eval(double ksq) const {
        check_point(complexd(ksq, 0.0));
        return xi_core(ksq, nullptr);
    }

    /// d(xi)/d(ksq).
    complexd xi_derivative(complexd ksq) const {
        check_point(ksq);
        if (ksq.imag() == 0.0)
            return complexd(xi_deriv_core(ksq.real(), nullptr), 0.0);
        return xi_deriv_core(ksq, nullptr);
    }

    /// xi with one pole group's weight removed (its counterterm kept);
    /// finite at ksq = group.lambda.
    complexd xi_eval_excluding(const PoleGroup& group, complexd ksq) const {
        check_cutoff(ksq);
        if (ksq.imag() == 0.0)
            return complexd(xi_core(ksq.real(), &group), 0.0);
        return xi_core(ksq, &group);
    }

    complexd xi_derivative_excluding(const PoleGroup& group, complexd ksq) const {
        check_cutoff(ksq);
        if (ksq.imag() == 0.0)
            return complexd(xi_deriv_core(ksq.real(), &group), 0.0);
        return xi_deriv_core(ksq, &group);
    }

private:
    template <class T>
    T xi_core(T ksq, const PoleGroup* skip) const {
        const std::size_t n = lambda_.size();
        const std::size_t s0 = skip ? skip->first : n;
        const std::size_t s1 = skip ? skip->first + skip->count : n;
        T sum{};
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= s0 && i < s1)
                continue;
            sum += sigma_[i] * weight_[i] / (lambda_[i] - ksq);
        }
        T comp{};
        for (std::size_t i = 0; i < quad_lambda_.size(); ++i)
            comp += quad_coef_[i] / (quad_lambda_[i] - ksq);
        using std::log;
        return sum + (comp - log(lambda_b_ - ksq) + tail_const_) / (4.0 * pi);
    }

    template <class T>
    T xi_deriv_core(T ksq, const PoleGroup* skip) const {
        const std::size_t n = lambda_.size();
        const std::size_t s0 = skip ? skip->first : n;
        const std::size_t s1 = skip ? skip->first + skip->count : n;
        T sum{};
        for (std::size_t i = 0; i < n; ++i) {
            if (i >= s0 && i < s1)
                continue;
            const T d = lambda_[i] - ksq;
            sum += sigma_[i] * weight_[i] / (d * d);
        }
        T comp{};
        for (std::size_t i = 0; i < quad_lambda_.size(); ++i) {
            const T d = quad_lambda_[i] - ksq;
            comp += quad_coef_[i] / (d * d);
        }
        return sum + (comp + 1.0 / (lambda_b_ - ksq)) / (4.0 * pi);
    }

    void check_cutoff(complexd ksq) const {
        if (std::abs(ksq) > safety_margin())
            throw cutoff_error("xi_eval: |ksq| exceeds cutoff/25 safety margin");
    }

    void check_point(complexd ksq) const {
        check_cutoff(ksq);
        if (ksq.imag() != 0.0)
            return;
        const double e = ksq.real();
        // pole proximity against visible eigenvalues only
        auto it = std::lower_bound(visible_.begin(), visible_.end(), e,
                                   [](const PoleGroup& g, double v) { return g.lambda < v; });
        for (auto cand : {it, it == visible_.begin() ? visible_.end() : std::prev(it)}) {
            if (cand != visible_.end() &&
                std::abs(cand->lambda - e) < 1e-12 * std::max(std::abs(e), cand->lambda))
                throw pole_error("xi_eval: real ksq coincides with a visible eigenvalue");
        }
    }

    double window_sigma_rank(double u) const {
        const double u0 = opts_.window_fraction;
        if (u <= u0)
            return 1.0;
        if (u >= 1.0)
            return 0.0;
        return 0.5 * (1.0 + std::cos(pi * (u - u0) / (1.0 - u0)));
    }

    // The regularized series is evaluated as
    //
    //   xi = sum_n sigma_n w_n/(lambda_n - ksq)
    //      + (1/4pi) [ sum_i c_i/(lam_i - ksq) - ln(lambda_b - ksq) + ln4 - 2 gamma ]
    //
    // The rank counterterms 1/(4 pi n) of the windowed series, the
    // counterterms of the window completion, and the psi(N+1) of the
    // analytic tail add up to a pure constant (-gamma/4pi), so no per-term
    // counterterm appears in the loop.  The window completion restores the
    // down-weighted top of the series from its smooth model: mode weights
    // integrate against the interior local density of states d(lambda)/4pi,
    // precomputed as quadrature nodes lam_i with coefficients c_i.
    void build_window() {
        const std::size_t n = lambda_.size();
        const double area = rect_.area();
        const double perim = rect_.perimeter();
        const bool taper = opts_.window_fraction < 1.0 && n >= 8;
        for (std::size_t i = 0; i < n; ++i)
            sigma_[i] = taper ? window_sigma_rank(static_cast<double>(i + 1) /
                                                  static_cast<double>(n))
                              : 1.0;

        lambda_b_ = detail::weyl_counting_inverse(area, perim, static_cast<double>(n) + 0.5);
        tail_const_ = std::log(4.0) - 2.0 * euler_gamma;

        quad_lambda_.clear();
        quad_coef_.clear();
        if (!taper)
            return;
        const double u0 = opts_.window_fraction;
        const std::size_t na = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::ceil(u0 * static_cast<double>(n))));
        const double la =
            detail::weyl_counting_inverse(area, perim, static_cast<double>(na) - 0.5);
        std::vector<double> gx, gw;
        detail::gauss_legendre(64, gx, gw);
        const double mid = 0.5 * (la + lambda_b_);
        const double half = 0.5 * (lambda_b_ - la);
        for (std::size_t i = 0; i < gx.size(); ++i) {
            const double lam = mid + half * gx[i];
            const double u = weyl_mean_counting(rect_, lam) / static_cast<double>(n);
            const double c = half * gw[i] * (1.0 - window_sigma_rank(u));
            if (c != 0.0) {
                quad_lambda_.push_back(lam);
                quad_coef_.push_back(c);
            }
        }
    }

    void build_groups() {
        groups_.clear();
        visible_.clear();
        const std::size_t n = lambda_.size();
        double wmax_scale = 4.0 / rect_.area();
        std::size_t i = 0;
        while (i < n) {
            PoleGroup g;
            g.lambda = lambda_[i];
            g.first = i;
            g.n = modes_[i].n;
            g.m = modes_[i].m;
            std::size_t j = i;
            while (j < n && std::abs(lambda_[j] - g.lambda) <= 1e-9 * g.lambda) {
                g.weight += weight_[j];
                if (modes_[j].n < g.n || (modes_[j].n == g.n && modes_[j].m < g.m)) {
                    g.n = modes_[j].n;
                    g.m = modes_[j].m;
                }
                ++j;
            }
            g.count = j - i;
            groups_.push_back(g);
            if (g.weight > opts_.visibility_threshold * wmax_scale)
                visible_.push_back(g);
            i = j;
        }
    }

    Rectangle rect_;
    Point x0_;
    double cutoff_;
    GreenEvaluatorOptions opts_;
    std::vector<Mode> modes_;
    std::vector<double> lambda_;
    std::vector<double> weight_;
    std::vector<double> sigma_;
    std::vector<double> quad_lambda_;
    std::vector<double> quad_coef_;
    std::vector<PoleGroup> groups_;
    std::vector<PoleGroup> visible_;
    double lambda_b_ = 0.0;
    double tail_const_ = 0.0;
};

/// Method-of-images evaluation of xi(x0; i kappa) on the imaginary axis:
/// free logarithmic part plus K0 terms over the Dirichlet image lattice,
/// signs alternating with reflection parity.  Exponentially convergent;
/// fully independent of the eigenmode series.
inline double xi_image_oracle(const Rectangle& rect, Point x0, double kappa) {
    if (!(kappa > 0.0))
        throw std::domain_error("xi_image_oracle: kappa must be > 0");
    if (!rect.contains_open(x0))
        throw std::domain_error("xi_image_oracle: x0 must be strictly interior");

    double value = -(euler_gamma + std::log(0.5 * kappa)) / (2.0 * pi);
    const double cut = 1e-14;

    auto k0_term = [&](double d) -> double {
        const double t = kappa * d;
        if (t > 700.0)
            return 0.0;
        return specfun::bessel_k0(t) / (2.0 * pi);
    };

    for (int shell = 0;; ++shell) {
        double shell_max = 0.0;
        for (int p = -shell; p <= shell; ++p) {
            for (int q = -shell; q <= shell; ++q) {
                if (std::max(std::abs(p), std::abs(q)) != shell)
                    continue;
                for (int sx = 0; sx < 2; ++sx) {
                    for (int sy = 0; sy < 2; ++sy) {
                        if (p == 0 && q == 0 && sx == 0 && sy == 0)
                            continue; // identity image carries the log singularity
                        const double xi_img = 2.0 * p * rect.c1 + (sx ? -x0.x : x0.x);
                        const double yi_img = 2.0 * q * rect.c2 + (sy ? -x0.y : x0.y);
                        const double d = std::hypot(xi_img - x0.x, yi_img - x0.y);
                        const double term = k0_term(d);
                        shell_max = std::max(shell_max, std::abs(term));
                        const int sign = ((sx + sy) % 2 == 0) ? +1 : -1;
                        value += sign * term;
                    }
                }
            }
        }
        if (shell >= 2 && shell_max < cut)
            break;
    }
    return value;
}

} // namespace cavscat::billiard
