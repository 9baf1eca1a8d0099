// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "cavscat/billiard.hpp"
#include "cavscat/common.hpp"
#include "cavscat/coupling.hpp"

// The coupled antenna-cavity scattering model: reflection on the real axis,
// the resonance condition in the complex k plane, per-gap root finding, and
// two independent cross-check oracles (weak-coupling perturbation theory and
// a real-axis phase scan).

namespace cavscat::resonance {

using billiard::GreenEvaluator;
using billiard::GreenEvaluatorOptions;
using billiard::ModeIndex;
using billiard::Point;
using billiard::PoleGroup;
using billiard::Rectangle;

/// Which denominator defines the resonance condition: the reflection
/// formula carries (1 + 2ika); the displayed resonance equation of the
/// source model carries (1 + ika).  They disagree by the factor 2; rr1 is
/// canonical, eq18 is exposed for comparison.
enum class ResonanceCondition { rr1, eq18 };

inline double ika_factor(ResonanceCondition c) {
    return c == ResonanceCondition::rr1 ? 2.0 : 1.0;
}

struct SystemOptions {
    double basis_safety_factor = 30.0; // basis cutoff = factor * k_max^2
    GreenEvaluatorOptions green = {};
};

/// Immutable cavity + antenna scattering system.
class ResonatorSystem {
public:
    ResonatorSystem(const Rectangle& rect, Point x0, double antenna_radius, double k_max,
                    SystemOptions opts = {})
        : rect_(rect), x0_(x0), radius_(antenna_radius),
          params_(coupling::identify_parameters(antenna_radius)),
          evaluator_(rect, x0, std::max(opts.basis_safety_factor, 25.0) * k_max * k_max,
                     opts.green),
          k_max_(k_max) {
        if (!(k_max > 0.0))
            throw std::domain_error("ResonatorSystem: k_max must be > 0");
    }

    const Rectangle& rect() const { return rect_; }
    Point x0() const { return x0_; }
    double antenna_radius() const { return radius_; }
    const coupling::CouplingParams& params() const { return params_; }
    const GreenEvaluator& evaluator() const { return evaluator_; }
    double k_max() const { return k_max_; }

private:
    Rectangle rect_;
    Point x0_;
    double radius_;
    coupling::CouplingParams params_;
    GreenEvaluator evaluator_;
    double k_max_;
};

/// Z(k^2) = xi(x0; k) - ln(a) / 2 pi.
inline complexd z_eval(const ResonatorSystem& sys, complexd ksq) {
    return sys.evaluator().xi_eval(ksq) - std::log(sys.antenna_radius()) / (2.0 * pi);
}

inline double z_eval(const ResonatorSystem& sys, double ksq) {
    return sys.evaluator().xi_eval(ksq) - std::log(sys.antenna_radius()) / (2.0 * pi);
}

inline complexd z_derivative(const ResonatorSystem& sys, complexd ksq) {
    return sys.evaluator().xi_derivative(ksq);
}

/// Reflection amplitude on the real axis:
/// r(k) = -[pi Z (1 - 2ika) - 1] / [pi Z (1 + 2ika) - 1].
/// Unimodular for real k since the numerator is the conjugate of the
/// denominator there.
inline complexd reflection(const ResonatorSystem& sys, double k) {
    if (!(k > 0.0))
        throw std::domain_error("reflection: k must be > 0");
    const double z = z_eval(sys, k * k);
    const double ka = k * sys.antenna_radius();
    const complexd num = pi * z * complexd(1.0, -2.0 * ka) - 1.0;
    const complexd den = pi * z * complexd(1.0, 2.0 * ka) - 1.0;
    return -num / den;
}

/// Canonical resonance residual F(k) = pi Z(k^2)(1 + c ika) - 1 with
/// c = 2 (rr1) or c = 1 (eq18).  Resonances are the complex zeros of F.
inline complexd condition_residual(const ResonatorSystem& sys, complexd k,
                                   ResonanceCondition cond = ResonanceCondition::rr1) {
    if (!(k.real() > 0.0))
        throw std::domain_error("condition_residual: Re k must be > 0");
    const double c = ika_factor(cond);
    return pi * z_eval(sys, k * k) * (1.0 + complexd(0.0, c * sys.antenna_radius()) * k) - 1.0;
}

inline complexd condition_derivative(const ResonatorSystem& sys, complexd k,
                                     ResonanceCondition cond = ResonanceCondition::rr1) {
    const double c = ika_factor(cond);
    const complexd ika1 = 1.0 + complexd(0.0, c * sys.antenna_radius()) * k;
    const complexd z = z_eval(sys, k * k);
    const complexd zp = z_derivative(sys, k * k);
    return pi * (zp * 2.0 * k * ika1 + z * complexd(0.0, c * sys.antenna_radius()));
}

struct Resonance {
    complexd k;          // complex wavenumber [1/m], Im k < 0
    complexd energy;     // E = k^2 [1/m^2]
    double freq_GHz;     // c Re(k) / 2 pi
    double halfwidth;    // |Im E| [1/m^2]
    double residual;     // |F(k)| at the accepted root
    int seed_n = 0;      // parent mode indices (0,0 = none)
    int seed_m = 0;
};

struct SeedWarning {
    int n = 0, m = 0;
    double lambda = 0.0;
    std::string reason;
};

struct FindOptions {
    double tol = 1e-10;            // Newton stop on |F|
    int max_iter = 80;
    double dedup_radius = 0.0;     // 0 -> 1e-6 * k_max
    double accept_residual = 1e-8; // acceptance threshold on |F|
    ResonanceCondition condition = ResonanceCondition::rr1;
};

struct FindResult {
    std::vector<Resonance> resonances;
    std::vector<SeedWarning> warnings;
};

namespace detail {

/// pi Z(E) - 1 on the real axis; the unique real-part crossing of F in
/// each gap between consecutive visible poles.
inline double gap_function(const ResonatorSystem& sys, double energy) {
    return pi * z_eval(sys, energy) - 1.0;
}

/// Bisect the crossing of gap_function inside (e_lo, e_hi); both bounds
/// strictly inside the gap.  Returns nullopt if the bracket fails.
inline std::optional<double> bisect_gap(const ResonatorSystem& sys, double e_lo, double e_hi) {
    double glo = gap_function(sys, e_lo);
    double ghi = gap_function(sys, e_hi);
    if (!(glo < 0.0) || !(ghi > 0.0))
        return std::nullopt;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (e_lo + e_hi);
        if (mid <= e_lo || mid >= e_hi)
            break;
        const double gm = gap_function(sys, mid);
        if (gm < 0.0)
            e_lo = mid;
        else
            e_hi = mid;
        if (e_hi - e_lo < 1e-14 * std::max(1.0, std::abs(mid)))
            break;
    }
    return 0.5 * (e_lo + e_hi);
}

inline std::optional<complexd> newton_root(const ResonatorSystem& sys, complexd k0,
                                           const FindOptions& opts) {
    complexd k = k0;
    complexd f = condition_residual(sys, k, opts.condition);
    for (int it = 0; it < opts.max_iter; ++it) {
        if (std::abs(f) < opts.tol)
            return k;
        const complexd fp = condition_derivative(sys, k, opts.condition);
        if (fp == complexd(0.0, 0.0))
            return std::nullopt;
        const complexd step = f / fp;
        double damping = 1.0;
        bool improved = false;
        for (int h = 0; h < 40; ++h) {
            const complexd k_try = k - damping * step;
            if (k_try.real() <= 0.0) {
                damping *= 0.5;
                continue;
            }
            complexd f_try;
            try {
                f_try = condition_residual(sys, k_try, opts.condition);
            } catch (const cutoff_error&) {
                damping *= 0.5;
                continue;
            }
            if (std::abs(f_try) < std::abs(f)) {
                k = k_try;
                f = f_try;
                improved = true;
                break;
            }
            damping *= 0.5;
        }
        if (!improved)
            break;
    }
    return std::abs(f) < opts.accept_residual ? std::optional<complexd>(k) : std::nullopt;
}

} // namespace detail

/// Complex resonances with Re k in [k_min, k_max].  One root is hunted per
/// gap above each visible pole: the real-part equation pi Z(E) = 1 has
/// exactly one crossing there (xi is strictly increasing between poles),
/// which is bisected and then polished by a damped complex Newton
/// iteration on F.  Failures are recorded per seed, never thrown.
inline FindResult find_resonances(const ResonatorSystem& sys, double k_min, double k_max,
                                  FindOptions opts = {}) {
    if (!(k_min > 0.0) || !(k_max > k_min))
        throw std::domain_error("find_resonances: need 0 < k_min < k_max");
    const GreenEvaluator& ev = sys.evaluator();
    if (ev.safety_margin() < k_max * k_max)
        throw cutoff_error("find_resonances: basis cutoff below 25 k_max^2");
    if (opts.dedup_radius <= 0.0)
        opts.dedup_radius = 1e-6 * k_max;

    const auto& vis = ev.visible_groups();
    FindResult out;

    // include the last pole below the band: its root may lie inside
    std::size_t start = 0;
    for (std::size_t j = 0; j < vis.size(); ++j) {
        if (std::sqrt(vis[j].lambda) < k_min)
            start = j;
        else
            break;
    }

    const double e_cap = ev.safety_margin();
    for (std::size_t j = start; j < vis.size(); ++j) {
        const PoleGroup& g = vis[j];
        const double k_pole = std::sqrt(g.lambda);
        if (k_pole > k_max)
            break;

        const double e_next = (j + 1 < vis.size()) ? vis[j + 1].lambda : e_cap;
        const double e_hi_raw = std::min(e_next, e_cap);
        const double margin_lo = std::max(1e-11 * g.lambda, 1e-13);
        const double margin_hi = 1e-11 * e_hi_raw;
        const double e_lo = g.lambda + margin_lo;
        const double e_hi = e_hi_raw - margin_hi;
        if (!(e_hi > e_lo)) {
            out.warnings.push_back({g.n, g.m, g.lambda, "degenerate gap"});
            continue;
        }

        auto e0 = detail::bisect_gap(sys, e_lo, e_hi);
        if (!e0) {
            out.warnings.push_back({g.n, g.m, g.lambda, "no real-part bracket in gap"});
            continue;
        }
        auto root = detail::newton_root(sys, complexd(std::sqrt(*e0), 0.0), opts);
        if (!root) {
            out.warnings.push_back({g.n, g.m, g.lambda, "Newton did not converge"});
            continue;
        }
        const complexd k = *root;
        if (!(k.imag() < 0.0)) {
            out.warnings.push_back({g.n, g.m, g.lambda, "root not in the lower half-plane"});
            continue;
        }
        if (k.real() < k_min || k.real() > k_max)
            continue; // root migrated outside the requested band
        const complexd f = condition_residual(sys, k, opts.condition);
        Resonance r;
        r.k = k;
        r.energy = k * k;
        r.freq_GHz = speed_of_light * k.real() / (2.0 * pi) * 1e-9;
        r.halfwidth = std::abs(r.energy.imag());
        r.residual = std::abs(f);
        r.seed_n = g.n;
        r.seed_m = g.m;
        out.resonances.push_back(r);
    }

    std::sort(out.resonances.begin(), out.resonances.end(),
              [](const Resonance& a, const Resonance& b) { return a.k.real() < b.k.real(); });
    std::vector<Resonance> dedup;
    for (const Resonance& r : out.resonances) {
        if (!dedup.empty() && std::abs(r.k - dedup.back().k) < opts.dedup_radius)
            continue;
        dedup.push_back(r);
    }
    out.resonances = std::move(dedup);
    return out;
}

struct PerturbativeEstimate {
    double energy_shift = 0.0; // Re E - lambda_n [1/m^2]
    double halfwidth = 0.0;    // |Im E| [1/m^2]
};

/// Weak-coupling estimate from the simple-pole approximation
/// Z ~ w_n/(lambda_n - E) + Z_smooth: the real crossing is bisected with
/// the pole term explicit, then one complex correction
/// eps = w_n / [Z_s - 1/(pi(1 + 2ika))] gives the width.  Independent of
/// the Newton machinery of find_resonances.
inline PerturbativeEstimate perturbative_estimate(const ResonatorSystem& sys, ModeIndex idx,
                                                  ResonanceCondition cond = ResonanceCondition::rr1) {
    const GreenEvaluator& ev = sys.evaluator();
    const double lam = billiard::eigenvalue(sys.rect(), idx);
    if (lam > ev.safety_margin())
        throw cutoff_error("perturbative_estimate: mode beyond the safety margin");

    const auto& groups = ev.groups();
    auto git = std::find_if(groups.begin(), groups.end(), [&](const PoleGroup& g) {
        return std::abs(g.lambda - lam) <= 1e-9 * lam;
    });
    if (git == groups.end())
        throw std::domain_error("perturbative_estimate: mode not in the evaluator basis");
    const PoleGroup& g = *git;
    if (g.weight <= 1e-10 * 4.0 / sys.rect().area())
        return {0.0, 0.0}; // invisible mode: no coupling, zero width

    const double lna = std::log(sys.antenna_radius()) / (2.0 * pi);
    const auto& vis = ev.visible_groups();
    auto vit = std::lower_bound(vis.begin(), vis.end(), g.lambda,
                                [](const PoleGroup& a, double v) { return a.lambda < v; });
    const double gap_up = (vit != vis.end() && vit + 1 != vis.end())
                              ? (vit + 1)->lambda - g.lambda
                              : ev.safety_margin() - g.lambda;
    const double gap_down = (vit != vis.begin()) ? g.lambda - (vit - 1)->lambda : g.lambda;

    const double c = ika_factor(cond);
    auto h = [&](double eps) {
        const complexd zs =
            ev.xi_eval_excluding(g, complexd(lam + eps, 0.0)) - lna;
        return pi * (zs.real() - g.weight / eps) - 1.0;
    };
    double lo = std::max(1e-11 * lam, 1e-13);
    double hi = std::min(gap_up * (1.0 - 1e-9), ev.safety_margin() - lam);
    if (!(h(lo) < 0.0) || !(h(hi) > 0.0))
        throw isolation_error("perturbative_estimate: no pole-approximation bracket");
    for (int it = 0; it < 200 && hi - lo > 1e-14 * std::max(1.0, lam); ++it) {
        const double mid = 0.5 * (lo + hi);
        (h(mid) < 0.0 ? lo : hi) = mid;
    }
    const double eps0 = 0.5 * (lo + hi);

    const complexd k0 = std::sqrt(complexd(lam + eps0, 0.0));
    const complexd zs = ev.xi_eval_excluding(g, complexd(lam + eps0, 0.0)) - lna;
    const complexd denom = zs - 1.0 / (pi * (1.0 + complexd(0.0, c * sys.antenna_radius()) * k0));
    const complexd eps = g.weight / denom;

    PerturbativeEstimate est{eps.real(), std::abs(eps.imag())};
    if (std::min(gap_up, gap_down) <= 5.0 * est.halfwidth)
        throw isolation_error("perturbative_estimate: mode not isolated");
    return est;
}

struct PhasePeak {
    double k_center = 0.0;  // [1/m]
    double halfwidth = 0.0; // HWHM of the delay peak in k [1/m]
};

struct PhaseScanResult {
    std::vector<PhasePeak> peaks;
    double winding_turns = 0.0; // total unwrapped phase change / 2 pi
    std::vector<std::string> warnings;
};

namespace detail {

/// Wigner delay d(arg r)/dk on the real axis.  With Z real the numerator
/// of r is the conjugate of the denominator D, so arg r = pi - 2 arg D and
/// the delay follows from D'/D.
inline double wigner_delay(const ResonatorSystem& sys, double k,
                           ResonanceCondition cond) {
    const double c = ika_factor(cond);
    const double z = z_eval(sys, k * k);
    const double zp = z_derivative(sys, complexd(k * k, 0.0)).real();
    const complexd d = pi * z * complexd(1.0, c * sys.antenna_radius() * k) - 1.0;
    const complexd dp =
        pi * (zp * 2.0 * k * complexd(1.0, c * sys.antenna_radius() * k) +
              z * complexd(0.0, c * sys.antenna_radius()));
    return -2.0 * (dp / d).imag();
}

} // namespace detail

/// Real-axis oracle: scans the unwrapped reflection phase, locates delay
/// peaks gap by gap, and measures their half-maximum widths.  grid_step
/// must resolve at least a tenth of the minimal expected resonance
/// spacing (adjacent visible poles in k).
inline PhaseScanResult phase_scan_oracle(const ResonatorSystem& sys, double k_min, double k_max,
                                         double grid_step,
                                         ResonanceCondition cond = ResonanceCondition::rr1) {
    if (!(k_min > 0.0) || !(k_max > k_min) || !(grid_step > 0.0))
        throw std::domain_error("phase_scan_oracle: invalid band or grid step");
    const GreenEvaluator& ev = sys.evaluator();
    if (ev.safety_margin() < k_max * k_max)
        throw cutoff_error("phase_scan_oracle: basis cutoff below 25 k_max^2");

    const auto& vis = ev.visible_groups();
    std::vector<double> poles_k;
    for (const PoleGroup& g : vis)
        poles_k.push_back(std::sqrt(g.lambda));

    double min_gap = k_max - k_min;
    for (std::size_t j = 0; j + 1 < poles_k.size(); ++j) {
        if (poles_k[j + 1] < k_min || poles_k[j] > k_max)
            continue;
        min_gap = std::min(min_gap, poles_k[j + 1] - poles_k[j]);
    }
    if (grid_step > 0.1 * min_gap)
        throw std::domain_error("phase_scan_oracle: grid_step exceeds a tenth of the minimal expected spacing");

    PhaseScanResult out;

    auto tau = [&](double k) { return detail::wigner_delay(sys, k, cond); };

    // winding: accumulate principal phase increments on a grid refined
    // until each step carries less than pi/2 of phase
    {
        auto theta = [&](double k) { return std::arg(reflection(sys, k)); };
        double total = 0.0;
        double k_prev = k_min;
        double th_prev = theta(k_prev);
        const auto principal = [](double dth) {
            while (dth > pi)
                dth -= 2.0 * pi;
            while (dth < -pi)
                dth += 2.0 * pi;
            return dth;
        };
        std::vector<std::pair<double, double>> stack; // (k, theta) right endpoints
        double k_right = k_min;
        while (k_right < k_max) {
            k_right = std::min(k_max, k_right + grid_step);
            stack.emplace_back(k_right, theta(k_right));
            while (!stack.empty()) {
                auto [kr, thr] = stack.back();
                const double est = std::abs(tau(0.5 * (k_prev + kr))) * (kr - k_prev);
                if (est > 0.5 * pi && kr - k_prev > 1e-12 * k_max) {
                    const double km = 0.5 * (k_prev + kr);
                    stack.emplace_back(km, theta(km));
                    continue;
                }
                total += principal(thr - th_prev);
                k_prev = kr;
                th_prev = thr;
                stack.pop_back();
            }
        }
        out.winding_turns = total / (2.0 * pi);
    }

    // peaks: golden-section maximum of the delay within each inter-pole gap
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    for (std::size_t j = 0; j < poles_k.size(); ++j) {
        const double k_lo_gap = poles_k[j];
        const double k_hi_gap =
            (j + 1 < poles_k.size()) ? poles_k[j + 1] : std::sqrt(ev.safety_margin());
        if (k_hi_gap < k_min || k_lo_gap > k_max)
            continue;
        double a = k_lo_gap + std::max(1e-9 * k_lo_gap, 1e-12);
        double b = k_hi_gap - std::max(1e-9 * k_hi_gap, 1e-12);
        if (!(b > a))
            continue;
        double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
        double f1 = tau(x1), f2 = tau(x2);
        for (int it = 0; it < 200 && (b - a) > 1e-13 * b; ++it) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + gr * (b - a);
                f2 = tau(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - gr * (b - a);
                f1 = tau(x1);
            }
        }
        const double k_peak = 0.5 * (a + b);
        if (k_peak < k_min || k_peak > k_max)
            continue;
        const double t_peak = tau(k_peak);
        if (!(t_peak > 0.0))
            continue;

        // half-maximum positions on both sides by bisection
        auto half_point = [&](double lo, double hi, bool rising) -> std::optional<double> {
            double flo = tau(lo) - 0.5 * t_peak;
            double fhi = tau(hi) - 0.5 * t_peak;
            if ((flo > 0.0) == (fhi > 0.0))
                return std::nullopt;
            for (int it = 0; it < 100 && hi - lo > 1e-13 * std::max(hi, 1.0); ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = tau(mid) - 0.5 * t_peak;
                if ((fm > 0.0) == rising)
                    hi = mid;
                else
                    lo = mid;
            }
            return 0.5 * (lo + hi);
        };
        const double edge_lo = k_lo_gap + std::max(1e-10 * k_lo_gap, 1e-13);
        const double edge_hi = k_hi_gap - std::max(1e-10 * k_hi_gap, 1e-13);
        auto left = half_point(edge_lo, k_peak, true);
        auto right = half_point(k_peak, edge_hi, false);
        if (!left || !right) {
            out.warnings.push_back("unresolved delay peak near k = " + std::to_string(k_peak));
            continue;
        }
        out.peaks.push_back({k_peak, 0.5 * (*right - *left)});
    }
    return out;
}

} // namespace cavscat::resonance
