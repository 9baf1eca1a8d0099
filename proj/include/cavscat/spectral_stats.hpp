// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "cavscat/billiard.hpp"
#include "cavscat/common.hpp"
#include "cavscat/resonance.hpp"
#include "cavscat/rng.hpp"

// Ensemble generation, unfolding, nearest-neighbor spacing statistics,
// missing-level thinning, and the Poisson comparison.

namespace cavscat::stats {

using billiard::Point;
using billiard::Rectangle;

enum class Provenance { computed, ingested };

/// Ordered level values: energies [1/m^2] or unfolded dimensionless
/// positions, with a record of where they came from.
struct LevelSequence {
    std::vector<double> values;
    Provenance provenance = Provenance::computed;
};

/// Frequency [GHz] of a wavenumber [1/m] under electromagnetic dispersion.
inline double freq_from_k(double k) {
    if (!(k >= 0.0))
        throw std::domain_error("freq_from_k: k must be >= 0");
    return speed_of_light * k / (2.0 * pi) * 1e-9;
}

/// Wavenumber [1/m] of a frequency [GHz].
inline double k_from_freq(double f_GHz) {
    if (!(f_GHz >= 0.0))
        throw std::domain_error("k_from_freq: frequency must be >= 0");
    return 2.0 * pi * f_GHz * 1e9 / speed_of_light;
}

/// Map energies through the smooth counting function of `rect`, so the
/// mean nearest spacing of the output is 1.
inline LevelSequence unfold(const LevelSequence& levels, const Rectangle& rect) {
    if (!std::is_sorted(levels.values.begin(), levels.values.end()))
        throw std::invalid_argument("unfold: levels must be sorted ascending");
    LevelSequence out;
    out.provenance = levels.provenance;
    out.values.reserve(levels.values.size());
    for (double e : levels.values)
        out.values.push_back(billiard::weyl_mean_counting(rect, e));
    return out;
}

/// Nearest-neighbor spacings s_i = x_{i+1} - x_i; empty for fewer than
/// two levels.
inline std::vector<double> nearest_spacings(const LevelSequence& x) {
    std::vector<double> s;
    if (x.values.size() < 2)
        return s;
    if (!std::is_sorted(x.values.begin(), x.values.end()))
        throw std::invalid_argument("nearest_spacings: sequence must be sorted ascending");
    s.reserve(x.values.size() - 1);
    for (std::size_t i = 0; i + 1 < x.values.size(); ++i)
        s.push_back(x.values[i + 1] - x.values[i]);
    return s;
}

/// Remove round(fraction * n) distinct uniformly chosen entries,
/// deterministically for a given stream state.  Survivor order is kept.
inline LevelSequence thin_random(const LevelSequence& levels, double fraction,
                                 rng::engine& stream) {
    if (!(fraction >= 0.0) || !(fraction < 1.0))
        throw std::domain_error("thin_random: fraction must be in [0, 1)");
    const std::size_t n = levels.values.size();
    const std::size_t m =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
    LevelSequence out;
    out.provenance = levels.provenance;
    if (m == 0) {
        out.values = levels.values;
        return out;
    }
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i)
        idx[i] = i;
    // partial Fisher-Yates: the first m slots are the removed indices
    for (std::size_t t = 0; t < m; ++t) {
        const std::size_t j =
            t + static_cast<std::size_t>(rng::uniform01(stream) * static_cast<double>(n - t));
        std::swap(idx[t], idx[std::min(j, n - 1)]);
    }
    std::vector<bool> removed(n, false);
    for (std::size_t t = 0; t < m; ++t)
        removed[idx[t]] = true;
    out.values.reserve(n - m);
    for (std::size_t i = 0; i < n; ++i)
        if (!removed[i])
            out.values.push_back(levels.values[i]);
    return out;
}

/// Normalized nearest-spacing histogram over [0, s_max].
struct SpacingHistogram {
    std::vector<double> bin_edges; // bins + 1 edges
    std::vector<double> densities; // per unit s
    std::size_t sample_count = 0;  // spacings inside [0, s_max]
};

inline SpacingHistogram build_histogram(const std::vector<double>& spacings, int bins,
                                        double s_max) {
    if (bins < 1 || !(s_max > 0.0))
        throw std::domain_error("build_histogram: need bins >= 1 and s_max > 0");
    SpacingHistogram h;
    h.bin_edges.resize(bins + 1);
    const double width = s_max / bins;
    for (int b = 0; b <= bins; ++b)
        h.bin_edges[b] = width * b;
    std::vector<std::size_t> counts(bins, 0);
    for (double s : spacings) {
        if (s < 0.0 || s > s_max)
            continue;
        int b = std::min(bins - 1, static_cast<int>(s / width));
        ++counts[b];
        ++h.sample_count;
    }
    h.densities.assign(bins, 0.0);
    if (h.sample_count > 0) {
        for (int b = 0; b < bins; ++b)
            h.densities[b] =
                static_cast<double>(counts[b]) / (static_cast<double>(h.sample_count) * width);
    }
    return h;
}

struct PoissonComparison {
    double ks_distance = 0.0;
    double small_s_fraction = 0.0;               // fraction of s < 1/4
    double poisson_small_s_fraction = 0.0;       // 1 - e^{-1/4}
    std::size_t sample_count = 0;
};

/// Kolmogorov-Smirnov distance of the empirical spacing distribution to
/// the Poisson law 1 - e^{-s}, plus the near-origin fraction.
inline PoissonComparison poisson_compare(const std::vector<double>& spacings) {
    if (spacings.size() < 50)
        throw sample_error("poisson_compare: need at least 50 spacings");
    std::vector<double> s(spacings);
    std::sort(s.begin(), s.end());
    const std::size_t n = s.size();
    double d = 0.0;
    std::size_t small = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double cdf = 1.0 - std::exp(-s[i]);
        const double lo = static_cast<double>(i) / n;
        const double hi = static_cast<double>(i + 1) / n;
        d = std::max(d, std::max(std::abs(cdf - lo), std::abs(hi - cdf)));
        if (s[i] < 0.25)
            ++small;
    }
    PoissonComparison out;
    out.ks_distance = d;
    out.small_s_fraction = static_cast<double>(small) / n;
    out.poisson_small_s_fraction = 1.0 - std::exp(-0.25);
    out.sample_count = n;
    return out;
}

enum class SpacingVariable { energy, frequency };

/// Ensemble procedure: random rectangles with both sides in c_range, a
/// random interior antenna point per cavity, resonances below f_max,
/// per-cavity unfolding and thinning, pooled spacing statistics.
struct EnsembleSpec {
    int n_cavities = 10;
    double c_min_m = 0.20;
    double c_max_m = 0.50;
    double antenna_radius_m = 5e-4;
    double f_max_GHz = 10.0;
    double missing_fraction = 0.07;
    std::uint64_t master_seed = 1;
    int bins = 20;
    double s_max = 4.0;
    bool decoupled = false; // exact eigenvalues instead of resonances
    SpacingVariable spacing_variable = SpacingVariable::energy;
    resonance::ResonanceCondition condition = resonance::ResonanceCondition::rr1;
    resonance::SystemOptions system = {};
    resonance::FindOptions find = {};

    void validate() const {
        if (n_cavities < 1)
            throw std::domain_error("EnsembleSpec: n_cavities must be >= 1");
        if (!(c_min_m > 0.0) || !(c_max_m >= c_min_m))
            throw std::domain_error("EnsembleSpec: side range must be positive and ordered");
        if (!(antenna_radius_m > 0.0))
            throw std::domain_error("EnsembleSpec: antenna radius must be > 0");
        if (!(f_max_GHz > 0.0))
            throw std::domain_error("EnsembleSpec: f_max must be > 0");
        if (!(missing_fraction >= 0.0) || !(missing_fraction < 1.0))
            throw std::domain_error("EnsembleSpec: missing_fraction must be in [0, 1)");
        if (bins < 1 || !(s_max > 0.0))
            throw std::domain_error("EnsembleSpec: invalid histogram parameters");
    }
};

struct CavityRecord {
    int id = 0;
    std::uint64_t seed = 0;
    double c1 = 0.0, c2 = 0.0;
    Point x0;
    std::string status = "ok"; // "ok" or a failure description
    std::vector<resonance::Resonance> resonances;
    std::vector<double> levels;   // Re E [1/m^2] entering the statistics
    std::vector<double> unfolded; // after thinning
    std::vector<double> spacings;
    std::size_t n_thinned = 0;
    std::vector<resonance::SeedWarning> warnings;
};

struct EnsembleReport {
    std::size_t cavities_ok = 0;
    std::size_t cavities_failed = 0;
    std::size_t total_resonances = 0;
    std::size_t total_spacings = 0;
    double pooled_mean_spacing = std::numeric_limits<double>::quiet_NaN();
    double ks_distance = std::numeric_limits<double>::quiet_NaN();
    double small_s_fraction = std::numeric_limits<double>::quiet_NaN();
};

struct EnsembleResult {
    std::vector<CavityRecord> cavities;
    SpacingHistogram histogram;
    EnsembleReport report;
};

namespace detail {

/// True when c1/c2 is within 0.01 of a rational p/q with q <= 10.
/// Used only for the decoupled Poisson control draws.
inline bool near_rational_aspect(double c1, double c2) {
    const double ratio = c1 / c2;
    for (int q = 1; q <= 10; ++q) {
        for (int p = 1; p <= 3 * q; ++p) {
            if (std::abs(ratio - static_cast<double>(p) / q) < 0.01)
                return true;
        }
    }
    return false;
}

inline CavityRecord run_one_cavity(const EnsembleSpec& spec, int index) {
    CavityRecord rec;
    rec.id = index;
    rec.seed = rng::child_seed(spec.master_seed, static_cast<std::uint64_t>(index));
    rng::engine eng(rec.seed);

    // draw order is part of the reproducibility contract:
    // c1, c2 (with rejection when decoupled), then x0 (with rejection)
    rec.c1 = rng::uniform(eng, spec.c_min_m, spec.c_max_m);
    rec.c2 = rng::uniform(eng, spec.c_min_m, spec.c_max_m);
    if (spec.decoupled) {
        int guard = 0;
        while (near_rational_aspect(rec.c1, rec.c2) && guard++ < 1000) {
            rec.c1 = rng::uniform(eng, spec.c_min_m, spec.c_max_m);
            rec.c2 = rng::uniform(eng, spec.c_min_m, spec.c_max_m);
        }
    }
    const double a = spec.antenna_radius_m;
    const double clearance = 2.0 * a;
    do {
        rec.x0.x = rng::uniform(eng, 0.0, rec.c1);
        rec.x0.y = rng::uniform(eng, 0.0, rec.c2);
    } while (rec.x0.x < clearance || rec.x0.x > rec.c1 - clearance ||
             rec.x0.y < clearance || rec.x0.y > rec.c2 - clearance);

    try {
        const Rectangle rect(rec.c1, rec.c2);
        const double k_max = k_from_freq(spec.f_max_GHz);
        const double e_max = k_max * k_max;

        LevelSequence levels;
        if (spec.decoupled) {
            auto modes =
                billiard::enumerate_modes(rect, e_max, spec.system.green.max_modes);
            levels.values.reserve(modes.size());
            for (const auto& md : modes)
                levels.values.push_back(md.lambda);
        } else {
            resonance::ResonatorSystem sys(rect, rec.x0, a, k_max, spec.system);
            resonance::FindOptions fo = spec.find;
            fo.condition = spec.condition;
            auto found = resonance::find_resonances(sys, 1e-2, k_max, fo);
            rec.resonances = std::move(found.resonances);
            rec.warnings = std::move(found.warnings);
            levels.values.reserve(rec.resonances.size());
            for (const auto& r : rec.resonances) {
                const double re_k = r.k.real();
                levels.values.push_back(re_k * re_k); // Re E = (Re k)^2
            }
        }
        std::sort(levels.values.begin(), levels.values.end());
        levels.values.erase(std::unique(levels.values.begin(), levels.values.end()),
                            levels.values.end());
        rec.levels = levels.values;

        // frequency mode merely relabels the monotone variable; the
        // unfolded positions agree with the energy route up to rounding
        LevelSequence base = levels;
        if (spec.spacing_variable == SpacingVariable::frequency) {
            for (double& v : base.values) {
                const double k = k_from_freq(freq_from_k(std::sqrt(v)));
                v = k * k;
            }
        }
        LevelSequence unfolded = unfold(base, rect);
        const std::size_t before = unfolded.values.size();
        unfolded = thin_random(unfolded, spec.missing_fraction, eng);
        rec.n_thinned = before - unfolded.values.size();
        rec.unfolded = unfolded.values;
        rec.spacings = nearest_spacings(unfolded);
    } catch (const std::exception& e) {
        rec.status = e.what();
    }
    return rec;
}

} // namespace detail

/// Run the ensemble.  Cavities are independent and processed by up to
/// `n_threads` workers (0 = hardware concurrency); outputs are identical
/// regardless of scheduling.
inline EnsembleResult run_ensemble(const EnsembleSpec& spec, unsigned n_threads = 0) {
    spec.validate();
    EnsembleResult result;
    result.cavities.resize(spec.n_cavities);

    unsigned workers = n_threads == 0 ? std::thread::hardware_concurrency() : n_threads;
    workers = std::max(1u, std::min<unsigned>(workers, spec.n_cavities));

    std::atomic<int> next{0};
    auto work = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= spec.n_cavities)
                return;
            result.cavities[i] = detail::run_one_cavity(spec, i);
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }

    std::vector<double> pooled;
    for (const auto& rec : result.cavities) {
        if (rec.status == "ok") {
            ++result.report.cavities_ok;
            result.report.total_resonances += rec.resonances.size();
            pooled.insert(pooled.end(), rec.spacings.begin(), rec.spacings.end());
        } else {
            ++result.report.cavities_failed;
        }
    }
    result.report.total_spacings = pooled.size();
    result.histogram = build_histogram(pooled, spec.bins, spec.s_max);
    if (!pooled.empty()) {
        double sum = 0.0;
        for (double s : pooled)
            sum += s;
        result.report.pooled_mean_spacing = sum / static_cast<double>(pooled.size());
    }
    if (pooled.size() >= 50) {
        const PoissonComparison cmp = poisson_compare(pooled);
        result.report.ks_distance = cmp.ks_distance;
        result.report.small_s_fraction = cmp.small_s_fraction;
    }
    return result;
}

} // namespace cavscat::stats
