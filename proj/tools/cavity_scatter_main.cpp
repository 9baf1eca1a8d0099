// SPDX-License-Identifier: Apache-2.0
//
// cavity-scatter: resonances and spacing statistics of a rectangular
// microwave cavity coupled to a thin antenna through a point interaction.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cavscat/billiard.hpp"
#include "cavscat/common.hpp"
#include "cavscat/config.hpp"
#include "cavscat/coupling.hpp"
#include "cavscat/io.hpp"
#include "cavscat/resonance.hpp"
#include "cavscat/rng.hpp"
#include "cavscat/spectral_stats.hpp"
#include "cavscat/version.hpp"

namespace {

using namespace cavscat;
using billiard::Point;
using billiard::Rectangle;
using config::RunConfig;
using io::json;

constexpr int exit_ok = 0;
constexpr int exit_usage = 1;
constexpr int exit_numerical = 2;
constexpr int exit_io = 3;

struct GlobalArgs {
    std::string config_path;
    std::optional<std::int64_t> seed;
    std::string out_dir = "out";
    std::string format = "csv";
    bool quiet = false;
};

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

unsigned worker_threads() {
    const char* env = std::getenv("CAVITY_SCATTER_THREADS");
    if (!env)
        return 0;
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end == env || *end != '\0')
        return 0;
    return static_cast<unsigned>(v);
}

RunConfig load_config(const GlobalArgs& g) {
    RunConfig cfg = g.config_path.empty() ? RunConfig{} : config::read_config(g.config_path);
    if (g.seed)
        cfg.spec.master_seed = static_cast<std::uint64_t>(*g.seed);
    return cfg;
}

/// Antenna point for single-cavity commands: from the config when given,
/// otherwise drawn from the cavity-0 substream with the ensemble's
/// boundary clearance rule.
Point single_cavity_x0(const RunConfig& cfg) {
    if (cfg.cavity.x0_x_m)
        return {*cfg.cavity.x0_x_m, *cfg.cavity.x0_y_m};
    rng::engine eng(rng::child_seed(cfg.spec.master_seed, 0));
    const double clearance = 2.0 * cfg.spec.antenna_radius_m;
    Point p;
    do {
        p.x = rng::uniform(eng, 0.0, cfg.cavity.c1_m);
        p.y = rng::uniform(eng, 0.0, cfg.cavity.c2_m);
    } while (p.x < clearance || p.x > cfg.cavity.c1_m - clearance || p.y < clearance ||
             p.y > cfg.cavity.c2_m - clearance);
    return p;
}

json base_manifest(const RunConfig& cfg, const std::string& started) {
    json m;
    m["tool"] = "cavity-scatter";
    m["version"] = version;
    m["started_utc"] = started;
    m["finished_utc"] = "";
    m["master_seed"] = cfg.spec.master_seed;
    m["config"] = config::config_echo(cfg);
    m["cavities"] = json::array();
    m["outputs"] = json::array();
    return m;
}

void attach_outputs(json& manifest, const io::OutputSet& out) {
    for (const auto& f : out.files())
        manifest["outputs"].push_back(
            {{"path", f.path}, {"bytes", f.bytes}, {"fnv1a64", f.digest}});
    manifest["finished_utc"] = utc_now();
}

void emit_table(io::OutputSet& out, const std::string& stem, const std::string& format,
                const std::string& csv, const json& mirror) {
    if (format == "json")
        out.write(stem + ".json", mirror.dump(2) + "\n");
    else
        out.write(stem + ".csv", csv);
}

int cmd_modes(const GlobalArgs& g, std::optional<double> fmax_flag) {
    const RunConfig cfg = load_config(g);
    const Rectangle rect(cfg.cavity.c1_m, cfg.cavity.c2_m);
    const double f_max = fmax_flag.value_or(cfg.spec.f_max_GHz);
    const double k_max = stats::k_from_freq(f_max);
    const auto modes = billiard::enumerate_modes(rect, k_max * k_max,
                                                 cfg.spec.system.green.max_modes);

    std::string csv = "n,m,lambda_per_m2,k_per_m,f_GHz,weyl_mean_counting\n";
    json arr = json::array();
    for (const auto& md : modes) {
        const double k = std::sqrt(md.lambda);
        const double f = stats::freq_from_k(k);
        const double nb = billiard::weyl_mean_counting(rect, md.lambda);
        csv += std::to_string(md.n) + ',' + std::to_string(md.m) + ',' +
               io::format_double(md.lambda) + ',' + io::format_double(k) + ',' +
               io::format_double(f) + ',' + io::format_double(nb) + '\n';
        arr.push_back({{"n", md.n},
                       {"m", md.m},
                       {"lambda_per_m2", md.lambda},
                       {"k_per_m", k},
                       {"f_GHz", f},
                       {"weyl_mean_counting", nb}});
    }
    io::OutputSet out(g.out_dir);
    emit_table(out, "modes", g.format, csv, arr);
    if (!g.quiet) {
        std::printf("%zu modes below %.6g GHz on a %g x %g m rectangle\n", modes.size(), f_max,
                    rect.c1, rect.c2);
        std::printf("Weyl mean count at the band edge: %.3f\n",
                    billiard::weyl_mean_counting(rect, k_max * k_max));
        std::printf("wrote %s/modes.%s\n", out.dir().c_str(), g.format.c_str());
    }
    return exit_ok;
}

int cmd_xi(const GlobalArgs& g, std::string axis, double lo, double hi, int points,
           bool oracle) {
    const RunConfig cfg = load_config(g);
    const Rectangle rect(cfg.cavity.c1_m, cfg.cavity.c2_m);
    const Point x0 = single_cavity_x0(cfg);
    if (points < 2)
        throw std::domain_error("xi: need at least 2 grid points");
    const bool imag_axis = axis == "imaginary";
    if (!imag_axis && axis != "real")
        throw std::domain_error("xi: --axis must be 'real' or 'imaginary'");
    if (!(lo > 0.0) || !(hi > lo))
        throw std::domain_error("xi: need 0 < min < max");

    const double max_abs_ksq = hi * hi;
    billiard::GreenEvaluator ev(rect, x0,
                                cfg.spec.system.basis_safety_factor * max_abs_ksq,
                                cfg.spec.system.green);
    const double lna = std::log(cfg.spec.antenna_radius_m) / (2.0 * pi);

    std::string csv = imag_axis ? "kappa_per_m,ksq_per_m2,xi,z" : "k_per_m,ksq_per_m2,xi,z";
    if (oracle && imag_axis)
        csv += ",xi_oracle,abs_diff";
    csv += '\n';
    json arr = json::array();
    for (int i = 0; i < points; ++i) {
        const double v = lo + (hi - lo) * i / (points - 1);
        const double ksq = imag_axis ? -v * v : v * v;
        double xi;
        try {
            xi = ev.xi_eval(ksq);
        } catch (const pole_error&) {
            continue; // grid point fell on an eigenvalue
        }
        const double z = xi - lna;
        json row = {{imag_axis ? "kappa_per_m" : "k_per_m", v},
                    {"ksq_per_m2", ksq},
                    {"xi", xi},
                    {"z", z}};
        csv += io::format_double(v) + ',' + io::format_double(ksq) + ',' +
               io::format_double(xi) + ',' + io::format_double(z);
        if (oracle && imag_axis) {
            const double xo = billiard::xi_image_oracle(rect, x0, v);
            row["xi_oracle"] = xo;
            row["abs_diff"] = std::abs(xi - xo);
            csv += ',' + io::format_double(xo) + ',' + io::format_double(std::abs(xi - xo));
        }
        csv += '\n';
        arr.push_back(row);
    }
    io::OutputSet out(g.out_dir);
    emit_table(out, "xi", g.format, csv, arr);
    if (!g.quiet)
        std::printf("wrote %s/xi.%s (%s axis, x0 = (%g, %g))\n", out.dir().c_str(),
                    g.format.c_str(), axis.c_str(), x0.x, x0.y);
    return exit_ok;
}

int cmd_reflect(const GlobalArgs& g, double k_lo, double k_hi, int points) {
    const RunConfig cfg = load_config(g);
    const Rectangle rect(cfg.cavity.c1_m, cfg.cavity.c2_m);
    const Point x0 = single_cavity_x0(cfg);
    if (points < 2)
        throw std::domain_error("reflect: need at least 2 grid points");
    if (!(k_lo > 0.0) || !(k_hi > k_lo))
        throw std::domain_error("reflect: need 0 < k_min < k_max");

    resonance::ResonatorSystem sys(rect, x0, cfg.spec.antenna_radius_m, k_hi,
                                   cfg.spec.system);
    std::string csv = "k_per_m,re_r,im_r,abs_r,phase_rad\n";
    json arr = json::array();
    for (int i = 0; i < points; ++i) {
        const double k = k_lo + (k_hi - k_lo) * i / (points - 1);
        complexd r;
        try {
            r = resonance::reflection(sys, k);
        } catch (const pole_error&) {
            continue;
        }
        csv += io::format_double(k) + ',' + io::format_double(r.real()) + ',' +
               io::format_double(r.imag()) + ',' + io::format_double(std::abs(r)) + ',' +
               io::format_double(std::arg(r)) + '\n';
        arr.push_back({{"k_per_m", k},
                       {"re_r", r.real()},
                       {"im_r", r.imag()},
                       {"abs_r", std::abs(r)},
                       {"phase_rad", std::arg(r)}});
    }
    io::OutputSet out(g.out_dir);
    emit_table(out, "reflect", g.format, csv, arr);
    if (!g.quiet)
        std::printf("wrote %s/reflect.%s\n", out.dir().c_str(), g.format.c_str());
    return exit_ok;
}

int cmd_amplitudes(const GlobalArgs& g, int ell, double ka_lo, double ka_hi, int points) {
    const RunConfig cfg = load_config(g);
    const double a = cfg.spec.antenna_radius_m;
    if (points < 2)
        throw std::domain_error("amplitudes: need at least 2 grid points");
    if (!(ka_lo > 0.0) || !(ka_hi > ka_lo))
        throw std::domain_error("amplitudes: need 0 < ka_min < ka_max");
    const auto params = coupling::identify_parameters(a);

    std::string csv = "ka,k_per_m,re_r_point,im_r_point,re_r_tube,im_r_tube,mismatch,"
                      "t2_tube\n";
    json arr = json::array();
    for (int i = 0; i < points; ++i) {
        const double ka =
            ka_lo * std::pow(ka_hi / ka_lo, static_cast<double>(i) / (points - 1));
        const double k = ka / a;
        const auto pt = coupling::point_amplitudes(params, k);
        const auto tb = coupling::tube_amplitudes(a, ell, k);
        const double mm = std::abs(pt.r - tb.r);
        const double t2 = std::norm(tb.t);
        csv += io::format_double(ka) + ',' + io::format_double(k) + ',' +
               io::format_double(pt.r.real()) + ',' + io::format_double(pt.r.imag()) + ',' +
               io::format_double(tb.r.real()) + ',' + io::format_double(tb.r.imag()) + ',' +
               io::format_double(mm) + ',' + io::format_double(t2) + '\n';
        arr.push_back({{"ka", ka},
                       {"k_per_m", k},
                       {"re_r_point", pt.r.real()},
                       {"im_r_point", pt.r.imag()},
                       {"re_r_tube", tb.r.real()},
                       {"im_r_tube", tb.r.imag()},
                       {"mismatch", mm},
                       {"t2_tube", t2}});
    }
    io::OutputSet out(g.out_dir);
    emit_table(out, "amplitudes", g.format, csv, arr);
    if (!g.quiet)
        std::printf("wrote %s/amplitudes.%s (ell = %d)\n", out.dir().c_str(), g.format.c_str(),
                    ell);
    return exit_ok;
}

int cmd_resonances(const GlobalArgs& g, std::optional<double> fmax_flag) {
    const RunConfig cfg = load_config(g);
    const std::string started = utc_now();
    const Rectangle rect(cfg.cavity.c1_m, cfg.cavity.c2_m);
    const Point x0 = single_cavity_x0(cfg);
    const double f_max = fmax_flag.value_or(cfg.spec.f_max_GHz);
    const double k_max = stats::k_from_freq(f_max);

    resonance::ResonatorSystem sys(rect, x0, cfg.spec.antenna_radius_m, k_max,
                                   cfg.spec.system);
    resonance::FindOptions fo = cfg.spec.find;
    fo.condition = cfg.spec.condition;
    fo.dedup_radius = cfg.dedup_radius_factor * k_max;
    const auto found = resonance::find_resonances(sys, 1e-2, k_max, fo);

    stats::CavityRecord rec;
    rec.id = 0;
    rec.seed = cfg.spec.master_seed;
    rec.c1 = rect.c1;
    rec.c2 = rect.c2;
    rec.x0 = x0;
    rec.resonances = found.resonances;
    rec.warnings = found.warnings;
    std::vector<stats::CavityRecord> cavities{rec};

    io::OutputSet out(g.out_dir);
    emit_table(out, "resonances", g.format,
               io::resonances_csv(cavities, cfg.spec.antenna_radius_m),
               io::resonances_json(cavities, cfg.spec.antenna_radius_m));

    json manifest = base_manifest(cfg, started);
    manifest["cavities"].push_back({{"id", 0},
                                    {"status", "ok"},
                                    {"c1_m", rect.c1},
                                    {"c2_m", rect.c2},
                                    {"x0_x_m", x0.x},
                                    {"x0_y_m", x0.y},
                                    {"n_resonances", rec.resonances.size()},
                                    {"n_warnings", rec.warnings.size()}});
    attach_outputs(manifest, out);
    out.write_manifest(manifest);

    if (!g.quiet) {
        std::printf("%zu resonances below %.6g GHz (%zu visible poles)\n",
                    rec.resonances.size(), f_max, sys.evaluator().visible_groups().size());
        for (const auto& w : rec.warnings)
            std::printf("warning: mode (%d,%d) lambda=%.6g: %s\n", w.n, w.m, w.lambda,
                        w.reason.c_str());
        std::printf("wrote %s/resonances.%s and manifest.json\n", out.dir().c_str(),
                    g.format.c_str());
    }
    return exit_ok;
}

int cmd_ensemble(const GlobalArgs& g) {
    const RunConfig cfg = load_config(g);
    const std::string started = utc_now();
    stats::EnsembleSpec spec = cfg.spec;
    spec.find.condition = spec.condition;
    spec.find.dedup_radius = cfg.dedup_radius_factor * stats::k_from_freq(spec.f_max_GHz);

    const auto result = stats::run_ensemble(spec, worker_threads());

    io::OutputSet out(g.out_dir);
    emit_table(out, "resonances", g.format,
               io::resonances_csv(result.cavities, spec.antenna_radius_m),
               io::resonances_json(result.cavities, spec.antenna_radius_m));
    emit_table(out, "spacings", g.format, io::spacings_csv(result.cavities),
               io::spacings_json(result.cavities));
    emit_table(out, "histogram", g.format, io::histogram_csv(result.histogram),
               io::histogram_json(result.histogram));

    json manifest = base_manifest(cfg, started);
    for (const auto& c : result.cavities) {
        manifest["cavities"].push_back({{"id", c.id},
                                        {"child_seed", c.seed},
                                        {"status", c.status},
                                        {"c1_m", c.c1},
                                        {"c2_m", c.c2},
                                        {"x0_x_m", c.x0.x},
                                        {"x0_y_m", c.x0.y},
                                        {"n_resonances", c.resonances.size()},
                                        {"n_levels", c.levels.size()},
                                        {"n_thinned", c.n_thinned},
                                        {"n_spacings", c.spacings.size()},
                                        {"n_warnings", c.warnings.size()}});
    }
    json report = {{"cavities_ok", result.report.cavities_ok},
                   {"cavities_failed", result.report.cavities_failed},
                   {"total_resonances", result.report.total_resonances},
                   {"total_spacings", result.report.total_spacings}};
    if (result.report.total_spacings > 0)
        report["pooled_mean_spacing"] = result.report.pooled_mean_spacing;
    if (!std::isnan(result.report.ks_distance)) {
        report["ks_distance_vs_poisson"] = result.report.ks_distance;
        report["small_s_fraction"] = result.report.small_s_fraction;
    }
    manifest["report"] = report;
    attach_outputs(manifest, out);
    out.write_manifest(manifest);

    if (!g.quiet) {
        std::printf("ensemble: %zu/%d cavities ok, %zu resonances, %zu pooled spacings\n",
                    result.report.cavities_ok, spec.n_cavities, result.report.total_resonances,
                    result.report.total_spacings);
        if (result.report.total_spacings > 0)
            std::printf("pooled mean spacing: %.4f\n", result.report.pooled_mean_spacing);
        if (!std::isnan(result.report.ks_distance))
            std::printf("KS distance to Poisson: %.4f, small-s fraction: %.4f\n",
                        result.report.ks_distance, result.report.small_s_fraction);
        for (const auto& c : result.cavities)
            if (c.status != "ok")
                std::printf("cavity %d failed: %s\n", c.id, c.status.c_str());
        std::printf("wrote outputs under %s\n", out.dir().c_str());
    }
    return result.report.cavities_failed == 0 ? exit_ok : exit_numerical;
}

int cmd_compare(const GlobalArgs& g, const std::string& against, const std::string& spacings_path,
                const std::string& histogram_path, const std::string& levels_path, double c1,
                double c2) {
    std::vector<double> spacings;
    std::optional<stats::SpacingHistogram> hist_in;
    if (!spacings_path.empty()) {
        spacings = io::read_spacings_csv(spacings_path);
    } else if (!levels_path.empty()) {
        if (!(c1 > 0.0) || !(c2 > 0.0))
            throw std::domain_error("compare: --c1-m and --c2-m are required with --levels");
        stats::LevelSequence seq;
        seq.values = io::read_levels_csv(levels_path);
        seq.provenance = stats::Provenance::ingested;
        std::sort(seq.values.begin(), seq.values.end());
        spacings = stats::nearest_spacings(stats::unfold(seq, Rectangle(c1, c2)));
    } else if (!histogram_path.empty()) {
        hist_in = io::read_histogram_csv(histogram_path);
    } else {
        throw std::domain_error("compare: provide --spacings, --levels or --histogram input");
    }

    json outj;
    if (against == "poisson") {
        if (hist_in) {
            // histogram-only input: compare bin densities against e^{-s}
            double max_dev = 0.0, norm = 0.0;
            for (std::size_t b = 0; b + 1 < hist_in->bin_edges.size(); ++b) {
                const double lo = hist_in->bin_edges[b], hi = hist_in->bin_edges[b + 1];
                const double model = (std::exp(-lo) - std::exp(-hi)) / (hi - lo);
                max_dev = std::max(max_dev, std::abs(hist_in->densities[b] - model));
                norm += hist_in->densities[b] * (hi - lo);
            }
            outj = {{"input", histogram_path},
                    {"against", "poisson"},
                    {"max_density_deviation", max_dev},
                    {"normalization", norm}};
        } else {
            const auto cmp = stats::poisson_compare(spacings);
            outj = {{"input", spacings_path.empty() ? levels_path : spacings_path},
                    {"against", "poisson"},
                    {"sample_count", cmp.sample_count},
                    {"ks_distance", cmp.ks_distance},
                    {"small_s_fraction", cmp.small_s_fraction},
                    {"poisson_small_s_fraction", cmp.poisson_small_s_fraction}};
        }
    } else {
        // two-sample comparison against a spacings or histogram file
        std::ifstream probe(against);
        if (!probe)
            throw io_error("cannot open " + against);
        std::string header;
        std::getline(probe, header);
        probe.close();
        if (header.rfind("bin_lo", 0) == 0) {
            const auto href = io::read_histogram_csv(against);
            stats::SpacingHistogram mine;
            if (hist_in) {
                mine = *hist_in;
            } else {
                const int bins = static_cast<int>(href.densities.size());
                mine = stats::build_histogram(spacings, bins, href.bin_edges.back());
            }
            if (mine.bin_edges != href.bin_edges)
                throw std::domain_error("compare: histogram bin edges differ");
            double l1 = 0.0, max_dev = 0.0;
            for (std::size_t b = 0; b < mine.densities.size(); ++b) {
                const double d = std::abs(mine.densities[b] - href.densities[b]);
                const double w = mine.bin_edges[b + 1] - mine.bin_edges[b];
                l1 += d * w;
                max_dev = std::max(max_dev, d);
            }
            outj = {{"against", against},
                    {"l1_distance", l1},
                    {"max_density_deviation", max_dev}};
        } else {
            const auto ref = io::read_spacings_csv(against);
            if (spacings.empty() || ref.empty())
                throw sample_error("compare: empty sample");
            auto a = spacings, b = ref;
            std::sort(a.begin(), a.end());
            std::sort(b.begin(), b.end());
            double d = 0.0;
            std::size_t i = 0, j = 0;
            while (i < a.size() && j < b.size()) {
                if (a[i] <= b[j])
                    ++i;
                else
                    ++j;
                d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                                         static_cast<double>(j) / b.size()));
            }
            std::size_t small_a = 0, small_b = 0;
            for (double s : a)
                small_a += s < 0.25;
            for (double s : b)
                small_b += s < 0.25;
            outj = {{"against", against},
                    {"ks_two_sample", d},
                    {"small_s_fraction", static_cast<double>(small_a) / a.size()},
                    {"small_s_fraction_ref", static_cast<double>(small_b) / b.size()}};
        }
    }

    io::OutputSet out(g.out_dir);
    out.write("compare.json", outj.dump(2) + "\n");
    std::printf("%s\n", outj.dump(2).c_str());
    return exit_ok;
}

int cmd_ingest(const GlobalArgs& g, const std::string& in_path, const std::string& unit,
               const std::string& out_name) {
    const auto lv = io::ingest_levels(in_path, io::parse_level_unit(unit));
    io::OutputSet out(g.out_dir);
    out.write(out_name, io::levels_csv(lv));
    if (!g.quiet) {
        std::printf("ingested %zu levels from %s", lv.values.size(), in_path.c_str());
        if (!lv.values.empty())
            std::printf(" (E in [%.6g, %.6g] 1/m^2)", lv.values.front(), lv.values.back());
        std::printf("\nwrote %s/%s\n", out.dir().c_str(), out_name.c_str());
    }
    return exit_ok;
}

} // namespace

int main(int argc, char** argv) {
    GlobalArgs g;
    CLI::App app{"Point-coupled antenna-cavity resonance simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", cavscat::version);
    app.add_option("--config", g.config_path, "JSON configuration (or run manifest) path");
    std::int64_t seed_val = 0;
    auto* seed_opt = app.add_option("--seed", seed_val, "override the master seed");
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    app.add_option("--format", g.format, "data file format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_flag("--quiet", g.quiet, "suppress progress output");

    auto* modes = app.add_subcommand("modes", "list cavity eigenvalues and Weyl counting");
    std::optional<double> modes_fmax;
    modes->add_option("--f-max", modes_fmax, "band edge in GHz (default from config)");

    auto* xi = app.add_subcommand("xi", "tabulate the regularized Green's function and Z");
    std::string xi_axis = "imaginary";
    double xi_lo = 10.0, xi_hi = 100.0;
    int xi_points = 46;
    bool xi_oracle = false;
    xi->add_option("--axis", xi_axis, "real (k) or imaginary (kappa) axis")
        ->check(CLI::IsMember({"real", "imaginary"}))
        ->capture_default_str();
    xi->add_option("--min", xi_lo, "lower k or kappa [1/m]")->capture_default_str();
    xi->add_option("--max", xi_hi, "upper k or kappa [1/m]")->capture_default_str();
    xi->add_option("--points", xi_points, "grid points")->capture_default_str();
    xi->add_flag("--oracle", xi_oracle, "add the method-of-images cross-check column");

    auto* reflect = app.add_subcommand("reflect", "tabulate the reflection amplitude r(k)");
    double rf_lo = 20.0, rf_hi = 120.0;
    int rf_points = 1000;
    reflect->add_option("--k-min", rf_lo, "lower k [1/m]")->capture_default_str();
    reflect->add_option("--k-max", rf_hi, "upper k [1/m]")->capture_default_str();
    reflect->add_option("--points", rf_points, "grid points")->capture_default_str();

    auto* ampl = app.add_subcommand("amplitudes", "point vs tube amplitudes and mismatch");
    int ampl_ell = 0;
    double ampl_lo = 1e-4, ampl_hi = 1.0;
    int ampl_points = 60;
    ampl->add_option("--ell", ampl_ell, "partial wave")->capture_default_str();
    ampl->add_option("--ka-min", ampl_lo, "lower ka")->capture_default_str();
    ampl->add_option("--ka-max", ampl_hi, "upper ka")->capture_default_str();
    ampl->add_option("--points", ampl_points, "log-grid points")->capture_default_str();

    auto* reson = app.add_subcommand("resonances", "complex resonances of one cavity");
    std::optional<double> reson_fmax;
    reson->add_option("--f-max", reson_fmax, "band edge in GHz (default from config)");

    auto* ens = app.add_subcommand("ensemble", "full ensemble statistics run");

    auto* cmp = app.add_subcommand("compare", "compare spacing statistics against Poisson or data");
    std::string cmp_against = "poisson";
    std::string cmp_spacings, cmp_hist, cmp_levels;
    double cmp_c1 = 0.0, cmp_c2 = 0.0;
    cmp->add_option("--against", cmp_against, "'poisson' or a spacings/histogram CSV path")
        ->capture_default_str();
    cmp->add_option("--spacings", cmp_spacings, "input spacings.csv");
    cmp->add_option("--histogram", cmp_hist, "input histogram.csv");
    cmp->add_option("--levels", cmp_levels, "input normalized levels CSV (needs --c1-m/--c2-m)");
    cmp->add_option("--c1-m", cmp_c1, "rectangle side for unfolding ingested levels");
    cmp->add_option("--c2-m", cmp_c2, "rectangle side for unfolding ingested levels");

    auto* ing = app.add_subcommand("ingest", "validate and normalize external level data");
    std::string ing_in, ing_unit = "GHz", ing_out = "normalized_levels.csv";
    ing->add_option("--in", ing_in, "input CSV (one level per line)")->required();
    ing->add_option("--unit", ing_unit, "input unit: GHz, per_m or per_m2")
        ->capture_default_str();
    ing->add_option("--out-file", ing_out, "output file name")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }
    if (seed_opt->count() > 0)
        g.seed = seed_val;

    try {
        if (modes->parsed())
            return cmd_modes(g, modes_fmax);
        if (xi->parsed())
            return cmd_xi(g, xi_axis, xi_lo, xi_hi, xi_points, xi_oracle);
        if (reflect->parsed())
            return cmd_reflect(g, rf_lo, rf_hi, rf_points);
        if (ampl->parsed())
            return cmd_amplitudes(g, ampl_ell, ampl_lo, ampl_hi, ampl_points);
        if (reson->parsed())
            return cmd_resonances(g, reson_fmax);
        if (ens->parsed())
            return cmd_ensemble(g);
        if (cmp->parsed())
            return cmd_compare(g, cmp_against, cmp_spacings, cmp_hist, cmp_levels, cmp_c1,
                               cmp_c2);
        if (ing->parsed())
            return cmd_ingest(g, ing_in, ing_unit, ing_out);
    } catch (const config::config_error& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_usage;
    } catch (const io_error& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return exit_io;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return exit_usage;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return exit_usage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return exit_numerical;
    }
    return exit_usage;
}
