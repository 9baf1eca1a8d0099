// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "cavscat/common.hpp"
#include "cavscat/spectral_stats.hpp"

// Run configuration: a single strict JSON document with snake_case keys and
// explicit units in key names.  Unknown keys are rejected with their path;
// an empty object yields the full default specification.

namespace cavscat::config {

using json = nlohmann::ordered_json;

struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CavityConfig {
    double c1_m = 0.3;
    double c2_m = 0.2;
    std::optional<double> x0_x_m; // absent: drawn from the master seed
    std::optional<double> x0_y_m;
};

struct RunConfig {
    CavityConfig cavity;
    stats::EnsembleSpec spec;          // ensemble + shared physics defaults
    double dedup_radius_factor = 1e-6; // dedup radius = factor * k_max
};

namespace detail {

inline void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                           const std::string& path) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw config_error(path + "." + it.key() + ": unknown key");
    }
}

inline double get_number(const json& obj, const std::string& key, double fallback,
                         const std::string& path) {
    if (!obj.contains(key))
        return fallback;
    if (!obj[key].is_number())
        throw config_error(path + "." + key + ": expected a number");
    return obj[key].get<double>();
}

inline std::int64_t get_integer(const json& obj, const std::string& key, std::int64_t fallback,
                                const std::string& path) {
    if (!obj.contains(key))
        return fallback;
    if (!obj[key].is_number_integer())
        throw config_error(path + "." + key + ": expected an integer");
    return obj[key].get<std::int64_t>();
}

inline bool get_bool(const json& obj, const std::string& key, bool fallback,
                     const std::string& path) {
    if (!obj.contains(key))
        return fallback;
    if (!obj[key].is_boolean())
        throw config_error(path + "." + key + ": expected a boolean");
    return obj[key].get<bool>();
}

inline std::string get_string(const json& obj, const std::string& key, std::string fallback,
                              const std::string& path) {
    if (!obj.contains(key))
        return fallback;
    if (!obj[key].is_string())
        throw config_error(path + "." + key + ": expected a string");
    return obj[key].get<std::string>();
}

inline void require_positive(double v, const std::string& keypath) {
    if (!(v > 0.0))
        throw config_error(keypath + ": must be > 0");
}

} // namespace detail

/// Parse and validate a configuration document.
inline RunConfig parse_config(const json& root) {
    if (!root.is_object())
        throw config_error("$: configuration must be a JSON object");

    // A run manifest may be fed back in; its embedded echo is the config.
    if (root.contains("tool") && root.contains("config"))
        return parse_config(root["config"]);

    detail::reject_unknown(root,
                           {"cavity", "antenna_radius_m", "f_max_GHz", "master_seed",
                            "resonance_condition", "spacing_variable", "ensemble", "numerics"},
                           "$");

    RunConfig cfg;
    auto& spec = cfg.spec;

    spec.antenna_radius_m =
        detail::get_number(root, "antenna_radius_m", spec.antenna_radius_m, "$");
    detail::require_positive(spec.antenna_radius_m, "$.antenna_radius_m");
    spec.f_max_GHz = detail::get_number(root, "f_max_GHz", spec.f_max_GHz, "$");
    detail::require_positive(spec.f_max_GHz, "$.f_max_GHz");
    spec.master_seed = static_cast<std::uint64_t>(
        detail::get_integer(root, "master_seed", static_cast<std::int64_t>(spec.master_seed), "$"));

    const std::string cond = detail::get_string(root, "resonance_condition", "rr1", "$");
    if (cond == "rr1")
        spec.condition = resonance::ResonanceCondition::rr1;
    else if (cond == "eq18")
        spec.condition = resonance::ResonanceCondition::eq18;
    else
        throw config_error("$.resonance_condition: must be \"rr1\" or \"eq18\"");

    const std::string sv = detail::get_string(root, "spacing_variable", "energy", "$");
    if (sv == "energy")
        spec.spacing_variable = stats::SpacingVariable::energy;
    else if (sv == "frequency")
        spec.spacing_variable = stats::SpacingVariable::frequency;
    else
        throw config_error("$.spacing_variable: must be \"energy\" or \"frequency\"");

    if (root.contains("cavity")) {
        const json& c = root["cavity"];
        if (!c.is_object())
            throw config_error("$.cavity: expected an object");
        detail::reject_unknown(c, {"c1_m", "c2_m", "x0_x_m", "x0_y_m"}, "$.cavity");
        cfg.cavity.c1_m = detail::get_number(c, "c1_m", cfg.cavity.c1_m, "$.cavity");
        cfg.cavity.c2_m = detail::get_number(c, "c2_m", cfg.cavity.c2_m, "$.cavity");
        detail::require_positive(cfg.cavity.c1_m, "$.cavity.c1_m");
        detail::require_positive(cfg.cavity.c2_m, "$.cavity.c2_m");
        if (c.contains("x0_x_m"))
            cfg.cavity.x0_x_m = detail::get_number(c, "x0_x_m", 0.0, "$.cavity");
        if (c.contains("x0_y_m"))
            cfg.cavity.x0_y_m = detail::get_number(c, "x0_y_m", 0.0, "$.cavity");
        if (cfg.cavity.x0_x_m.has_value() != cfg.cavity.x0_y_m.has_value())
            throw config_error("$.cavity: x0_x_m and x0_y_m must be given together");
        if (cfg.cavity.x0_x_m &&
            !(*cfg.cavity.x0_x_m > 0.0 && *cfg.cavity.x0_x_m < cfg.cavity.c1_m &&
              *cfg.cavity.x0_y_m > 0.0 && *cfg.cavity.x0_y_m < cfg.cavity.c2_m))
            throw config_error("$.cavity: x0 must lie strictly inside the rectangle");
    }

    if (root.contains("ensemble")) {
        const json& e = root["ensemble"];
        if (!e.is_object())
            throw config_error("$.ensemble: expected an object");
        detail::reject_unknown(
            e, {"n_cavities", "c_min_m", "c_max_m", "missing_fraction", "bins", "s_max",
                "decoupled"},
            "$.ensemble");
        spec.n_cavities = static_cast<int>(
            detail::get_integer(e, "n_cavities", spec.n_cavities, "$.ensemble"));
        spec.c_min_m = detail::get_number(e, "c_min_m", spec.c_min_m, "$.ensemble");
        spec.c_max_m = detail::get_number(e, "c_max_m", spec.c_max_m, "$.ensemble");
        spec.missing_fraction =
            detail::get_number(e, "missing_fraction", spec.missing_fraction, "$.ensemble");
        spec.bins = static_cast<int>(detail::get_integer(e, "bins", spec.bins, "$.ensemble"));
        spec.s_max = detail::get_number(e, "s_max", spec.s_max, "$.ensemble");
        spec.decoupled = detail::get_bool(e, "decoupled", spec.decoupled, "$.ensemble");
        if (spec.n_cavities < 1)
            throw config_error("$.ensemble.n_cavities: must be >= 1");
        detail::require_positive(spec.c_min_m, "$.ensemble.c_min_m");
        if (!(spec.c_max_m >= spec.c_min_m))
            throw config_error("$.ensemble.c_max_m: must be >= c_min_m");
        if (!(spec.missing_fraction >= 0.0 && spec.missing_fraction < 1.0))
            throw config_error("$.ensemble.missing_fraction: must be in [0, 1)");
        if (spec.bins < 1)
            throw config_error("$.ensemble.bins: must be >= 1");
        detail::require_positive(spec.s_max, "$.ensemble.s_max");
    }

    if (root.contains("numerics")) {
        const json& n = root["numerics"];
        if (!n.is_object())
            throw config_error("$.numerics: expected an object");
        detail::reject_unknown(n,
                               {"basis_safety_factor", "window_fraction", "max_modes",
                                "visibility_threshold", "newton_tol", "newton_max_iter",
                                "accept_residual", "dedup_radius_factor"},
                               "$.numerics");
        auto& sysopt = spec.system;
        sysopt.basis_safety_factor = detail::get_number(
            n, "basis_safety_factor", sysopt.basis_safety_factor, "$.numerics");
        if (!(sysopt.basis_safety_factor >= 25.0))
            throw config_error("$.numerics.basis_safety_factor: must be >= 25");
        sysopt.green.window_fraction =
            detail::get_number(n, "window_fraction", sysopt.green.window_fraction, "$.numerics");
        if (!(sysopt.green.window_fraction > 0.0 && sysopt.green.window_fraction <= 1.0))
            throw config_error("$.numerics.window_fraction: must be in (0, 1]");
        const std::int64_t mm = detail::get_integer(
            n, "max_modes", static_cast<std::int64_t>(sysopt.green.max_modes), "$.numerics");
        if (mm < 1)
            throw config_error("$.numerics.max_modes: must be >= 1");
        sysopt.green.max_modes = static_cast<std::size_t>(mm);
        sysopt.green.visibility_threshold = detail::get_number(
            n, "visibility_threshold", sysopt.green.visibility_threshold, "$.numerics");
        spec.find.tol = detail::get_number(n, "newton_tol", spec.find.tol, "$.numerics");
        detail::require_positive(spec.find.tol, "$.numerics.newton_tol");
        spec.find.max_iter = static_cast<int>(
            detail::get_integer(n, "newton_max_iter", spec.find.max_iter, "$.numerics"));
        spec.find.accept_residual = detail::get_number(n, "accept_residual",
                                                       spec.find.accept_residual, "$.numerics");
        detail::require_positive(spec.find.accept_residual, "$.numerics.accept_residual");
        cfg.dedup_radius_factor =
            detail::get_number(n, "dedup_radius_factor", cfg.dedup_radius_factor, "$.numerics");
        detail::require_positive(cfg.dedup_radius_factor, "$.numerics.dedup_radius_factor");
    }

    return cfg;
}

/// Load a configuration (or a run manifest) from a JSON file.
inline RunConfig read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open config file: " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw config_error(path + ": invalid JSON: " + e.what());
    }
    return parse_config(root);
}

/// Echo of the fully materialized configuration, suitable for the run
/// manifest and for feeding back in as a config.
inline json config_echo(const RunConfig& cfg) {
    const auto& spec = cfg.spec;
    json root;
    root["cavity"] = {{"c1_m", cfg.cavity.c1_m}, {"c2_m", cfg.cavity.c2_m}};
    if (cfg.cavity.x0_x_m) {
        root["cavity"]["x0_x_m"] = *cfg.cavity.x0_x_m;
        root["cavity"]["x0_y_m"] = *cfg.cavity.x0_y_m;
    }
    root["antenna_radius_m"] = spec.antenna_radius_m;
    root["f_max_GHz"] = spec.f_max_GHz;
    root["master_seed"] = spec.master_seed;
    root["resonance_condition"] =
        spec.condition == resonance::ResonanceCondition::rr1 ? "rr1" : "eq18";
    root["spacing_variable"] =
        spec.spacing_variable == stats::SpacingVariable::energy ? "energy" : "frequency";
    root["ensemble"] = {{"n_cavities", spec.n_cavities},
                        {"c_min_m", spec.c_min_m},
                        {"c_max_m", spec.c_max_m},
                        {"missing_fraction", spec.missing_fraction},
                        {"bins", spec.bins},
                        {"s_max", spec.s_max},
                        {"decoupled", spec.decoupled}};
    root["numerics"] = {{"basis_safety_factor", spec.system.basis_safety_factor},
                        {"window_fraction", spec.system.green.window_fraction},
                        {"max_modes", spec.system.green.max_modes},
                        {"visibility_threshold", spec.system.green.visibility_threshold},
                        {"newton_tol", spec.find.tol},
                        {"newton_max_iter", spec.find.max_iter},
                        {"accept_residual", spec.find.accept_residual},
                        {"dedup_radius_factor", cfg.dedup_radius_factor}};
    return root;
}

} // namespace cavscat::config
