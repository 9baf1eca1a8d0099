// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cavscat/common.hpp"
#include "cavscat/spectral_stats.hpp"

// CSV and JSON persistence.  Numbers carry 17 significant digits, '.'
// decimal separator and LF line endings regardless of locale.

namespace cavscat::io {

using json = nlohmann::ordered_json;

/// FNV-1a 64-bit digest, recorded per output file in the run manifest.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "0x%016llx", static_cast<unsigned long long>(v));
    return buf;
}

/// Locale-independent decimal form with 17 significant digits.
inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

struct FileRecord {
    std::string path;
    std::uintmax_t bytes = 0;
    std::string digest;
};

/// Collects data files of one run; on failure every file written so far is
/// removed so no partial output set survives.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::error_code ec;
        std::filesystem::create_directories(dir_, ec);
        if (ec)
            throw io_error("cannot create output directory " + dir_.string());
    }

    const std::filesystem::path& dir() const { return dir_; }
    const std::vector<FileRecord>& files() const { return files_; }

    void write(const std::string& name, const std::string& content) {
        const auto p = dir_ / name;
        std::ofstream out(p, std::ios::binary | std::ios::trunc);
        if (!out || !(out << content) || !out.flush()) {
            discard();
            throw io_error("cannot write " + p.string());
        }
        files_.push_back({name, content.size(), hex64(fnv1a64(content))});
    }

    /// Manifest goes last, through a temporary, so a complete file appears
    /// atomically at the final path.
    void write_manifest(const json& manifest, const std::string& name = "manifest.json") {
        const auto p = dir_ / name;
        const auto tmp = dir_ / (name + ".tmp");
        const std::string body = manifest.dump(2) + "\n";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out || !(out << body) || !out.flush()) {
                discard();
                throw io_error("cannot write " + tmp.string());
            }
        }
        std::error_code ec;
        std::filesystem::rename(tmp, p, ec);
        if (ec) {
            discard();
            throw io_error("cannot finalize " + p.string());
        }
    }

    void discard() {
        std::error_code ec;
        for (const auto& f : files_)
            std::filesystem::remove(dir_ / f.path, ec);
        files_.clear();
    }

private:
    std::filesystem::path dir_;
    std::vector<FileRecord> files_;
};

inline constexpr const char* resonances_csv_header =
    "cavity_id,c1_m,c2_m,x0_x_m,x0_y_m,a_m,re_k_per_m,im_k_per_m,f_GHz,"
    "halfwidth_per_m2,residual,seed_n,seed_m";

inline std::string resonances_csv(const std::vector<stats::CavityRecord>& cavities,
                                  double antenna_radius_m) {
    std::string out(resonances_csv_header);
    out += '\n';
    for (const auto& c : cavities) {
        for (const auto& r : c.resonances) {
            out += std::to_string(c.id);
            out += ',';
            out += format_double(c.c1) + ',' + format_double(c.c2) + ',';
            out += format_double(c.x0.x) + ',' + format_double(c.x0.y) + ',';
            out += format_double(antenna_radius_m) + ',';
            out += format_double(r.k.real()) + ',' + format_double(r.k.imag()) + ',';
            out += format_double(r.freq_GHz) + ',' + format_double(r.halfwidth) + ',';
            out += format_double(r.residual) + ',';
            out += std::to_string(r.seed_n) + ',' + std::to_string(r.seed_m);
            out += '\n';
        }
    }
    return out;
}

inline json resonances_json(const std::vector<stats::CavityRecord>& cavities,
                            double antenna_radius_m) {
    json arr = json::array();
    for (const auto& c : cavities) {
        for (const auto& r : c.resonances) {
            arr.push_back({{"cavity_id", c.id},
                           {"c1_m", c.c1},
                           {"c2_m", c.c2},
                           {"x0_x_m", c.x0.x},
                           {"x0_y_m", c.x0.y},
                           {"a_m", antenna_radius_m},
                           {"re_k_per_m", r.k.real()},
                           {"im_k_per_m", r.k.imag()},
                           {"f_GHz", r.freq_GHz},
                           {"halfwidth_per_m2", r.halfwidth},
                           {"residual", r.residual},
                           {"seed_n", r.seed_n},
                           {"seed_m", r.seed_m}});
        }
    }
    return arr;
}

inline std::string spacings_csv(const std::vector<stats::CavityRecord>& cavities) {
    std::string out = "cavity_id,s\n";
    for (const auto& c : cavities)
        for (double s : c.spacings)
            out += std::to_string(c.id) + ',' + format_double(s) + '\n';
    return out;
}

inline json spacings_json(const std::vector<stats::CavityRecord>& cavities) {
    json arr = json::array();
    for (const auto& c : cavities)
        for (double s : c.spacings)
            arr.push_back({{"cavity_id", c.id}, {"s", s}});
    return arr;
}

inline std::string histogram_csv(const stats::SpacingHistogram& h) {
    std::string out = "bin_lo,bin_hi,density\n";
    for (std::size_t b = 0; b + 1 < h.bin_edges.size(); ++b) {
        out += format_double(h.bin_edges[b]) + ',' + format_double(h.bin_edges[b + 1]) + ',' +
               format_double(h.densities[b]) + '\n';
    }
    return out;
}

inline json histogram_json(const stats::SpacingHistogram& h) {
    json arr = json::array();
    for (std::size_t b = 0; b + 1 < h.bin_edges.size(); ++b)
        arr.push_back({{"bin_lo", h.bin_edges[b]},
                       {"bin_hi", h.bin_edges[b + 1]},
                       {"density", h.densities[b]}});
    return arr;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_double(const std::string& s, const std::string& context) {
    double v = 0.0;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t'))
        ++b;
    auto res = std::from_chars(b, e, v);
    if (res.ec != std::errc{})
        throw io_error(context + ": cannot parse number '" + s + "'");
    return v;
}

} // namespace detail

/// Read a spacings.csv produced by this tool (header `cavity_id,s`).
inline std::vector<double> read_spacings_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || detail::split_csv_line(line).size() != 2)
        throw io_error(path + ": not a spacings file");
    std::vector<double> out;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 2)
            throw io_error(path + ": malformed row '" + line + "'");
        out.push_back(detail::parse_double(f[1], path));
    }
    return out;
}

/// Read a histogram.csv produced by this tool (header `bin_lo,bin_hi,density`).
inline stats::SpacingHistogram read_histogram_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || detail::split_csv_line(line).size() != 3)
        throw io_error(path + ": not a histogram file");
    stats::SpacingHistogram h;
    std::vector<double> los, his;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 3)
            throw io_error(path + ": malformed row '" + line + "'");
        los.push_back(detail::parse_double(f[0], path));
        his.push_back(detail::parse_double(f[1], path));
        h.densities.push_back(detail::parse_double(f[2], path));
    }
    for (std::size_t i = 0; i < los.size(); ++i) {
        if (i > 0 && los[i] != his[i - 1])
            throw io_error(path + ": bins are not contiguous");
        h.bin_edges.push_back(los[i]);
    }
    if (!his.empty())
        h.bin_edges.push_back(his.back());
    return h;
}

/// Units accepted for ingested level data.
enum class LevelUnit { GHz, per_m, per_m2 };

inline LevelUnit parse_level_unit(const std::string& s) {
    if (s == "GHz" || s == "ghz")
        return LevelUnit::GHz;
    if (s == "1/m" || s == "per_m")
        return LevelUnit::per_m;
    if (s == "1/m2" || s == "1/m^2" || s == "per_m2")
        return LevelUnit::per_m2;
    throw io_error("unknown level unit '" + s + "' (use GHz, per_m or per_m2)");
}

struct IngestedLevels {
    std::string source;
    LevelUnit unit = LevelUnit::per_m2;
    std::vector<double> values; // normalized to energies [1/m^2], sorted
};

/// Read external level data: one numeric value per line (an optional
/// non-numeric header line and '#' comments are skipped), normalize to
/// energies in 1/m^2, sort, and deduplicate.
inline IngestedLevels ingest_levels(const std::string& path, LevelUnit unit) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open " + path);
    IngestedLevels out;
    out.source = path;
    out.unit = unit;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        auto fields = detail::split_csv_line(line);
        double v = 0.0;
        const char* b = fields[0].data();
        const char* e = fields[0].data() + fields[0].size();
        while (b < e && (*b == ' ' || *b == '\t'))
            ++b;
        auto res = std::from_chars(b, e, v);
        if (res.ec != std::errc{}) {
            if (first) {
                first = false;
                continue; // header line
            }
            throw io_error(path + ": cannot parse level '" + line + "'");
        }
        first = false;
        if (!(v > 0.0))
            throw io_error(path + ": levels must be > 0, got '" + line + "'");
        double energy = v;
        switch (unit) {
        case LevelUnit::GHz: {
            const double k = stats::k_from_freq(v);
            energy = k * k;
            break;
        }
        case LevelUnit::per_m:
            energy = v * v;
            break;
        case LevelUnit::per_m2:
            break;
        }
        out.values.push_back(energy);
    }
    std::sort(out.values.begin(), out.values.end());
    out.values.erase(std::unique(out.values.begin(), out.values.end()), out.values.end());
    return out;
}

inline std::string levels_csv(const IngestedLevels& lv) {
    std::string out = "E_per_m2\n";
    for (double v : lv.values)
        out += format_double(v) + '\n';
    return out;
}

/// Read a normalized levels file (header `E_per_m2`).
inline std::vector<double> read_levels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw io_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || detail::split_csv_line(line)[0] != "E_per_m2")
        throw io_error(path + ": not a normalized levels file");
    std::vector<double> out;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        out.push_back(detail::parse_double(detail::split_csv_line(line)[0], path));
    }
    return out;
}

} // namespace cavscat::io
