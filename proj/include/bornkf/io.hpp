#ifndef BORNKF_IO_HPP
#define BORNKF_IO_HPP

// File formats.
//
// Run config (JSON):
//   {
//     "output_dir": "out",                       // default "out"
//     "scenarios": [ { ...scenario... }, ... ],  // default []
//     "rank_sweep": { "ks": [1, 3, 5], "rel_tol": 1e-10, "J": 30, "N": 30, "M": 8, "S": 3 }
//   }
// Scenario keys: name, scatterer (required), k (required), alpha (required),
// sigma, N, J, M, S, r, phi0, seed, oversample, method ("kf" | "ft" | "both"),
// snapshots. Omitted keys take the defaults J=30, M=8, S=3, N=30, r=1,
// phi0=0, oversample=1, sigma=0, seed=0, method="kf", snapshots=[4, 20]
// (default snapshot steps beyond N are dropped).
// Unknown keys are rejected at every level.
//
// Scatterer: "B1", "B2", or an object
//   { "preset": "B1" | "B2", "value": [re, im] }
//   { "union": [ {"disk": {"center": [x, y], "radius": r}},
//                {"disk": {"center": [x, y], "radius_squared": r2}},
//                {"box": {"x": [x0, x1], "y": [y0, y1]}} ], "value": [re, im] }
//
// CSV: UTF-8, LF line endings, a header row, floats with 17 significant
// digits in the C locale.
// Images: plain PGM (P2), one pixel per cell, maxval 255, a comment line
// "# v_min=<a> v_max=<b>" recording the real-part range mapped to 0..255.
// Rows run from +x2 (top) to -x2, columns from -x1 to +x1.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bornkf/experiments.hpp"

namespace bornkf::io {

/// Malformed or schema-invalid input. Maps to exit status 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Failure writing or reading a file. Maps to exit status 3.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RankSweepConfig {
    std::vector<double> ks;
    double rel_tol = kDefaultRankTolerance;
    int J = 30;
    int N = 30;
    int M = 8;
    double S = 3.0;
};

struct RunConfig {
    std::filesystem::path output_dir = "out";
    std::vector<Scenario> scenarios;
    std::optional<RankSweepConfig> rank_sweep;
};

// ---------------------------------------------------------------------------
// number formatting

inline std::string format_double(double v) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::general, 17);
    return std::string(buf.data(), res.ptr);
}

inline std::string format_shortest(double v) {
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline double parse_double(const std::string& s) {
    double v = 0.0;
    const char* end = s.data() + s.size();
    auto res = std::from_chars(s.data(), end, v);
    if (res.ec != std::errc() || res.ptr != end) {
        throw ConfigError("not a number: '" + s + "'");
    }
    return v;
}

// ---------------------------------------------------------------------------
// config parsing

namespace detail {

using nlohmann::json;

inline void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* a : allowed) known = known || it.key() == a;
        if (!known) throw ConfigError(where + ": unknown key '" + it.key() + "'");
    }
}

inline double number(const json& obj, const char* key, const std::string& where) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + ": key '" + key + "' must be a number");
    return v.get<double>();
}

inline double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
    return obj.contains(key) ? number(obj, key, where) : fallback;
}

inline int count_or(const json& obj, const char* key, int fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    const json& v = obj.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 1 || v.get<long long>() > 1'000'000) {
        throw ConfigError(where + ": key '" + key + "' must be a positive integer");
    }
    return v.get<int>();
}

inline Complex complex_value(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        return {v[0].get<double>(), v[1].get<double>()};
    }
    throw ConfigError(where + ": expected a number or [re, im]");
}

inline std::pair<double, double> pair_of(const json& v, const std::string& where) {
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number()) {
        return {v[0].get<double>(), v[1].get<double>()};
    }
    throw ConfigError(where + ": expected [a, b]");
}

inline Scatterer preset(const std::string& name, const std::string& where) {
    if (name == "B1") return Scatterer::disk_b1();
    if (name == "B2") return Scatterer::composite_b2();
    throw ConfigError(where + ": unknown scatterer preset '" + name + "'");
}

inline Shape shape(const json& v, const std::string& where) {
    if (!v.is_object() || v.size() != 1) throw ConfigError(where + ": expected {\"disk\": ...} or {\"box\": ...}");
    if (v.contains("disk")) {
        const json& d = v.at("disk");
        const std::string w = where + ".disk";
        check_keys(d, {"center", "radius", "radius_squared"}, w);
        if (!d.contains("center")) throw ConfigError(w + ": missing key 'center'");
        const auto [cx, cy] = pair_of(d.at("center"), w + ".center");
        if (d.contains("radius") == d.contains("radius_squared")) {
            throw ConfigError(w + ": give exactly one of 'radius', 'radius_squared'");
        }
        const double r2 = d.contains("radius") ? std::pow(number(d, "radius", w), 2) : number(d, "radius_squared", w);
        return Disk{{cx, cy}, r2};
    }
    if (v.contains("box")) {
        const json& b = v.at("box");
        const std::string w = where + ".box";
        check_keys(b, {"x", "y"}, w);
        if (!b.contains("x") || !b.contains("y")) throw ConfigError(w + ": needs 'x' and 'y'");
        const auto [x0, x1] = pair_of(b.at("x"), w + ".x");
        const auto [y0, y1] = pair_of(b.at("y"), w + ".y");
        return Box{x0, x1, y0, y1};
    }
    throw ConfigError(where + ": unknown shape '" + v.begin().key() + "'");
}

inline Scatterer scatterer(const json& v, const std::string& where) {
    if (v.is_string()) return preset(v.get<std::string>(), where);
    check_keys(v, {"preset", "union", "value"}, where);
    if (v.contains("preset") == v.contains("union")) {
        throw ConfigError(where + ": give exactly one of 'preset', 'union'");
    }
    Scatterer out;
    if (v.contains("preset")) {
        if (!v.at("preset").is_string()) throw ConfigError(where + ": 'preset' must be a string");
        out = preset(v.at("preset").get<std::string>(), where);
    } else {
        const json& parts = v.at("union");
        if (!parts.is_array() || parts.empty()) throw ConfigError(where + ": 'union' must be a non-empty array");
        for (std::size_t i = 0; i < parts.size(); ++i) {
            out.parts.push_back(shape(parts[i], where + ".union[" + std::to_string(i) + "]"));
        }
    }
    if (v.contains("value")) out.value = complex_value(v.at("value"), where + ".value");
    return out;
}

inline bool safe_name(const std::string& s) {
    if (s.empty() || s == "." || s == "..") return false;
    for (char c : s) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' ||
                        c == '-' || c == '.';
        if (!ok) return false;
    }
    return true;
}

inline Scenario scenario(const json& v, std::size_t index) {
    const std::string where = "scenarios[" + std::to_string(index) + "]";
    check_keys(v, {"name", "scatterer", "k", "alpha", "sigma", "N", "J", "M", "S", "r", "phi0", "seed",
                   "oversample", "method", "snapshots"},
               where);
    for (const char* required : {"scatterer", "k", "alpha"}) {
        if (!v.contains(required)) throw ConfigError(where + ": missing key '" + required + "'");
    }
    Scenario sc;
    sc.name = "scenario" + std::to_string(index + 1);
    if (v.contains("name")) {
        if (!v.at("name").is_string() || !safe_name(v.at("name").get<std::string>())) {
            throw ConfigError(where + ": key 'name' must be a string of [A-Za-z0-9_.-]");
        }
        sc.name = v.at("name").get<std::string>();
    }
    sc.scatterer = scatterer(v.at("scatterer"), where + ".scatterer");
    sc.k = number(v, "k", where);
    sc.alpha = number(v, "alpha", where);
    sc.sigma = number_or(v, "sigma", 0.0, where);
    sc.N = count_or(v, "N", 30, where);
    sc.J = count_or(v, "J", 30, where);
    sc.M = count_or(v, "M", 8, where);
    sc.S = number_or(v, "S", 3.0, where);
    sc.r = number_or(v, "r", 1.0, where);
    sc.oversample = count_or(v, "oversample", 1, where);
    if (v.contains("phi0")) sc.phi0 = complex_value(v.at("phi0"), where + ".phi0");
    if (v.contains("seed")) {
        const json& s = v.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<long long>() >= 0)) {
            throw ConfigError(where + ": key 'seed' must be a non-negative integer");
        }
        sc.seed = s.get<std::uint64_t>();
    }
    if (v.contains("method")) {
        const json& m = v.at("method");
        const std::string name = m.is_string() ? m.get<std::string>() : "";
        if (name == "kf") sc.method = Method::KF;
        else if (name == "ft") sc.method = Method::FT;
        else if (name == "both") sc.method = Method::Both;
        else throw ConfigError(where + ": key 'method' must be \"kf\", \"ft\" or \"both\"");
    }
    if (!v.contains("snapshots")) {
        std::erase_if(sc.snapshots, [&](int step) { return step > sc.N; });
    } else {
        const json& s = v.at("snapshots");
        if (!s.is_array()) throw ConfigError(where + ": key 'snapshots' must be an array");
        sc.snapshots.clear();
        for (const json& step : s) {
            if (!step.is_number_integer()) throw ConfigError(where + ": key 'snapshots' must hold integers");
            sc.snapshots.push_back(step.get<int>());
        }
    }
    for (int step : sc.snapshots) {
        if (step < 1 || step > sc.N) {
            throw ConfigError(where + ": snapshot step " + std::to_string(step) + " outside 1..N");
        }
    }
    try {
        sc.validate();
    } catch (const Error& e) {
        throw ConfigError(where + ": " + e.what());
    }
    return sc;
}

inline RankSweepConfig rank_sweep(const json& v) {
    const std::string where = "rank_sweep";
    check_keys(v, {"ks", "rel_tol", "J", "N", "M", "S"}, where);
    RankSweepConfig out;
    if (!v.contains("ks") || !v.at("ks").is_array()) throw ConfigError(where + ": key 'ks' must be an array");
    for (const json& k : v.at("ks")) {
        if (!k.is_number() || !(k.get<double>() > 0.0)) {
            throw ConfigError(where + ": key 'ks' must hold positive numbers");
        }
        out.ks.push_back(k.get<double>());
    }
    out.rel_tol = number_or(v, "rel_tol", kDefaultRankTolerance, where);
    if (!(out.rel_tol > 0.0)) throw ConfigError(where + ": key 'rel_tol' must be positive");
    out.J = count_or(v, "J", 30, where);
    out.N = count_or(v, "N", 30, where);
    out.M = count_or(v, "M", 8, where);
    out.S = number_or(v, "S", 3.0, where);
    if (!(out.S > 0.0)) throw ConfigError(where + ": key 'S' must be positive");
    return out;
}

} // namespace detail

inline RunConfig parse_config(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("malformed config: ") + e.what());
    }
    RunConfig cfg;
    try {
        detail::check_keys(doc, {"output_dir", "scenarios", "rank_sweep"}, "config");
        if (doc.contains("output_dir")) {
            if (!doc.at("output_dir").is_string()) throw ConfigError("config: key 'output_dir' must be a string");
            cfg.output_dir = doc.at("output_dir").get<std::string>();
        }
        if (doc.contains("scenarios")) {
            const auto& list = doc.at("scenarios");
            if (!list.is_array()) throw ConfigError("config: key 'scenarios' must be an array");
            std::set<std::string> names;
            for (std::size_t i = 0; i < list.size(); ++i) {
                cfg.scenarios.push_back(detail::scenario(list[i], i));
                if (!names.insert(cfg.scenarios.back().name).second) {
                    throw ConfigError("scenarios[" + std::to_string(i) + "]: duplicate name '" +
                                      cfg.scenarios.back().name + "'");
                }
            }
        }
        if (doc.contains("rank_sweep")) cfg.rank_sweep = detail::rank_sweep(doc.at("rank_sweep"));
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

// ---------------------------------------------------------------------------
// CSV

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline std::string mse_csv(const std::vector<double>& mse) {
    std::string s = "step,mse\n";
    for (std::size_t n = 0; n < mse.size(); ++n) {
        s += std::to_string(n + 1) + "," + format_double(mse[n]) + "\n";
    }
    return s;
}

inline std::string state_csv(const Grid& grid, const ComplexVector& state) {
    if (state.size() != grid.cell_count()) throw Error(ErrorCode::DimensionMismatch, "state_csv: wrong length");
    std::string s = "i,l,re,im\n";
    for (Eigen::Index p = 0; p < state.size(); ++p) {
        const auto [i, l] = grid.cell(p);
        s += std::to_string(i) + "," + std::to_string(l) + "," + format_double(state(p).real()) + "," +
             format_double(state(p).imag()) + "\n";
    }
    return s;
}

/// Requires a trace produced with Method::Both.
inline std::string equivalence_csv(const ReconstructionTrace& trace) {
    std::string s = "step,kf_mse,ft_mse,relative_gap\n";
    for (std::size_t n = 0; n < trace.step_gaps.size(); ++n) {
        s += std::to_string(n + 1) + "," + format_double(trace.mse[n]) + "," + format_double(trace.ft_mse[n]) + "," +
             format_double(trace.step_gaps[n]) + "\n";
    }
    return s;
}

inline std::string rank_csv(const std::vector<std::pair<double, std::size_t>>& rows) {
    std::string s = "k,rank\n";
    for (const auto& [k, rank] : rows) s += format_shortest(k) + "," + std::to_string(rank) + "\n";
    return s;
}

/// Parses a state CSV (i,l,re,im) back into the flattened vector. Returns M
/// and the vector; rows may come in any order but must cover every cell once.
inline std::pair<int, ComplexVector> parse_state_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "i,l,re,im") throw ConfigError("state csv: expected header 'i,l,re,im'");
    std::vector<std::array<std::string, 4>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::array<std::string, 4> fields;
        std::istringstream ls(line);
        for (auto& f : fields) {
            if (!std::getline(ls, f, ',')) throw ConfigError("state csv line " + std::to_string(line_no) + ": expected 4 fields");
        }
        std::string extra;
        if (std::getline(ls, extra, ',')) throw ConfigError("state csv line " + std::to_string(line_no) + ": expected 4 fields");
        rows.push_back(fields);
    }
    const auto side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(rows.size()))));
    if (rows.empty() || side % 2 != 0 || static_cast<std::size_t>(side) * side != rows.size()) {
        throw ConfigError("state csv: row count " + std::to_string(rows.size()) + " is not (2M)^2");
    }
    const int m = side / 2;
    const Grid grid(1.0, m);
    ComplexVector out(grid.cell_count());
    std::vector<bool> seen(rows.size(), false);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        try {
            const int i = std::stoi(rows[r][0]);
            const int l = std::stoi(rows[r][1]);
            if (i < -m || i >= m || l < -m || l >= m) throw ConfigError("cell index out of range");
            const Eigen::Index p = grid.index(i, l);
            if (seen[p]) throw ConfigError("duplicate cell");
            seen[p] = true;
            out(p) = Complex(parse_double(rows[r][2]), parse_double(rows[r][3]));
        } catch (const std::logic_error&) {
            throw ConfigError("state csv data row " + std::to_string(r + 1) + ": bad integer");
        } catch (const ConfigError& e) {
            throw ConfigError("state csv data row " + std::to_string(r + 1) + ": " + e.what());
        }
    }
    return {m, out};
}

// ---------------------------------------------------------------------------
// images

struct GridImage {
    int side = 0;
    std::vector<int> pixels; // row-major, top row first
    double v_min = 0.0;
    double v_max = 0.0;

    static constexpr int kMaxGray = 255;
    static constexpr int kMidGray = 128;
};

inline GridImage make_grid_image(const ComplexVector& estimate, const Grid& grid) {
    if (estimate.size() != grid.cell_count()) {
        throw Error(ErrorCode::DimensionMismatch, "grid image: estimate has wrong length");
    }
    GridImage img;
    img.side = grid.side();
    const Eigen::VectorXd re = estimate.real();
    img.v_min = re.minCoeff();
    img.v_max = re.maxCoeff();
    const double span = img.v_max - img.v_min;
    const int m = grid.subdivisions();
    img.pixels.reserve(static_cast<std::size_t>(estimate.size()));
    for (int row = 0; row < img.side; ++row) {
        const int l = m - 1 - row;
        for (int col = 0; col < img.side; ++col) {
            const int i = col - m;
            const double v = re(grid.index(i, l));
            img.pixels.push_back(span > 0.0 ? static_cast<int>(std::lround(GridImage::kMaxGray * (v - img.v_min) / span))
                                            : GridImage::kMidGray);
        }
    }
    return img;
}

inline std::string pgm_text(const GridImage& img) {
    std::string s = "P2\n# v_min=" + format_double(img.v_min) + " v_max=" + format_double(img.v_max) + "\n";
    s += std::to_string(img.side) + " " + std::to_string(img.side) + "\n" + std::to_string(GridImage::kMaxGray) + "\n";
    for (int row = 0; row < img.side; ++row) {
        for (int col = 0; col < img.side; ++col) {
            if (col > 0) s += ' ';
            s += std::to_string(img.pixels[static_cast<std::size_t>(row) * img.side + col]);
        }
        s += '\n';
    }
    return s;
}

inline void write_grid_image(const ComplexVector& estimate, const Grid& grid, const std::filesystem::path& path) {
    write_text(path, pgm_text(make_grid_image(estimate, grid)));
}

} // namespace bornkf::io

#endif // BORNKF_IO_HPP
