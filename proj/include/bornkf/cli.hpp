#ifndef BORNKF_CLI_HPP
#define BORNKF_CLI_HPP

// Command implementations behind the `bornkf` executable. Each returns the
// process exit status: 0 success, 2 config/input error, 3 numerical or I/O
// failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "bornkf/experiments.hpp"
#include "bornkf/io.hpp"

namespace bornkf::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitFailure = 3;

/// Environment variable that overrides the config's output_dir.
inline constexpr const char* kOutputRootEnv = "BORNKF_OUTPUT_ROOT";

inline std::filesystem::path output_root(const io::RunConfig& cfg, const std::optional<std::filesystem::path>& override_root) {
    if (override_root) return *override_root;
    if (const char* env = std::getenv(kOutputRootEnv); env != nullptr && *env != '\0') return env;
    return cfg.output_dir;
}

inline void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io::IoError("cannot create directory '" + dir.string() + "': " + ec.message());
}

inline void write_scenario_outputs(const Scenario& sc, const ReconstructionTrace& trace, const std::filesystem::path& dir) {
    const Grid grid(sc.S, sc.M);
    ensure_directory(dir);
    io::write_text(dir / "mse.csv", io::mse_csv(trace.mse));
    io::write_text(dir / "state_final.csv", io::state_csv(grid, trace.states.back()));
    io::write_grid_image(trace.truth, grid, dir / "truth.pgm");
    for (int step : sc.snapshots) {
        const std::string suffix = "_n" + std::to_string(step) + ".pgm";
        io::write_grid_image(trace.states[step - 1], grid, dir / ("state" + suffix));
        if (sc.method == Method::Both) {
            io::write_grid_image(trace.ft_states[step - 1], grid, dir / ("ft_state" + suffix));
        }
    }
    if (sc.method == Method::Both) io::write_text(dir / "equivalence.csv", io::equivalence_csv(trace));
}

inline int cmd_reconstruct(const std::filesystem::path& config_path, std::ostream& log,
                           const std::optional<std::filesystem::path>& override_root = std::nullopt) {
    io::RunConfig cfg;
    try {
        cfg = io::load_config(config_path);
    } catch (const io::ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    const auto root = output_root(cfg, override_root);
    for (const Scenario& sc : cfg.scenarios) {
        try {
            const ReconstructionTrace trace = run_reconstruction(sc);
            write_scenario_outputs(sc, trace, root / sc.name);
            log << sc.name << ": final mse " << io::format_double(trace.mse.back());
            if (trace.equivalence_gap) log << ", KF/FT gap " << io::format_double(*trace.equivalence_gap);
            log << "\n";
        } catch (const Error& e) {
            log << "numerical failure: " << e.what() << "\n";
            return kExitFailure;
        } catch (const io::IoError& e) {
            log << "I/O failure in scenario '" << sc.name << "': " << e.what() << "\n";
            return kExitFailure;
        }
    }
    return kExitOk;
}

inline int cmd_rank_sweep(const std::filesystem::path& config_path, std::ostream& log,
                          const std::optional<std::filesystem::path>& override_root = std::nullopt) {
    io::RunConfig cfg;
    try {
        cfg = io::load_config(config_path);
        if (!cfg.rank_sweep) throw io::ConfigError("config: missing key 'rank_sweep'");
        if (cfg.rank_sweep->ks.empty()) throw io::ConfigError("rank_sweep: key 'ks' is empty");
    } catch (const io::ConfigError& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    const auto& rs = *cfg.rank_sweep;
    try {
        const auto rows = rank_sweep(rs.ks, Grid(rs.S, rs.M), DirectionSet(rs.J, rs.N), rs.rel_tol);
        const auto root = output_root(cfg, override_root);
        ensure_directory(root);
        io::write_text(root / "rank.csv", io::rank_csv(rows));
        for (const auto& [k, rank] : rows) log << "k=" << io::format_shortest(k) << " rank=" << rank << "\n";
    } catch (const Error& e) {
        log << "numerical failure: " << e.what() << "\n";
        return kExitFailure;
    } catch (const io::IoError& e) {
        log << "I/O failure: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

inline int cmd_render(const std::filesystem::path& state_path, const std::filesystem::path& out_path, std::ostream& log) {
    std::ifstream in(state_path, std::ios::binary);
    if (!in) {
        log << "I/O failure: cannot read '" << state_path.string() << "'\n";
        return kExitFailure;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        const auto [m, state] = io::parse_state_csv(ss.str());
        io::write_grid_image(state, Grid(1.0, m), out_path);
    } catch (const io::ConfigError& e) {
        log << "input error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const io::IoError& e) {
        log << "I/O failure: " << e.what() << "\n";
        return kExitFailure;
    }
    return kExitOk;
}

} // namespace bornkf::cli

#endif // BORNKF_CLI_HPP
