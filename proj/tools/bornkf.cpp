#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bornkf/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Born far-field inversion by Kalman filter and full-data Tikhonov"};
    app.require_subcommand(1);

    std::string reconstruct_config;
    auto* reconstruct = app.add_subcommand("reconstruct", "run the scenarios of a config file");
    reconstruct->add_option("config", reconstruct_config, "JSON run config")->required();

    std::string sweep_config;
    auto* sweep = app.add_subcommand("rank-sweep", "rank of the stacked operator per wavenumber");
    sweep->add_option("config", sweep_config, "JSON run config with a rank_sweep section")->required();

    std::string state_csv;
    std::string out_pgm;
    auto* render = app.add_subcommand("render", "turn a state CSV into a PGM image");
    render->add_option("state", state_csv, "state CSV (i,l,re,im)")->required();
    render->add_option("out", out_pgm, "output .pgm path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int status = app.exit(e);
        return status == 0 ? 0 : bornkf::cli::kExitConfig;
    }

    if (*reconstruct) return bornkf::cli::cmd_reconstruct(reconstruct_config, std::cerr);
    if (*sweep) return bornkf::cli::cmd_rank_sweep(sweep_config, std::cerr);
    return bornkf::cli::cmd_render(state_csv, out_pgm, std::cerr);
}
