/**
 * @brief Command-line driver: stshapeopt solve|optimize|check-gradient --config <path> [--out <dir>] [--vtk]
 */
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stshapeopt/commands.hpp"

int main(int argc, char** argv)
{
    using namespace stshapeopt;
    CLI::App app{"Space-time shape optimization of a moving material interface"};
    app.require_subcommand(1);

    CommandOptions options;
    std::string out_dir;
    auto add = [&](const char* name, const char* help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("--config", options.config_path, "run configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (overrides the configuration)");
        sub->add_flag("--vtk", options.vtk, "write VTK files");
        return sub;
    };
    CLI::App* solve = add("solve", "solve the state equation once and report J");
    CLI::App* opt = add("optimize", "run the shape gradient loop");
    CLI::App* check = add("check-gradient", "compare the adjoint derivative with finite differences");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }
    if (!out_dir.empty()) {
        options.out_dir = out_dir;
    }
    Command command = Command::Solve;
    if (opt->parsed()) {
        command = Command::Optimize;
    } else if (check->parsed()) {
        command = Command::CheckGradient;
    } else if (!solve->parsed()) {
        return kExitConfig;
    }
    return run_command(command, options, std::cout, std::cerr);
}
