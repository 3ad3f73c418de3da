#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fogopt/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"fogopt: online resource-management experiments under long-term constraints"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "execute the sweep described by a config file");
    run->add_option("config", config_path, "experiment config file")->required();

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a config file without running it");
    validate->add_option("config", validate_path, "experiment config file")->required();

    std::vector<std::string> traces;
    auto* plot = app.add_subcommand("plot", "render SVG charts from trace files");
    plot->add_option("traces", traces, "trace csv files")->required();

    std::string sweep_dir;
    auto* report = app.add_subcommand("report", "summarize a sweep directory");
    report->add_option("dir", sweep_dir, "directory holding run reports")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return fogopt::runner::cmd_run(config_path);
    if (validate->parsed()) return fogopt::runner::cmd_validate(validate_path);
    if (plot->parsed()) return fogopt::runner::cmd_plot(traces);
    if (report->parsed()) return fogopt::runner::cmd_report(sweep_dir);
    return 1;
}
