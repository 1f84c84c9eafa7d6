// simulate <config-path> [--output <path>] [--format csv|json] [--threads N]

#include "mirrorless/parallel.hpp"
#include "mirrorless/runner.hpp"
#include "mirrorless/scenario.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

int main(int argc, char** argv)
{
    using namespace mirrorless;

    CLI::App app{"Driven multilevel atom and mirrorless-lasing simulator"};
    std::string config_path, output_path, format;
    int threads = 0;
    bool no_wall_time = false;
    app.add_option("config", config_path, "scenario file (INI)")->required();
    app.add_option("-o,--output", output_path, "output file; overrides [output] path");
    app.add_option("-f,--format", format, "csv or json; overrides [output] format")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("-t,--threads", threads, "worker threads for grid scans (default: OpenMP default)")
        ->check(CLI::NonNegativeNumber);
    app.add_flag("--no-wall-time", no_wall_time, "omit the wall-time provenance line");
    app.set_version_flag("--version", MIRRORLESS_VERSION);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kConfigError;
    }

    cli::ScenarioConfig config;
    try {
        config = cli::parse_config(std::filesystem::path(config_path));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return cli::kConfigError;
    }
    if (!output_path.empty())
        config.output_path = output_path;
    if (!format.empty())
        config.format = format == "json" ? cli::Format::Json : cli::Format::Csv;

    set_thread_count(threads);
    cli::RunOptions options;
    options.execution = thread_count() > 1 ? Execution::Parallel : Execution::Serial;
    options.record_wall_time = !no_wall_time;

    if (config.output_path.empty())
        return cli::run(config, std::cout, std::cerr, options);

    std::ostringstream buf;
    const int code = cli::run(config, buf, std::cerr, options);
    if (code != cli::kSuccess)
        return code;
    std::ofstream file(config.output_path, std::ios::binary);
    file << buf.str();
    if (!file) {
        std::cerr << "error: cannot write '" << config.output_path << "'\n";
        return cli::kInternalError;
    }
    return cli::kSuccess;
}
