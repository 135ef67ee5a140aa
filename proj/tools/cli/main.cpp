#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "run.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Ground states of coupled cubic Schrödinger systems with vanishing potentials"};
    std::string config;
    std::string output_dir;
    bool strict = false;
    int max_parallel = 0;
    app.add_option("config", config, "JSON run configuration")->required();
    app.add_option("--output-dir", output_dir, "Directory for all artifacts (overrides config)");
    app.add_flag("--strict", strict, "Exit with code 4 if any solve fails to converge");
    app.add_option("--max-parallel", max_parallel, "Concurrent sweep points (overrides config)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cnls::cli::kConfig;
    }

    cnls::cli::Overrides ov;
    if (!output_dir.empty()) ov.output_dir = output_dir;
    ov.strict = strict;
    if (app.count("--max-parallel")) ov.max_parallel = max_parallel;
    return cnls::cli::run(config, ov, std::cout, std::cerr);
}
