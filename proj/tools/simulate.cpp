#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "entforce/runner.hpp"

// Batch CLI: reads an experiment configuration, runs the mapped scenario,
// and writes the result table to a file or stdout.
// Exit codes: 0 success, 2 configuration error, 3 convergence/integration
// error, 4 IO error.

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw entforce::IoError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw entforce::IoError("failed while reading '" + path + "'");
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Transient entanglement-force simulator for driven atom pairs"};
    std::string config_path, out_path, format, scenario, golden_dir;
    int jobs = 0;
    bool timing = false;
    app.add_option("--config", config_path, "Configuration file (INI-style sections)");
    app.add_option("--out", out_path, "Output path (default: stdout or [output] path)");
    app.add_option("--format", format, "Output format: csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--jobs", jobs, "Worker threads (default: ENTFORCE_JOBS or all cores)");
    app.add_option("--scenario", scenario, "Scenario name override");
    app.add_flag("--timing", timing, "Record wall time in the output metadata");
    app.add_option("--write-golden", golden_dir,
                   "Write <dir>/<scenario>.csv and exit (golden regeneration)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const std::string text = config_path.empty() ? "" : read_file(config_path);
        const entforce::ExperimentConfig cfg = entforce::parse_config(text, scenario);

        for (const std::string& warning : entforce::pulse_warnings(cfg.pulse))
            std::cerr << "warning: " << warning << "\n";

        const int resolved_jobs = entforce::resolve_jobs(jobs);
        const auto t0 = std::chrono::steady_clock::now();
        entforce::ResultTable table = entforce::run_scenario(cfg, resolved_jobs);
        if (timing) {
            const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
            table.metadata.emplace_back("wall_time_s",
                                        entforce::detail::format_value(dt.count()));
        }

        if (!golden_dir.empty()) {
            const std::string path = golden_dir + "/" + cfg.scenario + ".csv";
            entforce::emit(table, "csv", path);
            std::cerr << "wrote " << path << "\n";
            return 0;
        }

        const std::string chosen_format = format.empty() ? cfg.output.format : format;
        const std::string chosen_path = out_path.empty() ? cfg.output.path : out_path;
        if (chosen_path.empty())
            std::cout << entforce::render_table(table, chosen_format);
        else
            entforce::emit(table, chosen_format, chosen_path);
        return 0;
    } catch (const entforce::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const entforce::IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 4;
    } catch (const entforce::IntegrationError& e) {
        std::cerr << "integration error: " << e.what() << "\n";
        return 3;
    } catch (const entforce::StiffnessError& e) {
        std::cerr << "integration error: " << e.what() << "\n";
        return 3;
    } catch (const entforce::ConvergenceError& e) {
        std::cerr << "convergence error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
