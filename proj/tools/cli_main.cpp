// Command-line front end: configuration-driven experiments over the coupled
// parabolic system, the Carleman ratio harness and source reconstruction.
//
// Exit codes: 0 success, 2 config error, 3 numeric anomaly, 4 unconverged.

#include <CLI11.hpp>

#include <iostream>
#include <string>

#include "carleman/config.hpp"
#include "carleman/errors.hpp"
#include "carleman/runner.hpp"

namespace {

int dispatch(const std::string& command, const std::string& config_path,
             const std::string& field_path, std::ostream& log) {
    using namespace carleman;
    const ExperimentConfig cfg = ExperimentConfig::load(config_path);
    if (command == "forward") return run_forward_cmd(cfg, log).exit_code();
    if (command == "observe") return run_observe_cmd(cfg, field_path, log).exit_code();
    if (command == "verify-l2") return run_verify_cmd(cfg, /*lq=*/false, log).exit_code();
    if (command == "verify-lq") return run_verify_cmd(cfg, /*lq=*/true, log).exit_code();
    if (command == "reconstruct") return run_reconstruct_cmd(cfg, log).exit_code();
    if (command == "check-hypotheses") {
        bool all_pass = false;
        run_check_cmd(cfg, log, &all_pass);
        return all_pass ? 0 : 2;
    }
    if (command == "sweep") {
        RunOutcome total;
        const RunOutcome a = run_verify_cmd(cfg, /*lq=*/false, log);
        const RunOutcome b = run_verify_cmd(cfg, /*lq=*/true, log);
        const RunOutcome c = run_reconstruct_cmd(cfg, log);
        total.anomalies = a.anomalies + b.anomalies + c.anomalies;
        total.unconverged = a.unconverged + b.unconverged + c.unconverged;
        return total.exit_code();
    }
    throw config_error("unknown command: " + command);
}

}  // namespace

int carleman_cli_main(int argc, const char* const* argv, std::ostream& log) {
    CLI::App app{"carleman: inverse-source laboratory for coupled parabolic systems"};
    app.require_subcommand(1);

    std::string config_path;
    std::string field_path;
    std::string command;
    for (const char* name :
         {"forward", "observe", "verify-l2", "verify-lq", "reconstruct", "sweep",
          "check-hypotheses"}) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("config", config_path, "experiment config file")->required();
        if (std::string(name) == "observe")
            sub->add_option("--field", field_path, "solution field file to observe")->required();
        sub->callback([&command, name]() { command = name; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            log << app.help();
            return 0;
        }
        log << "argument error: " << e.what() << "\n";
        return 2;
    }

    try {
        return dispatch(command, config_path, field_path, log);
    } catch (const carleman::config_error& e) {
        log << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

#ifndef CARLEMAN_CLI_NO_MAIN
int main(int argc, char** argv) { return carleman_cli_main(argc, argv, std::cout); }
#endif
