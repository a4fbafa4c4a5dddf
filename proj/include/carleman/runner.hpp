#pragma once

#include <iosfwd>
#include <string>

#include "carleman/config.hpp"

namespace carleman {

// Exit-status bookkeeping shared by the CLI commands:
// 0 success, 2 config error (raised as config_error), 3 numeric anomaly,
// 4 unconverged cells.
struct RunOutcome {
    int anomalies = 0;
    int unconverged = 0;

    int exit_code() const { return anomalies > 0 ? 3 : (unconverged > 0 ? 4 : 0); }
};

RunOutcome run_forward_cmd(const ExperimentConfig& cfg, std::ostream& log);
RunOutcome run_observe_cmd(const ExperimentConfig& cfg, const std::string& field_path,
                           std::ostream& log);
RunOutcome run_verify_cmd(const ExperimentConfig& cfg, bool lq, std::ostream& log);
RunOutcome run_reconstruct_cmd(const ExperimentConfig& cfg, std::ostream& log);
RunOutcome run_check_cmd(const ExperimentConfig& cfg, std::ostream& log, bool* all_pass);

}  // namespace carleman
