#pragma once

#include "core/config.hpp"

namespace dissent {

// Dispatches on admm.mode; centralized runs are folded into the same result
// shape (log has one row per outer overbounding pass).
SynthesisRun synthesize(const ProblemConfig& cfg);

struct CertifyReport {
  bool certified = false;
  int failing_agent = -1;
  double ndt_max_eig = 0.0;
  std::string message;
};
CertifyReport certify_gains(const ProblemConfig& cfg,
                            const std::vector<MatrixXd>& gains);

struct ValidateReport {
  bool poles_ok = false;
  bool response_ok = false;
  bool diverged = false;
  double divergence_time = 0.0;
  double worst_pole_re = 0.0;
  double terminal_deviation = 0.0;
  bool ok() const { return poles_ok && response_ok && !diverged; }
};
// Writes response.csv, poles.csv and plot scripts into out_dir when nonempty.
ValidateReport validate_gains(const ProblemConfig& cfg,
                              const std::vector<MatrixXd>& gains,
                              const std::string& out_dir);

// Output writers for cmd_synthesize artifacts.
void write_synthesis_outputs(const ProblemConfig& cfg, const SynthesisRun& run,
                             const std::string& out_dir);

std::string summary_text(const ProblemConfig& cfg, const SynthesisRun& run);

// Exit-code contract:
//   0 success (including a nonconverged synthesis, which is a result)
//   1 certification / validation failure
//   2 invalid configuration or arguments
//   3 infeasible initialization
int run_cmd_synthesize(const std::string& config_path, const std::string& out_dir,
                       const std::vector<std::pair<std::string, std::string>>& overrides);
int run_cmd_certify(const std::string& config_path, const std::string& gains_path,
                    const std::vector<std::pair<std::string, std::string>>& overrides);
int run_cmd_validate(const std::string& config_path, const std::string& gains_path,
                     const std::string& out_dir,
                     const std::vector<std::pair<std::string, std::string>>& overrides);
int run_cmd_example(const std::string& name, const std::string& out_path);

// --seed/--rho/--max-iters style overrides, applied after parsing.
void apply_override(ProblemConfig& cfg, const std::string& key, const std::string& value);

}  // namespace dissent
