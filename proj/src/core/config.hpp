#pragma once

#include <string>

#include "core/admm.hpp"

namespace dissent {

// Validation failure carrying the exact field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

struct AgentConfig {
  std::string name;
  ObjectiveKind objective = ObjectiveKind::H2;
  MatrixXd A, B;
  std::vector<UncertainParam> params;
  std::vector<UncertainEntry> entries;
};

enum class SynthesisMode { Distributed, Centralized, CentralizedNoNdt };

struct AdmmSection {
  double rho = 100.0;
  double eps_p = 1e-3;
  double eps_d = 1e-3;
  int max_iters = 1000;
  double margin = 1e-6;
  bool enable_local_stability = true;
  bool enable_gain_consensus = false;
  ProjectionMethod projection = ProjectionMethod::Auto;
  SynthesisMode mode = SynthesisMode::Distributed;
  int ico_max_iters = 50;
  double ico_eps = 1e-3;
};

struct InitSection {
  bool use_lqr = true;
  MatrixXd Q_lqr, R_lqr;           // shared across agents when use_lqr
  std::vector<MatrixXd> gains;     // explicit initial gains otherwise
};

struct ValidationSection {
  double t_final = 30.0;
  double dt = 1e-3;
  double threshold = 1e-2;
  int samples = 100;
  double x0_range = 0.5;  // initial states uniform in +/- range
};

struct ProblemConfig {
  std::vector<std::string> notes;
  std::uint64_t seed = 0;
  std::vector<AgentConfig> agents;
  MatrixXd H, H_tilde, H_hat;
  AdmmSection admm;
  InitSection init;
  ValidationSection validation;
};

// JSON text <-> config; parse validates against all module invariants and
// throws ConfigError naming the offending field.
ProblemConfig parse_config(const std::string& text);
std::string emit_config(const ProblemConfig& cfg);
ProblemConfig load_config_file(const std::string& path);

// Bundled example generators.
ProblemConfig example_config(const std::string& name);  // "uav7" | "chain3"

// Derived runtime objects.
Topology build_topology(const ProblemConfig& cfg);
std::vector<AgentProblem> build_agents(const ProblemConfig& cfg);
std::vector<MatrixXd> initial_gains(const ProblemConfig& cfg);

// gains.csv: header agent,row,col,value
std::string gains_to_csv(const std::vector<MatrixXd>& gains);
std::vector<MatrixXd> gains_from_csv(const std::string& text);

}  // namespace dissent
