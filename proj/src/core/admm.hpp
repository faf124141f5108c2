#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <mutex>

#include "core/synthesis.hpp"

namespace dissent {

// Worker -> coordinator payload. Carries dissipativity tuples, gains, and the
// dual-adjusted projection targets only; dynamics never cross this boundary.
struct AgentMessage {
  int iteration = 0;
  int agent = 0;
  QsrTriple X, X_hat;
  GainTuple K_hat;
  QsrTriple target_X, target_X_hat;  // local + dual
  GainTuple target_K;
  double objective = 0.0;
  bool warning = false;
};

// Coordinator -> worker payload: the consensus slice relevant to one agent.
struct CoordinatorMessage {
  int iteration = 0;
  int agent = 0;
  QsrTriple Z, Z_hat;
  GainTuple Z_tilde;  // empty members when the gain channel is off
  bool stop = false;
};

std::string serialize(const AgentMessage& m);
std::string serialize(const CoordinatorMessage& m);
AgentMessage parse_agent_message(const std::string& bytes);
CoordinatorMessage parse_coordinator_message(const std::string& bytes);

// Eq.-14c-style ascent: T <- T + (local - consensus), all three channels.
AgentDuals dual_update(const AgentDuals& duals, const QsrTriple& x,
                       const QsrTriple& x_hat, const GainTuple& k_hat,
                       const QsrTriple& z, const QsrTriple& z_hat,
                       const GainTuple& z_tilde);

struct Residuals {
  std::vector<double> r_p;  // per agent
  double r_p_max = 0.0;
  double r_d = 0.0;
};

// Relative residuals with tuple norms taken as sums of component Frobenius
// norms; denominators guarded at 1e-12.
Residuals residuals(const std::vector<AgentMessage>& locals, const NetworkQsr& z,
                    const GainTuple& z_tilde, const NetworkQsr& z_prev,
                    const GainTuple& z_tilde_prev, bool gain_channel);

struct RunLogRow {
  int iter = 0;
  double r_p_max = 0.0;
  double r_d = 0.0;
  double ndt_max_eig = 0.0;
  double sum_objective = 0.0;
  std::vector<double> objectives;
  double elapsed_ms = 0.0;
};

struct RunLog {
  std::vector<RunLogRow> rows;
  std::string to_csv(int num_agents) const;
};

// Byte-level in-process transport; a socket transport can replace it without
// touching the iteration logic.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void to_coordinator(std::string bytes) = 0;
  virtual std::string from_agents_blocking() = 0;
  virtual void to_agent(int agent, std::string bytes) = 0;
  virtual std::string from_coordinator_blocking(int agent) = 0;
};

class InProcTransport : public Transport {
 public:
  explicit InProcTransport(int num_agents, bool capture = false);
  void to_coordinator(std::string bytes) override;
  std::string from_agents_blocking() override;
  void to_agent(int agent, std::string bytes) override;
  std::string from_coordinator_blocking(int agent) override;
  std::vector<std::string> captured() const;

 private:
  struct Queue {
    std::deque<std::string> items;
    std::mutex mu;
    std::condition_variable cv;
    void push(std::string s);
    std::string pop();
  };
  Queue up_;
  std::vector<std::unique_ptr<Queue>> down_;
  bool capture_;
  mutable std::mutex cap_mu_;
  std::vector<std::string> captured_;
};

struct AdmmConfig {
  double rho = 100.0;
  double eps_p = 1e-3;
  double eps_d = 1e-3;
  int max_iters = 1000;
  double margin = 1e-6;
  std::uint64_t seed = 0;
  bool gain_consensus = false;
  ProjectionMethod projection = ProjectionMethod::Auto;
  bool capture_messages = false;
};

struct SynthesisRun {
  bool converged = false;
  bool aborted = false;
  int failing_agent = -1;
  std::string message;
  int iterations = 0;
  std::vector<MatrixXd> gains;
  std::vector<double> initial_objectives;
  std::vector<double> final_objectives;
  NetworkQsr final_consensus;
  NdtCheck final_ndt{false, 0.0, 0.0};
  RunLog log;
  std::vector<std::string> captured_messages;
};

// Distributed synthesis: parallel x-updates on agent workers, consensus
// projection at the coordinator, agent-side dual ascent, barrier per
// iteration. Nonconvergence at max_iters returns the best-so-far gains with
// the converged flag cleared.
SynthesisRun run_admm(const std::vector<AgentProblem>& agents,
                      const std::vector<LocalIterate>& initial,
                      const AdmmConfig& cfg);

// Convenience: initialize the iterates from per-agent gains first.
SynthesisRun run_admm_from_gains(const std::vector<AgentProblem>& agents,
                                 const std::vector<MatrixXd>& gains,
                                 const AdmmConfig& cfg);

}  // namespace dissent
