#pragma once

#include "core/topology.hpp"

namespace dissent {

enum class ObjectiveKind { H2, Hinf };

// Gains the local objective depends on: one matrix per member agent. With
// block-diagonal H_tilde / H_hat couplings this is just the agent's own gain.
struct GainTuple {
  std::vector<int> members;      // agent indices, ascending, owner included
  std::vector<MatrixXd> gains;   // gains[k] belongs to members[k]

  static GainTuple single(int agent, MatrixXd k);
  const MatrixXd& of(int agent) const;
  MatrixXd& of(int agent);
  bool has(int agent) const;
  double dist2(const GainTuple& o) const;
  double norm() const;
};

struct LocalClosedLoop {
  MatrixXd A;  // A_i - sum_j B_i (Ht)_ij K_j (Hh)_ji
  MatrixXd B;  // B_i (Ht)_i, full disturbance width
  MatrixXd C;  // [I; -K_i (Hh)_ii]
};

// Gains not listed in the tuple must not couple into agent i's loop.
LocalClosedLoop closed_loop(const StateSpace& agent, const GainTuple& gains,
                            const Topology& topo, int i);

// Reduced disturbance columns: the nonzero block columns of B_i (Ht)_i.
MatrixXd reduced_b(const StateSpace& agent, const Topology& topo, int i);

struct LocalIterate {
  QsrTriple X;      // agent dissipativity triple
  QsrTriple X_hat;  // controller dissipativity triple
  GainTuple K_hat;
  MatrixXd P;       // Lyapunov matrix of the performance constraint
  MatrixXd P_g;     // storage matrix of the open-loop dissipativity constraint
  MatrixXd W;       // H2 slack (empty for Hinf agents)
  double gamma = 0.0;
  bool warning = false;
};

double objective_value(const LocalIterate& it, ObjectiveKind kind);

// One agent's private problem data plus solve configuration.
struct AgentProblem {
  int index = 0;
  UncertainPlant plant;
  ObjectiveKind objective = ObjectiveKind::H2;
  Topology topo;
  bool enable_local_stability = true;  // adds the S_i constraint
  bool gain_consensus = false;         // Z-tilde channel
  bool freeze_gains = false;           // dissipativity-only x-updates
  double margin = 1e-6;
  int ico_max_iters = 50;
  double ico_eps = 1e-3;
  SolverOptions solver;

  StateSpace nominal() const { return plant.nominal; }
};

// ---- membership evaluations (numeric) -------------------------------------

// -Rhat + He(Shat' K) - K' Qhat K
MatrixXd set_K_lhs(const MatrixXd& k, const QsrTriple& xhat);
// [[Q + Rhat, S + Shat'], [S' + Shat, R + Qhat]]
MatrixXd set_S_lhs(const QsrTriple& x, const QsrTriple& xhat);

struct IterateMargins {
  double g = 0.0;      // worst vertex KYP max eigenvalue
  double k = 0.0;      // controller KYP max eigenvalue
  double j_first = 0.0;
  double j_second = 0.0;
  double s = 0.0;      // local stability (only if enabled)
  double p_min = 0.0;  // min eig of P
  bool ok(double tol = 1e-6) const;
};
IterateMargins verify_iterate(const AgentProblem& ap, const LocalIterate& it);

// ---- x-update --------------------------------------------------------------

struct ConsensusView {
  QsrTriple Z, Z_hat;
  GainTuple Z_tilde;  // empty members when the gain channel is off
};

struct AgentDuals {
  QsrTriple T, T_hat;
  GainTuple T_tilde;
};

struct XUpdateResult {
  LocalIterate iterate;
  double objective = 0.0;
  int inner_iterations = 0;
  bool solver_warning = false;
};

// Inner convex-overbounding loop around the base point: tightened performance
// and controller sets, affine open-loop set, optional local stability, plus
// the scaled proximity penalty.
XUpdateResult x_update(const AgentProblem& ap, const LocalIterate& base,
                       const ConsensusView& consensus, const AgentDuals& duals,
                       double rho);

// Feasible iterate at a fixed gain (objective-optimal P, W or gamma, plus
// open-loop and controller triples). Used for initialization.
struct InitResult {
  bool ok = false;
  LocalIterate iterate;
  std::string message;
};
InitResult init_local(const AgentProblem& ap, const MatrixXd& gain);

// Max eigenvalue of each tightened constraint family evaluated at the zero
// perturbation (with W, gamma, P_g held at the base). All <= 0 iff the zero
// step is admissible, which must hold at any feasible base.
struct ZeroStepCheck {
  double k = 0.0;
  double j_first = 0.0;
  double j_second = 0.0;
  double g = 0.0;
  bool ok(double tol = 1e-9) const {
    return k <= tol && j_first <= tol && j_second <= tol && g <= tol;
  }
};
ZeroStepCheck tightened_zero_step(const AgentProblem& ap, const LocalIterate& base);

// ---- joint certification ----------------------------------------------------

struct NetworkCertifyOutcome {
  bool ok = false;
  int failing_agent = -1;  // local infeasibility culprit, when identifiable
  double ndt_max_eig = 0.0;
  std::vector<LocalIterate> iterates;
  std::string message;
};

// Fixed-gain certification of the whole network: free per-agent and
// per-controller triples, all local sets, and the network stability LMI in
// one convex feasibility problem.
NetworkCertifyOutcome network_certify(const std::vector<AgentProblem>& agents,
                                      const std::vector<MatrixXd>& gains,
                                      double margin);

// ---- centralized baselines -------------------------------------------------

struct CentralizedOptions {
  bool with_ndt = true;
  double margin = 1e-6;
  double eps = 1e-3;
  int max_outer = 200;
  SolverOptions solver;
};

struct CentralizedOutcome {
  bool ok = false;
  std::vector<LocalIterate> iterates;
  std::vector<double> objectives;
  int iterations = 0;
  std::string message;
};

// Joint overbounding descent on all agents at once; the network stability
// constraint couples the dissipativity variables directly (no consensus
// splitting). with_ndt = false drops the coupling entirely.
CentralizedOutcome centralized_ico(const std::vector<AgentProblem>& agents,
                                   const std::vector<MatrixXd>& init_gains,
                                   const CentralizedOptions& opts);

}  // namespace dissent
