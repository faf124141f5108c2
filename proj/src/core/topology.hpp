#pragma once

#include "core/dissipativity.hpp"

namespace dissent {

// Interconnection data for N agents with input dims m_i and output dims l_i.
// H maps agent outputs to agent inputs (no self-loops), H_tilde maps
// controller outputs / exogenous inputs to agent inputs, H_hat maps agent
// outputs to controller inputs.
struct Topology {
  std::vector<int> input_dims;   // m_i
  std::vector<int> output_dims;  // l_i
  MatrixXd H;        // (sum m) x (sum l), (H)_ii = 0
  MatrixXd H_tilde;  // (sum m) x (sum m)
  MatrixXd H_hat;    // (sum l) x (sum l)

  Topology() = default;
  Topology(std::vector<int> in_dims, std::vector<int> out_dims, MatrixXd h,
           MatrixXd h_tilde, MatrixXd h_hat);

  int agents() const { return static_cast<int>(input_dims.size()); }
  int total_inputs() const;
  int total_outputs() const;
  int input_offset(int i) const;
  int output_offset(int i) const;

  // block (i,j) views
  MatrixXd h_block(int i, int j) const;        // m_i x l_j
  MatrixXd h_tilde_block(int i, int j) const;  // m_i x m_j
  MatrixXd h_hat_block(int i, int j) const;    // l_i x l_j
  MatrixXd h_tilde_row(int i) const;           // m_i x (sum m)

  GlobalTopologyView global_view() const { return {H, H_tilde, H_hat}; }
};

// Raw interconnection of arbitrary dissipative operators: u = e + H y with
// zero diagonal blocks. The augmented agent/controller network is one
// instance of this.
struct OperatorNetwork {
  std::vector<int> in_dims;
  std::vector<int> out_dims;
  MatrixXd H;  // (sum in) x (sum out)

  OperatorNetwork() = default;
  OperatorNetwork(std::vector<int> in, std::vector<int> out, MatrixXd h);

  int ops() const { return static_cast<int>(in_dims.size()); }
  int in_offset(int k) const;
  int out_offset(int k) const;
  MatrixXd h_block(int i, int j) const;
};

// H_bar = [[H, H_tilde], [H_hat, 0]]; rows follow network inputs (u, u_hat),
// columns follow network outputs (y, y_hat).
struct AugmentedInterconnection {
  Topology topo;
  MatrixXd H_bar;

  int out_dim() const { return static_cast<int>(H_bar.cols()); }
  // the 2N-operator view: agents first, then controllers
  OperatorNetwork network() const;
};

AugmentedInterconnection assemble_hbar(const Topology& topo);

struct NetworkQsr {
  std::vector<QsrTriple> agent_triples;       // (Q_i, S_i, R_i), l_i x m_i shapes
  std::vector<QsrTriple> controller_triples;  // (Qhat_i, Shat_i, Rhat_i), m_i x l_i

  NetworkQsr() = default;
  static NetworkQsr zero(const Topology& topo);
  const QsrTriple& op(int k) const;
  QsrTriple& op(int k);
  int ops() const {
    return static_cast<int>(agent_triples.size() + controller_triples.size());
  }
  std::vector<QsrTriple> flat() const;
  double dist2(const NetworkQsr& o) const;
  double norm() const;
};

// Qbar + Sbar H + H' Sbar' + H' Rbar H over the stacked output space.
MatrixXd ndt_matrix_dense(const std::vector<QsrTriple>& triples,
                          const OperatorNetwork& net);
SymBlockMatrix ndt_matrix(const std::vector<QsrTriple>& triples,
                          const OperatorNetwork& net);
// Augmented form: triples ordered agents first, then controllers.
MatrixXd ndt_matrix_dense(const NetworkQsr& net, const AugmentedInterconnection& aug);
SymBlockMatrix ndt_matrix(const NetworkQsr& net, const AugmentedInterconnection& aug);

struct NdtCheck {
  bool stable;
  double margin;   // -lambda_max when stable
  double max_eig;  // extreme eigenvalue either way
};
NdtCheck ndt_check(const std::vector<QsrTriple>& triples, const OperatorNetwork& net,
                   double margin);
NdtCheck ndt_check(const NetworkQsr& net, const AugmentedInterconnection& aug,
                   double margin);

// Variable handles of one triple inside a ConicProgram.
struct TripleVars {
  int q = -1, s = -1, r = -1;
};
TripleVars add_triple_vars(ConicProgram& prog, int l, int m, const std::string& tag);
QsrTriple triple_value(const SolveReport& rep, const TripleVars& tv);

// Affine expression of the NDT matrix over per-operator triple variables.
AffineMatExpr ndt_expr(ConicProgram& prog, const OperatorNetwork& net,
                       const std::vector<TripleVars>& triple_vars);

enum class ProjectionMethod { Conic, Dual, Auto };

struct ProjectionResult {
  enum class Status { Ok, Infeasible, NumericalFailure } status;
  NetworkQsr z;
  double ndt_max_eig = 0.0;
  int iterations = 0;
  std::string message;

  bool ok() const { return status == Status::Ok; }
};

struct ProjectorOptions {
  double margin = 1e-6;
  ProjectionMethod method = ProjectionMethod::Auto;
  SolverOptions solver;
  int dual_max_iterations = 50000;
  double dual_tol = 1e-10;
};

// Minimizer of sum_i ||target_i - z_i||_F^2 over the NDT-feasible set
// { (Z, Zhat) : ndt_matrix <= -margin I }. Keeps warm-start state between
// calls; one instance per coordinator.
class ConsensusProjector {
 public:
  ConsensusProjector(AugmentedInterconnection aug, ProjectorOptions opts = {});

  ProjectionResult project(const NetworkQsr& targets);
  const AugmentedInterconnection& aug() const { return aug_; }

 private:
  AugmentedInterconnection aug_;
  OperatorNetwork net_;
  ProjectorOptions opts_;
  MatrixXd lambda_warm_;
  double lipschitz_ = 0.0;
  bool have_anchor_ = false;
  NetworkQsr anchor_;
  bool first_call_done_ = false;

  ProjectionResult project_conic(const NetworkQsr& targets, double margin);
  ProjectionResult project_dual(const NetworkQsr& targets);
  NetworkQsr adjoint(const MatrixXd& lam) const;
};

}  // namespace dissent
