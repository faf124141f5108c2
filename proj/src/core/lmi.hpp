#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/linalg.hpp"

namespace dissent {

enum class VarStructure { Symmetric, Full, DiagScalar, Fixed };

struct MatrixVar {
  int id = -1;
  int rows = 0, cols = 0;
  VarStructure structure = VarStructure::Full;
  MatrixXd fixed_value;  // only for Fixed
  std::string name;

  int param_count() const;
};

// Affine matrix-valued expression: constant + sum of L * V * R or L * V' * R
// terms, each referencing one declared variable.
class AffineMatExpr {
 public:
  struct Term {
    int var_id;
    MatrixXd left, right;
    bool transposed = false;
  };

  AffineMatExpr() = default;
  explicit AffineMatExpr(MatrixXd constant) : rows_(static_cast<int>(constant.rows())),
                                              cols_(static_cast<int>(constant.cols())),
                                              constant_(std::move(constant)) {}
  static AffineMatExpr zero(int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const MatrixXd& constant() const { return constant_; }
  const std::vector<Term>& terms() const { return terms_; }

  AffineMatExpr transpose() const;
  AffineMatExpr operator-() const;
  AffineMatExpr& operator+=(const AffineMatExpr& other);
  AffineMatExpr& operator-=(const AffineMatExpr& other);

  friend AffineMatExpr operator+(AffineMatExpr a, const AffineMatExpr& b) { return a += b; }
  friend AffineMatExpr operator-(AffineMatExpr a, const AffineMatExpr& b) { return a -= b; }
  AffineMatExpr scaled(double s) const;
  // left * this * right with constant factors (pass empty for identity).
  AffineMatExpr pre_post(const MatrixXd& left, const MatrixXd& right) const;

  void add_term(int var_id, MatrixXd left, MatrixXd right, bool transposed = false);

 private:
  int rows_ = 0, cols_ = 0;
  MatrixXd constant_;  // may stay empty meaning zero
  std::vector<Term> terms_;

  void ensure_constant();
  friend class ConicProgram;
};

// He(E) = E + E'.
AffineMatExpr he(const AffineMatExpr& e);

// Embeds the given expressions as diagonal blocks of one larger expression.
AffineMatExpr block_diag_expr(const std::vector<AffineMatExpr>& blocks);

// Numeric symmetric block matrix; assembles to a dense symmetric matrix.
class SymBlockMatrix {
 public:
  explicit SymBlockMatrix(std::vector<int> dims);

  // Sets block (i, j) and mirrors (j, i) = m'. Diagonal blocks must be
  // symmetric within 1e-12.
  void set(int i, int j, const MatrixXd& m);
  const MatrixXd& block(int i, int j) const;
  const std::vector<int>& dims() const { return dims_; }
  int order() const { return total_; }
  MatrixXd assemble() const;

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  int total_ = 0;
  std::vector<std::vector<MatrixXd>> blocks_;
};

// Symmetric-by-construction block grid of affine expressions: assign the
// lower triangle, the mirror transpose is implied.
class BlockExpr {
 public:
  explicit BlockExpr(std::vector<int> dims);
  void set(int i, int j, const AffineMatExpr& e);
  AffineMatExpr assemble() const;
  int order() const { return total_; }

 private:
  std::vector<int> dims_;
  std::vector<int> offsets_;
  int total_ = 0;
  std::vector<std::vector<std::optional<AffineMatExpr>>> blocks_;
};

enum class SolveStatus { Optimal, Infeasible, NumericalFailure, IterationLimit };

struct SolveReport {
  SolveStatus status = SolveStatus::NumericalFailure;
  std::map<int, MatrixXd> values;
  VectorXd raw_x;  // stacked parameter vector (set by the solver backend)
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  int iterations = 0;
  std::string message;

  bool ok() const { return status == SolveStatus::Optimal; }
  const MatrixXd& value(int var_id) const;
};

struct ConeDims {
  int zero = 0;
  int nonneg = 0;
  std::vector<int> soc;
  std::vector<int> psd;  // matrix orders; slack stored as svec

  int total() const;
};

// Solver-ready form: minimize c'x subject to Gx + s = h, s in K, where the
// cone K stacks [zero; nonneg; soc...; psd...].
struct LoweredConic {
  VectorXd c;
  MatrixXd G;
  VectorXd h;
  ConeDims dims;
  double obj_constant = 0.0;

  struct Slot {
    int var_id;
    VarStructure structure;
    int rows, cols;
    int offset;  // into x
    int count;
  };
  std::vector<Slot> slots;
};

struct SolverOptions {
  double tol = 1e-8;
  int max_iterations = 120;
  double strictness_margin = 1e-6;
  bool verbose = false;
};

// Conic solver boundary. The bundled implementation is HsdeSolver; an
// alternative can be swapped in if it declares the needed cones.
class ConeSolver {
 public:
  struct Caps {
    bool nonneg = true;
    bool soc = false;
    bool psd = false;
  };
  virtual ~ConeSolver() = default;
  virtual Caps caps() const = 0;
  virtual SolveReport solve_lowered(const LoweredConic& p, const SolverOptions& o) const = 0;
};

const ConeSolver& bundled_solver();

// Conic program over matrix variables with PSD and scalar affine constraints
// and an affine-plus-convex-quadratic objective.
class ConicProgram {
 public:
  int add_var(int rows, int cols, VarStructure st, std::string name = {});
  int add_fixed(const MatrixXd& value, std::string name = {});
  const MatrixVar& var(int id) const { return vars_.at(id); }

  // Expression of the variable itself (optionally pre/post multiplied).
  AffineMatExpr expr(int var_id) const;
  AffineMatExpr expr(int var_id, const MatrixXd& left, const MatrixXd& right,
                     bool transposed = false) const;
  // coeff * v for a scalar (1x1) variable v; coeff may be any shape.
  AffineMatExpr scaled_var(int var_id, const MatrixXd& coeff) const;

  // e >= 0 (PSD); strict constraints are lowered with the margin shift.
  void add_psd(const AffineMatExpr& e, bool strict = false);
  // e <= 0 as PSD on -e.
  void add_nsd(const AffineMatExpr& e, bool strict = false);

  enum class Rel { Eq, Ge, Le };
  // Scalar (1x1) affine constraint e rel 0.
  void add_scalar(const AffineMatExpr& e, Rel rel);

  void add_linear_objective(const AffineMatExpr& e);          // 1x1
  void add_quad_objective(const AffineMatExpr& e, double w);  // w * ||e||_F^2

  LoweredConic lower_to_conic(double strictness_margin = 1e-6) const;

  SolveReport solve(const SolverOptions& opts = {}) const;
  SolveReport solve(const ConeSolver& solver, const SolverOptions& opts) const;

  // Evaluates an expression at a concrete assignment of variable values.
  MatrixXd eval(const AffineMatExpr& e, const std::map<int, MatrixXd>& vals) const;

  int num_vars() const { return static_cast<int>(vars_.size()); }
  // read-only view of the declared PSD constraints (expr >= 0 convention)
  size_t num_psd_constraints() const { return psd_.size(); }
  const AffineMatExpr& psd_expr(size_t i) const { return psd_.at(i).expr; }
  bool psd_strict(size_t i) const { return psd_.at(i).strict; }

 private:
  struct PsdC {
    AffineMatExpr expr;
    bool strict;
  };
  struct LinC {
    AffineMatExpr expr;
    Rel rel;
  };
  struct QuadObj {
    AffineMatExpr expr;
    double weight;
  };

  std::vector<MatrixVar> vars_;
  std::vector<PsdC> psd_;
  std::vector<LinC> linear_;
  AffineMatExpr lin_obj_;
  std::vector<QuadObj> quad_obj_;

  void check_expr(const AffineMatExpr& e, const std::string& where) const;
  // dense linearization of a (r*c)-vectorized expression; returns [lin | const]
  void vectorize(const AffineMatExpr& e, MatrixXd& lin, VectorXd& cst,
                 const std::vector<int>& offsets, int num_params) const;
};

// Effective solver tolerance: DISSENT_SOLVER_TOL env var wins over the given
// default.
double effective_solver_tol(double fallback = 1e-8);

}  // namespace dissent
