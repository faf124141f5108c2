#pragma once

#include <variant>

#include "core/lmi.hpp"
#include "core/lti.hpp"

namespace dissent {

// Supply-rate parameters of one operator with input dim m and output dim l:
// s(u, y) = y'Qy + 2 y'Su + u'Ru.
struct QsrTriple {
  MatrixXd Q;  // l x l symmetric
  MatrixXd S;  // l x m
  MatrixXd R;  // m x m symmetric

  QsrTriple() = default;
  QsrTriple(MatrixXd q, MatrixXd s, MatrixXd r);
  static QsrTriple zero(int l, int m);

  int l() const { return static_cast<int>(Q.rows()); }
  int m() const { return static_cast<int>(R.rows()); }
  QsrTriple operator+(const QsrTriple& o) const;
  QsrTriple operator-(const QsrTriple& o) const;
  QsrTriple scaled(double a) const;
  double norm() const;  // tuple norm: sum of component Frobenius norms
  double dist2(const QsrTriple& o) const;  // sum of squared component distances
};

struct DissipativityCertificate {
  QsrTriple qsr;
  MatrixXd P;     // storage-function matrix, positive definite
  double margin;  // -lambda_max of the certificate matrix
};

// Storage-function inequality left-hand side for an LTI realization:
// [[A'P + PA - C'QC,  PB - C'S - C'QD],
//  [     *,          -R - S'D - D'S - D'QD]]   (<= 0 certifies the triple)
SymBlockMatrix kyp_matrix(const StateSpace& sys, const MatrixXd& p,
                          const QsrTriple& qsr);

// Affine expression of the same matrix over declared program variables.
// Any of p/q/s/r may be variable ids or fixed constants already added to the
// program.
AffineMatExpr kyp_expr(ConicProgram& prog, const StateSpace& sys, int p_var,
                       int q_var, int s_var, int r_var);

struct CertifyOptions {
  double margin = 1e-6;      // required definiteness of P
  double kappa = 1e3;        // bound on free parameters
  SolverOptions solver;
};

enum class CertifyMode { FixedQsr, FreeQsr, ScaledKnown };

struct CertifyOutcome {
  enum class Status { Certified, Infeasible, NumericalFailure } status;
  DissipativityCertificate certificate;  // valid when Certified
  double lambda = 1.0;                   // ScaledKnown multiplier
  std::string message;

  bool ok() const { return status == Status::Certified; }
};

// Searches for a storage matrix certifying the triple (FixedQsr), or jointly
// for (P, Q, S, R) under a normalization that excludes the all-zero triple
// (FreeQsr), or for P and a scalar lambda >= 0 multiplying a known triple
// (ScaledKnown). Infeasibility is a typed result.
CertifyOutcome certify(const StateSpace& sys, CertifyMode mode, const QsrTriple& qsr,
                       const CertifyOptions& opts = {});

struct SupplyCheckResult {
  bool holds = true;
  double violation_time = 0.0;
  double deficit = 0.0;        // most negative running integral
  double final_integral = 0.0;
  bool diverged = false;
};

// Integrates the supply rate along the simulated trajectory from x0 = 0 and
// checks the running integral stays above -1e-6 (beta = 0 at zero state).
SupplyCheckResult empirical_supply_check(const StateSpace& sys, const QsrTriple& qsr,
                                         const Signal& input, double horizon,
                                         double dt = 1e-3, double threshold = -1e-6);

}  // namespace dissent
