#include "core/dissipativity.hpp"

#include <cmath>

namespace dissent {

QsrTriple::QsrTriple(MatrixXd q, MatrixXd s, MatrixXd r)
    : Q(std::move(q)), S(std::move(s)), R(std::move(r)) {
  if (!is_symmetric(Q, 1e-12)) dim_error("QsrTriple", "Q must be symmetric");
  if (!is_symmetric(R, 1e-12)) dim_error("QsrTriple", "R must be symmetric");
  if (S.rows() != Q.rows() || S.cols() != R.rows())
    dim_error("QsrTriple", "S must be l x m");
}

QsrTriple QsrTriple::zero(int l, int m) {
  return QsrTriple(MatrixXd::Zero(l, l), MatrixXd::Zero(l, m), MatrixXd::Zero(m, m));
}

QsrTriple QsrTriple::operator+(const QsrTriple& o) const {
  return QsrTriple(Q + o.Q, S + o.S, R + o.R);
}

QsrTriple QsrTriple::operator-(const QsrTriple& o) const {
  return QsrTriple(Q - o.Q, S - o.S, R - o.R);
}

QsrTriple QsrTriple::scaled(double a) const { return QsrTriple(a * Q, a * S, a * R); }

double QsrTriple::norm() const { return Q.norm() + S.norm() + R.norm(); }

double QsrTriple::dist2(const QsrTriple& o) const {
  return (Q - o.Q).squaredNorm() + (S - o.S).squaredNorm() + (R - o.R).squaredNorm();
}

SymBlockMatrix kyp_matrix(const StateSpace& sys, const MatrixXd& p,
                          const QsrTriple& qsr) {
  const int n = sys.nx(), m = sys.nu(), l = sys.ny();
  if (p.rows() != n || p.cols() != n) dim_error("kyp_matrix", "P must be n x n");
  if (qsr.l() != l) dim_error("kyp_matrix", "Q block does not match output dim");
  if (qsr.m() != m) dim_error("kyp_matrix", "R block does not match input dim");
  SymBlockMatrix out({n, m});
  out.set(0, 0, symmetrize(sys.A.transpose() * p + p * sys.A -
                           sys.C.transpose() * qsr.Q * sys.C));
  out.set(0, 1, p * sys.B - sys.C.transpose() * qsr.S -
                    sys.C.transpose() * qsr.Q * sys.D);
  out.set(1, 1, symmetrize(-qsr.R - sys.D.transpose() * qsr.S -
                           qsr.S.transpose() * sys.D -
                           sys.D.transpose() * qsr.Q * sys.D));
  return out;
}

AffineMatExpr kyp_expr(ConicProgram& prog, const StateSpace& sys, int p_var,
                       int q_var, int s_var, int r_var) {
  const int n = sys.nx(), m = sys.nu();
  const MatrixXd ct = sys.C.transpose();
  BlockExpr be({n, m});
  // A'P + PA - C'QC
  AffineMatExpr b00 = prog.expr(p_var, sys.A.transpose(), MatrixXd()) +
                      prog.expr(p_var, MatrixXd(), sys.A) -
                      prog.expr(q_var, ct, sys.C);
  be.set(0, 0, b00);
  // (PB - C'S - C'QD)' placed as the (1,0) block
  AffineMatExpr b01 = prog.expr(p_var, MatrixXd(), sys.B) - prog.expr(s_var, ct, MatrixXd()) -
                      prog.expr(q_var, ct, sys.D);
  be.set(1, 0, b01.transpose());
  // -R - S'D - D'S - D'QD
  AffineMatExpr b11 = -prog.expr(r_var) -
                      prog.expr(s_var, MatrixXd(), sys.D, true) -
                      prog.expr(s_var, sys.D.transpose(), MatrixXd()) -
                      prog.expr(q_var, sys.D.transpose(), sys.D);
  be.set(1, 1, b11);
  return be.assemble();
}

namespace {

AffineMatExpr trace_of(ConicProgram& prog, int var) {
  const auto& v = prog.var(var);
  AffineMatExpr out = AffineMatExpr::zero(1, 1);
  const MatrixXd id = MatrixXd::Identity(v.rows, v.rows);
  for (int i = 0; i < v.rows; ++i)
    out += prog.expr(var, id.row(i), id.col(i));
  return out;
}

}  // namespace

CertifyOutcome certify(const StateSpace& sys, CertifyMode mode, const QsrTriple& qsr,
                       const CertifyOptions& opts) {
  const int n = sys.nx(), m = sys.nu(), l = sys.ny();
  CertifyOutcome out{CertifyOutcome::Status::NumericalFailure, {}, 1.0, ""};

  ConicProgram prog;
  const int p = prog.add_var(n, n, VarStructure::Symmetric, "P");
  int qv, sv, rv;
  int lam = -1;
  switch (mode) {
    case CertifyMode::FixedQsr:
      qv = prog.add_fixed(qsr.Q, "Q");
      sv = prog.add_fixed(qsr.S, "S");
      rv = prog.add_fixed(qsr.R, "R");
      break;
    case CertifyMode::FreeQsr:
      qv = prog.add_var(l, l, VarStructure::Symmetric, "Q");
      sv = prog.add_var(l, m, VarStructure::Full, "S");
      rv = prog.add_var(m, m, VarStructure::Symmetric, "R");
      break;
    case CertifyMode::ScaledKnown: {
      lam = prog.add_var(1, 1, VarStructure::Full, "lambda");
      // lambda-scaled triple enters each KYP block linearly
      qv = sv = rv = -1;
      break;
    }
  }

  // margin variable: kyp <= -t I, maximize t; t < 0 at the optimum means the
  // triple is not certifiable. Always strictly feasible in (P, t), so
  // infeasibility never has to come from a solver certificate.
  const int t = prog.add_var(1, 1, VarStructure::Full, "t");

  AffineMatExpr kyp;
  if (mode == CertifyMode::ScaledKnown) {
    const MatrixXd ct = sys.C.transpose();
    BlockExpr be({n, m});
    be.set(0, 0, prog.expr(p, sys.A.transpose(), MatrixXd()) +
                     prog.expr(p, MatrixXd(), sys.A) -
                     prog.scaled_var(lam, ct * qsr.Q * sys.C));
    be.set(1, 0, (prog.expr(p, MatrixXd(), sys.B) -
                  prog.scaled_var(lam, ct * qsr.S + ct * qsr.Q * sys.D))
                     .transpose());
    be.set(1, 1, prog.scaled_var(lam, symmetrize(-qsr.R - sys.D.transpose() * qsr.S -
                                                 qsr.S.transpose() * sys.D -
                                                 sys.D.transpose() * qsr.Q * sys.D)));
    kyp = be.assemble();
    prog.add_scalar(prog.expr(lam), ConicProgram::Rel::Ge);
    prog.add_scalar(prog.expr(lam) - AffineMatExpr{opts.kappa * MatrixXd::Ones(1, 1)},
                    ConicProgram::Rel::Le);
  } else {
    kyp = kyp_expr(prog, sys, p, qv, sv, rv);
  }

  // kyp + t I <= 0
  prog.add_nsd(kyp + prog.scaled_var(t, MatrixXd::Identity(n + m, n + m)));
  // P >= margin I
  prog.add_psd(prog.expr(p) -
               AffineMatExpr{opts.margin * MatrixXd::Identity(n, n)});
  // keep P bounded so the margin maximization cannot drift
  prog.add_scalar(trace_of(prog, p) -
                      AffineMatExpr{opts.kappa * n * MatrixXd::Ones(1, 1)},
                  ConicProgram::Rel::Le);

  if (mode == CertifyMode::FreeQsr) {
    // normalization: Q <= 0 with bounded magnitude, trace(R) bounded
    prog.add_nsd(prog.expr(qv));
    prog.add_psd(prog.expr(qv) + AffineMatExpr{opts.kappa * MatrixXd::Identity(l, l)});
    prog.add_nsd(prog.expr(rv) - AffineMatExpr{opts.kappa * MatrixXd::Identity(m, m)});
    prog.add_scalar(trace_of(prog, rv) - AffineMatExpr{double(m) * MatrixXd::Ones(1, 1)},
                    ConicProgram::Rel::Le);
  }

  // maximize t (with a tiny pull toward small P for determinism)
  prog.add_linear_objective(prog.expr(t).scaled(-1.0));
  prog.add_linear_objective(trace_of(prog, p).scaled(1e-9));

  auto rep = prog.solve(opts.solver);
  if (rep.status == SolveStatus::Infeasible) {
    out.status = CertifyOutcome::Status::Infeasible;
    out.message = "no storage matrix under the requested bounds";
    return out;
  }
  if (!rep.ok()) {
    out.status = CertifyOutcome::Status::NumericalFailure;
    out.message = rep.message;
    return out;
  }
  const double tstar = rep.value(t)(0, 0);
  if (tstar < -1e-6) {
    out.status = CertifyOutcome::Status::Infeasible;
    out.message = "triple is not certifiable (best margin " + std::to_string(tstar) + ")";
    return out;
  }
  out.certificate.P = symmetrize(rep.value(p));
  if (mode == CertifyMode::FreeQsr) {
    out.certificate.qsr =
        QsrTriple(symmetrize(rep.value(qv)), rep.value(sv), symmetrize(rep.value(rv)));
  } else if (mode == CertifyMode::ScaledKnown) {
    out.lambda = rep.value(lam)(0, 0);
    out.certificate.qsr = qsr.scaled(out.lambda);
  } else {
    out.certificate.qsr = qsr;
  }
  out.certificate.margin =
      -max_eig_sym(kyp_matrix(sys, out.certificate.P, out.certificate.qsr).assemble());
  // boundary optima land within solver accuracy of zero; the assembled
  // certificate has the final word
  if (out.certificate.margin < -1e-8) {
    out.status = CertifyOutcome::Status::Infeasible;
    out.message = "triple is not certifiable (assembled margin " +
                  std::to_string(out.certificate.margin) + ")";
    return out;
  }
  out.status = CertifyOutcome::Status::Certified;
  return out;
}

SupplyCheckResult empirical_supply_check(const StateSpace& sys, const QsrTriple& qsr,
                                         const Signal& input, double horizon,
                                         double dt, double threshold) {
  SupplyCheckResult res;
  const auto sim = simulate(sys, input, VectorXd::Zero(sys.nx()), horizon, dt);
  if (sim.diverged) {
    res.diverged = true;
    res.holds = false;
    res.violation_time = sim.divergence_time;
    return res;
  }
  auto supply = [&](int k) {
    const VectorXd y = sim.y.row(k).transpose();
    const VectorXd u = sim.u.row(k).transpose();
    return (y.dot(qsr.Q * y) + 2.0 * y.dot(qsr.S * u) + u.dot(qsr.R * u));
  };
  double integral = 0.0;
  double prev = supply(0);
  res.deficit = 0.0;
  for (int k = 1; k < sim.t.size(); ++k) {
    const double cur = supply(k);
    integral += 0.5 * dt * (prev + cur);
    prev = cur;
    if (integral < res.deficit) res.deficit = integral;
    if (res.holds && integral < threshold) {
      res.holds = false;
      res.violation_time = sim.t[k];
    }
  }
  res.final_integral = integral;
  return res;
}

}  // namespace dissent
