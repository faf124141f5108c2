#include "core/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dissent {

namespace {

AffineMatExpr cexpr(const MatrixXd& m) { return AffineMatExpr{m}; }

AffineMatExpr trace_of(ConicProgram& prog, int var) {
  const auto& v = prog.var(var);
  AffineMatExpr out = AffineMatExpr::zero(1, 1);
  const MatrixXd id = MatrixXd::Identity(v.rows, v.rows);
  for (int i = 0; i < v.rows; ++i) out += prog.expr(var, id.row(i), id.col(i));
  return out;
}

}  // namespace

GainTuple GainTuple::single(int agent, MatrixXd k) {
  GainTuple g;
  g.members = {agent};
  g.gains.push_back(std::move(k));
  return g;
}

const MatrixXd& GainTuple::of(int agent) const {
  for (size_t k = 0; k < members.size(); ++k)
    if (members[k] == agent) return gains[k];
  throw std::out_of_range("GainTuple: agent " + std::to_string(agent) +
                          " is not a member");
}

MatrixXd& GainTuple::of(int agent) {
  for (size_t k = 0; k < members.size(); ++k)
    if (members[k] == agent) return gains[k];
  throw std::out_of_range("GainTuple: agent " + std::to_string(agent) +
                          " is not a member");
}

bool GainTuple::has(int agent) const {
  return std::find(members.begin(), members.end(), agent) != members.end();
}

double GainTuple::dist2(const GainTuple& o) const {
  double d = 0.0;
  for (size_t k = 0; k < members.size(); ++k)
    d += (gains[k] - o.of(members[k])).squaredNorm();
  return d;
}

double GainTuple::norm() const {
  double d = 0.0;
  for (const auto& g : gains) d += g.norm();
  return d;
}

LocalClosedLoop closed_loop(const StateSpace& agent, const GainTuple& gains,
                            const Topology& topo, int i) {
  const int n = agent.nx();
  if (topo.output_dims[i] != n)
    dim_error("closed_loop", "full-state output expected (l_i = n_i)");
  if (agent.nu() != topo.input_dims[i])
    dim_error("closed_loop", "agent input dim does not match topology");
  LocalClosedLoop cl;
  cl.A = agent.A;
  for (int j = 0; j < topo.agents(); ++j) {
    const MatrixXd lj = agent.B * topo.h_tilde_block(i, j);
    const MatrixXd rj = topo.h_hat_block(j, i);
    const bool couples =
        lj.cwiseAbs().maxCoeff() > 0.0 && rj.cwiseAbs().maxCoeff() > 0.0;
    if (!couples) continue;
    if (!gains.has(j)) {
      std::ostringstream os;
      os << "agent " << i << " couples to gain " << j
         << " which is missing from the tuple";
      dim_error("closed_loop", os.str());
    }
    cl.A -= lj * gains.of(j) * rj;
  }
  cl.B = agent.B * topo.h_tilde_row(i);
  const MatrixXd& ki = gains.of(i);
  cl.C.resize(n + agent.nu(), n);
  cl.C.topRows(n).setIdentity();
  cl.C.bottomRows(agent.nu()) = -ki * topo.h_hat_block(i, i);
  return cl;
}

MatrixXd reduced_b(const StateSpace& agent, const Topology& topo, int i) {
  std::vector<MatrixXd> cols;
  for (int j = 0; j < topo.agents(); ++j) {
    const MatrixXd blk = agent.B * topo.h_tilde_block(i, j);
    if (blk.cwiseAbs().maxCoeff() > 0.0) cols.push_back(blk);
  }
  if (cols.empty()) return MatrixXd::Zero(agent.nx(), 0);
  int total = 0;
  for (const auto& c : cols) total += static_cast<int>(c.cols());
  MatrixXd out(agent.nx(), total);
  int off = 0;
  for (const auto& c : cols) {
    out.middleCols(off, c.cols()) = c;
    off += static_cast<int>(c.cols());
  }
  return out;
}

double objective_value(const LocalIterate& it, ObjectiveKind kind) {
  return kind == ObjectiveKind::H2 ? it.W.trace() : it.gamma;
}

MatrixXd set_K_lhs(const MatrixXd& k, const QsrTriple& xhat) {
  const MatrixXd he_sk = xhat.S.transpose() * k + k.transpose() * xhat.S;
  return symmetrize(-xhat.R + he_sk - k.transpose() * xhat.Q * k);
}

MatrixXd set_S_lhs(const QsrTriple& x, const QsrTriple& xhat) {
  const int l = x.l(), m = x.m();
  MatrixXd out(l + m, l + m);
  out.topLeftCorner(l, l) = x.Q + xhat.R;
  out.topRightCorner(l, m) = x.S + xhat.S.transpose();
  out.bottomLeftCorner(m, l) = out.topRightCorner(l, m).transpose();
  out.bottomRightCorner(m, m) = x.R + xhat.Q;
  return out;
}

bool IterateMargins::ok(double tol) const {
  return g <= tol && k <= tol && j_first <= tol && j_second <= tol && s <= tol &&
         p_min > 0.0;
}

IterateMargins verify_iterate(const AgentProblem& ap, const LocalIterate& it) {
  IterateMargins m;
  const int i = ap.index;
  const StateSpace nom = ap.nominal();
  m.g = -1e300;
  for (const auto& v : ap.plant.vertices())
    m.g = std::max(m.g, max_eig_sym(kyp_matrix(v, it.P_g, it.X).assemble()));
  m.k = max_eig_sym(set_K_lhs(it.K_hat.of(i), it.X_hat));
  const LocalClosedLoop cl = closed_loop(nom, it.K_hat, ap.topo, i);
  const MatrixXd bred = reduced_b(nom, ap.topo, i);
  const int n = nom.nx();
  if (ap.objective == ObjectiveKind::H2) {
    const int cr = static_cast<int>(cl.C.rows());
    MatrixXd m1 = MatrixXd::Zero(n + cr, n + cr);
    m1.topLeftCorner(n, n) = symmetrize(it.P * cl.A + cl.A.transpose() * it.P);
    m1.block(n, 0, cr, n) = cl.C;
    m1.block(0, n, n, cr) = cl.C.transpose();
    m1.bottomRightCorner(cr, cr) = -MatrixXd::Identity(cr, cr);
    m.j_first = max_eig_sym(m1);
    m.j_second = max_eig_sym(bred.transpose() * it.P * bred - it.W);
  } else {
    const int mr = static_cast<int>(bred.cols());
    const int cr = static_cast<int>(cl.C.rows());
    const int rows = n + mr + cr;
    MatrixXd m1 = MatrixXd::Zero(rows, rows);
    m1.topLeftCorner(n, n) = symmetrize(it.P * cl.A + cl.A.transpose() * it.P);
    m1.block(n, 0, mr, n) = bred.transpose() * it.P;
    m1.block(0, n, n, mr) = it.P * bred;
    m1.block(n, n, mr, mr) = -it.gamma * MatrixXd::Identity(mr, mr);
    m1.block(n + mr, 0, cr, n) = cl.C;
    m1.block(0, n + mr, n, cr) = cl.C.transpose();
    m1.bottomRightCorner(cr, cr) = -it.gamma * MatrixXd::Identity(cr, cr);
    m.j_first = max_eig_sym(m1);
    m.j_second = -it.gamma;
  }
  m.s = ap.enable_local_stability ? max_eig_sym(set_S_lhs(it.X, it.X_hat)) : -1.0;
  m.p_min = std::min(min_eig_sym(it.P), min_eig_sym(it.P_g));
  return m;
}

// ---------------------------------------------------------------------------
// program builders

namespace {

struct AgentVars {
  TripleVars dX, dXh;
  std::vector<int> dK;  // per member of the gain tuple; empty when frozen
  int own_dk = -1;
  int dP = -1;
  int W = -1;
  int gamma = -1;
  int Pg = -1;
};

struct AgentCtx {
  const AgentProblem& ap;
  const LocalIterate& base;
  bool deltas_on_triples;  // triple vars are deltas around the base
  bool gains_free;
};

AgentVars declare_vars(ConicProgram& prog, const AgentCtx& c, const std::string& tag) {
  AgentVars v;
  const int i = c.ap.index;
  const int n = c.ap.nominal().nx();
  const int mi = c.ap.nominal().nu();
  v.dX = add_triple_vars(prog, n, mi, tag + ".X");
  v.dXh = add_triple_vars(prog, mi, n, tag + ".Xh");
  if (c.gains_free) {
    for (size_t k = 0; k < c.base.K_hat.members.size(); ++k) {
      const int j = c.base.K_hat.members[k];
      const MatrixXd& kj = c.base.K_hat.gains[k];
      const int id = prog.add_var(static_cast<int>(kj.rows()),
                                  static_cast<int>(kj.cols()), VarStructure::Full,
                                  tag + ".dK" + std::to_string(j));
      v.dK.push_back(id);
      if (j == i) v.own_dk = id;
    }
  }
  v.dP = prog.add_var(n, n, VarStructure::Symmetric, tag + ".P");
  if (c.ap.objective == ObjectiveKind::H2) {
    const int mr = static_cast<int>(reduced_b(c.ap.nominal(), c.ap.topo, i).cols());
    v.W = prog.add_var(mr, mr, VarStructure::Symmetric, tag + ".W");
  } else {
    v.gamma = prog.add_var(1, 1, VarStructure::Full, tag + ".gamma");
    prog.add_scalar(prog.expr(v.gamma), ConicProgram::Rel::Ge);
  }
  v.Pg = prog.add_var(n, n, VarStructure::Symmetric, tag + ".Pg");
  return v;
}

AffineMatExpr q_of(ConicProgram& p, const AgentCtx& c, const AgentVars& v) {
  return c.deltas_on_triples ? cexpr(c.base.X.Q) + p.expr(v.dX.q) : p.expr(v.dX.q);
}
AffineMatExpr s_of(ConicProgram& p, const AgentCtx& c, const AgentVars& v) {
  return c.deltas_on_triples ? cexpr(c.base.X.S) + p.expr(v.dX.s) : p.expr(v.dX.s);
}
AffineMatExpr r_of(ConicProgram& p, const AgentCtx& c, const AgentVars& v) {
  return c.deltas_on_triples ? cexpr(c.base.X.R) + p.expr(v.dX.r) : p.expr(v.dX.r);
}
AffineMatExpr qh_of(ConicProgram& p, const AgentCtx& c, const AgentVars& v) {
  return c.deltas_on_triples ? cexpr(c.base.X_hat.Q) + p.expr(v.dXh.q)
                             : p.expr(v.dXh.q);
}
AffineMatExpr sh_of(ConicProgram& p, const AgentCtx& c, const AgentVars& v) {
  return c.deltas_on_triples ? cexpr(c.base.X_hat.S) + p.expr(v.dXh.s)
                             : p.expr(v.dXh.s);
}
AffineMatExpr rh_of(ConicProgram& p, const AgentCtx& c, const AgentVars& v) {
  return c.deltas_on_triples ? cexpr(c.base.X_hat.R) + p.expr(v.dXh.r)
                             : p.expr(v.dXh.r);
}

// open-loop dissipativity: one KYP block per polytope vertex, shared storage
// matrix and triple
void add_G(ConicProgram& prog, const AgentCtx& c, const AgentVars& v) {
  const int n = c.ap.nominal().nx();
  for (const auto& vert : c.ap.plant.vertices()) {
    BlockExpr be({n, vert.nu()});
    be.set(0, 0, he(prog.expr(v.Pg, MatrixXd(), vert.A)) - q_of(prog, c, v));
    be.set(1, 0,
           (prog.expr(v.Pg, MatrixXd(), vert.B) - s_of(prog, c, v)).transpose());
    be.set(1, 1, -r_of(prog, c, v));
    prog.add_nsd(be.assemble());
  }
  prog.add_psd(prog.expr(v.Pg) - cexpr(c.ap.margin * MatrixXd::Identity(n, n)));
}

// Eq-18-style membership, affine in the controller triple at a fixed gain
void add_K_fixed(ConicProgram& prog, const AgentCtx& c, const AgentVars& v,
                 const MatrixXd& k) {
  AffineMatExpr lhs =
      -rh_of(prog, c, v) +
      he(sh_of(prog, c, v).pre_post(k.transpose(), MatrixXd())) -
      qh_of(prog, c, v).pre_post(k.transpose(), k);
  prog.add_nsd(lhs);
}

// tightened controller set around (K0, Xhat0)
void add_K_tightened(ConicProgram& prog, const AgentCtx& c, const AgentVars& v) {
  const int i = c.ap.index;
  const MatrixXd& k0 = c.base.K_hat.of(i);
  const MatrixXd& q0 = c.base.X_hat.Q;
  const MatrixXd& s0 = c.base.X_hat.S;
  const MatrixXd& r0 = c.base.X_hat.R;
  const int l = static_cast<int>(k0.cols());
  const int m = static_cast<int>(k0.rows());
  const int dk = v.own_dk;

  AffineMatExpr t00 =
      cexpr(symmetrize(-r0 + s0.transpose() * k0 + k0.transpose() * s0 -
                       k0.transpose() * q0 * k0)) -
      prog.expr(v.dXh.r) + he(prog.expr(v.dXh.s, MatrixXd(), k0, true)) +
      he(prog.expr(dk, s0.transpose(), MatrixXd())) -
      he(prog.expr(dk, k0.transpose() * q0, MatrixXd())) -
      prog.expr(v.dXh.q, k0.transpose(), k0);
  AffineMatExpr b2 = prog.expr(v.dXh.s) - prog.expr(dk, 0.5 * q0, MatrixXd()) +
                     prog.expr(dk);
  AffineMatExpr b3 = -prog.expr(v.dXh.q, MatrixXd(), k0) + prog.expr(dk);

  BlockExpr be({l, m, m});
  be.set(0, 0, t00);
  be.set(1, 0, b2);
  be.set(2, 0, b3);
  be.set(1, 1, cexpr(-2.0 * MatrixXd::Identity(m, m)));
  be.set(2, 1, prog.expr(v.dXh.q).scaled(-0.5));
  be.set(2, 2, cexpr(-2.0 * MatrixXd::Identity(m, m)));
  prog.add_nsd(be.assemble());
}

AffineMatExpr delta_acl(ConicProgram& prog, const AgentCtx& c, const AgentVars& v) {
  const int i = c.ap.index;
  const int n = c.ap.nominal().nx();
  AffineMatExpr da = AffineMatExpr::zero(n, n);
  for (size_t k = 0; k < c.base.K_hat.members.size(); ++k) {
    const int j = c.base.K_hat.members[k];
    const MatrixXd lj = c.ap.nominal().B * c.ap.topo.h_tilde_block(i, j);
    const MatrixXd rj = c.ap.topo.h_hat_block(j, i);
    if (lj.cwiseAbs().maxCoeff() == 0.0 || rj.cwiseAbs().maxCoeff() == 0.0) continue;
    da -= prog.expr(v.dK[k], lj, rj);
  }
  return da;
}

AffineMatExpr delta_ccl(ConicProgram& prog, const AgentCtx& c, const AgentVars& v) {
  const int i = c.ap.index;
  const int n = c.ap.nominal().nx();
  const int m = c.ap.nominal().nu();
  const MatrixXd hii = c.ap.topo.h_hat_block(i, i);
  AffineMatExpr dc = AffineMatExpr::zero(n + m, n);
  MatrixXd lower_sel = MatrixXd::Zero(n + m, m);
  lower_sel.bottomRows(m).setIdentity();
  dc -= prog.expr(v.own_dk, lower_sel, hii);
  return dc;
}

// performance constraints at a fixed gain (affine in P and W or gamma)
void add_J_fixed(ConicProgram& prog, const AgentCtx& c, const AgentVars& v,
                 const GainTuple& gains) {
  const StateSpace nom = c.ap.nominal();
  const int i = c.ap.index;
  const int n = nom.nx();
  const LocalClosedLoop cl = closed_loop(nom, gains, c.ap.topo, i);
  const MatrixXd bred = reduced_b(nom, c.ap.topo, i);
  const int cr = static_cast<int>(cl.C.rows());
  const int mr = static_cast<int>(bred.cols());

  prog.add_psd(prog.expr(v.dP) - cexpr(c.ap.margin * MatrixXd::Identity(n, n)));
  if (c.ap.objective == ObjectiveKind::H2) {
    BlockExpr m1({n, cr});
    m1.set(0, 0, he(prog.expr(v.dP, MatrixXd(), cl.A)));
    m1.set(1, 0, cexpr(cl.C));
    m1.set(1, 1, cexpr(-MatrixXd::Identity(cr, cr)));
    prog.add_nsd(m1.assemble());
    // B'PB < W via [[-W, B'P],[PB, -P]] <= 0 (exact Schur form)
    BlockExpr m2({mr, n});
    m2.set(0, 0, -prog.expr(v.W));
    m2.set(1, 0, prog.expr(v.dP, MatrixXd(), bred));
    m2.set(1, 1, -prog.expr(v.dP));
    prog.add_nsd(m2.assemble(), /*strict=*/true);
    prog.add_psd(prog.expr(v.W), /*strict=*/true);
  } else {
    BlockExpr m1({n, mr, cr});
    m1.set(0, 0, he(prog.expr(v.dP, MatrixXd(), cl.A)));
    m1.set(1, 0, prog.expr(v.dP, MatrixXd(), bred).transpose());
    m1.set(1, 1, prog.scaled_var(v.gamma, -MatrixXd::Identity(mr, mr)));
    m1.set(2, 0, cexpr(cl.C));
    m1.set(2, 1, cexpr(MatrixXd::Zero(cr, mr)));
    m1.set(2, 2, prog.scaled_var(v.gamma, -MatrixXd::Identity(cr, cr)));
    prog.add_nsd(m1.assemble(), /*strict=*/true);
  }
}

// tightened performance constraints around (K0, P0)
void add_J_tightened(ConicProgram& prog, const AgentCtx& c, const AgentVars& v) {
  const StateSpace nom = c.ap.nominal();
  const int i = c.ap.index;
  const int n = nom.nx();
  const LocalClosedLoop cl0 = closed_loop(nom, c.base.K_hat, c.ap.topo, i);
  const MatrixXd bred = reduced_b(nom, c.ap.topo, i);
  const MatrixXd& p0 = c.base.P;
  const int cr = static_cast<int>(cl0.C.rows());
  const int mr = static_cast<int>(bred.cols());

  const AffineMatExpr da = delta_acl(prog, c, v);
  const AffineMatExpr dc = delta_ccl(prog, c, v);
  // T(P A_cl) = P0 A0 + dP A0 + P0 dA
  const AffineMatExpr t_pa = cexpr(p0 * cl0.A) +
                             prog.expr(v.dP, MatrixXd(), cl0.A) +
                             da.pre_post(p0, MatrixXd());

  prog.add_psd(cexpr(p0) + prog.expr(v.dP) -
               cexpr(c.ap.margin * MatrixXd::Identity(n, n)));

  if (c.ap.objective == ObjectiveKind::H2) {
    BlockExpr m1({n, cr, n});
    m1.set(0, 0, he(t_pa));
    m1.set(1, 0, cexpr(cl0.C) + dc);
    m1.set(1, 1, cexpr(-MatrixXd::Identity(cr, cr)));
    m1.set(2, 0, prog.expr(v.dP) + da);
    m1.set(2, 1, cexpr(MatrixXd::Zero(n, cr)));
    m1.set(2, 2, cexpr(-2.0 * MatrixXd::Identity(n, n)));
    prog.add_nsd(m1.assemble());

    BlockExpr m2({mr, n});
    m2.set(0, 0, -prog.expr(v.W));
    m2.set(1, 0, cexpr(p0 * bred));
    m2.set(1, 1, cexpr(-p0) + prog.expr(v.dP));
    prog.add_nsd(m2.assemble());
    prog.add_psd(prog.expr(v.W), /*strict=*/true);
  } else {
    BlockExpr m1({n, mr, cr, n});
    m1.set(0, 0, he(t_pa));
    m1.set(1, 0, cexpr(bred.transpose() * p0) +
                     prog.expr(v.dP, bred.transpose(), MatrixXd()));
    m1.set(1, 1, prog.scaled_var(v.gamma, -MatrixXd::Identity(mr, mr)));
    m1.set(2, 0, cexpr(cl0.C) + dc);
    m1.set(2, 1, cexpr(MatrixXd::Zero(cr, mr)));
    m1.set(2, 2, prog.scaled_var(v.gamma, -MatrixXd::Identity(cr, cr)));
    m1.set(3, 0, prog.expr(v.dP) + da);
    m1.set(3, 1, cexpr(MatrixXd::Zero(n, mr)));
    m1.set(3, 2, cexpr(MatrixXd::Zero(n, cr)));
    m1.set(3, 3, cexpr(-2.0 * MatrixXd::Identity(n, n)));
    prog.add_nsd(m1.assemble(), /*strict=*/true);
  }
}

void add_S(ConicProgram& prog, const AgentCtx& c, const AgentVars& v) {
  const int l = c.ap.nominal().nx();
  const int m = c.ap.nominal().nu();
  BlockExpr be({l, m});
  be.set(0, 0, q_of(prog, c, v) + rh_of(prog, c, v));
  be.set(1, 0, s_of(prog, c, v).transpose() + sh_of(prog, c, v));
  be.set(1, 1, r_of(prog, c, v) + qh_of(prog, c, v));
  prog.add_nsd(be.assemble(), /*strict=*/true);
}

// scaled proximity penalty of the consensus step
void add_penalty(ConicProgram& prog, const AgentCtx& c, const AgentVars& v,
                 const ConsensusView& z, const AgentDuals& t, double rho) {
  if (rho <= 0.0) return;
  std::vector<AffineMatExpr> diffs;
  diffs.push_back(prog.expr(v.dX.q) + cexpr(c.base.X.Q - z.Z.Q + t.T.Q));
  diffs.push_back(prog.expr(v.dX.s) + cexpr(c.base.X.S - z.Z.S + t.T.S));
  diffs.push_back(prog.expr(v.dX.r) + cexpr(c.base.X.R - z.Z.R + t.T.R));
  diffs.push_back(prog.expr(v.dXh.q) + cexpr(c.base.X_hat.Q - z.Z_hat.Q + t.T_hat.Q));
  diffs.push_back(prog.expr(v.dXh.s) + cexpr(c.base.X_hat.S - z.Z_hat.S + t.T_hat.S));
  diffs.push_back(prog.expr(v.dXh.r) + cexpr(c.base.X_hat.R - z.Z_hat.R + t.T_hat.R));
  if (!z.Z_tilde.members.empty() && c.gains_free) {
    for (size_t k = 0; k < c.base.K_hat.members.size(); ++k) {
      const int j = c.base.K_hat.members[k];
      diffs.push_back(prog.expr(v.dK[k]) + cexpr(c.base.K_hat.gains[k] -
                                                 z.Z_tilde.of(j) + t.T_tilde.of(j)));
    }
  }
  prog.add_quad_objective(block_diag_expr(diffs), 0.5 * rho);
}

void add_objective(ConicProgram& prog, const AgentCtx& c, const AgentVars& v) {
  if (c.ap.objective == ObjectiveKind::H2)
    prog.add_linear_objective(trace_of(prog, v.W));
  else
    prog.add_linear_objective(prog.expr(v.gamma));
}

LocalIterate apply_step(const AgentProblem& ap, const LocalIterate& base,
                        const SolveReport& rep, const AgentVars& v, bool deltas,
                        bool p_delta) {
  LocalIterate out = base;
  const MatrixXd tq = symmetrize(rep.value(v.dX.q));
  const MatrixXd ts = rep.value(v.dX.s);
  const MatrixXd tr = symmetrize(rep.value(v.dX.r));
  const MatrixXd tqh = symmetrize(rep.value(v.dXh.q));
  const MatrixXd tsh = rep.value(v.dXh.s);
  const MatrixXd trh = symmetrize(rep.value(v.dXh.r));
  if (deltas) {
    out.X = QsrTriple(base.X.Q + tq, base.X.S + ts, base.X.R + tr);
    out.X_hat = QsrTriple(base.X_hat.Q + tqh, base.X_hat.S + tsh, base.X_hat.R + trh);
  } else {
    out.X = QsrTriple(tq, ts, tr);
    out.X_hat = QsrTriple(tqh, tsh, trh);
  }
  out.P = p_delta ? MatrixXd(symmetrize(base.P + rep.value(v.dP)))
                  : MatrixXd(symmetrize(rep.value(v.dP)));
  for (size_t k = 0; k < v.dK.size(); ++k)
    out.K_hat.gains[k] = base.K_hat.gains[k] + rep.value(v.dK[k]);
  if (ap.objective == ObjectiveKind::H2)
    out.W = symmetrize(rep.value(v.W));
  else
    out.gamma = rep.value(v.gamma)(0, 0);
  out.P_g = symmetrize(rep.value(v.Pg));
  return out;
}

}  // namespace

XUpdateResult x_update(const AgentProblem& ap, const LocalIterate& base,
                       const ConsensusView& consensus, const AgentDuals& duals,
                       double rho) {
  XUpdateResult res;
  res.iterate = base;
  res.iterate.warning = false;
  res.objective = objective_value(base, ap.objective);

  if (ap.freeze_gains) {
    // convex dissipativity-only update: a single solve suffices
    ConicProgram prog;
    AgentCtx c{ap, base, /*deltas_on_triples=*/true, /*gains_free=*/false};
    AgentVars v = declare_vars(prog, c, "a" + std::to_string(ap.index));
    add_G(prog, c, v);
    add_K_fixed(prog, c, v, base.K_hat.of(ap.index));
    if (ap.enable_local_stability) add_S(prog, c, v);
    add_J_fixed(prog, c, v, base.K_hat);
    add_penalty(prog, c, v, consensus, duals, rho);
    add_objective(prog, c, v);
    SolverOptions so = ap.solver;
    so.strictness_margin = ap.margin;
    auto rep = prog.solve(so);
    if (!rep.ok()) {
      res.solver_warning = true;
      res.iterate.warning = true;
      return res;
    }
    res.iterate = apply_step(ap, base, rep, v, /*deltas=*/true, /*p_delta=*/false);
    res.objective = objective_value(res.iterate, ap.objective);
    res.inner_iterations = 1;
    return res;
  }

  LocalIterate cur = base;
  double j_prev = objective_value(base, ap.objective);
  int l = 0;
  bool warned = false;
  while (l < ap.ico_max_iters) {
    ConicProgram prog;
    AgentCtx c{ap, cur, /*deltas_on_triples=*/true, /*gains_free=*/true};
    AgentVars v = declare_vars(prog, c, "a" + std::to_string(ap.index));
    add_G(prog, c, v);
    add_K_tightened(prog, c, v);
    add_J_tightened(prog, c, v);
    if (ap.enable_local_stability) add_S(prog, c, v);
    add_penalty(prog, c, v, consensus, duals, rho);
    add_objective(prog, c, v);
    SolverOptions so = ap.solver;
    so.strictness_margin = ap.margin;
    auto rep = prog.solve(so);
    if (!rep.ok()) {
      if (l == 0) {
        res.solver_warning = true;
        res.iterate = base;
        res.iterate.warning = true;
        res.objective = j_prev;
        return res;
      }
      warned = true;
      break;
    }
    cur = apply_step(ap, cur, rep, v, /*deltas=*/true, /*p_delta=*/true);
    ++l;
    const double j_new = objective_value(cur, ap.objective);
    const double denom = std::abs(j_new);
    const bool tiny = denom < 1e-12;
    const double rel =
        tiny ? std::abs(j_new - j_prev) : std::abs(j_new - j_prev) / denom;
    j_prev = j_new;
    if (rel < ap.ico_eps) break;
  }
  res.iterate = cur;
  res.iterate.warning = warned;
  res.solver_warning = warned;
  res.objective = j_prev;
  res.inner_iterations = l;
  return res;
}

ZeroStepCheck tightened_zero_step(const AgentProblem& ap, const LocalIterate& base) {
  ZeroStepCheck out;
  ConicProgram prog;
  AgentCtx c{ap, base, /*deltas_on_triples=*/true, /*gains_free=*/true};
  AgentVars v = declare_vars(prog, c, "z");
  const size_t n_before_g = prog.num_psd_constraints();
  add_G(prog, c, v);
  const size_t n_after_g = prog.num_psd_constraints();
  add_K_tightened(prog, c, v);
  const size_t n_after_k = prog.num_psd_constraints();
  add_J_tightened(prog, c, v);
  const size_t n_after_j = prog.num_psd_constraints();

  // zero perturbation, slack variables held at the base values
  std::map<int, MatrixXd> vals;
  for (int id = 0; id < prog.num_vars(); ++id) {
    const auto& mv = prog.var(id);
    if (mv.structure == VarStructure::Fixed) continue;
    vals[id] = MatrixXd::Zero(mv.rows, mv.cols);
  }
  if (v.W >= 0) vals[v.W] = base.W;
  if (v.gamma >= 0) vals[v.gamma] = (MatrixXd(1, 1) << base.gamma).finished();
  vals[v.Pg] = base.P_g;

  out.g = out.k = out.j_first = out.j_second = -1e300;
  for (size_t i = n_before_g; i < n_after_j; ++i) {
    // constraints are stored as expr >= 0; violation = -min_eig(expr)
    const double viol = -min_eig_sym(prog.eval(prog.psd_expr(i), vals));
    if (i < n_after_g)
      out.g = std::max(out.g, viol);
    else if (i < n_after_k)
      out.k = std::max(out.k, viol);
    else if (i == n_after_k)
      out.j_first = std::max(out.j_first, viol);
    else
      out.j_second = std::max(out.j_second, viol);
  }
  return out;
}

InitResult init_local(const AgentProblem& ap, const MatrixXd& gain) {
  InitResult out;
  const StateSpace nom = ap.nominal();
  LocalIterate seed;
  seed.K_hat = GainTuple::single(ap.index, gain);
  for (int j = 0; j < ap.topo.agents(); ++j) {
    if (j == ap.index) continue;
    const MatrixXd lj = nom.B * ap.topo.h_tilde_block(ap.index, j);
    const MatrixXd rj = ap.topo.h_hat_block(j, ap.index);
    if (lj.cwiseAbs().maxCoeff() > 0.0 && rj.cwiseAbs().maxCoeff() > 0.0) {
      out.message = "agent " + std::to_string(ap.index) +
                    " couples to foreign gains; supply a full tuple and enable "
                    "the gain-consensus channel";
      return out;
    }
  }

  ConicProgram prog;
  AgentCtx c{ap, seed, /*deltas_on_triples=*/false, /*gains_free=*/false};
  AgentVars v = declare_vars(prog, c, "a" + std::to_string(ap.index));
  add_G(prog, c, v);
  add_K_fixed(prog, c, v, gain);
  add_J_fixed(prog, c, v, seed.K_hat);
  if (ap.enable_local_stability) add_S(prog, c, v);
  add_objective(prog, c, v);
  std::vector<AffineMatExpr> regs = {prog.expr(v.dX.q),  prog.expr(v.dX.s),
                                     prog.expr(v.dX.r),  prog.expr(v.dXh.q),
                                     prog.expr(v.dXh.s), prog.expr(v.dXh.r)};
  prog.add_quad_objective(block_diag_expr(regs), 1e-6);

  SolverOptions so = ap.solver;
  so.strictness_margin = ap.margin;
  auto rep = prog.solve(so);
  if (rep.status == SolveStatus::Infeasible) {
    out.message = "no feasible local iterate at the initial gain (agent " +
                  std::to_string(ap.index) + ")";
    return out;
  }
  if (!rep.ok()) {
    out.message = rep.message;
    return out;
  }
  out.iterate = apply_step(ap, seed, rep, v, /*deltas=*/false, /*p_delta=*/false);
  out.ok = true;
  return out;
}

NetworkCertifyOutcome network_certify(const std::vector<AgentProblem>& agents,
                                      const std::vector<MatrixXd>& gains,
                                      double margin) {
  NetworkCertifyOutcome out;
  const int n_agents = static_cast<int>(agents.size());
  if (static_cast<int>(gains.size()) != n_agents)
    dim_error("network_certify", "one gain per agent required");

  std::vector<LocalIterate> iters;
  for (int i = 0; i < n_agents; ++i) {
    auto init = init_local(agents[i], gains[i]);
    if (!init.ok) {
      out.failing_agent = i;
      out.message = init.message;
      return out;
    }
    iters.push_back(init.iterate);
  }

  const auto aug = assemble_hbar(agents[0].topo);
  ConicProgram prog;
  std::vector<AgentVars> vars;
  std::vector<AgentCtx> ctxs;
  ctxs.reserve(n_agents);
  for (int i = 0; i < n_agents; ++i) {
    ctxs.push_back(AgentCtx{agents[i], iters[i], false, false});
    vars.push_back(declare_vars(prog, ctxs.back(), "a" + std::to_string(i)));
  }
  std::vector<TripleVars> tv;
  for (int i = 0; i < n_agents; ++i) tv.push_back(vars[i].dX);
  for (int i = 0; i < n_agents; ++i) tv.push_back(vars[i].dXh);
  for (int i = 0; i < n_agents; ++i) {
    add_G(prog, ctxs[i], vars[i]);
    add_K_fixed(prog, ctxs[i], vars[i], gains[i]);
    add_J_fixed(prog, ctxs[i], vars[i], iters[i].K_hat);
    if (agents[i].enable_local_stability) add_S(prog, ctxs[i], vars[i]);
    add_objective(prog, ctxs[i], vars[i]);
  }
  const int dim = aug.out_dim();
  prog.add_nsd(ndt_expr(prog, aug.network(), tv) +
               cexpr(margin * MatrixXd::Identity(dim, dim)));
  SolverOptions so = agents[0].solver;
  so.strictness_margin = margin;
  auto rep = prog.solve(so);
  if (rep.status == SolveStatus::Infeasible) {
    out.message = "no NDT-certifiable dissipativity assignment exists at these gains";
    return out;
  }
  if (!rep.ok()) {
    out.message = rep.message;
    return out;
  }
  for (int i = 0; i < n_agents; ++i)
    iters[i] = apply_step(agents[i], iters[i], rep, vars[i], false, false);
  NetworkQsr net = NetworkQsr::zero(agents[0].topo);
  for (int i = 0; i < n_agents; ++i) {
    net.agent_triples[i] = iters[i].X;
    net.controller_triples[i] = iters[i].X_hat;
  }
  out.ndt_max_eig = max_eig_sym(ndt_matrix_dense(net, aug));
  out.iterates = std::move(iters);
  out.ok = true;
  return out;
}

CentralizedOutcome centralized_ico(const std::vector<AgentProblem>& agents,
                                   const std::vector<MatrixXd>& init_gains,
                                   const CentralizedOptions& opts) {
  CentralizedOutcome out;
  const int n_agents = static_cast<int>(agents.size());
  if (static_cast<int>(init_gains.size()) != n_agents)
    dim_error("centralized_ico", "one initial gain per agent required");

  std::vector<LocalIterate> iters;
  if (opts.with_ndt) {
    auto cert = network_certify(agents, init_gains, opts.margin);
    if (!cert.ok) {
      out.message = cert.message.empty()
                        ? "initial gains admit no NDT-certifiable dissipativity assignment"
                        : cert.message;
      return out;
    }
    iters = std::move(cert.iterates);
  } else {
    for (int i = 0; i < n_agents; ++i) {
      auto init = init_local(agents[i], init_gains[i]);
      if (!init.ok) {
        out.message = init.message;
        return out;
      }
      iters.push_back(init.iterate);
    }
  }

  const auto aug = assemble_hbar(agents[0].topo);

  double j_prev = 0.0;
  for (int i = 0; i < n_agents; ++i)
    j_prev += objective_value(iters[i], agents[i].objective);

  int outer = 0;
  for (; outer < opts.max_outer; ++outer) {
    ConicProgram prog;
    std::vector<AgentVars> vars;
    std::vector<AgentCtx> ctxs;
    ctxs.reserve(n_agents);
    for (int i = 0; i < n_agents; ++i) {
      ctxs.push_back(AgentCtx{agents[i], iters[i], true, true});
      vars.push_back(declare_vars(prog, ctxs.back(), "a" + std::to_string(i)));
    }
    for (int i = 0; i < n_agents; ++i) {
      add_G(prog, ctxs[i], vars[i]);
      add_K_tightened(prog, ctxs[i], vars[i]);
      add_J_tightened(prog, ctxs[i], vars[i]);
      if (agents[i].enable_local_stability) add_S(prog, ctxs[i], vars[i]);
      add_objective(prog, ctxs[i], vars[i]);
    }
    if (opts.with_ndt) {
      const int dim = aug.out_dim();
      NetworkQsr bases = NetworkQsr::zero(agents[0].topo);
      for (int i = 0; i < n_agents; ++i) {
        bases.agent_triples[i] = iters[i].X;
        bases.controller_triples[i] = iters[i].X_hat;
      }
      std::vector<TripleVars> dv;
      for (int i = 0; i < n_agents; ++i) dv.push_back(vars[i].dX);
      for (int i = 0; i < n_agents; ++i) dv.push_back(vars[i].dXh);
      prog.add_nsd(cexpr(ndt_matrix_dense(bases, aug)) +
                   ndt_expr(prog, aug.network(), dv) +
                   cexpr(opts.margin * MatrixXd::Identity(dim, dim)));
    }
    SolverOptions so = opts.solver;
    so.strictness_margin = opts.margin;
    auto rep = prog.solve(so);
    if (!rep.ok()) break;
    for (int i = 0; i < n_agents; ++i)
      iters[i] = apply_step(agents[i], iters[i], rep, vars[i], true, true);
    double j_new = 0.0;
    for (int i = 0; i < n_agents; ++i)
      j_new += objective_value(iters[i], agents[i].objective);
    const double denom = std::max(std::abs(j_new), 1e-12);
    const double rel = std::abs(j_new - j_prev) / denom;
    j_prev = j_new;
    if (rel < opts.eps) {
      ++outer;
      break;
    }
  }

  out.ok = true;
  out.iterates = iters;
  for (int i = 0; i < n_agents; ++i)
    out.objectives.push_back(objective_value(iters[i], agents[i].objective));
  out.iterations = outer;
  return out;
}

}  // namespace dissent
