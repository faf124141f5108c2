#include "core/topology.hpp"

#include <numeric>
#include <sstream>

namespace dissent {

Topology::Topology(std::vector<int> in_dims, std::vector<int> out_dims, MatrixXd h,
                   MatrixXd h_tilde, MatrixXd h_hat)
    : input_dims(std::move(in_dims)),
      output_dims(std::move(out_dims)),
      H(std::move(h)),
      H_tilde(std::move(h_tilde)),
      H_hat(std::move(h_hat)) {
  if (input_dims.size() != output_dims.size())
    dim_error("Topology", "need one input and one output dim per agent");
  const int mt = total_inputs(), lt = total_outputs();
  if (H.rows() != mt || H.cols() != lt) dim_error("Topology", "H must be (sum m) x (sum l)");
  if (H_tilde.rows() != mt || H_tilde.cols() != mt)
    dim_error("Topology", "H_tilde must be square on agent inputs");
  if (H_hat.rows() != lt || H_hat.cols() != lt)
    dim_error("Topology", "H_hat must be square on agent outputs");
  for (int i = 0; i < agents(); ++i) {
    if (h_block(i, i).cwiseAbs().maxCoeff() > 0.0) {
      std::ostringstream os;
      os << "self-feedback block (H)_{" << i << "," << i << "} must be zero";
      throw std::invalid_argument("Topology: " + os.str());
    }
  }
}

int Topology::total_inputs() const {
  return std::accumulate(input_dims.begin(), input_dims.end(), 0);
}
int Topology::total_outputs() const {
  return std::accumulate(output_dims.begin(), output_dims.end(), 0);
}
int Topology::input_offset(int i) const {
  return std::accumulate(input_dims.begin(), input_dims.begin() + i, 0);
}
int Topology::output_offset(int i) const {
  return std::accumulate(output_dims.begin(), output_dims.begin() + i, 0);
}

MatrixXd Topology::h_block(int i, int j) const {
  return H.block(input_offset(i), output_offset(j), input_dims[i], output_dims[j]);
}
MatrixXd Topology::h_tilde_block(int i, int j) const {
  return H_tilde.block(input_offset(i), input_offset(j), input_dims[i], input_dims[j]);
}
MatrixXd Topology::h_hat_block(int i, int j) const {
  return H_hat.block(output_offset(i), output_offset(j), output_dims[i], output_dims[j]);
}
MatrixXd Topology::h_tilde_row(int i) const {
  return H_tilde.middleRows(input_offset(i), input_dims[i]);
}

OperatorNetwork::OperatorNetwork(std::vector<int> in, std::vector<int> out, MatrixXd h)
    : in_dims(std::move(in)), out_dims(std::move(out)), H(std::move(h)) {
  if (in_dims.size() != out_dims.size())
    dim_error("OperatorNetwork", "need one input and output dim per operator");
  int mt = std::accumulate(in_dims.begin(), in_dims.end(), 0);
  int lt = std::accumulate(out_dims.begin(), out_dims.end(), 0);
  if (H.rows() != mt || H.cols() != lt)
    dim_error("OperatorNetwork", "H must be (sum in) x (sum out)");
  for (int k = 0; k < ops(); ++k)
    if (h_block(k, k).cwiseAbs().maxCoeff() > 0.0)
      throw std::invalid_argument(
          "OperatorNetwork: diagonal interconnection blocks must be zero");
}

int OperatorNetwork::in_offset(int k) const {
  return std::accumulate(in_dims.begin(), in_dims.begin() + k, 0);
}
int OperatorNetwork::out_offset(int k) const {
  return std::accumulate(out_dims.begin(), out_dims.begin() + k, 0);
}
MatrixXd OperatorNetwork::h_block(int i, int j) const {
  return H.block(in_offset(i), out_offset(j), in_dims[i], out_dims[j]);
}

OperatorNetwork AugmentedInterconnection::network() const {
  std::vector<int> in, out;
  for (int i = 0; i < topo.agents(); ++i) in.push_back(topo.input_dims[i]);
  for (int i = 0; i < topo.agents(); ++i) in.push_back(topo.output_dims[i]);
  for (int i = 0; i < topo.agents(); ++i) out.push_back(topo.output_dims[i]);
  for (int i = 0; i < topo.agents(); ++i) out.push_back(topo.input_dims[i]);
  return OperatorNetwork(std::move(in), std::move(out), H_bar);
}

AugmentedInterconnection assemble_hbar(const Topology& topo) {
  const int mt = topo.total_inputs(), lt = topo.total_outputs();
  AugmentedInterconnection aug;
  aug.topo = topo;
  aug.H_bar = MatrixXd::Zero(mt + lt, lt + mt);
  aug.H_bar.topLeftCorner(mt, lt) = topo.H;
  aug.H_bar.topRightCorner(mt, mt) = topo.H_tilde;
  aug.H_bar.bottomLeftCorner(lt, lt) = topo.H_hat;
  return aug;
}

NetworkQsr NetworkQsr::zero(const Topology& topo) {
  NetworkQsr net;
  for (int i = 0; i < topo.agents(); ++i)
    net.agent_triples.push_back(
        QsrTriple::zero(topo.output_dims[i], topo.input_dims[i]));
  for (int i = 0; i < topo.agents(); ++i)
    net.controller_triples.push_back(
        QsrTriple::zero(topo.input_dims[i], topo.output_dims[i]));
  return net;
}

const QsrTriple& NetworkQsr::op(int k) const {
  const int n = static_cast<int>(agent_triples.size());
  return k < n ? agent_triples[k] : controller_triples[k - n];
}
QsrTriple& NetworkQsr::op(int k) {
  const int n = static_cast<int>(agent_triples.size());
  return k < n ? agent_triples[k] : controller_triples[k - n];
}

std::vector<QsrTriple> NetworkQsr::flat() const {
  std::vector<QsrTriple> out = agent_triples;
  out.insert(out.end(), controller_triples.begin(), controller_triples.end());
  return out;
}

double NetworkQsr::dist2(const NetworkQsr& o) const {
  double d = 0.0;
  for (int k = 0; k < ops(); ++k) d += op(k).dist2(o.op(k));
  return d;
}

double NetworkQsr::norm() const {
  double d = 0.0;
  for (int k = 0; k < ops(); ++k) d += op(k).norm();
  return d;
}

MatrixXd ndt_matrix_dense(const std::vector<QsrTriple>& triples,
                          const OperatorNetwork& net) {
  if (static_cast<int>(triples.size()) != net.ops())
    dim_error("ndt_matrix", "need one triple per operator");
  const int L = static_cast<int>(net.H.cols());
  const int M = static_cast<int>(net.H.rows());
  MatrixXd qbar = MatrixXd::Zero(L, L), sbar = MatrixXd::Zero(L, M),
           rbar = MatrixXd::Zero(M, M);
  for (int k = 0; k < net.ops(); ++k) {
    const QsrTriple& t = triples[k];
    const int oo = net.out_offset(k), od = net.out_dims[k];
    const int io = net.in_offset(k), id = net.in_dims[k];
    if (t.l() != od || t.m() != id) {
      std::ostringstream os;
      os << "triple " << k << " has dims (" << t.l() << "," << t.m()
         << "), expected (" << od << "," << id << ")";
      dim_error("ndt_matrix", os.str());
    }
    qbar.block(oo, oo, od, od) = t.Q;
    sbar.block(oo, io, od, id) = t.S;
    rbar.block(io, io, id, id) = t.R;
  }
  const MatrixXd sh = sbar * net.H;
  return symmetrize(qbar + sh + sh.transpose() + net.H.transpose() * rbar * net.H);
}

SymBlockMatrix ndt_matrix(const std::vector<QsrTriple>& triples,
                          const OperatorNetwork& net) {
  const MatrixXd dense = ndt_matrix_dense(triples, net);
  SymBlockMatrix out(net.out_dims);
  for (int i = 0; i < net.ops(); ++i)
    for (int j = 0; j <= i; ++j)
      out.set(i, j, dense.block(net.out_offset(i), net.out_offset(j),
                                net.out_dims[i], net.out_dims[j]));
  return out;
}

MatrixXd ndt_matrix_dense(const NetworkQsr& net, const AugmentedInterconnection& aug) {
  return ndt_matrix_dense(net.flat(), aug.network());
}
SymBlockMatrix ndt_matrix(const NetworkQsr& net, const AugmentedInterconnection& aug) {
  return ndt_matrix(net.flat(), aug.network());
}

NdtCheck ndt_check(const std::vector<QsrTriple>& triples, const OperatorNetwork& net,
                   double margin) {
  if (margin < 0.0) throw std::invalid_argument("ndt_check: margin must be >= 0");
  const double me = max_eig_sym(ndt_matrix_dense(triples, net));
  return NdtCheck{me <= -margin, -me, me};
}
NdtCheck ndt_check(const NetworkQsr& net, const AugmentedInterconnection& aug,
                   double margin) {
  return ndt_check(net.flat(), aug.network(), margin);
}

TripleVars add_triple_vars(ConicProgram& prog, int l, int m, const std::string& tag) {
  TripleVars tv;
  tv.q = prog.add_var(l, l, VarStructure::Symmetric, tag + ".Q");
  tv.s = prog.add_var(l, m, VarStructure::Full, tag + ".S");
  tv.r = prog.add_var(m, m, VarStructure::Symmetric, tag + ".R");
  return tv;
}

QsrTriple triple_value(const SolveReport& rep, const TripleVars& tv) {
  return QsrTriple(symmetrize(rep.value(tv.q)), rep.value(tv.s),
                   symmetrize(rep.value(tv.r)));
}

AffineMatExpr ndt_expr(ConicProgram& prog, const OperatorNetwork& net,
                       const std::vector<TripleVars>& triple_vars) {
  if (static_cast<int>(triple_vars.size()) != net.ops())
    dim_error("ndt_expr", "need one triple per operator");

  BlockExpr be(net.out_dims);
  for (int i = 0; i < net.ops(); ++i) {
    for (int j = 0; j <= i; ++j) {
      AffineMatExpr blk = AffineMatExpr::zero(net.out_dims[i], net.out_dims[j]);
      bool nonzero = false;
      if (i == j) {
        blk += prog.expr(triple_vars[i].q);
        nonzero = true;
      }
      // [Sbar H]_ij = S_i H(in_i, out_j)
      const MatrixXd hij = net.h_block(i, j);
      if (hij.cwiseAbs().maxCoeff() > 0.0) {
        blk += prog.expr(triple_vars[i].s, MatrixXd(), hij);
        nonzero = true;
      }
      // [H' Sbar']_ij = (S_j H(in_j, out_i))'
      const MatrixXd hji = net.h_block(j, i);
      if (i != j && hji.cwiseAbs().maxCoeff() > 0.0) {
        blk += prog.expr(triple_vars[j].s, MatrixXd(), hji).transpose();
        nonzero = true;
      } else if (i == j && hij.cwiseAbs().maxCoeff() > 0.0) {
        // diagonal He(S_i H_ii) term: H_ii = 0 by invariant, unreachable
      }
      // [H' Rbar H]_ij = sum_k H(in_k, out_i)' R_k H(in_k, out_j)
      for (int k = 0; k < net.ops(); ++k) {
        const MatrixXd hki = net.h_block(k, i);
        const MatrixXd hkj = net.h_block(k, j);
        if (hki.cwiseAbs().maxCoeff() > 0.0 && hkj.cwiseAbs().maxCoeff() > 0.0) {
          blk += prog.expr(triple_vars[k].r, hki.transpose(), hkj);
          nonzero = true;
        }
      }
      if (nonzero) be.set(i, j, blk);
    }
  }
  return be.assemble();
}

// ---------------------------------------------------------------------------

ConsensusProjector::ConsensusProjector(AugmentedInterconnection aug,
                                       ProjectorOptions opts)
    : aug_(std::move(aug)), net_(aug_.network()), opts_(opts) {}

NetworkQsr ConsensusProjector::adjoint(const MatrixXd& lam) const {
  NetworkQsr g = NetworkQsr::zero(aug_.topo);
  const MatrixXd lam_ht = lam * net_.H.transpose();
  const MatrixXd h_lam_ht = net_.H * lam_ht;
  for (int k = 0; k < net_.ops(); ++k) {
    const int oo = net_.out_offset(k), od = net_.out_dims[k];
    const int io = net_.in_offset(k), id = net_.in_dims[k];
    QsrTriple& t = g.op(k);
    t.Q = symmetrize(lam.block(oo, oo, od, od));
    t.S = 2.0 * lam_ht.block(oo, io, od, id);
    t.R = symmetrize(h_lam_ht.block(io, io, id, id));
  }
  return g;
}

ProjectionResult ConsensusProjector::project_conic(const NetworkQsr& targets,
                                                   double margin) {
  ProjectionResult res;
  res.status = ProjectionResult::Status::NumericalFailure;
  const int n = aug_.topo.agents();
  ConicProgram prog;
  std::vector<TripleVars> tvars;
  for (int i = 0; i < n; ++i)
    tvars.push_back(add_triple_vars(prog, aug_.topo.output_dims[i],
                                    aug_.topo.input_dims[i], "Z" + std::to_string(i)));
  for (int i = 0; i < n; ++i)
    tvars.push_back(add_triple_vars(prog, aug_.topo.input_dims[i],
                                    aug_.topo.output_dims[i], "Zh" + std::to_string(i)));

  // one epigraph per agent tuple: the six difference blocks are embedded in
  // a block-diagonal expression so a single ||.||_F^2 covers the pair
  for (int i = 0; i < n; ++i) {
    const QsrTriple& ta = targets.agent_triples[i];
    const QsrTriple& tc = targets.controller_triples[i];
    std::vector<AffineMatExpr> diffs = {
        prog.expr(tvars[i].q) - AffineMatExpr{ta.Q},
        prog.expr(tvars[i].s) - AffineMatExpr{ta.S},
        prog.expr(tvars[i].r) - AffineMatExpr{ta.R},
        prog.expr(tvars[n + i].q) - AffineMatExpr{tc.Q},
        prog.expr(tvars[n + i].s) - AffineMatExpr{tc.S},
        prog.expr(tvars[n + i].r) - AffineMatExpr{tc.R}};
    prog.add_quad_objective(block_diag_expr(diffs), 1.0);
  }

  const int dim = aug_.out_dim();
  prog.add_nsd(ndt_expr(prog, net_, tvars) +
               AffineMatExpr{margin * MatrixXd::Identity(dim, dim)});

  auto rep = prog.solve(opts_.solver);
  res.iterations = rep.iterations;
  if (rep.status == SolveStatus::Infeasible) {
    res.status = ProjectionResult::Status::Infeasible;
    res.message = "NDT-feasible set is empty for this topology (Q-set infeasible)";
    return res;
  }
  if (!rep.ok()) {
    res.message = rep.message;
    return res;
  }
  res.z = NetworkQsr::zero(aug_.topo);
  for (int i = 0; i < n; ++i) {
    res.z.agent_triples[i] = triple_value(rep, tvars[i]);
    res.z.controller_triples[i] = triple_value(rep, tvars[n + i]);
  }
  res.ndt_max_eig = max_eig_sym(ndt_matrix_dense(res.z, aug_));
  res.status = ProjectionResult::Status::Ok;
  return res;
}

ProjectionResult ConsensusProjector::project_dual(const NetworkQsr& targets) {
  ProjectionResult res;
  res.status = ProjectionResult::Status::NumericalFailure;
  const int dim = aug_.out_dim();
  const double margin = opts_.margin;

  if (lipschitz_ <= 0.0) {
    // power iteration on A A*
    MatrixXd lam = MatrixXd::Identity(dim, dim);
    double nrm = 1.0;
    for (int it = 0; it < 30; ++it) {
      const MatrixXd next = ndt_matrix_dense(adjoint(lam), aug_);
      nrm = next.norm();
      if (nrm <= 0.0) break;
      lam = next / nrm;
    }
    lipschitz_ = std::max(1e-12, 0.5 * nrm) * 1.05;
  }
  if (lambda_warm_.rows() != dim) lambda_warm_ = MatrixXd::Zero(dim, dim);

  const MatrixXd m0 =
      ndt_matrix_dense(targets, aug_) + margin * MatrixXd::Identity(dim, dim);
  const double scale = std::max(1.0, m0.norm());

  auto primal_of = [&](const NetworkQsr& grad_half) {
    NetworkQsr v = targets;
    for (int k = 0; k < v.ops(); ++k) {
      v.op(k).Q -= 0.5 * grad_half.op(k).Q;
      v.op(k).S -= 0.5 * grad_half.op(k).S;
      v.op(k).R -= 0.5 * grad_half.op(k).R;
    }
    return v;
  };

  MatrixXd lam = lambda_warm_, lam_prev = lambda_warm_, yk = lambda_warm_;
  double tk = 1.0;
  const double step = 1.0 / lipschitz_;
  int it = 0;
  for (; it < opts_.dual_max_iterations; ++it) {
    const NetworkQsr aty = adjoint(yk);
    const MatrixXd grad =
        m0 - 0.5 * ndt_matrix_dense(aty, aug_);  // gradient of the dual at yk
    lam_prev = lam;
    lam = -clip_max_eig(-(yk + step * grad), 0.0);  // projection onto the PSD cone
    const double tnext = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
    MatrixXd ynext = lam + ((tk - 1.0) / tnext) * (lam - lam_prev);
    // gradient restart
    if ((grad.array() * (lam - lam_prev).array()).sum() < 0.0) {
      ynext = lam;
      tk = 1.0;
    } else {
      tk = tnext;
    }
    yk = ynext;

    if (it % 10 == 0 || it + 1 == opts_.dual_max_iterations) {
      const NetworkQsr v = primal_of(adjoint(lam));
      const MatrixXd mv =
          ndt_matrix_dense(v, aug_) + margin * MatrixXd::Identity(dim, dim);
      const double infeas = std::max(0.0, max_eig_sym(mv));
      const double comp = std::abs((lam.array() * mv.array()).sum());
      if (infeas <= 1e-9 * scale &&
          comp <= std::max(opts_.dual_tol, 1e-9) * scale * scale) {
        lambda_warm_ = lam;
        res.z = v;
        if (infeas > 0.0 && have_anchor_) {
          // nudge toward a strictly feasible anchor; the constraint is affine,
          // so the convex combination is exactly feasible
          const double gap_a =
              -(max_eig_sym(ndt_matrix_dense(anchor_, aug_)) + margin);
          if (gap_a > 0.0) {
            const double theta = infeas / (infeas + gap_a);
            for (int k = 0; k < res.z.ops(); ++k) {
              res.z.op(k).Q = (1.0 - theta) * res.z.op(k).Q + theta * anchor_.op(k).Q;
              res.z.op(k).S = (1.0 - theta) * res.z.op(k).S + theta * anchor_.op(k).S;
              res.z.op(k).R = (1.0 - theta) * res.z.op(k).R + theta * anchor_.op(k).R;
            }
          }
        }
        res.iterations = it + 1;
        res.ndt_max_eig = max_eig_sym(ndt_matrix_dense(res.z, aug_));
        res.status = ProjectionResult::Status::Ok;
        return res;
      }
    }
  }
  res.iterations = it;
  res.message = "dual projection did not converge";
  return res;
}

ProjectionResult ConsensusProjector::project(const NetworkQsr& targets) {
  switch (opts_.method) {
    case ProjectionMethod::Conic:
      return project_conic(targets, opts_.margin);
    case ProjectionMethod::Dual: {
      auto res = project_dual(targets);
      if (!res.ok()) return project_conic(targets, opts_.margin);
      return res;
    }
    case ProjectionMethod::Auto:
      break;
  }
  if (!first_call_done_) {
    // first call goes through the conic path: reliable infeasibility
    // certificates, plus a strictly feasible anchor for later polish steps
    auto res = project_conic(targets, opts_.margin);
    if (res.ok()) {
      first_call_done_ = true;
      auto anch = project_conic(NetworkQsr::zero(aug_.topo), opts_.margin + 1.0);
      if (anch.ok()) {
        anchor_ = anch.z;
        have_anchor_ = true;
      }
    }
    return res;
  }
  auto res = project_dual(targets);
  if (!res.ok()) res = project_conic(targets, opts_.margin);
  return res;
}

}  // namespace dissent
