#include "core/solver.hpp"
#include <cstdio>

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

namespace dissent {

namespace {

constexpr double kStepBackoff = 0.99;

struct ConeLayout {
  int eq = 0;        // leading equality rows (zero cone)
  int nn = 0;        // nonnegative orthant
  std::vector<int> soc;
  std::vector<int> psd;        // matrix orders
  std::vector<int> soc_off;    // offsets into the cone part (after eq removed)
  std::vector<int> psd_off;
  int cone_rows = 0;           // scaled rows (everything but eq)
  int rank = 0;                // Jordan rank

  explicit ConeLayout(const ConeDims& d) {
    eq = d.zero;
    nn = d.nonneg;
    soc = d.soc;
    psd = d.psd;
    int off = nn;
    for (int q : soc) {
      soc_off.push_back(off);
      off += q;
    }
    for (int n : psd) {
      psd_off.push_back(off);
      off += svec_dim(n);
    }
    cone_rows = off;
    rank = nn + 2 * static_cast<int>(soc.size());
    for (int n : psd) rank += n;
  }

  VectorXd identity() const {
    VectorXd e = VectorXd::Zero(cone_rows);
    e.head(nn).setOnes();
    for (size_t i = 0; i < soc.size(); ++i) e[soc_off[i]] = 1.0;
    for (size_t i = 0; i < psd.size(); ++i) {
      const int n = psd[i];
      int k = psd_off[i];
      for (int j = 0; j < n; ++j) {
        e[k] = 1.0;
        k += n - j;
      }
    }
    return e;
  }
};

// Nesterov-Todd scaling blocks.
struct Scaling {
  VectorXd w_nn;  // elementwise sqrt(s/z)
  struct Soc {
    double eta_sqrt = 1.0;
    VectorXd wbar;
  };
  std::vector<Soc> socs;
  struct Psd {
    MatrixXd R, Rinv;
    VectorXd sigma;  // lambda eigenvalues
  };
  std::vector<Psd> psds;
  VectorXd lambda;
  bool ok = false;
};

VectorXd soc_apply(const Scaling::Soc& sc, const VectorXd& v, bool inverse) {
  const int d = static_cast<int>(v.size());
  const double w0 = sc.wbar[0];
  VectorXd w1 = sc.wbar.tail(d - 1);
  if (inverse) w1 = -w1;
  const double a = w0 * v[0] + w1.dot(v.tail(d - 1));
  VectorXd out(d);
  out[0] = a;
  out.tail(d - 1) = v.tail(d - 1) + (v[0] + w1.dot(v.tail(d - 1)) / (1.0 + w0)) * w1;
  const double f = inverse ? 1.0 / sc.eta_sqrt : sc.eta_sqrt;
  return f * out;
}

enum class WMode { W, WT, Winv, WinvT };

VectorXd apply_scaling(const Scaling& sc, const ConeLayout& L, const VectorXd& v,
                       WMode mode) {
  VectorXd out(L.cone_rows);
  const bool inv = (mode == WMode::Winv || mode == WMode::WinvT);
  for (int i = 0; i < L.nn; ++i)
    out[i] = inv ? v[i] / sc.w_nn[i] : v[i] * sc.w_nn[i];
  for (size_t k = 0; k < L.soc.size(); ++k) {
    const int o = L.soc_off[k], d = L.soc[k];
    out.segment(o, d) = soc_apply(sc.socs[k], v.segment(o, d), inv);
  }
  for (size_t k = 0; k < L.psd.size(); ++k) {
    const int o = L.psd_off[k], n = L.psd[k];
    const MatrixXd m = unsvec(v.segment(o, svec_dim(n)), n);
    const auto& P = sc.psds[k];
    MatrixXd r;
    switch (mode) {
      case WMode::W: r = P.R.transpose() * m * P.R; break;
      case WMode::WT: r = P.R * m * P.R.transpose(); break;
      case WMode::Winv: r = P.Rinv.transpose() * m * P.Rinv; break;
      case WMode::WinvT: r = P.Rinv * m * P.Rinv.transpose(); break;
    }
    out.segment(o, svec_dim(n)) = svec(symmetrize(r));
  }
  return out;
}

Scaling compute_scaling(const ConeLayout& L, const VectorXd& s, const VectorXd& z) {
  Scaling sc;
  sc.w_nn.resize(L.nn);
  sc.lambda.resize(L.cone_rows);
  for (int i = 0; i < L.nn; ++i) {
    if (s[i] <= 0.0 || z[i] <= 0.0) return sc;
    sc.w_nn[i] = std::sqrt(s[i] / z[i]);
    sc.lambda[i] = std::sqrt(s[i] * z[i]);
  }
  for (size_t k = 0; k < L.soc.size(); ++k) {
    const int o = L.soc_off[k], d = L.soc[k];
    const VectorXd sv = s.segment(o, d), zv = z.segment(o, d);
    const double rs = sv[0] * sv[0] - sv.tail(d - 1).squaredNorm();
    const double rz = zv[0] * zv[0] - zv.tail(d - 1).squaredNorm();
    if (rs <= 0.0 || rz <= 0.0 || sv[0] <= 0.0 || zv[0] <= 0.0) return sc;
    const VectorXd sb = sv / std::sqrt(rs), zb = zv / std::sqrt(rz);
    const double g =
        std::sqrt(0.5 * (1.0 + sb[0] * zb[0] + sb.tail(d - 1).dot(zb.tail(d - 1))));
    Scaling::Soc sk;
    sk.wbar.resize(d);
    sk.wbar[0] = (sb[0] + zb[0]) / (2.0 * g);
    sk.wbar.tail(d - 1) = (sb.tail(d - 1) - zb.tail(d - 1)) / (2.0 * g);
    sk.eta_sqrt = std::pow(rs / rz, 0.25);
    sc.socs.push_back(sk);
    // lambda = W z
    sc.lambda.segment(o, d) = soc_apply(sc.socs.back(), zv, false);
  }
  for (size_t k = 0; k < L.psd.size(); ++k) {
    const int o = L.psd_off[k], n = L.psd[k];
    const MatrixXd sm = unsvec(s.segment(o, svec_dim(n)), n);
    const MatrixXd zm = unsvec(z.segment(o, svec_dim(n)), n);
    Eigen::LLT<MatrixXd> ls(sm), lz(zm);
    if (ls.info() != Eigen::Success || lz.info() != Eigen::Success) return sc;
    const MatrixXd Ls = ls.matrixL();
    const MatrixXd Lz = lz.matrixL();
    Eigen::JacobiSVD<MatrixXd> svd(Lz.transpose() * Ls,
                                   Eigen::ComputeFullU | Eigen::ComputeFullV);
    const VectorXd sig = svd.singularValues();
    if (sig.minCoeff() <= 0.0) return sc;
    Scaling::Psd pk;
    pk.sigma = sig;
    const VectorXd si = sig.cwiseSqrt().cwiseInverse();
    pk.R = Ls * svd.matrixV() * si.asDiagonal();
    pk.Rinv = si.asDiagonal() * svd.matrixU().transpose() * Lz.transpose();
    sc.psds.push_back(pk);
    MatrixXd lam = MatrixXd::Zero(n, n);
    lam.diagonal() = sig;
    sc.lambda.segment(o, svec_dim(n)) = svec(lam);
  }
  sc.ok = true;
  return sc;
}

// Jordan product u o v per cone.
VectorXd jordan_mul(const ConeLayout& L, const VectorXd& u, const VectorXd& v) {
  VectorXd out(L.cone_rows);
  for (int i = 0; i < L.nn; ++i) out[i] = u[i] * v[i];
  for (size_t k = 0; k < L.soc.size(); ++k) {
    const int o = L.soc_off[k], d = L.soc[k];
    out[o] = u.segment(o, d).dot(v.segment(o, d));
    out.segment(o + 1, d - 1) =
        u[o] * v.segment(o + 1, d - 1) + v[o] * u.segment(o + 1, d - 1);
  }
  for (size_t k = 0; k < L.psd.size(); ++k) {
    const int o = L.psd_off[k], n = L.psd[k];
    const MatrixXd um = unsvec(u.segment(o, svec_dim(n)), n);
    const MatrixXd vm = unsvec(v.segment(o, svec_dim(n)), n);
    out.segment(o, svec_dim(n)) = svec(0.5 * (um * vm + vm * um));
  }
  return out;
}

// Solves lambda o x = d.
VectorXd jordan_div(const ConeLayout& L, const Scaling& sc, const VectorXd& d) {
  VectorXd out(L.cone_rows);
  for (int i = 0; i < L.nn; ++i) out[i] = d[i] / sc.lambda[i];
  for (size_t k = 0; k < L.soc.size(); ++k) {
    const int o = L.soc_off[k], dd = L.soc[k];
    const double l0 = sc.lambda[o];
    const VectorXd l1 = sc.lambda.segment(o + 1, dd - 1);
    const VectorXd d1 = d.segment(o + 1, dd - 1);
    const double det = l0 * l0 - l1.squaredNorm();
    const double x0 = (l0 * d[o] - l1.dot(d1)) / det;
    out[o] = x0;
    out.segment(o + 1, dd - 1) = (d1 - x0 * l1) / l0;
  }
  for (size_t k = 0; k < L.psd.size(); ++k) {
    const int o = L.psd_off[k], n = L.psd[k];
    const MatrixXd dm = unsvec(d.segment(o, svec_dim(n)), n);
    const VectorXd& sig = sc.psds[k].sigma;
    MatrixXd x(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) x(i, j) = 2.0 * dm(i, j) / (sig[i] + sig[j]);
    out.segment(o, svec_dim(n)) = svec(symmetrize(x));
  }
  return out;
}

// Largest alpha with v + alpha d in the cone, v strictly interior.
double max_step(const ConeLayout& L, const VectorXd& v, const VectorXd& d) {
  double amax = std::numeric_limits<double>::infinity();
  for (int i = 0; i < L.nn; ++i)
    if (d[i] < 0.0) amax = std::min(amax, -v[i] / d[i]);
  for (size_t k = 0; k < L.soc.size(); ++k) {
    const int o = L.soc_off[k], dd = L.soc[k];
    const double a = d[o] * d[o] - d.segment(o + 1, dd - 1).squaredNorm();
    const double b =
        2.0 * (v[o] * d[o] - v.segment(o + 1, dd - 1).dot(d.segment(o + 1, dd - 1)));
    const double c = v[o] * v[o] - v.segment(o + 1, dd - 1).squaredNorm();
    // earliest positive root of a t^2 + b t + c = 0
    double root = std::numeric_limits<double>::infinity();
    const double disc = b * b - 4.0 * a * c;
    if (std::abs(a) < 1e-300) {
      if (b < 0.0) root = -c / b;
    } else if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double r1 = (-b - sq) / (2.0 * a), r2 = (-b + sq) / (2.0 * a);
      for (double r : {std::min(r1, r2), std::max(r1, r2)})
        if (r > 0.0) {
          root = r;
          break;
        }
      if (a > 0.0 && b >= 0.0) root = std::numeric_limits<double>::infinity();
    }
    if (d[o] < 0.0) root = std::min(root, -v[o] / d[o]);
    amax = std::min(amax, root);
  }
  for (size_t k = 0; k < L.psd.size(); ++k) {
    const int o = L.psd_off[k], n = L.psd[k];
    const MatrixXd vm = unsvec(v.segment(o, svec_dim(n)), n);
    const MatrixXd dm = unsvec(d.segment(o, svec_dim(n)), n);
    Eigen::LLT<MatrixXd> llt(vm);
    if (llt.info() != Eigen::Success) return 0.0;
    const MatrixXd Lm = llt.matrixL();
    const MatrixXd m = Lm.triangularView<Eigen::Lower>().solve(
        MatrixXd(Lm.triangularView<Eigen::Lower>()
                     .solve(dm)
                     .transpose()))
                           .transpose();
    const double emin = min_eig_sym(symmetrize(m));
    if (emin < 0.0) amax = std::min(amax, -1.0 / emin);
  }
  return amax;
}

struct Kkt {
  // capacity for [H A'; A 0] with H = Gs'Gs (+reg)
  Eigen::LLT<MatrixXd> hllt;
  MatrixXd h;
  MatrixXd a;                 // equality rows
  MatrixXd ah_inv_at;         // A H^-1 A'
  Eigen::LLT<MatrixXd> sllt;  // schur factor
  bool ok = false;
};

}  // namespace

SolveReport HsdeSolver::solve_lowered(const LoweredConic& prob,
                                      const SolverOptions& opts) const {
  SolveReport rep;
  const ConeLayout L(prob.dims);
  const int p = static_cast<int>(prob.c.size());
  const int m_all = static_cast<int>(prob.h.size());
  const int me = L.eq;
  const int mc = L.cone_rows;
  if (m_all != me + mc) {
    rep.message = "inconsistent cone dimensions";
    return rep;
  }
  if (mc == 0) {
    rep.message = "program has no conic constraints";
    return rep;
  }

  const MatrixXd A = prob.G.topRows(me);
  const MatrixXd G = prob.G.bottomRows(mc);
  const VectorXd b = prob.h.head(me);
  const VectorXd h = prob.h.tail(mc);
  const VectorXd& c = prob.c;

  const VectorXd e = L.identity();

  // ---- scaled KKT solve machinery -------------------------------------
  MatrixXd gs;  // W^-T G
  Kkt kkt;

  auto factor = [&](const Scaling& sc) -> bool {
    gs.resize(mc, p);
    for (int j = 0; j < p; ++j)
      gs.col(j) = apply_scaling(sc, L, G.col(j), WMode::WinvT);
    kkt.h.noalias() = gs.transpose() * gs;
    double reg = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
      MatrixXd hreg = kkt.h;
      if (reg > 0.0) hreg.diagonal().array() += reg;
      kkt.hllt.compute(hreg);
      if (kkt.hllt.info() == Eigen::Success) {
        if (me > 0) {
          kkt.a = A;
          MatrixXd hia = kkt.hllt.solve(A.transpose());
          kkt.ah_inv_at.noalias() = A * hia;
          kkt.sllt.compute(kkt.ah_inv_at);
          if (kkt.sllt.info() != Eigen::Success) {
            reg = (reg == 0.0) ? 1e-12 : reg * 100.0;
            continue;
          }
        }
        kkt.ok = true;
        return true;
      }
      reg = (reg == 0.0) ? 1e-12 : reg * 100.0;
    }
    return false;
  };

  // Solves K [dx;dy;dz] = [bx;by;bz] with K = [[0 A' G'],[A 0 0],[G 0 -W'W]],
  // with two rounds of iterative refinement to hold accuracy at small mu.
  auto raw_solve = [&](const Scaling& sc, const VectorXd& bx, const VectorXd& by,
                       const VectorXd& bz, VectorXd& dx, VectorXd& dy,
                       VectorXd& dz) {
    const VectorXd bzs = apply_scaling(sc, L, bz, WMode::WinvT);
    const VectorXd r1 = bx + gs.transpose() * bzs;
    if (me > 0) {
      const VectorXd hi_r1 = kkt.hllt.solve(r1);
      dy = kkt.sllt.solve(kkt.a * hi_r1 - by);
      dx = kkt.hllt.solve(r1 - kkt.a.transpose() * dy);
    } else {
      dy.resize(0);
      dx = kkt.hllt.solve(r1);
    }
    dz = apply_scaling(sc, L, gs * dx - bzs, WMode::Winv);
  };

  auto kkt_solve = [&](const Scaling& sc, const VectorXd& bx, const VectorXd& by,
                       const VectorXd& bz, VectorXd& dx, VectorXd& dy,
                       VectorXd& dz) {
    raw_solve(sc, bx, by, bz, dx, dy, dz);
    for (int round = 0; round < 2; ++round) {
      const VectorXd wwdz =
          apply_scaling(sc, L, apply_scaling(sc, L, dz, WMode::W), WMode::WT);
      const VectorXd e1 =
          bx - ((me ? VectorXd(A.transpose() * dy) : VectorXd::Zero(p)) +
                G.transpose() * dz);
      const VectorXd e2 = me ? VectorXd(by - A * dx) : VectorXd();
      const VectorXd e3 = bz - (G * dx - wwdz);
      if (e1.lpNorm<Eigen::Infinity>() < 1e-14 &&
          e3.lpNorm<Eigen::Infinity>() < 1e-14 &&
          (!me || e2.lpNorm<Eigen::Infinity>() < 1e-14))
        break;
      VectorXd cx, cy, cz;
      raw_solve(sc, e1, e2, e3, cx, cy, cz);
      dx += cx;
      if (me) dy += cy;
      dz += cz;
    }
  };

  // ---- initialization --------------------------------------------------
  VectorXd x(p), y(me), z(mc), s(mc);
  {
    Scaling id;
    id.w_nn = VectorXd::Ones(L.nn);
    id.lambda = e;
    for (size_t k = 0; k < L.soc.size(); ++k) {
      Scaling::Soc sk;
      sk.wbar = VectorXd::Zero(L.soc[k]);
      sk.wbar[0] = 1.0;
      id.socs.push_back(sk);
    }
    for (size_t k = 0; k < L.psd.size(); ++k) {
      Scaling::Psd pk;
      pk.R = MatrixXd::Identity(L.psd[k], L.psd[k]);
      pk.Rinv = pk.R;
      pk.sigma = VectorXd::Ones(L.psd[k]);
      id.psds.push_back(pk);
    }
    id.ok = true;
    if (!factor(id)) {
      rep.message = "initial KKT factorization failed";
      return rep;
    }
    VectorXd dx, dy, dz;
    kkt_solve(id, VectorXd::Zero(p), b, h, dx, dy, dz);
    x = dx;
    s = -dz;  // s = h - Gx at the least-squares point
    VectorXd dx2, dy2, dz2;
    kkt_solve(id, -c, VectorXd::Zero(me), VectorXd::Zero(mc), dx2, dy2, dz2);
    y = dy2;
    z = dz2;
    // shift into the interior: v + (t+1) e with -t the smallest cone eigenvalue
    auto shift_interior = [&](VectorXd& v) {
      const double a = max_step(L, e, -v);
      double t = 0.0;
      if (std::isfinite(a) && a > 0.0) t = 1.0 / a;
      if (t > -0.1) v += (t + 1.0) * e;
    };
    shift_interior(s);
    shift_interior(z);
  }
  double tau = 1.0, kappa = 1.0;

  const double norm_b1 = std::max(1.0, b.size() ? b.norm() : 0.0);
  const double norm_h1 = std::max(1.0, h.norm());
  const double norm_c1 = std::max(1.0, c.norm());
  const double tol = opts.tol;

  rep.status = SolveStatus::IterationLimit;
  VectorXd dx(p), dy(me), dz(mc);
  VectorXd vx(p), vy(me), vz(mc);

  // best-so-far iterate, for recovery when the path stalls near the optimum
  double best_metric = std::numeric_limits<double>::infinity();
  VectorXd best_x;
  double best_tau = 1.0, best_pres = 0.0, best_dres = 0.0, best_gap = 0.0;
  auto finish_stalled = [&](const char* why) -> bool {
    if (best_metric <= 10.0 * tol && best_x.size()) {
      rep.status = SolveStatus::Optimal;
      rep.message = std::string("optimal (stalled: ") + why + ")";
      rep.raw_x = best_x / best_tau;
      rep.objective = c.dot(rep.raw_x) + prob.obj_constant;
      rep.primal_residual = best_pres;
      rep.dual_residual = best_dres;
      rep.gap = best_gap;
      return true;
    }
    return false;
  };

  for (int iter = 0; iter <= opts.max_iterations; ++iter) {
    rep.iterations = iter;
    // residuals of the embedding
    const VectorXd rx = (me ? VectorXd(A.transpose() * y) : VectorXd::Zero(p)) +
                        G.transpose() * z + c * tau;
    const VectorXd ry = me ? VectorXd(A * x - b * tau) : VectorXd();
    const VectorXd rz = G * x + s - h * tau;
    const double rtau = c.dot(x) + (me ? b.dot(y) : 0.0) + h.dot(z) + kappa;
    const double mu = (s.dot(z) + tau * kappa) / (L.rank + 1);

    // convergence metrics at the de-homogenized point
    const double pres = std::max(me ? (A * (x / tau) - b).norm() / norm_b1 : 0.0,
                                 (G * (x / tau) + s / tau - h).norm() / norm_h1);
    const double dres =
        ((me ? VectorXd(A.transpose() * (y / tau)) : VectorXd::Zero(p)) +
         G.transpose() * (z / tau) + c)
            .norm() /
        norm_c1;
    const double pcost = c.dot(x) / tau;
    const double dcost = -((me ? b.dot(y) : 0.0) + h.dot(z)) / tau;
    const double gap = s.dot(z) / (tau * tau);
    const double relgap = gap / std::max({1.0, std::abs(pcost), std::abs(dcost)});

    rep.primal_residual = pres;
    rep.dual_residual = dres;
    rep.gap = relgap;

    if (opts.verbose)
      std::fprintf(stderr,
                   "it %3d pres %9.2e dres %9.2e relgap %9.2e tau %9.2e kappa %9.2e "
                   "mu %9.2e\n",
                   iter, pres, dres, relgap, tau, kappa, mu);

    const double metric = std::max({pres, dres, relgap});
    if (metric < best_metric) {
      best_metric = metric;
      best_x = x;
      best_tau = tau;
      best_pres = pres;
      best_dres = dres;
      best_gap = relgap;
    }

    if (pres <= tol && dres <= tol && relgap <= tol) {
      rep.status = SolveStatus::Optimal;
      rep.message = "optimal";
      rep.raw_x = x / tau;
      rep.objective = c.dot(rep.raw_x) + prob.obj_constant;
      return rep;
    }

    // infeasibility certificates
    const double ip = (me ? b.dot(y) : 0.0) + h.dot(z);
    if (ip < 0.0) {
      const double res = rx.size() ? (rx - c * tau).norm() : 0.0;
      if (res / std::max(1.0, -ip) <= tol * 1e-1 * norm_c1 ||
          (tau <= 1e-6 * std::max(1.0, kappa) && res <= tol * std::max(1.0, -ip))) {
        rep.status = SolveStatus::Infeasible;
        rep.message = "primal infeasibility certificate found";
        return rep;
      }
    }
    const double cx = c.dot(x);
    if (cx < 0.0) {
      const double res = std::max(me ? (A * x).norm() : 0.0, (G * x + s).norm());
      if (res / std::max(1.0, -cx) <= tol * 1e-1 ||
          (tau <= 1e-6 * std::max(1.0, kappa) && res <= tol * std::max(1.0, -cx))) {
        rep.status = SolveStatus::NumericalFailure;
        rep.message = "dual infeasibility certificate (objective unbounded below)";
        return rep;
      }
    }
    if (iter == opts.max_iterations) break;

    const Scaling sc = compute_scaling(L, s, z);
    if (!sc.ok) {
      if (finish_stalled("scaling breakdown")) return rep;
      rep.status = SolveStatus::NumericalFailure;
      rep.message = "NT scaling failed (iterate left the cone)";
      return rep;
    }
    if (!factor(sc)) {
      if (finish_stalled("factorization breakdown")) return rep;
      rep.status = SolveStatus::NumericalFailure;
      rep.message = "KKT factorization failed";
      return rep;
    }

    // constant-rhs solve, reused by both passes
    kkt_solve(sc, -c, b, h, vx, vy, vz);
    const VectorXd wv = apply_scaling(sc, L, vz, WMode::W);

    auto direction = [&](double sigma, const VectorXd& ds_rhs, double dk_rhs,
                         VectorXd& DX, VectorXd& DY, VectorXd& DZ, VectorXd& DS,
                         double& DTAU, double& DKAPPA) -> bool {
      const double oms = 1.0 - sigma;
      const VectorXd dtil = jordan_div(L, sc, ds_rhs);
      const VectorXd wdtil = apply_scaling(sc, L, dtil, WMode::WT);
      VectorXd ux, uy, uz;
      kkt_solve(sc, -oms * rx, me ? VectorXd(-oms * ry) : VectorXd(),
                -oms * rz - wdtil, ux, uy, uz);
      const double den = c.dot(vx) + (me ? b.dot(vy) : 0.0) + h.dot(vz) - kappa / tau;
      if (std::abs(den) < 1e-300) return false;
      const double num = -oms * rtau - dk_rhs / tau -
                         (c.dot(ux) + (me ? b.dot(uy) : 0.0) + h.dot(uz));
      DTAU = num / den;
      DX = ux + DTAU * vx;
      if (me) DY = uy + DTAU * vy;
      DZ = uz + DTAU * vz;
      DS = wdtil - apply_scaling(sc, L, apply_scaling(sc, L, DZ, WMode::W), WMode::WT);
      DKAPPA = (dk_rhs - kappa * DTAU) / tau;
      return true;
    };

    // affine (predictor) pass
    VectorXd ds_aff = -jordan_mul(L, sc.lambda, sc.lambda);
    VectorXd AX, AY, AZ, AS;
    double ATAU, AKAPPA;
    if (!direction(0.0, ds_aff, -tau * kappa, AX, AY, AZ, AS, ATAU, AKAPPA)) {
      rep.status = SolveStatus::NumericalFailure;
      rep.message = "singular homogeneous system";
      return rep;
    }
    const VectorXd as_sc = apply_scaling(sc, L, AS, WMode::WinvT);
    const VectorXd az_sc = apply_scaling(sc, L, AZ, WMode::W);
    double alpha_aff = std::min(max_step(L, sc.lambda, as_sc),
                                max_step(L, sc.lambda, az_sc));
    if (ATAU < 0.0) alpha_aff = std::min(alpha_aff, -tau / ATAU);
    if (AKAPPA < 0.0) alpha_aff = std::min(alpha_aff, -kappa / AKAPPA);
    alpha_aff = std::min(1.0, alpha_aff);

    const double mu_aff = ((s + alpha_aff * AS).dot(z + alpha_aff * AZ) +
                           (tau + alpha_aff * ATAU) * (kappa + alpha_aff * AKAPPA)) /
                          (L.rank + 1);
    double sigma = std::pow(std::max(0.0, std::min(1.0, mu_aff / mu)), 3.0);

    // combined (corrector) pass
    VectorXd ds_comb = -jordan_mul(L, sc.lambda, sc.lambda) + sigma * mu * e -
                       jordan_mul(L, as_sc, az_sc);
    const double dk_comb = -tau * kappa + sigma * mu - ATAU * AKAPPA;
    VectorXd DX, DY, DZ, DS;
    double DTAU, DKAPPA;
    if (!direction(sigma, ds_comb, dk_comb, DX, DY, DZ, DS, DTAU, DKAPPA)) {
      rep.status = SolveStatus::NumericalFailure;
      rep.message = "singular homogeneous system";
      return rep;
    }
    const VectorXd ds_sc = apply_scaling(sc, L, DS, WMode::WinvT);
    const VectorXd dz_sc = apply_scaling(sc, L, DZ, WMode::W);
    double alpha = std::min(max_step(L, sc.lambda, ds_sc),
                            max_step(L, sc.lambda, dz_sc));
    if (DTAU < 0.0) alpha = std::min(alpha, -tau / DTAU);
    if (DKAPPA < 0.0) alpha = std::min(alpha, -kappa / DKAPPA);
    alpha = std::min(1.0, kStepBackoff * alpha);
    if (!std::isfinite(alpha) || alpha <= 1e-10) {
      if (finish_stalled("step length vanished")) return rep;
      rep.status = SolveStatus::NumericalFailure;
      rep.message = "no progress possible (step length vanished)";
      return rep;
    }

    x += alpha * DX;
    if (me) y += alpha * DY;
    z += alpha * DZ;
    s += alpha * DS;
    tau += alpha * DTAU;
    kappa += alpha * DKAPPA;
    if (!x.allFinite() || !z.allFinite() || !s.allFinite() ||
        !std::isfinite(tau) || !std::isfinite(kappa) || tau <= 0.0) {
      rep.status = SolveStatus::NumericalFailure;
      rep.message = "iterate diverged";
      return rep;
    }
  }

  if (finish_stalled("iteration limit")) return rep;
  rep.message = "iteration limit reached";
  rep.raw_x = x / tau;
  rep.objective = c.dot(x) / tau + prob.obj_constant;
  return rep;
}

}  // namespace dissent
