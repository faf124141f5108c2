#include "core/lti.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace dissent {

StateSpace::StateSpace(MatrixXd a, MatrixXd b, MatrixXd c, MatrixXd d)
    : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
  if (A.rows() != A.cols()) dim_error("StateSpace", "A must be square");
  if (B.rows() != A.rows()) dim_error("StateSpace", "B row count must match A");
  if (C.cols() != A.rows()) dim_error("StateSpace", "C column count must match A");
  if (D.rows() != C.rows() || D.cols() != B.cols())
    dim_error("StateSpace", "D must be ny x nu");
}

StateSpace StateSpace::plant(MatrixXd a, MatrixXd b) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.cols());
  return StateSpace(std::move(a), std::move(b), MatrixXd::Identity(n, n),
                    MatrixXd::Zero(n, m));
}

MatrixXd solve_care(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q,
                    const MatrixXd& r) {
  const int n = static_cast<int>(a.rows());
  const int m = static_cast<int>(b.cols());
  if (q.rows() != n || q.cols() != n) dim_error("solve_care", "Q must be n x n");
  if (r.rows() != m || r.cols() != m) dim_error("solve_care", "R must be m x m");

  const MatrixXd r_inv = r.llt().solve(MatrixXd::Identity(m, m));
  const MatrixXd s = b * r_inv * b.transpose();

  MatrixXd ham(2 * n, 2 * n);
  ham.topLeftCorner(n, n) = a;
  ham.topRightCorner(n, n) = -s;
  ham.bottomLeftCorner(n, n) = -q;
  ham.bottomRightCorner(n, n) = -a.transpose();

  Eigen::EigenSolver<MatrixXd> es(ham);
  Eigen::MatrixXcd basis(2 * n, n);
  int found = 0;
  for (int i = 0; i < 2 * n && found < n; ++i) {
    if (es.eigenvalues()[i].real() < 0.0) basis.col(found++) = es.eigenvectors().col(i);
  }
  if (found != n)
    throw std::runtime_error("solve_care: pair appears unstabilizable (stable "
                             "Hamiltonian subspace has wrong dimension)");

  const Eigen::MatrixXcd x1 = basis.topRows(n);
  const Eigen::MatrixXcd x2 = basis.bottomRows(n);
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(x1);
  if (!lu.isInvertible())
    throw std::runtime_error("solve_care: stable subspace basis is singular");
  MatrixXd p = symmetrize((x2 * lu.inverse()).real());

  // Newton-Kleinman polish; each step solves a Lyapunov equation at the
  // current stabilizing gain.
  auto residual = [&](const MatrixXd& pp) {
    return (a.transpose() * pp + pp * a - pp * s * pp + q).norm();
  };
  for (int it = 0; it < 10 && residual(p) > 1e-11; ++it) {
    const MatrixXd k = r_inv * b.transpose() * p;
    const MatrixXd acl = a - b * k;
    if (!is_hurwitz(acl)) break;
    p = solve_lyapunov(acl, q + k.transpose() * r * k);
  }
  if (residual(p) > 1e-8)
    throw std::runtime_error("solve_care: Riccati residual exceeds 1e-8");
  return p;
}

MatrixXd lqr_gain(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q,
                  const MatrixXd& r) {
  const MatrixXd p = solve_care(a, b, q, r);
  const MatrixXd k = r.llt().solve(b.transpose() * p);
  if (!is_hurwitz(a - b * k))
    throw std::runtime_error("lqr_gain: closed loop is not Hurwitz");
  return k;
}

double h2_norm(const StateSpace& sys) {
  if (sys.D.cwiseAbs().maxCoeff() > 0.0)
    throw std::invalid_argument("h2_norm: system must be strictly proper");
  if (!is_hurwitz(sys.A))
    throw std::invalid_argument("h2_norm: A is not Hurwitz, norm is infinite");
  const MatrixXd qo = solve_lyapunov(sys.A, sys.C.transpose() * sys.C);
  const double v = (sys.B.transpose() * qo * sys.B).trace();
  return std::sqrt(std::max(0.0, v));
}

double freq_response_gain(const StateSpace& sys, double omega) {
  const int n = sys.nx();
  Eigen::MatrixXcd jwa =
      std::complex<double>(0.0, omega) * Eigen::MatrixXcd::Identity(n, n) - sys.A;
  Eigen::MatrixXcd g = sys.C * jwa.partialPivLu().solve(
                                   Eigen::MatrixXcd(sys.B.cast<std::complex<double>>())) +
                       sys.D;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(g);
  return svd.singularValues().maxCoeff();
}

namespace {

bool hamiltonian_has_imaginary_eig(const StateSpace& sys, double gamma) {
  const int n = sys.nx();
  MatrixXd h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = sys.A;
  h.topRightCorner(n, n) = sys.B * sys.B.transpose() / (gamma * gamma);
  h.bottomLeftCorner(n, n) = -sys.C.transpose() * sys.C;
  h.bottomRightCorner(n, n) = -sys.A.transpose();
  Eigen::EigenSolver<MatrixXd> es(h, false);
  for (int i = 0; i < 2 * n; ++i) {
    const auto lam = es.eigenvalues()[i];
    if (std::abs(lam.real()) < 1e-8 * (1.0 + std::abs(lam.imag()))) return true;
  }
  return false;
}

}  // namespace

double hinf_norm(const StateSpace& sys, double tol) {
  if (!is_hurwitz(sys.A))
    throw std::invalid_argument("hinf_norm: A is not Hurwitz, norm is infinite");
  if (sys.D.cwiseAbs().maxCoeff() > 0.0)
    throw std::invalid_argument("hinf_norm: D = 0 is assumed");

  double lo = freq_response_gain(sys, 0.0);
  for (int i = -60; i <= 60; ++i)
    lo = std::max(lo, freq_response_gain(sys, std::pow(10.0, i / 10.0)));
  if (lo <= 0.0) return 0.0;

  double hi = 2.0 * lo;
  while (hamiltonian_has_imaginary_eig(sys, hi)) hi *= 2.0;
  lo = std::max(lo * 0.5, 1e-300);
  while (hi - lo > tol * std::max(1.0, lo)) {
    const double mid = 0.5 * (lo + hi);
    if (hamiltonian_has_imaginary_eig(sys, mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

SimulationResult simulate(const StateSpace& sys, const Signal& input,
                          const VectorXd& x0, double t_final, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("simulate: dt must be positive");
  if (x0.size() != sys.nx()) dim_error("simulate", "x0 length must match state dim");
  const int steps = static_cast<int>(std::llround(t_final / dt));

  SimulationResult out;
  out.t.resize(steps + 1);
  out.x.resize(steps + 1, sys.nx());
  out.y.resize(steps + 1, sys.ny());
  out.u.resize(steps + 1, sys.nu());

  auto f = [&](double t, const VectorXd& x) -> VectorXd {
    return sys.A * x + sys.B * input(t);
  };

  VectorXd x = x0;
  for (int k = 0; k <= steps; ++k) {
    const double t = k * dt;
    const VectorXd u = input(t);
    out.t[k] = t;
    out.x.row(k) = x.transpose();
    out.y.row(k) = (sys.C * x + sys.D * u).transpose();
    out.u.row(k) = u.transpose();
    if (!x.allFinite() || x.norm() > 1e12) {
      out.diverged = true;
      out.divergence_time = t;
      out.t.conservativeResize(k + 1);
      out.x.conservativeResize(k + 1, Eigen::NoChange);
      out.y.conservativeResize(k + 1, Eigen::NoChange);
      out.u.conservativeResize(k + 1, Eigen::NoChange);
      return out;
    }
    if (k == steps) break;
    const VectorXd k1 = f(t, x);
    const VectorXd k2 = f(t + 0.5 * dt, x + 0.5 * dt * k1);
    const VectorXd k3 = f(t + 0.5 * dt, x + 0.5 * dt * k2);
    const VectorXd k4 = f(t + dt, x + dt * k3);
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return out;
}

Signal default_disturbance(int dim) {
  return [dim](double t) {
    VectorXd u(dim);
    const double sinc = (t == 0.0) ? 1.0 : std::sin(t) / t;
    for (int j = 0; j < dim; ++j) u[j] = (j % 2 == 0) ? std::exp(-t) : sinc;
    return u;
  };
}

StateSpace UncertainPlant::at(const VectorXd& values) const {
  if (values.size() != static_cast<int>(params.size()))
    dim_error("UncertainPlant::at", "parameter vector length mismatch");
  StateSpace s = nominal;
  for (const auto& e : entries) {
    double f = 0.0;
    switch (e.form) {
      case EntryForm::Linear: f = values[e.param]; break;
      case EntryForm::Inverse: f = 1.0 / values[e.param]; break;
      case EntryForm::Ratio: f = values[e.param] / values[e.param_den]; break;
    }
    MatrixXd& m = (e.matrix == 'A') ? s.A : s.B;
    m(e.row, e.col) = e.coeff * f;
  }
  return s;
}

std::vector<StateSpace> UncertainPlant::vertices() const {
  const int k = static_cast<int>(params.size());
  if (k == 0) return {nominal};
  if (k > 12) throw std::invalid_argument("UncertainPlant: too many parameters");
  std::vector<StateSpace> out;
  out.reserve(1u << k);
  VectorXd v(k);
  for (unsigned mask = 0; mask < (1u << k); ++mask) {
    for (int i = 0; i < k; ++i) {
      const double sign = (mask >> i) & 1u ? 1.0 : -1.0;
      v[i] = params[i].nominal * (1.0 + sign * params[i].fraction);
    }
    out.push_back(at(v));
  }
  return out;
}

std::vector<StateSpace> UncertainPlant::sample(int count, std::mt19937_64& rng) const {
  std::vector<StateSpace> out;
  out.reserve(count);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int k = static_cast<int>(params.size());
  VectorXd v(k);
  for (int s = 0; s < count; ++s) {
    for (int i = 0; i < k; ++i)
      v[i] = params[i].nominal * (1.0 + u(rng) * params[i].fraction);
    out.push_back(at(v));
  }
  return out;
}

StateSpace assemble_global_closed_loop(const std::vector<StateSpace>& agents,
                                       const std::vector<MatrixXd>& gains,
                                       const GlobalTopologyView& topo) {
  if (agents.size() != gains.size())
    dim_error("assemble_global_closed_loop", "one gain per agent required");
  std::vector<MatrixXd> a_blocks, b_blocks, k_blocks;
  int n_total = 0, m_total = 0;
  for (size_t i = 0; i < agents.size(); ++i) {
    a_blocks.push_back(agents[i].A);
    b_blocks.push_back(agents[i].B);
    k_blocks.push_back(gains[i]);
    if (gains[i].rows() != agents[i].nu() || gains[i].cols() != agents[i].nx())
      dim_error("assemble_global_closed_loop",
                "gain " + std::to_string(i) + " must be nu x nx");
    n_total += agents[i].nx();
    m_total += agents[i].nu();
  }
  const MatrixXd a_d = block_diag(a_blocks);
  const MatrixXd b_d = block_diag(b_blocks);
  const MatrixXd k_d = block_diag(k_blocks);
  if (topo.H.rows() != m_total || topo.H.cols() != n_total)
    dim_error("assemble_global_closed_loop", "H must map outputs to agent inputs");
  if (topo.H_tilde.rows() != m_total || topo.H_tilde.cols() != m_total)
    dim_error("assemble_global_closed_loop", "H_tilde must be square on agent inputs");
  if (topo.H_hat.rows() != n_total || topo.H_hat.cols() != n_total)
    dim_error("assemble_global_closed_loop", "H_hat must be square on agent outputs");

  const MatrixXd kh = k_d * topo.H_hat;
  MatrixXd a_g = a_d + b_d * topo.H - b_d * topo.H_tilde * kh;
  MatrixXd b_g = b_d * topo.H_tilde;
  MatrixXd c_g(n_total + m_total, n_total);
  c_g.topRows(n_total) = MatrixXd::Identity(n_total, n_total);
  c_g.bottomRows(m_total) = -kh;
  return StateSpace(std::move(a_g), std::move(b_g), std::move(c_g),
                    MatrixXd::Zero(n_total + m_total, m_total));
}

namespace {
std::vector<std::complex<double>> eigs_of(const MatrixXd& a) {
  Eigen::EigenSolver<MatrixXd> es(a, false);
  std::vector<std::complex<double>> out(a.rows());
  for (int i = 0; i < a.rows(); ++i) out[i] = es.eigenvalues()[i];
  return out;
}
}  // namespace

PoleSet pole_scan(const std::vector<UncertainPlant>& plants,
                  const std::vector<MatrixXd>& gains,
                  const GlobalTopologyView& topo, int samples, std::uint64_t seed) {
  PoleSet out;
  std::vector<StateSpace> nominal;
  for (const auto& p : plants) nominal.push_back(p.nominal);
  out.nominal = eigs_of(assemble_global_closed_loop(nominal, gains, topo).A);

  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    std::vector<StateSpace> draw;
    for (const auto& p : plants) draw.push_back(p.sample(1, rng)[0]);
    out.samples.push_back(eigs_of(assemble_global_closed_loop(draw, gains, topo).A));
  }

  size_t max_vertices = 1;
  for (const auto& p : plants)
    max_vertices = std::max(max_vertices, p.vertices().size());
  std::vector<std::vector<StateSpace>> agent_vertices;
  for (const auto& p : plants) agent_vertices.push_back(p.vertices());
  for (size_t v = 0; v < max_vertices; ++v) {
    std::vector<StateSpace> pick;
    for (const auto& verts : agent_vertices) pick.push_back(verts[v % verts.size()]);
    out.vertex_sets.push_back(eigs_of(assemble_global_closed_loop(pick, gains, topo).A));
  }
  return out;
}

}  // namespace dissent
