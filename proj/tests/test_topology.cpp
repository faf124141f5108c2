#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/lti.hpp"
#include "core/topology.hpp"

using namespace dissent;

namespace {

QsrTriple scalar_qsr(double q, double s, double r) {
  return QsrTriple((MatrixXd(1, 1) << q).finished(), (MatrixXd(1, 1) << s).finished(),
                   (MatrixXd(1, 1) << r).finished());
}

// closed loop of agents y = C x with u = H y + Ht yhat, yhat = -K Hh y
MatrixXd closed_a(const std::vector<StateSpace>& agents,
                  const std::vector<MatrixXd>& gains, const Topology& topo) {
  std::vector<MatrixXd> as, bs, cs, ks;
  for (const auto& a : agents) {
    as.push_back(a.A);
    bs.push_back(a.B);
    cs.push_back(a.C);
  }
  for (const auto& k : gains) ks.push_back(k);
  const MatrixXd ad = block_diag(as), bd = block_diag(bs), cd = block_diag(cs);
  if (gains.empty()) return ad + bd * topo.H * cd;
  const MatrixXd kd = block_diag(ks);
  return ad + bd * (topo.H - topo.H_tilde * kd * topo.H_hat) * cd;
}

}  // namespace

TEST_CASE("assemble_hbar single SISO agent") {
  Topology topo({1}, {1}, MatrixXd::Zero(1, 1), MatrixXd::Ones(1, 1),
                MatrixXd::Ones(1, 1));
  const auto aug = assemble_hbar(topo);
  MatrixXd expect(2, 2);
  expect << 0, 1, 1, 0;
  CHECK((aug.H_bar - expect).norm() == 0.0);
}

TEST_CASE("nonzero self-feedback block is rejected at construction") {
  MatrixXd h = MatrixXd::Zero(2, 2);
  h(0, 0) = 0.5;  // (H)_00
  CHECK_THROWS(Topology({1, 1}, {1, 1}, h, MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2)));
}

TEST_CASE("uav-like topology: top-left block zero, top-right identity") {
  // 3 agents, 2 inputs, 6 outputs each, H = 0, H_tilde = I
  const int n = 3, m = 2, l = 6;
  Topology topo(std::vector<int>(n, m), std::vector<int>(n, l),
                MatrixXd::Zero(n * m, n * l), MatrixXd::Identity(n * m, n * m),
                MatrixXd::Identity(n * l, n * l));
  const auto aug = assemble_hbar(topo);
  CHECK(aug.H_bar.topLeftCorner(n * m, n * l).cwiseAbs().maxCoeff() == 0.0);
  CHECK((aug.H_bar.topRightCorner(n * m, n * m) -
         MatrixXd::Identity(n * m, n * m)).norm() == 0.0);
  CHECK(aug.H_bar.bottomRightCorner(n * l, n * m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ndt matrix with no coupling equals Qbar") {
  OperatorNetwork net({1}, {1}, MatrixXd::Zero(1, 1));
  const auto m = ndt_matrix_dense({scalar_qsr(-2, 0.7, 0.3)}, net);
  CHECK(m(0, 0) == doctest::Approx(-2.0));
  CHECK(ndt_check({scalar_qsr(-1, 0, 0)}, net, 1e-6).stable);
  CHECK(ndt_check({scalar_qsr(-1, 0, 0)}, net, 1e-6).margin == doctest::Approx(1.0));
  CHECK_FALSE(ndt_check({scalar_qsr(0.5, 0, 0)}, net, 1e-6).stable);
}

TEST_CASE("passive pair in negative feedback is marginal") {
  MatrixXd h(2, 2);
  h << 0, -1, 1, 0;
  OperatorNetwork net({1, 1}, {1, 1}, h);
  const std::vector<QsrTriple> passive = {scalar_qsr(0, 0.5, 0), scalar_qsr(0, 0.5, 0)};
  CHECK(ndt_matrix_dense(passive, net).cwiseAbs().maxCoeff() == 0.0);
  const auto chk = ndt_check(passive, net, 1e-6);
  CHECK_FALSE(chk.stable);
  CHECK(chk.max_eig == doctest::Approx(0.0));

  const double eps = 0.1;
  const std::vector<QsrTriple> strict = {scalar_qsr(-eps, 0.5, 0),
                                         scalar_qsr(-eps, 0.5, 0)};
  const MatrixXd m = ndt_matrix_dense(strict, net);
  CHECK((m + eps * MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
  const auto chk2 = ndt_check(strict, net, 1e-6);
  CHECK(chk2.stable);
  CHECK(chk2.margin == doctest::Approx(eps));
}

TEST_CASE("ndt matrix is affine in the triples and scale covariant") {
  std::mt19937_64 rng(3);
  MatrixXd h = random_matrix(rng, 4, 4);
  h.block(0, 0, 2, 2).setZero();
  h.block(2, 2, 2, 2).setZero();
  OperatorNetwork net({2, 2}, {2, 2}, h);
  auto rand_triples = [&]() {
    std::vector<QsrTriple> ts;
    for (int i = 0; i < 2; ++i)
      ts.push_back(QsrTriple(random_symmetric(rng, 2), random_matrix(rng, 2, 2),
                             random_symmetric(rng, 2)));
    return ts;
  };
  const auto t1 = rand_triples(), t2 = rand_triples();
  std::vector<QsrTriple> sum, scaled;
  for (int i = 0; i < 2; ++i) {
    sum.push_back(t1[i] + t2[i]);
    scaled.push_back(t1[i].scaled(3.7));
  }
  const MatrixXd lhs = ndt_matrix_dense(sum, net);
  const MatrixXd rhs = ndt_matrix_dense(t1, net) + ndt_matrix_dense(t2, net);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
  // alpha-scaling scales the matrix; the sign of the extreme eigenvalue is
  // unchanged
  const MatrixXd ls = ndt_matrix_dense(scaled, net);
  CHECK((ls - 3.7 * ndt_matrix_dense(t1, net)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ndt_expr matches dense arithmetic") {
  std::mt19937_64 rng(17);
  const int n = 2;
  Topology topo({1, 2}, {2, 1},
                [&] {
                  MatrixXd h = random_matrix(rng, 3, 3);
                  h.block(0, 0, 1, 2).setZero();
                  h.block(1, 2, 2, 1).setZero();
                  return h;
                }(),
                random_matrix(rng, 3, 3), random_matrix(rng, 3, 3));
  const auto aug = assemble_hbar(topo);
  NetworkQsr net = NetworkQsr::zero(topo);
  for (int k = 0; k < net.ops(); ++k) {
    QsrTriple& t = net.op(k);
    t.Q = random_symmetric(rng, t.l());
    t.S = random_matrix(rng, t.l(), t.m());
    t.R = random_symmetric(rng, t.m());
  }
  ConicProgram prog;
  std::vector<TripleVars> tv;
  std::map<int, MatrixXd> vals;
  for (int k = 0; k < 2 * n; ++k) {
    const QsrTriple& t = net.op(k);
    tv.push_back(add_triple_vars(prog, t.l(), t.m(), "t" + std::to_string(k)));
    vals[tv.back().q] = t.Q;
    vals[tv.back().s] = t.S;
    vals[tv.back().r] = t.R;
  }
  const MatrixXd got = prog.eval(ndt_expr(prog, aug.network(), tv), vals);
  CHECK((got - ndt_matrix_dense(net, aug)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("consensus projection leaves a feasible point unchanged") {
  // decoupled network: feasibility is per-block eigenvalue clipping
  Topology topo({1}, {2}, MatrixXd::Zero(1, 2), MatrixXd::Zero(1, 1),
                MatrixXd::Zero(2, 2));
  const auto aug = assemble_hbar(topo);
  NetworkQsr target = NetworkQsr::zero(topo);
  target.agent_triples[0].Q = -MatrixXd::Identity(2, 2);
  target.agent_triples[0].S = (MatrixXd(2, 1) << 0.3, -0.2).finished();
  target.agent_triples[0].R = (MatrixXd(1, 1) << 0.9).finished();
  target.controller_triples[0].Q = -0.5 * MatrixXd::Identity(1, 1);
  ConsensusProjector proj(aug, {});
  const auto res = proj.project(target);
  REQUIRE(res.ok());
  CHECK(std::sqrt(res.z.dist2(target)) < 1e-6);
}

TEST_CASE("decoupled projection reduces to eigenvalue clipping") {
  Topology topo({1}, {2}, MatrixXd::Zero(1, 2), MatrixXd::Zero(1, 1),
                MatrixXd::Zero(2, 2));
  const auto aug = assemble_hbar(topo);
  NetworkQsr target = NetworkQsr::zero(topo);
  target.agent_triples[0].Q = MatrixXd::Identity(2, 2);  // infeasible: must clip
  target.agent_triples[0].S = (MatrixXd(2, 1) << 1.0, 2.0).finished();
  target.controller_triples[0].Q = (MatrixXd(1, 1) << 0.25).finished();
  const double margin = 1e-6;
  ProjectorOptions opts;
  opts.margin = margin;
  ConsensusProjector proj(aug, opts);
  const auto res = proj.project(target);
  REQUIRE(res.ok());
  // Q components clip to -margin I, S/R unconstrained stay put
  CHECK((res.z.agent_triples[0].Q - (-margin) * MatrixXd::Identity(2, 2))
            .cwiseAbs()
            .maxCoeff() < 1e-5);
  CHECK((res.z.agent_triples[0].S - target.agent_triples[0].S).cwiseAbs().maxCoeff() <
        1e-5);
  CHECK(res.z.controller_triples[0].Q(0, 0) == doctest::Approx(-margin).epsilon(1e-3));
  CHECK(res.ndt_max_eig <= -margin + 1e-7);
}

TEST_CASE("projection of the marginal passive pair beats the margin") {
  // two SISO agents coupled through H, zero controller channel matrices
  MatrixXd h(2, 2);
  h << 0, -1, 1, 0;
  Topology topo({1, 1}, {1, 1}, h, MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 2));
  const auto aug = assemble_hbar(topo);
  NetworkQsr target = NetworkQsr::zero(topo);
  target.agent_triples[0] = scalar_qsr(0, 0.5, 0);
  target.agent_triples[1] = scalar_qsr(0, 0.5, 0);
  ProjectorOptions opts;
  opts.margin = 1e-6;
  ConsensusProjector proj(aug, opts);
  const auto res = proj.project(target);
  REQUIRE(res.ok());
  CHECK(res.ndt_max_eig <= -opts.margin + 1e-8);
  // and projecting the projection is a fixed point
  const auto res2 = proj.project(res.z);
  REQUIRE(res2.ok());
  CHECK(std::sqrt(res2.z.dist2(res.z)) < 1e-6);
}

TEST_CASE("dual and conic projections agree") {
  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 2;
    std::vector<int> in(n, 1), out(n, 2);
    MatrixXd h = 0.3 * random_matrix(rng, 2, 4);
    h.block(0, 0, 1, 2).setZero();
    h.block(1, 2, 1, 2).setZero();
    Topology topo(in, out, h, 0.3 * random_matrix(rng, 2, 2),
                  0.3 * random_matrix(rng, 4, 4));
    const auto aug = assemble_hbar(topo);
    NetworkQsr target = NetworkQsr::zero(topo);
    for (int k = 0; k < target.ops(); ++k) {
      QsrTriple& t = target.op(k);
      t.Q = random_symmetric(rng, t.l());
      t.S = random_matrix(rng, t.l(), t.m());
      t.R = random_symmetric(rng, t.m());
    }
    ProjectorOptions oc;
    oc.method = ProjectionMethod::Conic;
    ProjectorOptions od;
    od.method = ProjectionMethod::Dual;
    od.dual_tol = 1e-12;
    ConsensusProjector pc(aug, oc), pd(aug, od);
    const auto rc = pc.project(target);
    const auto rd = pd.project(target);
    REQUIRE(rc.ok());
    REQUIRE(rd.ok());
    CHECK(std::sqrt(rc.z.dist2(rd.z)) < 2e-4 * std::max(1.0, std::sqrt(target.dist2(NetworkQsr::zero(topo)))));
    CHECK(rd.ndt_max_eig <= -od.margin * 0.5);
  }
}

TEST_CASE("ndt implies a Hurwitz closed loop at desk scale") {
  std::mt19937_64 rng(31);
  int done = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const int n_agents = 3;
    std::vector<StateSpace> agents;
    std::vector<QsrTriple> triples;
    std::vector<int> in, out;
    for (int i = 0; i < n_agents; ++i) {
      const int n = 2 + static_cast<int>(rng() % 2);
      StateSpace sys = StateSpace::plant(random_stable(rng, n, 0.3),
                                         random_matrix(rng, n, 1));
      const double gain = hinf_norm(sys);
      // bounded-real triple, slightly inflated
      QsrTriple t = QsrTriple::zero(n, 1);
      t.Q = -MatrixXd::Identity(n, n);
      t.R = (1.1 * gain) * (1.1 * gain) * MatrixXd::Identity(1, 1);
      const auto cert = certify(sys, CertifyMode::FixedQsr, t);
      REQUIRE(cert.ok());
      agents.push_back(sys);
      triples.push_back(t);
      in.push_back(1);
      out.push_back(n);
    }
    // couple the outputs with a scaled random H so the NDT test passes
    const int mt = 3, lt = static_cast<int>(agents[0].nx() + agents[1].nx() +
                                            agents[2].nx());
    MatrixXd h = random_matrix(rng, mt, lt);
    int io = 0, oo = 0;
    for (int i = 0; i < n_agents; ++i) {
      h.block(i, oo, 1, agents[i].nx()).setZero();
      oo += agents[i].nx();
      io += 1;
    }
    OperatorNetwork net(in, out, 1e-3 * h);
    // grow the coupling until just below the NDT boundary
    double lo = 0.0, hi = 1e-3;
    while (ndt_check(triples, OperatorNetwork(in, out, hi * h / 1e-3), 1e-6).stable &&
           hi < 1e3)
      hi *= 2.0;
    const double scale = 0.4 * hi / 1e-3;
    OperatorNetwork coupled(in, out, scale * 1e-3 * h);
    (void)lo;
    const auto chk = ndt_check(triples, coupled, 1e-6);
    REQUIRE(chk.stable);
    // closed loop: u = H y, y = x
    std::vector<MatrixXd> as, bs;
    for (const auto& a : agents) {
      as.push_back(a.A);
      bs.push_back(a.B);
    }
    const MatrixXd acl = block_diag(as) + block_diag(bs) * coupled.H;
    CHECK_MESSAGE(spectral_abscissa(acl) < 0.0, "trial ", trial, " margin ",
                  chk.margin);
    ++done;
  }
  CHECK(done == 25);
}
