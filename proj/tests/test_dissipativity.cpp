#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/dissipativity.hpp"

using namespace dissent;

namespace {

StateSpace siso(double a, double b, double c, double d) {
  return StateSpace((MatrixXd(1, 1) << a).finished(), (MatrixXd(1, 1) << b).finished(),
                    (MatrixXd(1, 1) << c).finished(), (MatrixXd(1, 1) << d).finished());
}

QsrTriple scalar_qsr(double q, double s, double r) {
  return QsrTriple((MatrixXd(1, 1) << q).finished(), (MatrixXd(1, 1) << s).finished(),
                   (MatrixXd(1, 1) << r).finished());
}

const StateSpace kIntegrator = siso(0, 1, 1, 0);

}  // namespace

TEST_CASE("kyp matrix of the passive integrator is zero") {
  const auto m = kyp_matrix(kIntegrator, MatrixXd::Ones(1, 1), scalar_qsr(0, 1, 0));
  CHECK(m.assemble().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kyp matrix with R = -I carries a +I block and cannot be NSD") {
  std::mt19937_64 rng(2);
  const int n = 2;
  StateSpace sys(random_stable(rng, n), random_matrix(rng, n, 2),
                 MatrixXd::Identity(n, n), MatrixXd::Zero(n, 2));
  const MatrixXd p = MatrixXd::Identity(n, n);
  QsrTriple qsr = QsrTriple::zero(n, 2);
  qsr.R = -MatrixXd::Identity(2, 2);
  const auto m = kyp_matrix(sys, p, qsr);
  CHECK((m.block(1, 1) - MatrixXd::Identity(2, 2)).norm() == 0.0);
  CHECK(max_eig_sym(m.assemble()) >= 1.0);
}

TEST_CASE("kyp matrix of the L2-gain triple on a lag") {
  const auto m = kyp_matrix(siso(-1, 1, 1, 0), MatrixXd::Ones(1, 1),
                            scalar_qsr(-1, 0, 1));
  MatrixXd expect(2, 2);
  expect << -1, 1, 1, -1;
  CHECK((m.assemble() - expect).norm() < 1e-15);
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(m.assemble());
  CHECK(es.eigenvalues()[0] == doctest::Approx(-2.0));
  CHECK(es.eigenvalues()[1] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("kyp expr matches kyp matrix on random data") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 3);
    const int m = 1 + static_cast<int>(rng() % 2);
    const int l = 1 + static_cast<int>(rng() % 3);
    StateSpace sys(random_matrix(rng, n, n), random_matrix(rng, n, m),
                   random_matrix(rng, l, n), random_matrix(rng, l, m));
    const MatrixXd p = random_symmetric(rng, n);
    QsrTriple qsr(random_symmetric(rng, l), random_matrix(rng, l, m),
                  random_symmetric(rng, m));
    ConicProgram prog;
    const int pv = prog.add_fixed(p, "P");
    const int qv = prog.add_fixed(qsr.Q, "Q");
    const int sv = prog.add_fixed(qsr.S, "S");
    const int rv = prog.add_fixed(qsr.R, "R");
    const MatrixXd got = prog.eval(kyp_expr(prog, sys, pv, qv, sv, rv), {});
    CHECK((got - kyp_matrix(sys, p, qsr).assemble()).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("kyp matrix is affine in P") {
  std::mt19937_64 rng(9);
  const int n = 3, m = 2;
  StateSpace sys(random_matrix(rng, n, n), random_matrix(rng, n, m),
                 MatrixXd::Identity(n, n), MatrixXd::Zero(n, m));
  QsrTriple qsr(random_symmetric(rng, n), random_matrix(rng, n, m),
                random_symmetric(rng, m));
  const MatrixXd p1 = random_symmetric(rng, n), p2 = random_symmetric(rng, n);
  const MatrixXd lhs = kyp_matrix(sys, p1 + p2, qsr).assemble();
  const MatrixXd rhs = kyp_matrix(sys, p1, qsr).assemble() +
                       kyp_matrix(sys, p2, qsr).assemble() -
                       kyp_matrix(sys, MatrixXd::Zero(n, n), qsr).assemble();
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("monotone margin under Q - alpha I") {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 2);
    StateSpace sys(random_stable(rng, n), random_matrix(rng, n, 1),
                   random_matrix(rng, 2, n), MatrixXd::Zero(2, 1));
    const MatrixXd p = random_symmetric(rng, n);
    QsrTriple qsr(random_symmetric(rng, 2), random_matrix(rng, 2, 1),
                  random_symmetric(rng, 1));
    const double alpha = 0.5 + 0.5 * (rng() % 100) / 100.0;
    QsrTriple shifted = qsr;
    shifted.Q -= alpha * MatrixXd::Identity(2, 2);
    const double base = max_eig_sym(kyp_matrix(sys, p, qsr).assemble());
    const double after = max_eig_sym(kyp_matrix(sys, p, shifted).assemble());
    const double bound = alpha * max_eig_sym(sys.C.transpose() * sys.C);
    CHECK(after <= base + bound + 1e-10);
  }
}

TEST_CASE("certify fixed triple on the integrator pins P = 1") {
  const auto out = certify(kIntegrator, CertifyMode::FixedQsr, scalar_qsr(0, 1, 0));
  REQUIRE(out.ok());
  CHECK(out.certificate.P(0, 0) == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(out.certificate.margin >= -1e-8);
}

TEST_CASE("certify bounded-real triple at the true gain") {
  // gain of 1/(s+1) is 1, so (-1, 0, 1) is (boundary) feasible
  const auto out = certify(siso(-1, 1, 1, 0), CertifyMode::FixedQsr,
                           scalar_qsr(-1, 0, 1));
  CHECK(out.ok());
}

TEST_CASE("certify rejects a tiny gain bound on an unstable plant") {
  const auto out = certify(siso(+1, 1, 1, 0), CertifyMode::FixedQsr,
                           scalar_qsr(-1, 0, 0.01));
  CHECK(out.status == CertifyOutcome::Status::Infeasible);
}

TEST_CASE("certify scaled-known on the integrator") {
  const auto out =
      certify(kIntegrator, CertifyMode::ScaledKnown, scalar_qsr(0, 1, 0));
  REQUIRE(out.ok());
  CHECK(out.lambda >= 0.0);
}

TEST_CASE("empirical supply check on the integrator") {
  const Signal decay = [](double t) { return (VectorXd(1) << std::exp(-t)).finished(); };
  const auto ok = empirical_supply_check(kIntegrator, scalar_qsr(0, 1, 0), decay, 10.0);
  CHECK(ok.holds);
  CHECK(ok.final_integral > 0.0);

  const auto bad = empirical_supply_check(kIntegrator, scalar_qsr(0, -1, 0), decay, 10.0);
  CHECK_FALSE(bad.holds);
  CHECK(bad.violation_time > 0.0);

  const Signal zero = [](double) { return VectorXd::Zero(1); };
  const auto triv = empirical_supply_check(kIntegrator, scalar_qsr(0, -1, 0), zero, 5.0);
  CHECK(triv.holds);
  CHECK(triv.final_integral == 0.0);
}

TEST_CASE("free-qsr certificates survive empirical checks") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  int certified = 0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 4);
    const int m = 1 + static_cast<int>(rng() % 2);
    StateSpace sys(random_stable(rng, n, 0.3), random_matrix(rng, n, m),
                   random_matrix(rng, std::max(1, n - 1), n),
                   MatrixXd::Zero(std::max(1, n - 1), m));
    const auto out = certify(sys, CertifyMode::FreeQsr, QsrTriple::zero(sys.ny(), m));
    REQUIRE_MESSAGE(out.ok(), "trial ", trial, ": ", out.message);
    ++certified;
    for (int rep = 0; rep < 10; ++rep) {
      // random decaying L2 input
      const double a1 = u(rng), a2 = u(rng), w = 2.0 * std::abs(u(rng)) + 0.1;
      const double rate = 0.2 + std::abs(u(rng));
      const int mm = m;
      const Signal sig = [=](double t) {
        VectorXd v(mm);
        for (int j = 0; j < mm; ++j)
          v[j] = std::exp(-rate * t) * (a1 * std::sin(w * t + j) + a2);
        return v;
      };
      const auto chk =
          empirical_supply_check(sys, out.certificate.qsr, sig, 25.0, 1e-3, -1e-6);
      CHECK_MESSAGE(chk.holds, "trial ", trial, " input ", rep, " deficit ",
                    chk.deficit);
    }
  }
  CHECK(certified == 20);
}
