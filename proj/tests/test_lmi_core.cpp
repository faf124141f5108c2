#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "core/lmi.hpp"
#include "core/solver.hpp"

using namespace dissent;

TEST_CASE("svec round trip and isometry") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng() % 12);
    const MatrixXd a = random_symmetric(rng, n);
    const VectorXd v = svec(a);
    CHECK((unsvec(v, n) - a).cwiseAbs().maxCoeff() == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(v.squaredNorm() ==
          doctest::Approx(a.squaredNorm()).epsilon(1e-12));
  }
  // <A,B>_F preserved
  std::mt19937_64 rng2(8);
  const MatrixXd a = random_symmetric(rng2, 5), b = random_symmetric(rng2, 5);
  CHECK(svec(a).dot(svec(b)) == doctest::Approx((a * b).trace()).epsilon(1e-12));
}

TEST_CASE("he operator") {
  ConicProgram prog;
  // he(I2) = 2 I2
  AffineMatExpr i2{MatrixXd::Identity(2, 2)};
  CHECK((prog.eval(he(i2), {}) - 2.0 * MatrixXd::Identity(2, 2)).norm() == 0.0);
  // he([[0,1],[0,0]]) = [[0,1],[1,0]]
  MatrixXd n(2, 2);
  n << 0, 1, 0, 0;
  MatrixXd expect(2, 2);
  expect << 0, 1, 1, 0;
  CHECK((prog.eval(he(AffineMatExpr{n}), {}) - expect).norm() == 0.0);
  // skew-symmetric cancels
  MatrixXd skew(2, 2);
  skew << 0, 3, -3, 0;
  CHECK(prog.eval(he(AffineMatExpr{skew}), {}).norm() == 0.0);
  // non-square rejected
  CHECK_THROWS(he(AffineMatExpr{MatrixXd::Zero(2, 3)}));
}

TEST_CASE("lp basics") {
  // min x s.t. x >= 1
  ConicProgram prog;
  const int x = prog.add_var(1, 1, VarStructure::Full, "x");
  prog.add_linear_objective(prog.expr(x));
  AffineMatExpr c = prog.expr(x) - AffineMatExpr{MatrixXd::Ones(1, 1)};
  prog.add_scalar(c, ConicProgram::Rel::Ge);
  auto rep = prog.solve();
  REQUIRE(rep.ok());
  CHECK(rep.value(x)(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.objective == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("scalar infeasible pair") {
  // x >= 0 and x <= -1
  ConicProgram prog;
  const int x = prog.add_var(1, 1, VarStructure::Full, "x");
  prog.add_scalar(prog.expr(x), ConicProgram::Rel::Ge);
  prog.add_scalar(prog.expr(x) + AffineMatExpr{MatrixXd::Ones(1, 1)},
                  ConicProgram::Rel::Le);
  auto rep = prog.solve();
  CHECK(rep.status == SolveStatus::Infeasible);
}

TEST_CASE("min trace P subject to P >= I") {
  ConicProgram prog;
  const int p = prog.add_var(2, 2, VarStructure::Symmetric, "P");
  // trace objective via 1x1 selector sum
  AffineMatExpr tr = prog.expr(p, MatrixXd::Identity(2, 2).row(0),
                               MatrixXd::Identity(2, 2).col(0)) +
                     prog.expr(p, MatrixXd::Identity(2, 2).row(1),
                               MatrixXd::Identity(2, 2).col(1));
  prog.add_linear_objective(tr);
  prog.add_psd(prog.expr(p) - AffineMatExpr{MatrixXd::Identity(2, 2)});
  auto rep = prog.solve();
  REQUIRE(rep.ok());
  CHECK((rep.value(p) - MatrixXd::Identity(2, 2)).norm() < 1e-6);
  CHECK(rep.objective == doctest::Approx(2.0).epsilon(1e-7));
}

TEST_CASE("symmetric projection of a nonsymmetric target") {
  // min ||X - C||_F^2, X symmetric, C = [[1,2],[0,1]] -> X = [[1,1],[1,1]]
  ConicProgram prog;
  const int x = prog.add_var(2, 2, VarStructure::Symmetric, "X");
  MatrixXd c(2, 2);
  c << 1, 2, 0, 1;
  prog.add_quad_objective(prog.expr(x) - AffineMatExpr{c}, 1.0);
  auto rep = prog.solve();
  REQUIRE(rep.ok());
  MatrixXd expect(2, 2);
  expect << 1, 1, 1, 1;
  CHECK((rep.value(x) - expect).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("strict margin turns a barely-negative point infeasible") {
  // x pinned to -1e-7 by an equality; strict [x] < 0 with margin 1e-6 fails
  ConicProgram prog;
  const int x = prog.add_var(1, 1, VarStructure::Full, "x");
  prog.add_scalar(prog.expr(x) + AffineMatExpr{1e-7 * MatrixXd::Ones(1, 1)},
                  ConicProgram::Rel::Eq);
  prog.add_nsd(prog.expr(x), /*strict=*/true);
  auto rep = prog.solve();
  CHECK(rep.status == SolveStatus::Infeasible);

  // without strictness the same instance is feasible
  ConicProgram prog2;
  const int x2 = prog2.add_var(1, 1, VarStructure::Full, "x");
  prog2.add_scalar(prog2.expr(x2) + AffineMatExpr{1e-7 * MatrixXd::Ones(1, 1)},
                   ConicProgram::Rel::Eq);
  prog2.add_nsd(prog2.expr(x2), /*strict=*/false);
  auto rep2 = prog2.solve();
  CHECK(rep2.ok());
}

TEST_CASE("quadratic objective epigraph") {
  ConicProgram prog;
  const int x = prog.add_var(2, 1, VarStructure::Full, "x");
  MatrixXd c(2, 1);
  c << 3, -4;
  prog.add_quad_objective(prog.expr(x) - AffineMatExpr{c}, 2.0);
  auto rep = prog.solve();
  REQUIRE(rep.ok());
  CHECK((rep.value(x) - c).norm() < 1e-6);
  CHECK(rep.objective == doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("lowering soundness over random feasible programs") {
  std::mt19937_64 rng(42);
  int solved = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 2 + static_cast<int>(rng() % 5);
    const int n = 2 + static_cast<int>(rng() % 4);
    ConicProgram prog;
    std::vector<int> xs;
    for (int i = 0; i < p; ++i) xs.push_back(prog.add_var(1, 1, VarStructure::Full));

    VectorXd xstar = random_matrix(rng, p, 1).col(0);
    std::vector<MatrixXd> fs;
    AffineMatExpr m = AffineMatExpr::zero(n, n);
    MatrixXd f0 = MatrixXd::Zero(n, n);
    for (int i = 0; i < p; ++i) {
      const MatrixXd fi = random_symmetric(rng, n);
      fs.push_back(fi);
      m += prog.scaled_var(xs[i], fi);
      f0 -= xstar[i] * fi;
    }
    const MatrixXd d = random_matrix(rng, n, n);
    f0 += d * d.transpose() + 0.1 * MatrixXd::Identity(n, n);
    m += AffineMatExpr{f0};
    prog.add_psd(m);

    AffineMatExpr obj = AffineMatExpr::zero(1, 1);
    for (int i = 0; i < p; ++i)
      obj += prog.expr(xs[i]).scaled(random_matrix(rng, 1, 1)(0, 0));
    prog.add_linear_objective(obj);
    // box to keep the problem bounded
    for (int i = 0; i < p; ++i) {
      prog.add_scalar(prog.expr(xs[i]) + AffineMatExpr{10.0 * MatrixXd::Ones(1, 1)},
                      ConicProgram::Rel::Ge);
      prog.add_scalar(prog.expr(xs[i]) - AffineMatExpr{10.0 * MatrixXd::Ones(1, 1)},
                      ConicProgram::Rel::Le);
    }

    auto rep = prog.solve();
    REQUIRE_MESSAGE(rep.ok(), "trial ", trial, ": ", rep.message);
    ++solved;
    MatrixXd val = f0;
    for (int i = 0; i < p; ++i) val += rep.value(xs[i])(0, 0) * fs[i];
    CHECK(min_eig_sym(val) >= -1e-6);
  }
  CHECK(solved == 100);
}

TEST_CASE("equality constrained sdp") {
  // min tr(P) s.t. P >= I, P(0,1) = 0.3
  ConicProgram prog;
  const int p = prog.add_var(2, 2, VarStructure::Symmetric, "P");
  MatrixXd e01 = MatrixXd::Zero(1, 2);
  e01(0, 0) = 1.0;
  MatrixXd e1 = MatrixXd::Zero(2, 1);
  e1(1, 0) = 1.0;
  prog.add_scalar(prog.expr(p, e01, e1) - AffineMatExpr{0.3 * MatrixXd::Ones(1, 1)},
                  ConicProgram::Rel::Eq);
  prog.add_psd(prog.expr(p) - AffineMatExpr{MatrixXd::Identity(2, 2)});
  AffineMatExpr tr = prog.expr(p, MatrixXd::Identity(2, 2).row(0),
                               MatrixXd::Identity(2, 2).col(0)) +
                     prog.expr(p, MatrixXd::Identity(2, 2).row(1),
                               MatrixXd::Identity(2, 2).col(1));
  prog.add_linear_objective(tr);
  auto rep = prog.solve();
  REQUIRE(rep.ok());
  CHECK(rep.value(p)(0, 1) == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(min_eig_sym(rep.value(p) - MatrixXd::Identity(2, 2)) > -1e-7);
}

TEST_CASE("env var overrides solver tolerance") {
  setenv("DISSENT_SOLVER_TOL", "1e-4", 1);
  CHECK(effective_solver_tol(1e-8) == doctest::Approx(1e-4));
  unsetenv("DISSENT_SOLVER_TOL");
  CHECK(effective_solver_tol(1e-8) == doctest::Approx(1e-8));
}

TEST_CASE("diag-scalar variable") {
  // lambda * I2 >= I  with min lambda -> 1
  ConicProgram prog;
  const int lam = prog.add_var(2, 2, VarStructure::DiagScalar, "lambda");
  prog.add_psd(prog.expr(lam) - AffineMatExpr{MatrixXd::Identity(2, 2)});
  prog.add_linear_objective(prog.expr(lam, MatrixXd::Identity(2, 2).row(0),
                                      MatrixXd::Identity(2, 2).col(0)));
  auto rep = prog.solve();
  REQUIRE(rep.ok());
  CHECK(rep.value(lam)(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(rep.value(lam)(1, 1) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("block expression assembly and sym block matrix") {
  SymBlockMatrix sbm({2, 1});
  MatrixXd a = MatrixXd::Identity(2, 2);
  sbm.set(0, 0, a);
  MatrixXd off(2, 1);
  off << 5, 6;
  sbm.set(0, 1, off);
  sbm.set(1, 1, 3.0 * MatrixXd::Ones(1, 1));
  const MatrixXd m = sbm.assemble();
  CHECK(m.rows() == 3);
  CHECK(is_symmetric(m));
  CHECK(m(0, 2) == 5.0);
  CHECK(m(2, 1) == 6.0);
  CHECK_THROWS(sbm.set(0, 1, MatrixXd::Zero(1, 1)));
  MatrixXd asym(2, 2);
  asym << 1, 2, 3, 4;
  CHECK_THROWS(sbm.set(0, 0, asym));

  // BlockExpr mirrors the lower triangle
  ConicProgram prog;
  const int x = prog.add_var(2, 1, VarStructure::Full, "x");
  BlockExpr be({2, 1});
  be.set(0, 0, AffineMatExpr{MatrixXd::Identity(2, 2)});
  be.set(1, 0, prog.expr(x).transpose());
  be.set(1, 1, AffineMatExpr{MatrixXd::Zero(1, 1)});
  MatrixXd xv(2, 1);
  xv << 7, 8;
  const MatrixXd val = prog.eval(be.assemble(), {{x, xv}});
  CHECK(val(2, 0) == 7.0);
  CHECK(val(0, 2) == 7.0);
  CHECK(val(2, 1) == 8.0);
  CHECK(is_symmetric(val));
}
