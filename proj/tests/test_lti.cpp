#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "core/lti.hpp"

using namespace dissent;

namespace {

StateSpace scalar_sys(double a) {
  return StateSpace((MatrixXd(1, 1) << a).finished(), MatrixXd::Ones(1, 1),
                    MatrixXd::Ones(1, 1), MatrixXd::Zero(1, 1));
}

}  // namespace

TEST_CASE("lqr scalar analytic") {
  // A=0, B=1, Q=1, R=1: P solves -P^2 + 1 = 0 -> P=1, K=1
  const MatrixXd k = lqr_gain(MatrixXd::Zero(1, 1), MatrixXd::Ones(1, 1),
                              MatrixXd::Ones(1, 1), MatrixXd::Ones(1, 1));
  CHECK(k(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("lqr double integrator") {
  MatrixXd a(2, 2), b(2, 1);
  a << 0, 1, 0, 0;
  b << 0, 1;
  const MatrixXd k = lqr_gain(a, b, MatrixXd::Identity(2, 2), MatrixXd::Ones(1, 1));
  CHECK(k(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(k(0, 1) == doctest::Approx(std::sqrt(3.0)).epsilon(1e-9));
  CHECK(is_hurwitz(a - b * k));
}

TEST_CASE("lqr rejects unstabilizable pair") {
  MatrixXd a(2, 2), b(2, 1);
  a << 1, 0, 0, 2;  // both modes unstable
  b << 0, 0;        // no actuation
  CHECK_THROWS(lqr_gain(a, b, MatrixXd::Identity(2, 2), MatrixXd::Ones(1, 1)));
}

TEST_CASE("h2 norm analytic values") {
  CHECK(h2_norm(scalar_sys(-1.0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-10));
  CHECK(h2_norm(scalar_sys(-2.0)) == doctest::Approx(0.5).epsilon(1e-10));
  // block diagonal: squared norms add
  MatrixXd a = MatrixXd::Zero(2, 2);
  a(0, 0) = -1.0;
  a(1, 1) = -2.0;
  StateSpace sys(a, MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2),
                 MatrixXd::Zero(2, 2));
  CHECK(h2_norm(sys) == doctest::Approx(std::sqrt(0.5 + 0.25)).epsilon(1e-10));
  CHECK_THROWS(h2_norm(scalar_sys(+1.0)));
}

TEST_CASE("h2 norm matches impulse energy") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    StateSpace sys(random_stable(rng, n, 0.5), random_matrix(rng, n, 1),
                   random_matrix(rng, 1, n), MatrixXd::Zero(1, 1));
    // impulse response energy: x0 = B, u = 0
    const auto sim = simulate(sys, [](double) { return VectorXd::Zero(1); },
                              sys.B.col(0), 40.0, 1e-3);
    double energy = 0.0;
    for (int k = 0; k + 1 < sim.t.size(); ++k)
      energy += 0.5e-3 * (sim.y.row(k).squaredNorm() + sim.y.row(k + 1).squaredNorm());
    CHECK(std::sqrt(energy) == doctest::Approx(h2_norm(sys)).epsilon(0.01));
  }
}

TEST_CASE("hinf norm basics") {
  CHECK(hinf_norm(scalar_sys(-1.0)) == doctest::Approx(1.0).epsilon(1e-6));
  // gain scaling
  StateSpace sys2((MatrixXd(1, 1) << -1.0).finished(), MatrixXd::Ones(1, 1),
                  2.0 * MatrixXd::Ones(1, 1), MatrixXd::Zero(1, 1));
  CHECK(hinf_norm(sys2) == doctest::Approx(2.0).epsilon(1e-6));
  CHECK_THROWS(hinf_norm(scalar_sys(0.5)));
}

TEST_CASE("hinf norm on a lightly damped system matches frequency sweep") {
  MatrixXd a(2, 2), b(2, 1), c(1, 2);
  a << 0, 1, -4, -0.2;  // wn = 2, zeta = 0.05
  b << 0, 1;
  c << 1, 0;
  StateSpace sys(a, b, c, MatrixXd::Zero(1, 1));
  const double g = hinf_norm(sys, 1e-9);
  double sweep = 0.0;
  for (int i = 0; i < 20000; ++i)
    sweep = std::max(sweep, freq_response_gain(sys, 1.8 + i * (0.4 / 20000.0)));
  CHECK(g == doctest::Approx(sweep).epsilon(1e-3));
  // upper bound property at random frequencies
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 50.0);
  for (int i = 0; i < 100; ++i) CHECK(g >= freq_response_gain(sys, u(rng)) - 1e-9);
}

TEST_CASE("simulate basics") {
  StateSpace sys = scalar_sys(-1.0);
  // zero input, zero state stays zero
  const auto sim0 = simulate(sys, [](double) { return VectorXd::Zero(1); },
                             VectorXd::Zero(1), 1.0, 1e-3);
  CHECK(sim0.x.cwiseAbs().maxCoeff() == 0.0);
  CHECK_FALSE(sim0.diverged);
  // decaying disturbance: later state smaller than early state
  const auto sim = simulate(sys, [](double t) {
    return (VectorXd(1) << std::exp(-t)).finished();
  }, VectorXd::Zero(1), 30.0, 1e-3);
  const double x_at_1 = std::abs(sim.x(1000, 0));
  const double x_at_end = std::abs(sim.x(sim.x.rows() - 1, 0));
  CHECK(x_at_end < x_at_1);
  // analytic solution of xdot = -x + e^-t is t e^-t
  CHECK(sim.x(1000, 0) == doctest::Approx(1.0 * std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("simulate divergence reporting") {
  StateSpace sys = scalar_sys(+2.0);
  const auto sim = simulate(sys, [](double) { return VectorXd::Ones(1); },
                            VectorXd::Ones(1), 20.0, 1e-3);
  CHECK(sim.diverged);
  CHECK(sim.divergence_time > 0.0);
}

TEST_CASE("default disturbance shape") {
  const auto d = default_disturbance(2);
  const VectorXd v0 = d(0.0);
  CHECK(v0[0] == doctest::Approx(1.0));
  CHECK(v0[1] == doctest::Approx(1.0));  // sin(t)/t -> 1 at t=0
  const VectorXd v1 = d(3.14159265358979);
  CHECK(v1[1] == doctest::Approx(std::sin(3.14159265358979) / 3.14159265358979));
}

TEST_CASE("global closed loop assembly") {
  std::mt19937_64 rng(5);
  // single agent, H=0, Ht=Hh=I: A_g = A - BK
  MatrixXd a = random_matrix(rng, 2, 2), b = random_matrix(rng, 2, 1);
  MatrixXd k = random_matrix(rng, 1, 2);
  GlobalTopologyView topo{MatrixXd::Zero(1, 2), MatrixXd::Identity(1, 1),
                          MatrixXd::Identity(2, 2)};
  const auto g = assemble_global_closed_loop({StateSpace::plant(a, b)}, {k}, topo);
  CHECK((g.A - (a - b * k)).norm() < 1e-14);
  CHECK((g.B - b).norm() < 1e-14);
  // K = 0: A_g = A_d + B_d H
  const auto g0 = assemble_global_closed_loop({StateSpace::plant(a, b)},
                                              {MatrixXd::Zero(1, 2)}, topo);
  CHECK((g0.A - a).norm() < 1e-14);
}

TEST_CASE("uncertain plant vertices and samples") {
  UncertainPlant up;
  up.nominal = StateSpace::plant((MatrixXd(1, 1) << -1.0).finished(),
                                 MatrixXd::Ones(1, 1));
  // no uncertainty: single vertex identical to nominal
  CHECK(up.vertices().size() == 1);
  CHECK((up.vertices()[0].B - up.nominal.B).norm() == 0.0);

  up.params.push_back({"m", 2.0, 0.1});
  up.entries.push_back({'B', 0, 0, 1.0, EntryForm::Inverse, 0, -1});
  auto verts = up.vertices();
  REQUIRE(verts.size() == 2);
  CHECK(verts[0].B(0, 0) == doctest::Approx(1.0 / 1.8));  // m at min
  CHECK(verts[1].B(0, 0) == doctest::Approx(1.0 / 2.2));  // m at max
  std::mt19937_64 rng(1);
  for (const auto& s : up.sample(20, rng)) {
    CHECK(s.B(0, 0) <= 1.0 / 1.8 + 1e-12);
    CHECK(s.B(0, 0) >= 1.0 / 2.2 - 1e-12);
  }
}

TEST_CASE("pole scan determinism and stability flags") {
  UncertainPlant up;
  MatrixXd a(2, 2), b(2, 1);
  a << 0, 1, 0, 0;
  b << 0, 1;
  up.nominal = StateSpace::plant(a, b);
  up.params.push_back({"m", 1.0, 0.1});
  up.entries.push_back({'B', 1, 0, 1.0, EntryForm::Inverse, 0, -1});
  const MatrixXd k = lqr_gain(a, b, MatrixXd::Identity(2, 2), MatrixXd::Ones(1, 1));
  GlobalTopologyView topo{MatrixXd::Zero(1, 2), MatrixXd::Identity(1, 1),
                          MatrixXd::Identity(2, 2)};
  const auto ps1 = pole_scan({up}, {k}, topo, 25, 99);
  const auto ps2 = pole_scan({up}, {k}, topo, 25, 99);
  REQUIRE(ps1.samples.size() == 25);
  REQUIRE(ps1.vertex_sets.size() == 2);
  for (size_t i = 0; i < ps1.samples.size(); ++i)
    for (size_t j = 0; j < ps1.samples[i].size(); ++j)
      CHECK(ps1.samples[i][j] == ps2.samples[i][j]);
  for (const auto& lam : ps1.nominal) CHECK(lam.real() < -1e-6);
  for (const auto& set : ps1.samples)
    for (const auto& lam : set) CHECK(lam.real() < -1e-6);
  for (const auto& set : ps1.vertex_sets)
    for (const auto& lam : set) CHECK(lam.real() < -1e-6);
}

TEST_CASE("simulate step halving convergence") {
  MatrixXd a(2, 2), b(2, 1);
  a << 0, 1, -1, -1;
  b << 0, 1;
  StateSpace sys(a, b, MatrixXd::Identity(2, 2), MatrixXd::Zero(2, 1));
  const auto d = default_disturbance(1);
  const auto s1 = simulate(sys, d, VectorXd::Zero(2), 10.0, 1e-3);
  const auto s2 = simulate(sys, d, VectorXd::Zero(2), 10.0, 5e-4);
  const double ref = s2.x.row(s2.x.rows() - 1).norm();
  CHECK((s1.x.row(s1.x.rows() - 1) - s2.x.row(s2.x.rows() - 1)).norm() <
        1e-6 * std::max(1.0, ref));
}
