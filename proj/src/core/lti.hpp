#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "core/linalg.hpp"

namespace dissent {

// LTI realization xdot = Ax + Bu, y = Cx + Du.
struct StateSpace {
  MatrixXd A, B, C, D;
  bool minimal_claimed = false;

  StateSpace() = default;
  StateSpace(MatrixXd a, MatrixXd b, MatrixXd c, MatrixXd d);
  // Full-state-output plant: C = I, D = 0.
  static StateSpace plant(MatrixXd a, MatrixXd b);

  int nx() const { return static_cast<int>(A.rows()); }
  int nu() const { return static_cast<int>(B.cols()); }
  int ny() const { return static_cast<int>(C.rows()); }
};

// Continuous-time algebraic Riccati equation A'P + PA - PBR^-1B'P + Q = 0,
// stabilizing solution via the Hamiltonian eigenvector basis, polished with
// Newton-Kleinman steps until the residual passes 1e-8.
MatrixXd solve_care(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q,
                    const MatrixXd& r);

// Infinite-horizon LQR gain K = R^-1 B' P; A - BK is Hurwitz on success.
MatrixXd lqr_gain(const MatrixXd& a, const MatrixXd& b, const MatrixXd& q,
                  const MatrixXd& r);

// H2 norm for strictly proper stable systems: sqrt(trace(B' Qo B)) with
// A'Qo + Qo A + C'C = 0.
double h2_norm(const StateSpace& sys);

// H-infinity norm by bisection on the Hamiltonian imaginary-axis test.
double hinf_norm(const StateSpace& sys, double tol = 1e-6);

// Largest singular value of C (jwI - A)^-1 B + D.
double freq_response_gain(const StateSpace& sys, double omega);

struct SimulationResult {
  VectorXd t;
  MatrixXd x;              // one row per time sample
  MatrixXd y;
  MatrixXd u;              // disturbance record
  bool diverged = false;
  double divergence_time = 0.0;
};

using Signal = std::function<VectorXd(double)>;

// Fixed-step RK4 integration of the closed system driven by `input`.
SimulationResult simulate(const StateSpace& sys, const Signal& input,
                          const VectorXd& x0, double t_final, double dt = 1e-3);

// The validation disturbance [e^-t, sin(t)/t, e^-t, ...] cycled over `dim`
// channels, with sin(t)/t = 1 at t = 0.
Signal default_disturbance(int dim);

// Plant with a polytopic uncertainty set in (A, B). Each physical parameter
// enters matrix entries through one of the listed forms; vertices enumerate
// all min/max parameter combinations (2^K, duplicates kept).
struct UncertainParam {
  std::string name;
  double nominal = 0.0;
  double fraction = 0.0;  // +/- range as a fraction of nominal
};

enum class EntryForm : std::uint8_t { Linear, Inverse, Ratio };

struct UncertainEntry {
  char matrix = 'B';      // 'A' or 'B'
  int row = 0, col = 0;
  double coeff = 1.0;     // entry = coeff * f(params)
  EntryForm form = EntryForm::Linear;
  int param = 0;          // index into params
  int param_den = -1;     // denominator param for Ratio
};

struct UncertainPlant {
  StateSpace nominal;
  std::vector<UncertainParam> params;
  std::vector<UncertainEntry> entries;

  bool has_uncertainty() const { return !params.empty(); }
  // Plant realization at the given physical parameter vector.
  StateSpace at(const VectorXd& values) const;
  std::vector<StateSpace> vertices() const;
  std::vector<StateSpace> sample(int count, std::mt19937_64& rng) const;
};

struct GlobalTopologyView {
  MatrixXd H;       // agent outputs -> agent inputs
  MatrixXd H_tilde; // controller outputs (and exogenous input) -> agent inputs
  MatrixXd H_hat;   // agent outputs -> controller inputs
};

// Global closed loop A_g = A_d + B_d H - B_d Ht K_d Hh, B_g = B_d Ht,
// outputs [x; -K_d Hh x].
StateSpace assemble_global_closed_loop(const std::vector<StateSpace>& agents,
                                       const std::vector<MatrixXd>& gains,
                                       const GlobalTopologyView& topo);

struct PoleSet {
  std::vector<std::complex<double>> nominal;
  std::vector<std::vector<std::complex<double>>> samples;
  std::vector<std::vector<std::complex<double>>> vertex_sets;
};

// Eigenvalues of the global closed-loop A over nominal dynamics, `samples`
// uniform parameter draws, and every polytope vertex combination.
PoleSet pole_scan(const std::vector<UncertainPlant>& plants,
                  const std::vector<MatrixXd>& gains,
                  const GlobalTopologyView& topo, int samples, std::uint64_t seed);

}  // namespace dissent
