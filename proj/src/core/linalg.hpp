#pragma once

#include <Eigen/Dense>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dissent {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Dimension of svec(S) for an n x n symmetric matrix.
inline int svec_dim(int n) { return n * (n + 1) / 2; }

// Symmetric vectorization with sqrt(2) scaling on off-diagonal entries so
// that <A,B>_F = svec(A)' svec(B). Column-major lower-triangle order.
VectorXd svec(const MatrixXd& a);
MatrixXd unsvec(const VectorXd& v, int n);

// Index of entry (i,j), i >= j, inside the svec ordering for size n.
int svec_index(int n, int i, int j);

inline MatrixXd symmetrize(const MatrixXd& a) { return 0.5 * (a + a.transpose()); }

bool is_symmetric(const MatrixXd& a, double tol = 1e-12);

// Largest / smallest eigenvalue of a symmetric matrix.
double max_eig_sym(const MatrixXd& a);
double min_eig_sym(const MatrixXd& a);

// max Re(lambda) over the (general, possibly complex) spectrum of a.
double spectral_abscissa(const MatrixXd& a);
inline bool is_hurwitz(const MatrixXd& a, double tol = 0.0) {
  return spectral_abscissa(a) < -tol;
}

// Projection onto {X symmetric : X <= ub * I} by eigenvalue clipping.
MatrixXd clip_max_eig(const MatrixXd& a, double ub);

// Solves A' X + X A + Q = 0 for symmetric Q (dense Kronecker route; the
// problem sizes here never exceed a few dozen states).
MatrixXd solve_lyapunov(const MatrixXd& a, const MatrixXd& q);

// Stacks a list of square blocks into a block-diagonal matrix.
MatrixXd block_diag(const std::vector<MatrixXd>& blocks);

// Deterministic helpers for tests and generators.
MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double scale = 1.0);
MatrixXd random_symmetric(std::mt19937_64& rng, int n, double scale = 1.0);
// Random Hurwitz matrix: Q-shifted by spectral abscissa.
MatrixXd random_stable(std::mt19937_64& rng, int n, double min_decay = 0.2);

[[noreturn]] void dim_error(const std::string& where, const std::string& what);

}  // namespace dissent
