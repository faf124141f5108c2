#include "core/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

namespace dissent {

namespace {
constexpr double kSqrt2 = 1.4142135623730951;
}

VectorXd svec(const MatrixXd& a) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n) dim_error("svec", "matrix must be square");
  VectorXd v(svec_dim(n));
  int k = 0;
  for (int j = 0; j < n; ++j) {
    v[k++] = a(j, j);
    for (int i = j + 1; i < n; ++i) v[k++] = kSqrt2 * 0.5 * (a(i, j) + a(j, i));
  }
  return v;
}

MatrixXd unsvec(const VectorXd& v, int n) {
  if (v.size() != svec_dim(n)) dim_error("unsvec", "length does not match order");
  MatrixXd a(n, n);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    a(j, j) = v[k++];
    for (int i = j + 1; i < n; ++i) {
      const double x = v[k++] / kSqrt2;
      a(i, j) = x;
      a(j, i) = x;
    }
  }
  return a;
}

int svec_index(int n, int i, int j) {
  if (j > i) std::swap(i, j);
  // offset of column j = sum_{c<j} (n - c)
  const int off = j * n - j * (j - 1) / 2;
  return off + (i - j);
}

bool is_symmetric(const MatrixXd& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= tol;
}

double max_eig_sym(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

double min_eig_sym(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(a), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double spectral_abscissa(const MatrixXd& a) {
  Eigen::EigenSolver<MatrixXd> es(a, /*computeEigenvectors=*/false);
  return es.eigenvalues().real().maxCoeff();
}

MatrixXd clip_max_eig(const MatrixXd& a, double ub) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(symmetrize(a));
  VectorXd d = es.eigenvalues();
  for (int i = 0; i < d.size(); ++i) d[i] = std::min(d[i], ub);
  return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd solve_lyapunov(const MatrixXd& a, const MatrixXd& q) {
  const int n = static_cast<int>(a.rows());
  if (a.cols() != n || q.rows() != n || q.cols() != n)
    dim_error("solve_lyapunov", "A and Q must be square of equal order");
  // vec(A'X + XA) = (I (x) A' + A' (x) I) vec(X)
  MatrixXd k = MatrixXd::Zero(n * n, n * n);
  const MatrixXd at = a.transpose();
  for (int i = 0; i < n; ++i) {
    k.block(i * n, i * n, n, n) += at;
    for (int j = 0; j < n; ++j)
      for (int r = 0; r < n; ++r) k(i * n + r, j * n + r) += at(i, j);
  }
  VectorXd rhs(n * n);
  for (int j = 0; j < n; ++j) rhs.segment(j * n, n) = -q.col(j);
  const VectorXd x = k.partialPivLu().solve(rhs);
  MatrixXd sol(n, n);
  for (int j = 0; j < n; ++j) sol.col(j) = x.segment(j * n, n);
  return symmetrize(sol);
}

MatrixXd block_diag(const std::vector<MatrixXd>& blocks) {
  int r = 0, c = 0;
  for (const auto& b : blocks) {
    r += static_cast<int>(b.rows());
    c += static_cast<int>(b.cols());
  }
  MatrixXd out = MatrixXd::Zero(r, c);
  int i = 0, j = 0;
  for (const auto& b : blocks) {
    out.block(i, j, b.rows(), b.cols()) = b;
    i += static_cast<int>(b.rows());
    j += static_cast<int>(b.cols());
  }
  return out;
}

MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double scale) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = scale * g(rng);
  return m;
}

MatrixXd random_symmetric(std::mt19937_64& rng, int n, double scale) {
  return symmetrize(random_matrix(rng, n, n, scale));
}

MatrixXd random_stable(std::mt19937_64& rng, int n, double min_decay) {
  MatrixXd a = random_matrix(rng, n, n);
  const double alpha = spectral_abscissa(a);
  a -= (alpha + min_decay) * MatrixXd::Identity(n, n);
  return a;
}

void dim_error(const std::string& where, const std::string& what) {
  throw std::invalid_argument(where + ": " + what);
}

}  // namespace dissent
