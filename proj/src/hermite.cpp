#include "qb/hermite.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace qb {

namespace {

// Recurrence for orthonormal Hermite functions:
//   e_0(x) = pi^{-1/4} e^{-x^2/2},
//   e_n(x) = sqrt(2/n) x e_{n-1}(x) - sqrt((n-1)/n) e_{n-2}(x).
void hermite_function_column(double x, int K, double* out) {
  double e0 = std::pow(M_PI, -0.25) * std::exp(-0.5 * x * x);
  if (K > 0) out[0] = e0;
  if (K > 1) out[1] = std::sqrt(2.0) * x * e0;
  for (int n = 2; n < K; ++n)
    out[n] = std::sqrt(2.0 / n) * x * out[n - 1] - std::sqrt((n - 1.0) / n) * out[n - 2];
}

}  // namespace

double hermite_function_at(int n, double x) {
  std::vector<double> buf(n + 1);
  hermite_function_column(x, n + 1, buf.data());
  return buf[n];
}

HermiteGrid::HermiteGrid(int node_count) {
  if (node_count < 1) throw UsageError("HermiteGrid: need at least one node");
  const int M = node_count;

  // Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix with
  // off-diagonal sqrt(k/2), polished with two Newton steps on e_M
  // (e_M'(x) = -x e_M(x) + sqrt(2M) e_{M-1}(x)).
  RealVector diag = RealVector::Zero(M);
  RealVector offdiag(M > 1 ? M - 1 : 0);
  for (int k = 1; k < M; ++k) offdiag(k - 1) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, offdiag, Eigen::EigenvaluesOnly);
  nodes_ = es.eigenvalues();

  std::vector<double> column(M + 1);
  for (int i = 0; i < M; ++i) {
    double x = nodes_(i);
    for (int step = 0; step < 2; ++step) {
      hermite_function_column(x, M + 1, column.data());
      double f = column[M];
      double fp = -x * column[M] + std::sqrt(2.0 * M) * column[M - 1];
      if (fp != 0.0) x -= f / fp;
    }
    nodes_(i) = x;
  }

  // Adjusted weights: W_i = 1 / sum_{k<M} e_k(x_i)^2. This is the Christoffel
  // weight with the e^{x_i^2} factor folded in, evaluated without large or
  // small intermediates.
  weights_.resize(M);
  for (int i = 0; i < M; ++i) {
    hermite_function_column(nodes_(i), M, column.data());
    double sum = 0.0;
    for (int k = 0; k < M; ++k) sum += column[k] * column[k];
    weights_(i) = 1.0 / sum;
  }

  space_ = HilbertGrid::weighted(weights_, "hermite-" + std::to_string(M));
}

CMatrix HermiteGrid::hermite_functions(int K) const {
  if (K < 1 || K > size())
    throw UsageError("HermiteGrid: requested basis size exceeds node count");
  const int M = size();
  Eigen::MatrixXd cols(M, K);
  std::vector<double> column(K);
  for (int i = 0; i < M; ++i) {
    hermite_function_column(nodes_(i), K, column.data());
    for (int n = 0; n < K; ++n) cols(i, n) = column[n];
  }
  return cols.cast<Complex>();
}

RealVector HermiteGrid::hermite_function(int n) const {
  const int M = size();
  RealVector out(M);
  std::vector<double> column(n + 1);
  for (int i = 0; i < M; ++i) {
    hermite_function_column(nodes_(i), n + 1, column.data());
    out(i) = column[n];
  }
  return out;
}

CMatrix HermiteGrid::derivative_operator() const {
  const int M = size();
  CMatrix basis = hermite_functions(M);  // unitary under the weighted metric
  CMatrix ladder = CMatrix::Zero(M, M);
  for (int n = 0; n < M; ++n) {
    if (n - 1 >= 0) ladder(n - 1, n) = std::sqrt(n / 2.0);
    if (n + 1 < M) ladder(n + 1, n) = -std::sqrt((n + 1) / 2.0);
  }
  CMatrix analysis = basis.adjoint() * weights_.cast<Complex>().asDiagonal();
  return basis * ladder * analysis;
}

CMatrix HermiteGrid::position_operator() const {
  return nodes_.cast<Complex>().asDiagonal();
}

CMatrix HermiteGrid::oscillator_h0() const {
  const int M = size();
  CMatrix basis = hermite_functions(M);
  CVector level(M);
  for (int n = 0; n < M; ++n) level(n) = n + 0.5;
  CMatrix analysis = basis.adjoint() * weights_.cast<Complex>().asDiagonal();
  return basis * level.asDiagonal() * analysis;
}

}  // namespace qb
