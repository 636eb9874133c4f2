#include "qb/linalg.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

namespace qb {

HilbertGrid::HilbertGrid(RealVector weights, std::string label)
    : weights_(std::move(weights)), label_(std::move(label)) {
  if (weights_.size() == 0) throw UsageError("HilbertGrid: dimension must be positive");
  if ((weights_.array() <= 0.0).any())
    throw UsageError("HilbertGrid: all weights must be strictly positive");
  sqrt_w_ = weights_.array().sqrt();
  inv_sqrt_w_ = sqrt_w_.array().inverse();
}

std::shared_ptr<const HilbertGrid> HilbertGrid::uniform(int dim, std::string label) {
  return std::make_shared<HilbertGrid>(RealVector::Ones(dim), std::move(label));
}

std::shared_ptr<const HilbertGrid> HilbertGrid::weighted(RealVector weights, std::string label) {
  return std::make_shared<HilbertGrid>(std::move(weights), std::move(label));
}

bool HilbertGrid::compatible_with(const HilbertGrid& other) const {
  return dim() == other.dim() && weights_ == other.weights_;
}

void require_same_space(const SpaceRef& a, const SpaceRef& b, const char* where) {
  if (!a || !b) throw UsageError(std::string(where) + ": missing space");
  if (a.get() == b.get()) return;
  if (!a->compatible_with(*b))
    throw UsageError(std::string(where) + ": operands live on different spaces");
}

Complex inner(const SpaceRef& space, const CVector& u, const CVector& v) {
  if (!space) throw UsageError("inner: missing space");
  if (u.size() != space->dim() || v.size() != space->dim())
    throw UsageError("inner: vector length does not match space dimension");
  return (u.conjugate().array() * space->weights().array().cast<Complex>() * v.array()).sum();
}

Complex inner(const ComplexVector& u, const ComplexVector& v) {
  require_same_space(u.space, v.space, "inner");
  return inner(u.space, u.coords, v.coords);
}

double norm(const SpaceRef& space, const CVector& u) {
  return std::sqrt(std::max(0.0, inner(space, u, u).real()));
}

double norm(const ComplexVector& u) { return norm(u.space, u.coords); }

ComplexVector apply(const LinearMap& T, const ComplexVector& v) {
  require_same_space(T.space, v.space, "apply");
  return ComplexVector{T.matrix * v.coords, v.space};
}

CMatrix euclideanize(const LinearMap& T) {
  const auto& s = *T.space;
  return s.sqrt_weights().cast<Complex>().asDiagonal() * T.matrix *
         s.inv_sqrt_weights().cast<Complex>().asDiagonal();
}

LinearMap adjoint(const LinearMap& T) {
  if (!T.space) throw UsageError("adjoint: missing space");
  if (T.matrix.rows() != T.matrix.cols() || T.matrix.rows() != T.space->dim())
    throw UsageError("adjoint: operator must be square on its space");
  const auto& w = T.space->weights();
  CMatrix adj = w.cast<Complex>().cwiseInverse().asDiagonal() * T.matrix.adjoint() *
                w.cast<Complex>().asDiagonal();
  return LinearMap{std::move(adj), T.space};
}

namespace {

double spectral_norm_dense(const CMatrix& A) {
  if (A.rows() == 0 || A.cols() == 0) return 0.0;
  // sigma_max(A)^2 = lambda_max(A^H A); Hermitian solve keeps the top
  // eigenvalue at full relative accuracy.
  CMatrix gram = A.adjoint() * A;
  Eigen::SelfAdjointEigenSolver<CMatrix> es(gram, Eigen::EigenvaluesOnly);
  double top = es.eigenvalues().maxCoeff();
  return std::sqrt(std::max(0.0, top));
}

// Power iteration on A^H A with a fixed seed; used above the dense cutoff.
double spectral_norm_power(const CMatrix& A) {
  const int n = static_cast<int>(A.cols());
  std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
  auto uniform = [&rng]() {
    return static_cast<double>(rng()) / static_cast<double>(std::mt19937_64::max()) - 0.5;
  };
  CVector v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(uniform(), uniform());
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < 5000; ++it) {
    CVector w = A.adjoint() * (A * v);
    double next = w.norm();
    if (next == 0.0) return 0.0;
    w /= next;
    double drift = (w - v).norm();
    v = std::move(w);
    if (std::abs(next - lambda) <= 1e-13 * next && drift < 1e-7) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(lambda);
}

constexpr int kDenseNormCutoff = 512;

}  // namespace

double operator_norm(const LinearMap& T) {
  if (!T.space) throw UsageError("operator_norm: missing space");
  if (T.matrix.rows() != T.space->dim() || T.matrix.cols() != T.space->dim())
    throw UsageError("operator_norm: operator shape does not match space");
  CMatrix A = euclideanize(T);
  if (A.rows() < kDenseNormCutoff) return spectral_norm_dense(A);
  double est = spectral_norm_power(A);
  return est;
}

LinearMap identity_map(const SpaceRef& space) {
  if (!space) throw UsageError("identity_map: missing space");
  return LinearMap{CMatrix::Identity(space->dim(), space->dim()), space};
}

NeumannResult neumann_inverse(const LinearMap& Q, Complex lambda, double tol, int max_terms) {
  if (!Q.space) throw UsageError("neumann_inverse: missing space");
  if (lambda == Complex(0.0, 0.0)) throw UsageError("neumann_inverse: lambda must be nonzero");
  if (tol <= 0.0) throw UsageError("neumann_inverse: tol must be positive");
  const int n = Q.space->dim();
  CMatrix M = CMatrix::Identity(n, n) - lambda * Q.matrix;
  double alpha = operator_norm(LinearMap{M, Q.space});
  if (!(alpha < 1.0))
    throw ContractionFailure("neumann_inverse: ||lambda Q - I|| = " + std::to_string(alpha) +
                             " >= 1");

  NeumannResult result;
  result.alpha = alpha;
  result.predicted_terms =
      alpha == 0.0 ? 1
                   : static_cast<int>(std::ceil(std::log(tol * (1.0 - alpha)) / std::log(alpha)));

  // Partial sums of sum_k M^k. QR - I = -M^{K+1}, so the Frobenius norm of the
  // running power is a certified bound on the residual.
  const RealVector& sw = Q.space->sqrt_weights();
  const RealVector& isw = Q.space->inv_sqrt_weights();
  auto weighted_frobenius = [&](const CMatrix& X) {
    return (sw.cast<Complex>().asDiagonal() * X * isw.cast<Complex>().asDiagonal()).norm();
  };

  CMatrix sum = CMatrix::Identity(n, n);
  CMatrix power = CMatrix::Identity(n, n);
  const double frobenius_slack = 8.0 * std::sqrt(static_cast<double>(n));
  int k = 0;
  while (true) {
    power = power * M;
    ++k;
    // The Frobenius norm certifies the spectral residual cheaply; close to the
    // target, switch to the exact spectral norm so the term count stays within
    // the documented a-priori bound.
    double bound = weighted_frobenius(power);
    if (bound <= tol) break;
    if (bound <= tol * frobenius_slack &&
        operator_norm(LinearMap{power, Q.space}) <= tol)
      break;
    if (k >= max_terms)
      throw NonConvergence("neumann_inverse: tolerance not reached after " +
                           std::to_string(max_terms) + " terms (tail bound " +
                           std::to_string(bound) + ")");
    sum += power;
  }
  result.terms = k;
  result.inverse = LinearMap{lambda * sum, Q.space};
  CMatrix eye = CMatrix::Identity(n, n);
  result.qr_residual = operator_norm(LinearMap{Q.matrix * result.inverse.matrix - eye, Q.space});
  result.rq_residual = operator_norm(LinearMap{result.inverse.matrix * Q.matrix - eye, Q.space});
  return result;
}

double condition_estimate(const LinearMap& T) {
  CMatrix A = euclideanize(T);
  Eigen::JacobiSVD<CMatrix> svd(A);
  double smax = svd.singularValues()(0);
  double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (smin <= 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

LinearMap direct_inverse(const LinearMap& T) {
  if (!T.space) throw UsageError("direct_inverse: missing space");
  if (T.matrix.rows() != T.matrix.cols())
    throw UsageError("direct_inverse: operator must be square");
  double cond = condition_estimate(T);
  if (!(cond < 1e12))
    throw SingularOperator("direct_inverse: condition estimate " + std::to_string(cond) +
                           " exceeds 1e12");
  // The matrix inverse does not depend on the metric; the conditioning gate does.
  Eigen::PartialPivLU<CMatrix> lu(T.matrix);
  return LinearMap{lu.inverse(), T.space};
}

}  // namespace qb
