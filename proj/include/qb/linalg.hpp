#pragma once

#include <complex>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "qb/errors.hpp"

namespace qb {

using Complex = std::complex<double>;
using RealVector = Eigen::VectorXd;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;

/// Discretized Hilbert space: C^dim with the weighted inner product
/// <u,v> = sum_i w_i conj(u_i) v_i (anti-linear in the first slot).
/// The weights are quadrature weights when the space discretizes L^2(R)
/// and all ones for an abstract coordinate space; both share this code path.
class HilbertGrid {
public:
  HilbertGrid(RealVector weights, std::string label = "");

  static std::shared_ptr<const HilbertGrid> uniform(int dim, std::string label = "");
  static std::shared_ptr<const HilbertGrid> weighted(RealVector weights, std::string label = "");

  int dim() const { return static_cast<int>(weights_.size()); }
  const RealVector& weights() const { return weights_; }
  const RealVector& sqrt_weights() const { return sqrt_w_; }
  const RealVector& inv_sqrt_weights() const { return inv_sqrt_w_; }
  const std::string& label() const { return label_; }

  /// Structural equality: same dimension and identical weights.
  bool compatible_with(const HilbertGrid& other) const;

private:
  RealVector weights_;
  RealVector sqrt_w_;
  RealVector inv_sqrt_w_;
  std::string label_;
};

using SpaceRef = std::shared_ptr<const HilbertGrid>;

/// Dense coordinate vector attached to its space.
struct ComplexVector {
  CVector coords;
  SpaceRef space;
};

/// Dense operator on a HilbertGrid. Adjoints and norms are taken with
/// respect to the weighted inner product of the attached space.
struct LinearMap {
  CMatrix matrix;
  SpaceRef space;
};

void require_same_space(const SpaceRef& a, const SpaceRef& b, const char* where);

Complex inner(const ComplexVector& u, const ComplexVector& v);
Complex inner(const SpaceRef& space, const CVector& u, const CVector& v);
double norm(const ComplexVector& u);
double norm(const SpaceRef& space, const CVector& u);

ComplexVector apply(const LinearMap& T, const ComplexVector& v);

/// Conjugation W^{1/2} T W^{-1/2}; operator norms and singular values of T
/// in the weighted metric are the Euclidean ones of the conjugated matrix.
CMatrix euclideanize(const LinearMap& T);

LinearMap adjoint(const LinearMap& T);

/// Largest singular value of T in the weighted metric. Full Hermitian
/// decomposition of T^*T below dim 512, deterministic power iteration with
/// decomposition fallback above.
double operator_norm(const LinearMap& T);

LinearMap identity_map(const SpaceRef& space);

struct NeumannResult {
  LinearMap inverse;
  double alpha = 0.0;        ///< measured ||lambda Q - I||
  int terms = 0;             ///< partial-sum terms actually accumulated
  int predicted_terms = 0;   ///< ceil(log(tol (1-alpha)) / log alpha)
  double qr_residual = 0.0;  ///< ||Q R - I||
  double rq_residual = 0.0;  ///< ||R Q - I||
};

/// Inverts Q through the contraction series Q^{-1} = lambda sum_k (I - lambda Q)^k,
/// valid when alpha = ||lambda Q - I|| < 1. Throws ContractionFailure when the
/// hypothesis fails and NonConvergence when max_terms is exhausted first.
NeumannResult neumann_inverse(const LinearMap& Q, Complex lambda,
                              double tol = 1e-10, int max_terms = 10000);

/// Direct LU solve, the oracle for neumann_inverse. Throws SingularOperator
/// when the weighted condition estimate exceeds 1e12.
LinearMap direct_inverse(const LinearMap& T);

/// Weighted condition number sigma_max / sigma_min.
double condition_estimate(const LinearMap& T);

}  // namespace qb
