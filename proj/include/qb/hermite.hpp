#pragma once

#include "qb/linalg.hpp"

namespace qb {

/// Gauss-Hermite discretization of L^2(R). Nodes are the Gauss-Hermite
/// abscissae; the stored weights absorb the e^{x^2} factor so that the sampled
/// Hermite functions e_n(x) = H_n(x) e^{-x^2/2} / sqrt(2^n n! sqrt(pi)) are
/// exactly orthonormal under the discrete inner product:
///
///     sum_i W_i e_n(x_i) e_m(x_i) = delta_nm   for n, m < M.
///
/// The plain quadrature rule sum_i W_i e^{-x_i^2} p(x_i) integrates
/// polynomials p up to degree 2M-1 exactly.
class HermiteGrid {
public:
  explicit HermiteGrid(int node_count);

  int size() const { return static_cast<int>(nodes_.size()); }
  const RealVector& nodes() const { return nodes_; }
  const RealVector& weights() const { return weights_; }
  int max_exact_degree() const { return 2 * size() - 1; }
  const SpaceRef& space() const { return space_; }

  /// Samples of e_0 .. e_{K-1} as the columns of an M x K matrix.
  CMatrix hermite_functions(int K) const;
  RealVector hermite_function(int n) const;

  /// d/dx in grid coordinates through the ladder representation
  /// (d/dx) e_n = (sqrt(n) e_{n-1} - sqrt(n+1) e_{n+1}) / sqrt(2),
  /// conjugated back to samples by the orthonormal basis map.
  CMatrix derivative_operator() const;

  /// Multiplication by x (exact on samples).
  CMatrix position_operator() const;

  /// Harmonic oscillator hamiltonian diag(n + 1/2) in basis coordinates,
  /// conjugated to grid coordinates.
  CMatrix oscillator_h0() const;

private:
  RealVector nodes_;
  RealVector weights_;
  SpaceRef space_;
};

/// Stable evaluation of the n-th Hermite function at x.
double hermite_function_at(int n, double x);

}  // namespace qb
