#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qb/linalg.hpp"

namespace qb {

/// Optimal frame bounds of a finite family: the extreme eigenvalues of the
/// frame operator. lower == 0 signals the family does not span the space.
struct FrameBounds {
  double lower = 0.0;
  double upper = 0.0;
  bool tight = false;
};

/// Ordered truncation {v_0, ..., v_{N-1}} of a sequence of vectors, the shared
/// representation for frames, Riesz bases and quasi-basis halves. Columns of
/// the member matrix are the vectors.
class VectorFamily {
public:
  VectorFamily(CMatrix members, SpaceRef space, std::string name = "");

  int size() const { return static_cast<int>(members_.cols()); }
  int dim() const { return static_cast<int>(members_.rows()); }
  const CMatrix& members() const { return members_; }
  CVector member(int n) const { return members_.col(n); }
  const SpaceRef& space() const { return space_; }
  const std::string& name() const { return name_; }

private:
  CMatrix members_;
  SpaceRef space_;
  std::string name_;
};

/// Synthesis operator as a dense dim x N array: column n is member n, so the
/// matrix maps coefficient sequences c to sum_n c_n v_n.
CMatrix synthesis(const VectorFamily& F);

/// W^{1/2} * synthesis: singular values in the Euclidean sense equal those of
/// the synthesis operator between l^2 coefficients and the weighted space.
CMatrix euclidean_synthesis(const VectorFamily& F);

/// Analysis operator (N x dim): f -> {<v_n, f>}.
CMatrix analysis(const VectorFamily& F);

FrameBounds frame_bounds(const VectorFamily& F);

/// Largest eigenvalue of the frame operator (always finite at a truncation).
double bessel_bound(const VectorFamily& F);

/// Numerical rank of the synthesis operator, singular-value cutoff
/// 1e-10 * sigma_max.
int family_rank(const VectorFamily& F);

/// Overcompleteness measure: N_trunc - rank(synthesis).
int excess(const VectorFamily& F);

struct RieszResult {
  bool is_riesz = false;
  FrameBounds bounds;
};

/// Finite-truncation Riesz test: a frame for the space with excess zero.
RieszResult is_riesz(const VectorFamily& F, double tol = 1e-10);

/// max_{n,m} |<f_n, g_m> - delta_nm|.
double biorthogonality_defect(const VectorFamily& F, const VectorFamily& G);

/// Gram-style mixed matrix <F_n, G_m>.
CMatrix mixed_gram(const VectorFamily& F, const VectorFamily& G);

/// ||sum_n <f_n, v> g_n - v|| for each test vector.
std::vector<double> strong_residuals(const VectorFamily& analysis_family,
                                     const VectorFamily& synthesis_family,
                                     const std::vector<CVector>& tests);

/// Deviations ||S_m - v|| of the ordered partial sums S_m = sum_{n<m} <f_n,v> g_n,
/// m = 1..N. The order is exactly the family order; no grouping.
std::vector<double> partial_sum_trace(const VectorFamily& analysis_family,
                                      const VectorFamily& synthesis_family, const CVector& v);

/// |sum_n <f, f_n><g_n, g> - <f, g>|.
double weak_residual(const VectorFamily& F, const VectorFamily& G, const CVector& f,
                     const CVector& g);

/// Span of a finite list of vectors, kept numerically independent (smallest
/// singular value of the weighted basis matrix > 1e-8).
class SubspaceBasis {
public:
  SubspaceBasis(CMatrix basis, SpaceRef space);

  const CMatrix& basis() const { return basis_; }
  const SpaceRef& space() const { return space_; }
  int subspace_dim() const { return static_cast<int>(basis_.cols()); }
  int ambient_dim() const { return static_cast<int>(basis_.rows()); }

  /// Basis with weighted-orthonormal columns spanning the same subspace.
  const CMatrix& orthonormal() const { return orthonormal_; }

  /// Weighted-orthogonal projector onto the subspace.
  CMatrix projector() const;

  double distance_to_span(const CVector& v) const;
  bool contains(const CVector& v, double rel_tol = 1e-8) const;

private:
  CMatrix basis_;
  CMatrix orthonormal_;
  SpaceRef space_;
};

// Columnar JSON serialization: one complex column per member, header carries
// the space dimension, a digest of the weights and the family name. Numbers
// are decimal strings with 17 significant digits, so round-trips are exact.
std::string weights_digest(const HilbertGrid& space);
std::string family_to_json(const VectorFamily& F);
void save_family(const VectorFamily& F, const std::string& path);
VectorFamily load_family(const std::string& path);

std::string format_real(double x);  ///< %.17g rendering used by all file formats

}  // namespace qb
