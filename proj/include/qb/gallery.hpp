#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <vector>

#include "qb/hermite.hpp"
#include "qb/perturbation.hpp"
#include "qb/sequences.hpp"

namespace qb {

using RealFunction = std::function<double(double)>;

/// Weighted deformation of an orthonormal basis: phi_n = rho1 c_n,
/// psi_n = rho2 c_n on a Hermite grid. The mixed operator is multiplication
/// by rho1 rho2, so the closed-form duals are rho1^{-1} c_n and rho2^{-1} c_n.
struct WeightedScenario {
  std::shared_ptr<const HermiteGrid> grid;
  VectorFamily phi;
  VectorFamily psi;
  VectorFamily phi_tilde_ref;
  VectorFamily psi_tilde_ref;
  RealVector rho1_nodes;
  RealVector rho2_nodes;
  double product_sup = 0.0;            ///< max_i rho1(x_i) rho2(x_i)
  double product_min = 0.0;
  double suggested_lambda_max = 0.0;   ///< 2 / product_sup
  LinearMap q_reference;               ///< diag(rho1 rho2) on the nodes
};

WeightedScenario make_weighted_onb(const RealFunction& rho1, const RealFunction& rho2, int N,
                                   std::shared_ptr<const HermiteGrid> grid);

/// Rank-one projector deformation of a reconstructing pair (eta, chi):
/// phi_n = (I + a P_sigma) eta_n, psi_n = (I + b R_sigma) chi_n, carrying the
/// closed forms Q = (1+b) I + (a-b) P_sigma and its inverse. Admissible while
/// |a| + |b| + |a||b| < 1 (operator-norm budget of the two deformations).
struct RankOneScenario {
  VectorFamily phi;
  VectorFamily psi;
  CVector sigma;
  double a = 0.0;
  double b = 0.0;
  LinearMap q_reference;
  LinearMap q_inverse_reference;
  VectorFamily phi_tilde_ref;  ///< (I - a/(1+a) P_sigma) chi_n
  VectorFamily psi_tilde_ref;  ///< (I - b/(1+b) R_sigma) eta_n
};

RankOneScenario make_rank_one(const VectorFamily& eta, const VectorFamily& chi,
                              const ComplexVector& sigma, double a, double b);

/// The shifted-oscillator families eta_n = e_n e^{-sqrt2 alpha x} and
/// chi_n = e_n e^{+sqrt2 alpha x} sampled on a Hermite grid, with sigma = e_0.
struct OscillatorScenario {
  double alpha = 0.0;
  int N = 0;
  std::shared_ptr<const HermiteGrid> grid;
  VectorFamily eta;
  VectorFamily chi;
  CVector sigma;
  double biorth_defect = 0.0;
};

OscillatorScenario make_shifted_oscillator(double alpha, int N,
                                           std::shared_ptr<const HermiteGrid> grid);

/// pi_n(alpha) = <e_0, eta_n> = (-alpha)^n e^{alpha^2/2} / sqrt(n!).
double pi_coefficient(double alpha, int n);
/// Same value through the grid quadrature, the oracle for the closed form.
double pi_coefficient_quadrature(const OscillatorScenario& s, int n);

enum class OscillatorOp { H, Hdag, H1, H2 };

/// Operator matrices in grid coordinates. H = H0 - sqrt2 alpha d/dx; H1/H2 are
/// the rank-one-dressed forms
///   H1 = H    - sqrt2 alpha^2 (P x + (1/(1+alpha)) x P),
///   H2 = Hdag + sqrt2 alpha^2 (x P + (1/(1-alpha)) P x),
/// similar to H (resp. Hdag) by I + alpha P (resp. I - alpha R), P = P_{e_0}.
CMatrix oscillator_operator(const OscillatorScenario& s, OscillatorOp which);

/// Relative eigen-residual ||Op v - E_n v|| / ||v|| with E_n = n + 1/2 + alpha^2,
/// v the matching family member (eta, chi, phi or psi). n must stay below N-1.
double oscillator_eigencheck(const OscillatorScenario& s, OscillatorOp which, int n);

/// Member the eigencheck uses for a given operator.
CVector oscillator_eigenvector(const OscillatorScenario& s, OscillatorOp which, int n);

/// Triangular families xi_n = sum_{k<=n} (-1)^{n+k} e_k against chi_n = e_n + e_{n+1}
/// (biorthogonal), perturbed by gamma_{n,k} = (1/lambda)(eps/(n-k+1) + 1).
/// Members are indexed n = 1..N inside C^{N+1}.
struct ChristensenScenario {
  VectorFamily xi;
  VectorFamily chi;
  VectorFamily phi;
  double eps = 0.0;
  Complex lambda{1.0, 0.0};
  double gamma_sup_series = 0.0;     ///< sup_k sum_{n>=k} |lambda gamma - 1|^2, summed to convergence
  double gamma_sup_truncated = 0.0;  ///< same sup over the generated table only
};

/// Requires 0 <= eps < 3/(2 pi^2); throws EpsilonOutOfRange otherwise.
ChristensenScenario make_christensen(int N, Complex lambda, double eps);

/// Ordered pair on which one summation order reconstructs and the reversed one
/// does not: F_phi = {e1,e1,e1, e2,e2,e2, ...},
/// F_phit = {e1,e1,-e1, e2,e1,-e1, e3,e1,-e1, ...}, K groups in C^K.
std::pair<VectorFamily, VectorFamily> make_counterexample(int K);

/// xi_n = (1 + n g) e_n with the Bessel partner chi_n = e_n / (1 + n g).
struct LowerSemiframeScenario {
  VectorFamily xi;
  VectorFamily chi;
  double growth = 0.0;
};

LowerSemiframeScenario make_lower_semiframe(int N, double growth);

}  // namespace qb
