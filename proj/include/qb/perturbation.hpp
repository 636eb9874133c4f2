#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qb/sequences.hpp"

namespace qb {

enum class ConditionId {
  L12_frame,
  L13_coeff,
  T21_strong,
  C25_split,
  C28_bessel_1,
  C28_bessel_2,
  C28_norm_sum,
  T31_weak,
  T32_subspace,
  C210_coeff_dual,
};

std::string to_string(ConditionId id);
ConditionId condition_from_string(const std::string& name);

/// Outcome of checking one perturbation hypothesis: the measured constants,
/// the strict-inequality verdict and (where the theory supplies them) the
/// predicted frame bounds of the perturbed family.
struct PerturbationCertificate {
  ConditionId condition_id = ConditionId::T21_strong;
  Complex lambda{1.0, 0.0};
  std::map<std::string, double> constants;
  bool verdict = false;
  std::optional<FrameBounds> predicted_bounds;
  std::string evidence;
};

struct ConstructionLog {
  double alpha = 0.0;            ///< contraction constant used for the inversion
  int terms = 0;                 ///< Neumann terms accumulated
  double qr_residual = 0.0;      ///< ||Q Qinv - I||
  double rq_residual = 0.0;      ///< ||Qinv Q - I||
  double tol = 0.0;
  double gram_defect = 0.0;      ///< max |<phi_n, phit_m> - <psit_n, psi_m>|
  std::vector<double> phi_residuals;  ///< reconstruction through (phi, phi~)
  std::vector<double> psi_residuals;  ///< reconstruction through (psi~, psi)
};

/// The constructed mixed operator, its certified inverse and the dual
/// families phi~_n = Qinv psi_n, psi~_n = Qinv^dagger phi_n.
struct DualSystem {
  LinearMap Q;
  LinearMap Qinv;
  VectorFamily phi_tilde;
  VectorFamily psi_tilde;
  std::optional<SubspaceBasis> d1_image;
  std::optional<SubspaceBasis> d2_image;
  ConstructionLog log;
};

/// Mixed operator Q f = sum_n <phi_n, f> psi_n as a dense matrix.
LinearMap assemble_mixed_operator(const VectorFamily& phi, const VectorFamily& psi);

enum class PredictionMode { BesselGap, CoefficientAlpha };

/// Closed-form perturbed-frame bounds:
///   BesselGap:        ( A (1 - sqrt(B'/A))^2, B (1 + sqrt(B'/B))^2 ),
///   CoefficientAlpha: ( A (1 - alpha)^2,      B (1 + alpha)^2 ).
/// Throws HypothesisViolated when the respective inequality fails.
FrameBounds predicted_bounds(double A, double B, double value, PredictionMode mode);

/// Bessel-dominated perturbation test: B' = bessel bound of {xi_n - lambda phi_n}
/// must stay below the lower frame bound of xi. Never throws; a false verdict
/// is a result.
PerturbationCertificate check_L12(const VectorFamily& xi, const VectorFamily& phi,
                                  Complex lambda = Complex(1.0, 0.0));

/// Coefficient-side perturbation test:
///   || sum c_n (xi_n - lambda psi_n) || <= alpha || sum c_n xi_n ||.
/// alpha is the norm of the difference synthesis composed with the
/// pseudo-inverse of the reference synthesis; requires the kernel containment
/// ker(S_xi) <= ker(S_diff) and throws KernelMismatch otherwise.
PerturbationCertificate check_L13(const VectorFamily& xi, const VectorFamily& psi_candidate,
                                  Complex lambda = Complex(1.0, 0.0));

/// Same coefficient condition tested against a reconstructing dual:
///   || sum c_n (lambda psi_n - phit_n) || <= alpha || sum c_n phit_n ||.
PerturbationCertificate check_C210(const VectorFamily& phi_tilde, const VectorFamily& psi,
                                   Complex lambda = Complex(1.0, 0.0));

/// Checks || lambda sum <phi_n, f> psi_n - f || <= alpha ||f|| (on D when
/// given, else on the whole space) and, when alpha < 1, constructs the dual
/// system by inverting the mixed operator. When D is a proper subspace the
/// inverted extension is Q P_D + (1/lambda)(I - P_D), which realizes the same
/// contraction constant on the whole space.
std::pair<PerturbationCertificate, DualSystem> build_duals_strong(
    const VectorFamily& phi, const VectorFamily& psi, Complex lambda,
    const std::optional<SubspaceBasis>& domain = std::nullopt,
    const std::vector<CVector>& tests = {}, double tol = 1e-10, int max_terms = 10000);

/// Split condition beta + gamma < 1 with
///   beta  = || sum <lambda phi_n - xi_n, .> psi_n ||  on D,
///   gamma = || sum <xi_n, .> (psi_n - chi_n) ||       on D,
/// where (xi, chi) reconstruct on D. Delegates to build_duals_strong on success.
PerturbationCertificate check_C25(const VectorFamily& xi, const VectorFamily& chi,
                                  const VectorFamily& phi, const VectorFamily& psi,
                                  Complex lambda = Complex(1.0, 0.0),
                                  const std::optional<SubspaceBasis>& domain = std::nullopt);

/// Bessel-product conditions. variant 1: B_{lphi-xi} B_psi + B_xi B_{psi-chi} < 1;
/// variant 2: B_{lphi-xi} B_chi < 1 (psi = chi); variant 3: the norm-product sum
/// sum_n (||lphi_n - xi_n|| ||psi_n|| + ||xi_n|| ||psi_n - chi_n||) < 1.
PerturbationCertificate check_C28(const VectorFamily& xi, const VectorFamily& chi,
                                  const VectorFamily& phi, const VectorFamily& psi,
                                  Complex lambda, int variant);

/// Weak-form construction. The operator assembly coincides with the strong
/// one in finite dimension; what differs is the reported residuals, which are
/// the bilinear ones |sum <f,phi_n><phit_n,g> - <f,g>| on the probe pairs.
std::pair<PerturbationCertificate, DualSystem> build_duals_weak(
    const VectorFamily& phi, const VectorFamily& psi, Complex lambda,
    const std::vector<std::pair<CVector, CVector>>& probes = {}, double tol = 1e-10,
    int max_terms = 10000);

/// Subspace-restricted construction. The scenario supplies the extension Qbar;
/// it must agree with the weakly assembled operator between D1 and D2 (checked,
/// ExtensionMismatch otherwise). alpha is the norm of (lambda Qbar - I)
/// compressed between orthonormalized bases of D1 and D2. On success the duals
/// come from Qbar^{-1} and the transported subspaces are Qbar D1 and
/// Qbar^dagger D2.
std::pair<PerturbationCertificate, DualSystem> build_duals_subspace(
    const VectorFamily& phi, const VectorFamily& psi, Complex lambda, const SubspaceBasis& d1,
    const SubspaceBasis& d2, const LinearMap& qbar,
    const std::vector<std::pair<CVector, CVector>>& probes = {}, double tol = 1e-10,
    int max_terms = 10000);

/// JSON rendering of a certificate (decimal strings, 17 significant digits).
std::string certificate_to_json(const PerturbationCertificate& cert);

}  // namespace qb
