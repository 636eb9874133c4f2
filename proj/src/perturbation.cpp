#include "qb/perturbation.hpp"

#include <cmath>

#include <Eigen/SVD>

#include <json.hpp>

namespace qb {

std::string to_string(ConditionId id) {
  switch (id) {
    case ConditionId::L12_frame: return "L12_frame";
    case ConditionId::L13_coeff: return "L13_coeff";
    case ConditionId::T21_strong: return "T21_strong";
    case ConditionId::C25_split: return "C25_split";
    case ConditionId::C28_bessel_1: return "C28_bessel_1";
    case ConditionId::C28_bessel_2: return "C28_bessel_2";
    case ConditionId::C28_norm_sum: return "C28_norm_sum";
    case ConditionId::T31_weak: return "T31_weak";
    case ConditionId::T32_subspace: return "T32_subspace";
    case ConditionId::C210_coeff_dual: return "C210_coeff_dual";
  }
  throw UsageError("unknown condition id");
}

ConditionId condition_from_string(const std::string& name) {
  static const std::map<std::string, ConditionId> table = {
      {"L12_frame", ConditionId::L12_frame},
      {"L13_coeff", ConditionId::L13_coeff},
      {"T21_strong", ConditionId::T21_strong},
      {"C25_split", ConditionId::C25_split},
      {"C28_bessel_1", ConditionId::C28_bessel_1},
      {"C28_bessel_2", ConditionId::C28_bessel_2},
      {"C28_norm_sum", ConditionId::C28_norm_sum},
      {"T31_weak", ConditionId::T31_weak},
      {"T32_subspace", ConditionId::T32_subspace},
      {"C210_coeff_dual", ConditionId::C210_coeff_dual},
  };
  auto it = table.find(name);
  if (it == table.end()) throw SchemaError("unknown condition id '" + name + "'");
  return it->second;
}

LinearMap assemble_mixed_operator(const VectorFamily& phi, const VectorFamily& psi) {
  if (phi.size() != psi.size()) throw UsageError("assemble_mixed_operator: length mismatch");
  require_same_space(phi.space(), psi.space(), "assemble_mixed_operator");
  return LinearMap{synthesis(psi) * analysis(phi), phi.space()};
}

FrameBounds predicted_bounds(double A, double B, double value, PredictionMode mode) {
  if (!(A > 0.0) || !(B > 0.0) || B < A)
    throw HypothesisViolated("predicted_bounds: need 0 < A <= B");
  if (value < 0.0) throw HypothesisViolated("predicted_bounds: constant must be nonnegative");
  FrameBounds out;
  switch (mode) {
    case PredictionMode::BesselGap: {
      if (!(value < A))
        throw HypothesisViolated("predicted_bounds: B' must stay below the lower frame bound");
      double lo = 1.0 - std::sqrt(value / A);
      double hi = 1.0 + std::sqrt(value / B);
      out.lower = A * lo * lo;
      out.upper = B * hi * hi;
      break;
    }
    case PredictionMode::CoefficientAlpha: {
      if (!(value < 1.0)) throw HypothesisViolated("predicted_bounds: alpha must stay below 1");
      out.lower = A * (1.0 - value) * (1.0 - value);
      out.upper = B * (1.0 + value) * (1.0 + value);
      break;
    }
  }
  out.tight = (out.upper - out.lower) <= 1e-12 * std::max(1.0, out.upper);
  return out;
}

PerturbationCertificate check_L12(const VectorFamily& xi, const VectorFamily& phi,
                                  Complex lambda) {
  if (xi.size() != phi.size()) throw UsageError("check_L12: length mismatch");
  require_same_space(xi.space(), phi.space(), "check_L12");
  FrameBounds reference = frame_bounds(xi);
  VectorFamily difference(xi.members() - lambda * phi.members(), xi.space(), "difference");
  double bprime = bessel_bound(difference);

  PerturbationCertificate cert;
  cert.condition_id = ConditionId::L12_frame;
  cert.lambda = lambda;
  cert.constants["A"] = reference.lower;
  cert.constants["B"] = reference.upper;
  cert.constants["Bprime"] = bprime;
  cert.verdict = reference.lower > 0.0 && bprime < reference.lower;
  if (cert.verdict)
    cert.predicted_bounds =
        predicted_bounds(reference.lower, reference.upper, bprime, PredictionMode::BesselGap);
  cert.evidence =
      "B' = top frame-operator eigenvalue of {xi_n - lambda phi_n}; compared against the "
      "lower frame bound of the reference family; bounds predicted for {lambda phi_n}";
  return cert;
}

namespace {

// alpha = sigma_max(S_diff * pinv(S_ref)) in the weighted metric, with the
// kernel containment ker(S_ref) <= ker(S_diff) checked on the small singular
// vectors of S_ref.
double coefficient_alpha(const VectorFamily& reference, const CMatrix& difference_members,
                         const char* where) {
  CMatrix Sref = reference.space()->sqrt_weights().cast<Complex>().asDiagonal() *
                 reference.members();
  CMatrix Sdiff =
      reference.space()->sqrt_weights().cast<Complex>().asDiagonal() * difference_members;
  // Full V: the trailing right-singular directions span ker(S_ref) and must
  // be inspected even when the family is longer than the space dimension.
  Eigen::BDCSVD<CMatrix> svd(Sref, Eigen::ComputeThinU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double smax = sv.size() ? sv(0) : 0.0;
  double cutoff = 1e-10 * smax;
  double diff_scale = Sdiff.norm();

  const Eigen::Index r = sv.size();
  CMatrix pinv_factor = CMatrix::Zero(Sref.cols(), r);
  for (Eigen::Index k = 0; k < Sref.cols(); ++k) {
    double sigma = k < r ? sv(k) : 0.0;
    if (sigma > cutoff) {
      pinv_factor.col(k) = svd.matrixV().col(k) / sigma;
    } else {
      // Coefficient direction annihilated by the reference synthesis: the
      // difference synthesis must annihilate it too, else no finite alpha.
      double leak = (Sdiff * svd.matrixV().col(k)).norm();
      if (leak > 1e-8 * std::max(1.0, diff_scale))
        throw KernelMismatch(std::string(where) +
                             ": difference family acts on the kernel of the reference "
                             "synthesis (leak " +
                             std::to_string(leak) + ")");
    }
  }
  CMatrix composite = Sdiff * pinv_factor * svd.matrixU().adjoint();
  Eigen::BDCSVD<CMatrix> final_svd(composite);
  return final_svd.singularValues().size() ? final_svd.singularValues()(0) : 0.0;
}

PerturbationCertificate coefficient_certificate(ConditionId id, const VectorFamily& reference,
                                                const CMatrix& difference_members,
                                                Complex lambda, const char* where) {
  double alpha = coefficient_alpha(reference, difference_members, where);
  FrameBounds ref_bounds = frame_bounds(reference);

  PerturbationCertificate cert;
  cert.condition_id = id;
  cert.lambda = lambda;
  cert.constants["alpha"] = alpha;
  cert.constants["A"] = ref_bounds.lower;
  cert.constants["B"] = ref_bounds.upper;
  cert.verdict = alpha < 1.0;
  if (cert.verdict && ref_bounds.lower > 0.0)
    cert.predicted_bounds = predicted_bounds(ref_bounds.lower, ref_bounds.upper, alpha,
                                             PredictionMode::CoefficientAlpha);
  cert.evidence =
      "alpha = norm of the difference synthesis composed with the pseudo-inverse of the "
      "reference synthesis (coefficient-side perturbation constant)";
  return cert;
}

}  // namespace

PerturbationCertificate check_L13(const VectorFamily& xi, const VectorFamily& psi_candidate,
                                  Complex lambda) {
  if (xi.size() != psi_candidate.size()) throw UsageError("check_L13: length mismatch");
  require_same_space(xi.space(), psi_candidate.space(), "check_L13");
  CMatrix diff = xi.members() - lambda * psi_candidate.members();
  return coefficient_certificate(ConditionId::L13_coeff, xi, diff, lambda, "check_L13");
}

PerturbationCertificate check_C210(const VectorFamily& phi_tilde, const VectorFamily& psi,
                                   Complex lambda) {
  if (phi_tilde.size() != psi.size()) throw UsageError("check_C210: length mismatch");
  require_same_space(phi_tilde.space(), psi.space(), "check_C210");
  CMatrix diff = lambda * psi.members() - phi_tilde.members();
  return coefficient_certificate(ConditionId::C210_coeff_dual, phi_tilde, diff, lambda,
                                 "check_C210");
}

namespace {

// Restriction of T to a subspace: ||T P_D|| in the weighted metric, or the
// plain norm when no subspace is given.
double restricted_norm(const LinearMap& T, const std::optional<SubspaceBasis>& domain) {
  if (!domain) return operator_norm(T);
  CMatrix restricted = T.matrix * domain->projector();
  return operator_norm(LinearMap{std::move(restricted), T.space});
}

DualSystem construct_duals(const VectorFamily& phi, const VectorFamily& psi, Complex lambda,
                           const LinearMap& Q, const LinearMap& inversion_target,
                           double tol, int max_terms) {
  NeumannResult inv = neumann_inverse(inversion_target, lambda, tol, max_terms);
  CMatrix qinv_adj = adjoint(inv.inverse).matrix;

  DualSystem duals{
      Q,
      inv.inverse,
      VectorFamily(inv.inverse.matrix * psi.members(), psi.space(), psi.name() + "~dual"),
      VectorFamily(qinv_adj * phi.members(), phi.space(), phi.name() + "~dual"),
      std::nullopt,
      std::nullopt,
      {}};
  duals.log.alpha = inv.alpha;
  duals.log.terms = inv.terms;
  duals.log.qr_residual = inv.qr_residual;
  duals.log.rq_residual = inv.rq_residual;
  duals.log.tol = tol;
  CMatrix gram_phi = mixed_gram(phi, duals.phi_tilde);
  CMatrix gram_psi = mixed_gram(duals.psi_tilde, psi);
  duals.log.gram_defect = (gram_phi - gram_psi).cwiseAbs().maxCoeff();
  return duals;
}

}  // namespace

std::pair<PerturbationCertificate, DualSystem> build_duals_strong(
    const VectorFamily& phi, const VectorFamily& psi, Complex lambda,
    const std::optional<SubspaceBasis>& domain, const std::vector<CVector>& tests, double tol,
    int max_terms) {
  LinearMap Q = assemble_mixed_operator(phi, psi);
  const int n = Q.space->dim();
  CMatrix eye = CMatrix::Identity(n, n);
  LinearMap deviation{lambda * Q.matrix - eye, Q.space};
  double alpha = restricted_norm(deviation, domain);

  PerturbationCertificate cert;
  cert.condition_id = ConditionId::T21_strong;
  cert.lambda = lambda;
  cert.constants["alpha"] = alpha;
  cert.verdict = alpha < 1.0;
  cert.evidence = domain ? "alpha = ||(lambda Q - I) P_D|| with Q f = sum <phi_n,f> psi_n; "
                           "inversion applied to the extension Q P_D + (1/lambda)(I - P_D)"
                         : "alpha = ||lambda Q - I|| with Q f = sum <phi_n,f> psi_n";
  if (!cert.verdict)
    throw ContractionFailure("build_duals_strong: alpha = " + std::to_string(alpha) + " >= 1");

  // On a proper subspace, extend so that lambda Qbar - I = (lambda Q - I) P_D:
  // the extension keeps the measured contraction constant and restricts to Q on D.
  LinearMap inversion_target = Q;
  if (domain) {
    CMatrix P = domain->projector();
    inversion_target.matrix = Q.matrix * P + (eye - P) / lambda;
  }
  DualSystem duals = construct_duals(phi, psi, lambda, Q, inversion_target, tol, max_terms);

  CMatrix rec_phi = synthesis(duals.phi_tilde) * analysis(phi);
  CMatrix rec_psi = synthesis(psi) * analysis(duals.psi_tilde);
  for (const CVector& v : tests) {
    CVector probe = domain ? CVector(domain->projector() * v) : v;
    duals.log.phi_residuals.push_back(norm(Q.space, (rec_phi * probe - probe).eval()));
    if (!domain)
      duals.log.psi_residuals.push_back(norm(Q.space, (rec_psi * probe - probe).eval()));
  }
  return {cert, duals};
}

PerturbationCertificate check_C25(const VectorFamily& xi, const VectorFamily& chi,
                                  const VectorFamily& phi, const VectorFamily& psi,
                                  Complex lambda, const std::optional<SubspaceBasis>& domain) {
  if (xi.size() != chi.size() || xi.size() != phi.size() || xi.size() != psi.size())
    throw UsageError("check_C25: length mismatch");
  require_same_space(xi.space(), chi.space(), "check_C25");
  require_same_space(xi.space(), phi.space(), "check_C25");
  require_same_space(xi.space(), psi.space(), "check_C25");

  // beta: perturbation of the analysis side; gamma: perturbation of the
  // synthesis side, both as operator norms (restricted to D when given).
  VectorFamily analysis_diff(lambda * phi.members() - xi.members(), xi.space(), "lphi-xi");
  LinearMap beta_op{synthesis(psi) * analysis(analysis_diff), xi.space()};
  double beta = restricted_norm(beta_op, domain);

  CMatrix synth_diff = psi.members() - chi.members();
  LinearMap gamma_op{synth_diff * analysis(xi), xi.space()};
  double gamma = restricted_norm(gamma_op, domain);

  PerturbationCertificate cert;
  cert.condition_id = ConditionId::C25_split;
  cert.lambda = lambda;
  cert.constants["beta"] = beta;
  cert.constants["gamma"] = gamma;
  cert.verdict = beta + gamma < 1.0;
  cert.evidence =
      "beta = ||sum <lambda phi_n - xi_n, .> psi_n||, gamma = ||sum <xi_n, .>(psi_n - chi_n)||";
  if (cert.verdict) {
    auto [inner_cert, duals] = build_duals_strong(phi, psi, lambda, domain, {});
    cert.constants["alpha"] = inner_cert.constants.at("alpha");
    cert.constants["construction_qr_residual"] = duals.log.qr_residual;
    cert.evidence += "; dual construction delegated to the strong builder";
  }
  return cert;
}

PerturbationCertificate check_C28(const VectorFamily& xi, const VectorFamily& chi,
                                  const VectorFamily& phi, const VectorFamily& psi,
                                  Complex lambda, int variant) {
  if (xi.size() != chi.size() || xi.size() != phi.size() || xi.size() != psi.size())
    throw UsageError("check_C28: length mismatch");
  require_same_space(xi.space(), chi.space(), "check_C28");
  require_same_space(xi.space(), phi.space(), "check_C28");
  require_same_space(xi.space(), psi.space(), "check_C28");

  PerturbationCertificate cert;
  cert.lambda = lambda;
  VectorFamily analysis_diff(lambda * phi.members() - xi.members(), xi.space(), "lphi-xi");

  switch (variant) {
    case 1: {
      cert.condition_id = ConditionId::C28_bessel_1;
      double b_diff = bessel_bound(analysis_diff);
      double b_psi = bessel_bound(psi);
      double b_xi = bessel_bound(xi);
      VectorFamily synth_diff(psi.members() - chi.members(), xi.space(), "psi-chi");
      double b_sc = bessel_bound(synth_diff);
      double product = b_diff * b_psi + b_xi * b_sc;
      cert.constants["B_lphi_xi"] = b_diff;
      cert.constants["B_psi"] = b_psi;
      cert.constants["B_xi"] = b_xi;
      cert.constants["B_psi_chi"] = b_sc;
      cert.constants["product"] = product;
      cert.verdict = product < 1.0;
      cert.evidence = "Bessel-product test B_{lphi-xi} B_psi + B_xi B_{psi-chi} < 1";
      break;
    }
    case 2: {
      cert.condition_id = ConditionId::C28_bessel_2;
      double b_diff = bessel_bound(analysis_diff);
      double b_chi = bessel_bound(chi);
      double product = b_diff * b_chi;
      cert.constants["B_lphi_xi"] = b_diff;
      cert.constants["B_chi"] = b_chi;
      cert.constants["product"] = product;
      cert.verdict = product < 1.0;
      cert.evidence = "Bessel-product test B_{lphi-xi} B_chi < 1 with psi = chi";
      break;
    }
    case 3: {
      cert.condition_id = ConditionId::C28_norm_sum;
      double sum = 0.0;
      for (int n = 0; n < xi.size(); ++n) {
        sum += norm(xi.space(), analysis_diff.member(n)) * norm(xi.space(), psi.member(n));
        sum += norm(xi.space(), xi.member(n)) *
               norm(xi.space(), (psi.member(n) - chi.member(n)).eval());
      }
      cert.constants["norm_sum"] = sum;
      cert.verdict = sum < 1.0;
      cert.evidence =
          "truncated norm-product sum sum_n (||lphi_n - xi_n|| ||psi_n|| + ||xi_n|| "
          "||psi_n - chi_n||) < 1";
      break;
    }
    default:
      throw UsageError("check_C28: variant must be 1, 2 or 3");
  }
  return cert;
}

std::pair<PerturbationCertificate, DualSystem> build_duals_weak(
    const VectorFamily& phi, const VectorFamily& psi, Complex lambda,
    const std::vector<std::pair<CVector, CVector>>& probes, double tol, int max_terms) {
  LinearMap Q = assemble_mixed_operator(phi, psi);
  const int n = Q.space->dim();
  LinearMap deviation{lambda * Q.matrix - CMatrix::Identity(n, n), Q.space};
  double alpha = operator_norm(deviation);

  PerturbationCertificate cert;
  cert.condition_id = ConditionId::T31_weak;
  cert.lambda = lambda;
  cert.constants["alpha"] = alpha;
  cert.verdict = alpha < 1.0;
  cert.evidence =
      "alpha = ||lambda Q - I||; in finite dimension the weak and strong operator "
      "assemblies coincide, only the reported residuals differ";
  if (!cert.verdict)
    throw ContractionFailure("build_duals_weak: alpha = " + std::to_string(alpha) + " >= 1");

  DualSystem duals = construct_duals(phi, psi, lambda, Q, Q, tol, max_terms);
  for (const auto& [f, g] : probes) {
    duals.log.phi_residuals.push_back(weak_residual(phi, duals.phi_tilde, f, g));
    duals.log.psi_residuals.push_back(weak_residual(psi, duals.psi_tilde, f, g));
  }
  return {cert, duals};
}

std::pair<PerturbationCertificate, DualSystem> build_duals_subspace(
    const VectorFamily& phi, const VectorFamily& psi, Complex lambda, const SubspaceBasis& d1,
    const SubspaceBasis& d2, const LinearMap& qbar,
    const std::vector<std::pair<CVector, CVector>>& probes, double tol, int max_terms) {
  LinearMap Q = assemble_mixed_operator(phi, psi);
  require_same_space(Q.space, qbar.space, "build_duals_subspace");
  const auto& w = Q.space->weights();

  // Agreement of the supplied extension with the assembled operator, in the
  // weak sense between D1 and D2: compress the difference between
  // orthonormalized bases.
  CMatrix b1 = d1.orthonormal();
  CMatrix b2 = d2.orthonormal();
  CMatrix compress_diff =
      b2.adjoint() * w.cast<Complex>().asDiagonal() * (qbar.matrix - Q.matrix) * b1;
  Eigen::BDCSVD<CMatrix> diff_svd(compress_diff);
  double agreement =
      diff_svd.singularValues().size() ? diff_svd.singularValues()(0) : 0.0;
  if (agreement > 1e-8)
    throw ExtensionMismatch("build_duals_subspace: supplied extension deviates from the "
                            "assembled operator on D1 x D2 by " +
                            std::to_string(agreement));

  const int n = Q.space->dim();
  CMatrix deviation = lambda * qbar.matrix - CMatrix::Identity(n, n);
  CMatrix compressed = b2.adjoint() * w.cast<Complex>().asDiagonal() * deviation * b1;
  Eigen::BDCSVD<CMatrix> svd(compressed);
  double alpha = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;

  PerturbationCertificate cert;
  cert.condition_id = ConditionId::T32_subspace;
  cert.lambda = lambda;
  cert.constants["alpha"] = alpha;
  cert.constants["extension_agreement"] = agreement;
  cert.verdict = alpha < 1.0;
  cert.evidence =
      "alpha = ||(lambda Qbar - I)|| compressed between orthonormalized bases of D1 and D2; "
      "extension supplied by the scenario";
  if (!cert.verdict)
    throw ContractionFailure("build_duals_subspace: alpha = " + std::to_string(alpha) + " >= 1");

  DualSystem duals = construct_duals(phi, psi, lambda, Q, qbar, tol, max_terms);
  duals.d1_image.emplace(qbar.matrix * d1.basis(), Q.space);
  duals.d2_image.emplace(adjoint(qbar).matrix * d2.basis(), Q.space);
  for (const auto& [f, g] : probes) {
    duals.log.phi_residuals.push_back(weak_residual(phi, duals.phi_tilde, f, g));
    duals.log.psi_residuals.push_back(weak_residual(psi, duals.psi_tilde, f, g));
  }
  return {cert, duals};
}

std::string certificate_to_json(const PerturbationCertificate& cert) {
  nlohmann::ordered_json j;
  j["condition_id"] = to_string(cert.condition_id);
  j["lambda"] = {format_real(cert.lambda.real()), format_real(cert.lambda.imag())};
  nlohmann::ordered_json constants;
  for (const auto& [key, value] : cert.constants) constants[key] = format_real(value);
  j["constants"] = std::move(constants);
  j["verdict"] = cert.verdict;
  if (cert.predicted_bounds) {
    j["predicted_bounds"] = {{"lower", format_real(cert.predicted_bounds->lower)},
                             {"upper", format_real(cert.predicted_bounds->upper)}};
  } else {
    j["predicted_bounds"] = nullptr;
  }
  j["evidence"] = cert.evidence;
  return j.dump();
}

}  // namespace qb
