#include "qb/gallery.hpp"

#include <cmath>

namespace qb {

WeightedScenario make_weighted_onb(const RealFunction& rho1, const RealFunction& rho2, int N,
                                   std::shared_ptr<const HermiteGrid> grid) {
  if (!grid) throw UsageError("make_weighted_onb: missing grid");
  if (N < 1 || N > grid->size())
    throw UsageError("make_weighted_onb: N must lie in [1, node count]");
  const int M = grid->size();
  RealVector r1(M), r2(M);
  for (int i = 0; i < M; ++i) {
    r1(i) = rho1(grid->nodes()(i));
    r2(i) = rho2(grid->nodes()(i));
  }
  RealVector product = r1.array() * r2.array();
  if (product.minCoeff() <= 0.0)
    throw PositivityViolation("make_weighted_onb: rho1 rho2 must stay positive on the nodes "
                              "(min = " + std::to_string(product.minCoeff()) + ")");
  if (!product.allFinite() || !r1.allFinite() || !r2.allFinite())
    throw PositivityViolation("make_weighted_onb: multipliers must be finite on the nodes");

  CMatrix basis = grid->hermite_functions(N);
  SpaceRef space = grid->space();
  auto scale = [&](const RealVector& rho, const char* name) {
    CMatrix members = rho.cast<Complex>().asDiagonal() * basis;
    return VectorFamily(std::move(members), space, name);
  };

  WeightedScenario s{
      grid,
      scale(r1, "phi"),
      scale(r2, "psi"),
      scale(r1.cwiseInverse(), "phi~ref"),
      scale(r2.cwiseInverse(), "psi~ref"),
      r1,
      r2,
      product.maxCoeff(),
      product.minCoeff(),
      2.0 / product.maxCoeff(),
      LinearMap{product.cast<Complex>().asDiagonal(), space}};
  return s;
}

RankOneScenario make_rank_one(const VectorFamily& eta, const VectorFamily& chi,
                              const ComplexVector& sigma, double a, double b) {
  if (eta.size() != chi.size()) throw UsageError("make_rank_one: length mismatch");
  require_same_space(eta.space(), chi.space(), "make_rank_one");
  require_same_space(eta.space(), sigma.space, "make_rank_one");
  const SpaceRef& space = eta.space();
  if (std::abs(norm(sigma) - 1.0) > 1e-12)
    throw UsageError("make_rank_one: sigma must be a unit vector");
  double budget = std::abs(a) + std::abs(b) + std::abs(a) * std::abs(b);
  if (budget >= 1.0)
    throw HypothesisViolated("make_rank_one: |a| + |b| + |a b| = " + std::to_string(budget) +
                             " >= 1");

  const int dim = space->dim();
  // P f = <sigma, f> sigma in the weighted metric; R = I - P.
  CMatrix P = sigma.coords * sigma.coords.adjoint() * space->weights().cast<Complex>().asDiagonal();
  CMatrix I = CMatrix::Identity(dim, dim);
  CMatrix R = I - P;

  CMatrix phi = (I + a * P) * eta.members();
  CMatrix psi = (I + b * R) * chi.members();
  CMatrix q_ref = (1.0 + b) * I + (a - b) * P;
  CMatrix q_inv_ref = (I + ((b - a) / (1.0 + a)) * P) / (1.0 + b);
  CMatrix phi_tilde = (I - (a / (1.0 + a)) * P) * chi.members();
  CMatrix psi_tilde = (I - (b / (1.0 + b)) * R) * eta.members();

  return RankOneScenario{VectorFamily(std::move(phi), space, "phi"),
                         VectorFamily(std::move(psi), space, "psi"),
                         sigma.coords,
                         a,
                         b,
                         LinearMap{std::move(q_ref), space},
                         LinearMap{std::move(q_inv_ref), space},
                         VectorFamily(std::move(phi_tilde), space, "phi~ref"),
                         VectorFamily(std::move(psi_tilde), space, "psi~ref")};
}

OscillatorScenario make_shifted_oscillator(double alpha, int N,
                                           std::shared_ptr<const HermiteGrid> grid) {
  if (!grid) throw UsageError("make_shifted_oscillator: missing grid");
  if (N < 1 || N > grid->size())
    throw UsageError("make_shifted_oscillator: N must lie in [1, node count]");
  const int M = grid->size();
  const double shift = std::sqrt(2.0) * alpha;
  RealVector down(M), up(M);
  for (int i = 0; i < M; ++i) {
    down(i) = std::exp(-shift * grid->nodes()(i));
    up(i) = std::exp(shift * grid->nodes()(i));
  }
  CMatrix basis = grid->hermite_functions(N);
  SpaceRef space = grid->space();
  CMatrix eta = down.cast<Complex>().asDiagonal() * basis;
  CMatrix chi = up.cast<Complex>().asDiagonal() * basis;
  if (!eta.allFinite() || !chi.allFinite())
    throw QuadratureUnderresolved("make_shifted_oscillator: exponential factors overflow the "
                                  "node range at alpha = " + std::to_string(alpha));

  OscillatorScenario s{alpha,
                       N,
                       grid,
                       VectorFamily(std::move(eta), space, "eta"),
                       VectorFamily(std::move(chi), space, "chi"),
                       grid->hermite_function(0).cast<Complex>(),
                       0.0};
  s.biorth_defect = biorthogonality_defect(s.eta, s.chi);
  if (!(s.biorth_defect <= 1e-6))
    throw QuadratureUnderresolved("make_shifted_oscillator: biorthogonality defect " +
                                  std::to_string(s.biorth_defect) + " exceeds 1e-6");
  return s;
}

double pi_coefficient(double alpha, int n) {
  // (-alpha)^n e^{alpha^2/2} / sqrt(n!), evaluated through logs to keep large n safe.
  if (n < 0) throw UsageError("pi_coefficient: n must be nonnegative");
  if (alpha == 0.0) return n == 0 ? 1.0 : 0.0;
  double magnitude =
      std::exp(n * std::log(std::abs(alpha)) + 0.5 * alpha * alpha - 0.5 * std::lgamma(n + 1.0));
  double sign = (n % 2 == 0) ? 1.0 : -1.0;
  if (alpha < 0.0) sign = 1.0;  // (-alpha)^n with alpha < 0 is positive
  return sign * magnitude;
}

double pi_coefficient_quadrature(const OscillatorScenario& s, int n) {
  if (n < 0 || n >= s.N) throw UsageError("pi_coefficient_quadrature: n out of range");
  return inner(s.grid->space(), s.sigma, s.eta.member(n)).real();
}

namespace {

CMatrix sigma_projector(const OscillatorScenario& s) {
  return s.sigma * s.sigma.adjoint() * s.grid->space()->weights().cast<Complex>().asDiagonal();
}

}  // namespace

CMatrix oscillator_operator(const OscillatorScenario& s, OscillatorOp which) {
  const double alpha = s.alpha;
  const double root2 = std::sqrt(2.0);
  CMatrix H0 = s.grid->oscillator_h0();
  CMatrix D = s.grid->derivative_operator();
  switch (which) {
    case OscillatorOp::H:
      return H0 - root2 * alpha * D;
    case OscillatorOp::Hdag:
      return H0 + root2 * alpha * D;
    case OscillatorOp::H1: {
      CMatrix P = sigma_projector(s);
      CMatrix X = s.grid->position_operator();
      return H0 - root2 * alpha * D -
             root2 * alpha * alpha * (P * X + X * P / (1.0 + alpha));
    }
    case OscillatorOp::H2: {
      if (alpha == 1.0) throw UsageError("oscillator_operator: H2 needs alpha != 1");
      CMatrix P = sigma_projector(s);
      CMatrix X = s.grid->position_operator();
      return H0 + root2 * alpha * D +
             root2 * alpha * alpha * (X * P + P * X / (1.0 - alpha));
    }
  }
  throw UsageError("oscillator_operator: unknown selector");
}

CVector oscillator_eigenvector(const OscillatorScenario& s, OscillatorOp which, int n) {
  if (n < 0 || n >= s.N) throw UsageError("oscillator_eigenvector: n out of range");
  CMatrix P = sigma_projector(s);
  switch (which) {
    case OscillatorOp::H:
      return s.eta.member(n);
    case OscillatorOp::Hdag:
      return s.chi.member(n);
    case OscillatorOp::H1:
      // phi_n = (I + alpha P) eta_n
      return s.eta.member(n) + s.alpha * (P * s.eta.member(n));
    case OscillatorOp::H2: {
      // psi_n = (I - alpha R) chi_n = (1 - alpha) chi_n + alpha P chi_n
      CVector chi_n = s.chi.member(n);
      return (1.0 - s.alpha) * chi_n + s.alpha * (P * chi_n);
    }
  }
  throw UsageError("oscillator_eigenvector: unknown selector");
}

double oscillator_eigencheck(const OscillatorScenario& s, OscillatorOp which, int n) {
  if (n > s.N - 2)
    throw StencilOverflow("oscillator_eigencheck: n = " + std::to_string(n) +
                          " exceeds the valid range N - 2 = " + std::to_string(s.N - 2));
  if (n < 0) throw UsageError("oscillator_eigencheck: n must be nonnegative");
  CMatrix op = oscillator_operator(s, which);
  CVector v = oscillator_eigenvector(s, which, n);
  const SpaceRef& space = s.grid->space();
  double energy = n + 0.5 + s.alpha * s.alpha;
  CVector residual = op * v - energy * v;
  return norm(space, residual) / norm(space, v);
}

ChristensenScenario make_christensen(int N, Complex lambda, double eps) {
  if (N < 2) throw UsageError("make_christensen: need N >= 2");
  if (lambda == Complex(0.0, 0.0)) throw UsageError("make_christensen: lambda must be nonzero");
  const double eps_max = 3.0 / (2.0 * M_PI * M_PI);
  if (eps < 0.0 || eps >= eps_max)
    throw EpsilonOutOfRange("make_christensen: eps must lie in [0, 3/(2 pi^2) = " +
                            std::to_string(eps_max) + ")");

  const int dim = N + 1;
  SpaceRef space = HilbertGrid::uniform(dim, "christensen");
  CMatrix xi = CMatrix::Zero(dim, N);
  CMatrix chi = CMatrix::Zero(dim, N);
  CMatrix phi = CMatrix::Zero(dim, N);
  for (int n = 1; n <= N; ++n) {
    for (int k = 1; k <= n; ++k) {
      double sign = ((n + k) % 2 == 0) ? 1.0 : -1.0;
      Complex gamma = (eps / (n - k + 1.0) + 1.0) / lambda;
      xi(k - 1, n - 1) = sign;
      phi(k - 1, n - 1) = sign * gamma;
    }
    chi(n - 1, n - 1) = 1.0;
    chi(n, n - 1) = 1.0;
  }

  ChristensenScenario s{VectorFamily(std::move(xi), space, "xi"),
                        VectorFamily(std::move(chi), space, "chi"),
                        VectorFamily(std::move(phi), space, "phi"),
                        eps,
                        lambda,
                        0.0,
                        0.0};

  // |lambda gamma_{n,k} - 1|^2 = eps^2 / (n-k+1)^2 depends on j = n-k+1 only,
  // so the sup over k of the full series is the k = 1 series. Summed until the
  // tail bound eps^2 / J is negligible against the closed form.
  const long terms = 1000000;
  double series = 0.0;
  for (long j = terms; j >= 1; --j) series += (eps * eps) / (static_cast<double>(j) * j);
  s.gamma_sup_series = series;

  double truncated_sup = 0.0;
  for (int k = 1; k <= N; ++k) {
    double sum = 0.0;
    for (int n = k; n <= N; ++n) {
      double d = eps / (n - k + 1.0);
      sum += d * d;
    }
    truncated_sup = std::max(truncated_sup, sum);
  }
  s.gamma_sup_truncated = truncated_sup;
  return s;
}

std::pair<VectorFamily, VectorFamily> make_counterexample(int K) {
  if (K < 2) throw UsageError("make_counterexample: need at least two groups");
  SpaceRef space = HilbertGrid::uniform(K, "counterexample");
  CMatrix phi = CMatrix::Zero(K, 3 * K);
  CMatrix phi_tilde = CMatrix::Zero(K, 3 * K);
  for (int g = 0; g < K; ++g) {
    for (int j = 0; j < 3; ++j) phi(g, 3 * g + j) = 1.0;
    if (g == 0) {
      phi_tilde(0, 0) = 1.0;
      phi_tilde(0, 1) = 1.0;
      phi_tilde(0, 2) = -1.0;
    } else {
      phi_tilde(g, 3 * g) = 1.0;
      phi_tilde(0, 3 * g + 1) = 1.0;
      phi_tilde(0, 3 * g + 2) = -1.0;
    }
  }
  return {VectorFamily(std::move(phi), space, "phi"),
          VectorFamily(std::move(phi_tilde), space, "phi~")};
}

LowerSemiframeScenario make_lower_semiframe(int N, double growth) {
  if (N < 1) throw UsageError("make_lower_semiframe: need N >= 1");
  if (growth < 0.0) throw UsageError("make_lower_semiframe: growth must be nonnegative");
  SpaceRef space = HilbertGrid::uniform(N, "lower-semiframe");
  CMatrix xi = CMatrix::Zero(N, N);
  CMatrix chi = CMatrix::Zero(N, N);
  for (int n = 0; n < N; ++n) {
    double scale = 1.0 + n * growth;
    xi(n, n) = scale;
    chi(n, n) = 1.0 / scale;
  }
  return LowerSemiframeScenario{VectorFamily(std::move(xi), space, "xi"),
                                VectorFamily(std::move(chi), space, "chi"), growth};
}

}  // namespace qb
