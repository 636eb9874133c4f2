#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "qb/linalg.hpp"

namespace qb {

enum class DecayClass {
  SchwartzLike,      ///< rapid decay, entire; safely inside the pairing class
  L1LInfAnalytic,    ///< integrable, bounded, entire
  BoundedAnalytic,   ///< multipliers: bounded, entire, not integrable
};

/// Function carried jointly by a pointwise evaluator and its Taylor
/// coefficients at 0. Pairings against polynomials go through moments of the
/// evaluator; pairings against delta combs read the Taylor data.
struct AnalyticFunction {
  std::function<double(double)> evaluator;
  std::vector<double> taylor;
  DecayClass decay_class = DecayClass::SchwartzLike;
  std::string name;

  double operator()(double x) const { return evaluator(x); }
  bool in_pairing_class() const {
    return decay_class == DecayClass::SchwartzLike || decay_class == DecayClass::L1LInfAnalytic;
  }

  /// Max deviation between the evaluator and the truncated Taylor series on
  /// |x| <= 1 (self-consistency of the two representations).
  double self_consistency_defect(int order = 30) const;
};

std::vector<double> cauchy_product(const std::vector<double>& a, const std::vector<double>& b,
                                   int order);
/// Coefficients of 1/f from those of f; requires f(0) away from zero.
std::vector<double> taylor_reciprocal(const std::vector<double>& a, int order);

AnalyticFunction af_product(const AnalyticFunction& a, const AnalyticFunction& b);
/// Pointwise reciprocal with Taylor data from the Cauchy recursion. Throws
/// ReciprocalUnderflow when |f| dips below 1e-8 on the sampled range.
AnalyticFunction af_reciprocal(const AnalyticFunction& f);

/// Finite combination sum_k c_k delta^{(k)}.
struct DeltaComb {
  std::map<int, double> coefficients;
};

/// Polynomial in the monomial basis.
struct PolyVector {
  std::vector<double> coefficients;
};

/// Phi_n = x^n / sqrt(n!).
PolyVector monomial_member(int n);
/// eta_n = (-1)^n delta^{(n)} / sqrt(n!).
DeltaComb delta_member(int n);

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  long evaluations = 0;
};

/// Double-exponential quadrature over the whole real line, refined until the
/// level-to-level change drops below abs_tol. Throws IntegrationDivergence
/// when the transformed integrand does not vanish at the extreme abscissae.
QuadratureResult integrate_real_line(const std::function<double(double)>& f,
                                     double abs_tol = 1e-12);

/// <f, Phi_n> = (1/sqrt(n!)) integral conj(f)(x) x^n dx (real-valued carrier).
QuadratureResult moment_pairing(const AnalyticFunction& f, int n, double abs_tol = 1e-12);

/// <sum_k c_k delta^{(k)}, g> = sum_k c_k (-1)^k g^{(k)}(0), read from Taylor
/// data: g^{(k)}(0) = k! t_k(g). Throws TaylorTooShort when data is missing.
double delta_pairing(const DeltaComb& comb, const AnalyticFunction& g);

/// <Phi_n, eta_m> = delta_nm, evaluated by the symbolic rule
/// d^m(x^n)/dx^m |_0 = n! delta_nm with normalization 1/sqrt(n! m!); exact
/// integer result, no floating arithmetic.
int biorthonormality(int n, int m);

struct QuasiIdentityResult {
  double partial_sum = 0.0;
  double reference = 0.0;
  double residual = 0.0;
  std::vector<double> residual_trace;  ///< |S_n - reference| for n = 0..N
};

/// Partial sums of sum_n <f, Phi_n><eta_n, g> against the reference <f, g>,
/// accumulated in ascending n.
QuasiIdentityResult quasi_identity_partial(const AnalyticFunction& f, const AnalyticFunction& g,
                                           int N, double abs_tol = 1e-12);

/// Multiplier deformation phi_n = m Phi_n, psi_n = l eta_n with duals
/// phit_n = m^{-1} eta_n, psit_n = l^{-1} Phi_n; valid while
/// sup |m l - 1| < 1 on the sampled range.
struct MultiplierScenario {
  AnalyticFunction m;
  AnalyticFunction l;
  AnalyticFunction m_inv;
  AnalyticFunction l_inv;
  double contraction = 0.0;  ///< sup_x |m(x) l(x) - 1| over the adaptive grid
  /// phi_n = m Phi_n as a function: evaluator m(x) x^n / sqrt(n!) with the
  /// matching shifted Taylor data.
  AnalyticFunction phi_member(int n) const;
  /// psi_n as an explicit delta comb via the Leibniz expansion of l delta^{(n)}.
  DeltaComb psi_member(int n) const;
};

MultiplierScenario make_multiplier_pair(const AnalyticFunction& m, const AnalyticFunction& l);

/// Deformed resolution sum_n <f, phi_n><phit_n, g> - <f, g>, computed through
/// the transfer identities <f, m Phi_n> = <m f, Phi_n> and
/// <m^{-1} eta_n, g> = <eta_n, m^{-1} g>. With psi_chain the (psi, psit) side
/// is summed instead, using l in place of m.
QuasiIdentityResult deformed_quasi_identity(const MultiplierScenario& s,
                                            const AnalyticFunction& f, const AnalyticFunction& g,
                                            int N, bool psi_chain = false,
                                            double abs_tol = 1e-12);

/// Named catalogue of test functions and multipliers usable from scenarios.
const AnalyticFunction& function_registry(const std::string& name);
std::vector<std::string> function_registry_names();

}  // namespace qb
