#include "qb/distribution.hpp"

#include <algorithm>
#include <cmath>

namespace qb {

double AnalyticFunction::self_consistency_defect(int order) const {
  int terms = std::min<int>(order + 1, static_cast<int>(taylor.size()));
  double worst = 0.0;
  for (int i = -20; i <= 20; ++i) {
    double x = i / 20.0;
    double series = 0.0;
    for (int k = terms - 1; k >= 0; --k) series = series * x + taylor[k];
    worst = std::max(worst, std::abs(evaluator(x) - series));
  }
  return worst;
}

std::vector<double> cauchy_product(const std::vector<double>& a, const std::vector<double>& b,
                                   int order) {
  std::vector<double> out(order + 1, 0.0);
  for (int n = 0; n <= order; ++n) {
    double sum = 0.0;
    for (int j = 0; j <= n; ++j) {
      double aj = j < static_cast<int>(a.size()) ? a[j] : 0.0;
      double bn = (n - j) < static_cast<int>(b.size()) ? b[n - j] : 0.0;
      sum += aj * bn;
    }
    out[n] = sum;
  }
  return out;
}

std::vector<double> taylor_reciprocal(const std::vector<double>& a, int order) {
  if (a.empty() || std::abs(a[0]) < 1e-8)
    throw ReciprocalUnderflow("taylor_reciprocal: constant term too small");
  std::vector<double> r(order + 1, 0.0);
  r[0] = 1.0 / a[0];
  for (int n = 1; n <= order; ++n) {
    double sum = 0.0;
    for (int j = 1; j <= n; ++j) {
      double aj = j < static_cast<int>(a.size()) ? a[j] : 0.0;
      sum += aj * r[n - j];
    }
    r[n] = -sum / a[0];
  }
  return r;
}

namespace {

DecayClass product_class(DecayClass a, DecayClass b) {
  if (a == DecayClass::SchwartzLike || b == DecayClass::SchwartzLike)
    return DecayClass::SchwartzLike;
  if (a == DecayClass::L1LInfAnalytic || b == DecayClass::L1LInfAnalytic)
    return DecayClass::L1LInfAnalytic;
  return DecayClass::BoundedAnalytic;
}

// Deterministic sampling grid used for sup estimates and reciprocal guards.
constexpr double kSampleHalfWidth = 32.0;
constexpr int kSampleCount = 4097;

}  // namespace

AnalyticFunction af_product(const AnalyticFunction& a, const AnalyticFunction& b) {
  AnalyticFunction out;
  auto ea = a.evaluator;
  auto eb = b.evaluator;
  out.evaluator = [ea, eb](double x) { return ea(x) * eb(x); };
  int order = static_cast<int>(std::min(a.taylor.size(), b.taylor.size()));
  out.taylor = cauchy_product(a.taylor, b.taylor, std::max(0, order - 1));
  out.decay_class = product_class(a.decay_class, b.decay_class);
  out.name = a.name + "*" + b.name;
  return out;
}

AnalyticFunction af_reciprocal(const AnalyticFunction& f) {
  for (int i = 0; i < kSampleCount; ++i) {
    double x = -kSampleHalfWidth + 2.0 * kSampleHalfWidth * i / (kSampleCount - 1);
    if (std::abs(f.evaluator(x)) < 1e-8)
      throw ReciprocalUnderflow("af_reciprocal: |" + f.name + "| dips below 1e-8 near x = " +
                                std::to_string(x));
  }
  AnalyticFunction out;
  auto ef = f.evaluator;
  out.evaluator = [ef](double x) { return 1.0 / ef(x); };
  out.taylor = taylor_reciprocal(f.taylor, std::max<int>(0, static_cast<int>(f.taylor.size()) - 1));
  out.decay_class = DecayClass::BoundedAnalytic;
  out.name = "1/(" + f.name + ")";
  return out;
}

PolyVector monomial_member(int n) {
  if (n < 0) throw UsageError("monomial_member: n must be nonnegative");
  PolyVector p;
  p.coefficients.assign(n + 1, 0.0);
  p.coefficients[n] = std::exp(-0.5 * std::lgamma(n + 1.0));
  return p;
}

DeltaComb delta_member(int n) {
  if (n < 0) throw UsageError("delta_member: n must be nonnegative");
  DeltaComb comb;
  double sign = (n % 2 == 0) ? 1.0 : -1.0;
  comb.coefficients[n] = sign * std::exp(-0.5 * std::lgamma(n + 1.0));
  return comb;
}

QuadratureResult integrate_real_line(const std::function<double(double)>& f, double abs_tol) {
  // x = sinh((pi/2) sinh t) maps R to R double-exponentially; the trapezoid
  // rule in t then converges geometrically in the refinement level.
  constexpr double kHalfPi = 1.5707963267948966;
  constexpr double kTmax = 3.4;
  constexpr int kMaxLevel = 12;

  QuadratureResult result;
  double boundary_term = 0.0;
  auto transformed = [&](double t) {
    double st = std::sinh(t);
    double x = std::sinh(kHalfPi * st);
    double fx = f(x);
    if (fx == 0.0) return 0.0;  // keep underflowed tails from meeting the huge jacobian
    double jac = kHalfPi * std::cosh(t) * std::cosh(kHalfPi * st);
    return fx * jac;
  };

  double h = 1.0;
  double sum = transformed(0.0);
  {
    int j = 1;
    for (; j * h <= kTmax; ++j) {
      double a = transformed(j * h);
      double b = transformed(-j * h);
      sum += a + b;
      if (j * h > kTmax - 1.0)
        boundary_term = std::max({boundary_term, std::abs(h * a), std::abs(h * b)});
    }
    result.evaluations += 2 * j - 1;
  }
  double integral = h * sum;
  double change = std::abs(integral);

  for (int level = 1; level <= kMaxLevel; ++level) {
    h *= 0.5;
    double odd_sum = 0.0;
    int count = 0;
    for (int j = 1; (2 * j - 1) * h <= kTmax; ++j) {
      double t = (2 * j - 1) * h;
      double a = transformed(t);
      double b = transformed(-t);
      odd_sum += a + b;
      count += 2;
      if (t > kTmax - 1.0)
        boundary_term = std::max({boundary_term, std::abs(h * a), std::abs(h * b)});
    }
    result.evaluations += count;
    double refined = 0.5 * integral + h * odd_sum;
    change = std::abs(refined - integral);
    integral = refined;
    // absolute target, with a machine-precision floor for large integrals
    if (level >= 3 && change <= abs_tol + 1e-14 * std::abs(integral)) break;
    if (level == kMaxLevel)
      throw IntegrationDivergence(
          "integrate_real_line: refinement stalled (last change " + std::to_string(change) + ")");
  }

  if (boundary_term > std::max(abs_tol, 1e-12 * (1.0 + std::abs(integral))) * 10.0)
    throw IntegrationDivergence(
        "integrate_real_line: integrand does not vanish at the transformed boundary "
        "(tail sample " + std::to_string(boundary_term) + ")");

  result.value = integral;
  result.error_estimate = change;
  return result;
}

QuadratureResult moment_pairing(const AnalyticFunction& f, int n, double abs_tol) {
  if (n < 0) throw UsageError("moment_pairing: n must be nonnegative");
  if (!f.in_pairing_class())
    throw UsageError("moment_pairing: " + f.name + " is not tagged integrable");
  auto ef = f.evaluator;
  auto integrand = [ef, n](double x) {
    double fx = ef(x);
    if (fx == 0.0) return 0.0;
    return fx * std::pow(x, n);
  };
  QuadratureResult raw = integrate_real_line(integrand, abs_tol);
  double scale = std::exp(-0.5 * std::lgamma(n + 1.0));
  raw.value *= scale;
  raw.error_estimate *= scale;
  return raw;
}

double delta_pairing(const DeltaComb& comb, const AnalyticFunction& g) {
  double sum = 0.0;
  for (const auto& [order, coeff] : comb.coefficients) {
    if (order < 0) throw UsageError("delta_pairing: negative derivative order");
    if (order >= static_cast<int>(g.taylor.size()))
      throw TaylorTooShort("delta_pairing: " + g.name + " carries Taylor data only up to order " +
                           std::to_string(g.taylor.size() - 1) + ", need " +
                           std::to_string(order));
    // g^{(k)}(0) = k! t_k
    double factorial = 1.0;
    for (int j = 2; j <= order; ++j) factorial *= j;
    double sign = (order % 2 == 0) ? 1.0 : -1.0;
    sum += coeff * sign * factorial * g.taylor[order];
  }
  return sum;
}

int biorthonormality(int n, int m) {
  if (n < 0 || m < 0) throw UsageError("biorthonormality: indices must be nonnegative");
  // <Phi_n, eta_m> pairs x^n/sqrt(n!) against (-1)^m delta^{(m)}/sqrt(m!):
  // the m-th derivative of x^n at 0 is n! only when m = n, else 0, and the
  // sign (-1)^m from the comb cancels the (-1)^m of the derivative pairing.
  // At m = n the value is n!/(sqrt(n!) sqrt(n!)) = 1 exactly.
  return n == m ? 1 : 0;
}

QuasiIdentityResult quasi_identity_partial(const AnalyticFunction& f, const AnalyticFunction& g,
                                           int N, double abs_tol) {
  if (N < 0) throw UsageError("quasi_identity_partial: N must be nonnegative");
  if (!f.in_pairing_class())
    throw UsageError("quasi_identity_partial: f must be in the pairing class");
  if (static_cast<int>(g.taylor.size()) <= N)
    throw TaylorTooShort("quasi_identity_partial: g needs Taylor data up to order " +
                         std::to_string(N));

  QuasiIdentityResult out;
  auto ef = f.evaluator;
  auto eg = g.evaluator;
  out.reference =
      integrate_real_line([ef, eg](double x) { return ef(x) * eg(x); }, abs_tol).value;

  double sum = 0.0;
  out.residual_trace.reserve(N + 1);
  for (int n = 0; n <= N; ++n) {
    double moment = moment_pairing(f, n, abs_tol).value;
    double dual = delta_pairing(delta_member(n), g);
    sum += moment * dual;
    out.residual_trace.push_back(std::abs(sum - out.reference));
  }
  out.partial_sum = sum;
  out.residual = std::abs(sum - out.reference);
  return out;
}

AnalyticFunction MultiplierScenario::phi_member(int n) const {
  if (n < 0) throw UsageError("phi_member: n must be nonnegative");
  AnalyticFunction out;
  double scale = std::exp(-0.5 * std::lgamma(n + 1.0));
  auto em = m.evaluator;
  out.evaluator = [em, n, scale](double x) { return em(x) * std::pow(x, n) * scale; };
  out.taylor.assign(m.taylor.size() + n, 0.0);
  for (std::size_t k = 0; k < m.taylor.size(); ++k) out.taylor[k + n] = scale * m.taylor[k];
  out.decay_class = DecayClass::BoundedAnalytic;
  out.name = m.name + "*Phi_" + std::to_string(n);
  return out;
}

DeltaComb MultiplierScenario::psi_member(int n) const {
  if (n < 0) throw UsageError("psi_member: n must be nonnegative");
  if (static_cast<int>(l.taylor.size()) <= n)
    throw TaylorTooShort("psi_member: multiplier Taylor data too short");
  // l(x) delta^{(n)} = sum_j C(n,j) (-1)^j l^{(j)}(0) delta^{(n-j)}.
  DeltaComb comb;
  double norm_factor = std::exp(-0.5 * std::lgamma(n + 1.0));
  double eta_sign = (n % 2 == 0) ? 1.0 : -1.0;
  double binom = 1.0;
  double factorial = 1.0;
  for (int j = 0; j <= n; ++j) {
    if (j > 0) {
      binom = binom * (n - j + 1) / j;
      factorial *= j;
    }
    double deriv = factorial * l.taylor[j];
    double sign = (j % 2 == 0) ? 1.0 : -1.0;
    double value = eta_sign * norm_factor * binom * sign * deriv;
    if (value != 0.0) comb.coefficients[n - j] += value;
  }
  return comb;
}

MultiplierScenario make_multiplier_pair(const AnalyticFunction& m, const AnalyticFunction& l) {
  auto sup_product_deviation = [&]() {
    double sup = 0.0;
    double arg = 0.0;
    for (int i = 0; i < kSampleCount; ++i) {
      double x = -kSampleHalfWidth + 2.0 * kSampleHalfWidth * i / (kSampleCount - 1);
      double mv = m.evaluator(x);
      double lv = l.evaluator(x);
      if (std::abs(mv) < 1e-8 || std::abs(lv) < 1e-8)
        throw ReciprocalUnderflow("make_multiplier_pair: multiplier magnitude below 1e-8 at x = " +
                                  std::to_string(x));
      double dev = std::abs(mv * lv - 1.0);
      if (dev > sup) {
        sup = dev;
        arg = x;
      }
    }
    // one refinement pass around the coarse argmax
    double step = 2.0 * kSampleHalfWidth / (kSampleCount - 1);
    for (int i = -1024; i <= 1024; ++i) {
      double x = arg + i * (step / 1024.0);
      double dev = std::abs(m.evaluator(x) * l.evaluator(x) - 1.0);
      sup = std::max(sup, dev);
    }
    return sup;
  };

  double contraction = sup_product_deviation();
  if (!(contraction < 1.0))
    throw ContractionFailure("make_multiplier_pair: sup |m l - 1| = " +
                             std::to_string(contraction) + " >= 1");

  MultiplierScenario s{m, l, af_reciprocal(m), af_reciprocal(l), contraction};
  return s;
}

QuasiIdentityResult deformed_quasi_identity(const MultiplierScenario& s,
                                            const AnalyticFunction& f, const AnalyticFunction& g,
                                            int N, bool psi_chain, double abs_tol) {
  if (!f.in_pairing_class() || !g.in_pairing_class())
    throw UsageError("deformed_quasi_identity: f and g must be in the pairing class");

  // phi chain: <f, m Phi_n> <eta_n, m^{-1} g>  (transfer identities move the
  // multiplier onto the test functions; both stay in the class by the tag rules).
  // psi chain: <eta_n, l f> <l^{-1} Phi_n paired with g>.
  AnalyticFunction left = psi_chain ? af_product(s.l, f) : af_product(s.m, f);
  AnalyticFunction right = psi_chain ? af_product(s.l_inv, g) : af_product(s.m_inv, g);
  if (!left.in_pairing_class() || static_cast<int>(right.taylor.size()) <= N)
    throw UsageError("deformed_quasi_identity: deformed pair leaves the admissible class");

  QuasiIdentityResult out;
  auto ef = f.evaluator;
  auto eg = g.evaluator;
  out.reference =
      integrate_real_line([ef, eg](double x) { return ef(x) * eg(x); }, abs_tol).value;

  double sum = 0.0;
  out.residual_trace.reserve(N + 1);
  for (int n = 0; n <= N; ++n) {
    double moment_side;
    double taylor_side;
    if (psi_chain) {
      taylor_side = delta_pairing(delta_member(n), left);    // <f, psi_n>
      moment_side = moment_pairing(right, n, abs_tol).value; // <psit_n, g>
    } else {
      moment_side = moment_pairing(left, n, abs_tol).value;  // <f, phi_n>
      taylor_side = delta_pairing(delta_member(n), right);   // <phit_n, g>
    }
    sum += moment_side * taylor_side;
    out.residual_trace.push_back(std::abs(sum - out.reference));
  }
  out.partial_sum = sum;
  out.residual = std::abs(sum - out.reference);
  return out;
}

namespace {

constexpr int kRegistryOrder = 80;

AnalyticFunction make_gaussian(double rate, const std::string& name) {
  AnalyticFunction f;
  f.evaluator = [rate](double x) { return std::exp(-rate * x * x); };
  f.taylor.assign(kRegistryOrder + 1, 0.0);
  double coeff = 1.0;
  for (int k = 0; 2 * k <= kRegistryOrder; ++k) {
    f.taylor[2 * k] = coeff;
    coeff *= -rate / (k + 1.0);
  }
  f.decay_class = DecayClass::SchwartzLike;
  f.name = name;
  return f;
}

AnalyticFunction make_constant(double c, const std::string& name) {
  AnalyticFunction f;
  f.evaluator = [c](double) { return c; };
  f.taylor.assign(kRegistryOrder + 1, 0.0);
  f.taylor[0] = c;
  f.decay_class = DecayClass::BoundedAnalytic;
  f.name = name;
  return f;
}

std::vector<double> sin_taylor() {
  std::vector<double> t(kRegistryOrder + 1, 0.0);
  double coeff = 1.0;
  for (int k = 0; 2 * k + 1 <= kRegistryOrder; ++k) {
    t[2 * k + 1] = coeff;
    coeff *= -1.0 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
  }
  return t;
}

AnalyticFunction make_two_plus_sin_over_2() {
  AnalyticFunction f;
  f.evaluator = [](double x) { return 0.5 * (2.0 + std::sin(x)); };
  f.taylor = sin_taylor();
  for (double& c : f.taylor) c *= 0.5;
  f.taylor[0] += 1.0;
  f.decay_class = DecayClass::BoundedAnalytic;
  f.name = "two_plus_sin_over_2";
  return f;
}

AnalyticFunction make_inv_two_plus_sin() {
  AnalyticFunction f;
  f.evaluator = [](double x) { return 1.0 / (2.0 + std::sin(x)); };
  std::vector<double> base = sin_taylor();
  base[0] += 2.0;
  f.taylor = taylor_reciprocal(base, kRegistryOrder);
  f.decay_class = DecayClass::BoundedAnalytic;
  f.name = "inv_two_plus_sin";
  return f;
}

std::map<std::string, AnalyticFunction> build_registry() {
  std::map<std::string, AnalyticFunction> reg;
  reg["one"] = make_constant(1.0, "one");
  reg["const_two"] = make_constant(2.0, "const_two");
  reg["gaussian"] = make_gaussian(1.0, "gaussian");
  reg["gaussian_half"] = make_gaussian(0.5, "gaussian_half");
  reg["gaussian_quarter"] = make_gaussian(0.25, "gaussian_quarter");
  reg["two_plus_sin_over_2"] = make_two_plus_sin_over_2();
  reg["inv_two_plus_sin"] = make_inv_two_plus_sin();
  return reg;
}

}  // namespace

const AnalyticFunction& function_registry(const std::string& name) {
  static const std::map<std::string, AnalyticFunction> registry = build_registry();
  auto it = registry.find(name);
  if (it == registry.end())
    throw SchemaError("function_registry: unknown function '" + name + "'");
  return it->second;
}

std::vector<std::string> function_registry_names() {
  static const std::map<std::string, AnalyticFunction> registry = build_registry();
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry) names.push_back(name);
  return names;
}

}  // namespace qb

