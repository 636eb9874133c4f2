#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "qb/gallery.hpp"
#include "qb/hermite.hpp"
#include "qb/sequences.hpp"

using namespace qb;

namespace {

SpaceRef c2() { return HilbertGrid::uniform(2); }

VectorFamily family_from_columns(std::initializer_list<std::initializer_list<Complex>> cols,
                                 const SpaceRef& space, const std::string& name = "") {
  CMatrix m(space->dim(), static_cast<Eigen::Index>(cols.size()));
  int j = 0;
  for (const auto& col : cols) {
    int i = 0;
    for (Complex v : col) m(i++, j) = v;
    ++j;
  }
  return VectorFamily(m, space, name);
}

CVector unit(int dim, int k) {
  CVector v = CVector::Zero(dim);
  v[k] = 1.0;
  return v;
}

}  // namespace

TEST_SUITE_BEGIN("sequences");

TEST_CASE("synthesis columns are the members") {
  auto s = c2();
  VectorFamily onb = family_from_columns({{1.0, 0.0}, {0.0, 1.0}}, s);
  CHECK((synthesis(onb) - CMatrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);

  VectorFamily overcomplete = family_from_columns({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, s);
  CMatrix expected(2, 3);
  expected << 1.0, 1.0, 0.0, 0.0, 0.0, 1.0;
  CHECK((synthesis(overcomplete) - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("frame_bounds: orthonormal, doubled, mixed") {
  auto s = c2();
  VectorFamily onb = family_from_columns({{1.0, 0.0}, {0.0, 1.0}}, s);
  FrameBounds fb = frame_bounds(onb);
  CHECK(fb.lower == doctest::Approx(1.0));
  CHECK(fb.upper == doctest::Approx(1.0));
  CHECK(fb.tight);

  VectorFamily doubled =
      family_from_columns({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}}, s);
  fb = frame_bounds(doubled);
  CHECK(fb.lower == doctest::Approx(2.0));
  CHECK(fb.upper == doctest::Approx(2.0));

  VectorFamily mixed = family_from_columns({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, s);
  fb = frame_bounds(mixed);
  CHECK(fb.lower == doctest::Approx(1.0));
  CHECK(fb.upper == doctest::Approx(2.0));
}

TEST_CASE("frame_bounds double under family union with itself") {
  auto s = HilbertGrid::uniform(5);
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  CMatrix m(5, 7);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 7; ++j) m(i, j) = Complex(u(rng), u(rng));
  VectorFamily F(m, s);
  CMatrix doubled(5, 14);
  doubled << m, m;
  VectorFamily FF(doubled, s);
  FrameBounds one = frame_bounds(F);
  FrameBounds two = frame_bounds(FF);
  CHECK(two.lower == doctest::Approx(2.0 * one.lower).epsilon(1e-10));
  CHECK(two.upper == doctest::Approx(2.0 * one.upper).epsilon(1e-10));
}

TEST_CASE("bessel_bound: onb, chained pair family, zero family") {
  auto s = c2();
  VectorFamily onb = family_from_columns({{1.0, 0.0}, {0.0, 1.0}}, s);
  CHECK(bessel_bound(onb) == doctest::Approx(1.0));

  // chi_n = e_n + e_{n+1}: bound approaches 4 from below as N grows
  auto chained = [](int N) {
    SpaceRef space = HilbertGrid::uniform(N + 1);
    CMatrix m = CMatrix::Zero(N + 1, N);
    for (int n = 0; n < N; ++n) {
      m(n, n) = 1.0;
      m(n + 1, n) = 1.0;
    }
    return bessel_bound(VectorFamily(m, space));
  };
  double b16 = chained(16);
  double b64 = chained(64);
  CHECK(b64 <= 4.0);
  CHECK(b64 > b16);
  CHECK(b64 > 3.99);

  VectorFamily zero = family_from_columns({{0.0, 0.0}, {0.0, 0.0}}, s);
  CHECK(bessel_bound(zero) == doctest::Approx(0.0));
}

TEST_CASE("excess and rank bookkeeping") {
  auto s = c2();
  CHECK(excess(family_from_columns({{1.0, 0.0}, {0.0, 1.0}}, s)) == 0);
  CHECK(excess(family_from_columns({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}}, s)) == 2);

  auto [phi, phi_tilde] = make_counterexample(3);
  VectorFamily first_nine(phi.members().leftCols(9), phi.space());
  CHECK(excess(first_nine) == 6);
  CHECK(excess(first_nine) + family_rank(first_nine) == first_nine.size());
}

TEST_CASE("is_riesz: onb yes, overcomplete no, scaled basis with bounds") {
  auto s = c2();
  RieszResult r = is_riesz(family_from_columns({{1.0, 0.0}, {0.0, 1.0}}, s));
  CHECK(r.is_riesz);
  CHECK(r.bounds.lower == doctest::Approx(1.0));

  r = is_riesz(family_from_columns({{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, s));
  CHECK_FALSE(r.is_riesz);

  // rho = 2 + sin on a Hermite grid scales the basis; bounds land in [1, 9]
  auto grid = std::make_shared<HermiteGrid>(33);
  RealVector rho(33);
  for (int i = 0; i < 33; ++i) rho(i) = 2.0 + std::sin(grid->nodes()(i));
  CMatrix members = rho.cast<Complex>().asDiagonal() * grid->hermite_functions(33);
  RieszResult scaled = is_riesz(VectorFamily(members, grid->space()));
  CHECK(scaled.is_riesz);
  CHECK(scaled.bounds.lower >= 1.0 - 1e-10);
  CHECK(scaled.bounds.upper <= 9.0 + 1e-10);
}

TEST_CASE("frame_bounds: non-spanning family signals A = 0") {
  auto s = HilbertGrid::uniform(3);
  CMatrix m = CMatrix::Zero(3, 2);
  m(0, 0) = 1.0;
  m(1, 1) = 1.0;  // span misses e_3
  FrameBounds fb = frame_bounds(VectorFamily(m, s));
  CHECK(fb.lower == doctest::Approx(0.0));
  CHECK(fb.upper == doctest::Approx(1.0));
  CHECK_FALSE(is_riesz(VectorFamily(m, s)).is_riesz);
}

TEST_CASE("biorthogonality_defect: onb, christensen pair") {
  auto s = c2();
  VectorFamily onb = family_from_columns({{1.0, 0.0}, {0.0, 1.0}}, s);
  CHECK(biorthogonality_defect(onb, onb) == doctest::Approx(0.0));

  ChristensenScenario cs = make_christensen(32, 1.0, 0.0);
  CHECK(biorthogonality_defect(cs.xi, cs.chi) <= 1e-12);
}

TEST_CASE("strong_residuals and the ordered partial-sum trace") {
  auto s = c2();
  VectorFamily onb = family_from_columns({{1.0, 0.0}, {0.0, 1.0}}, s);
  CVector v(2);
  v << Complex(0.3, 0.1), Complex(-1.0, 0.4);
  CHECK(strong_residuals(onb, onb, {v}).front() <= 1e-15);

  auto [phi, phi_tilde] = make_counterexample(3);
  const int dim = phi.dim();
  CVector target = unit(dim, 0) + unit(dim, 1);
  CHECK(strong_residuals(phi, phi_tilde, {target}).front() <= 1e-15);

  // reversed order on v = e1: the deviation returns to 1 at the second member
  // of every group past the first (positions 5 and 8, 1-based)
  std::vector<double> trace = partial_sum_trace(phi_tilde, phi, unit(dim, 0));
  CHECK(trace[4] == doctest::Approx(1.0));
  CHECK(trace[7] == doctest::Approx(1.0));
  CHECK(trace.back() <= 1e-15);  // full truncated sum still lands on the target
}

TEST_CASE("weak_residual: onb exact, scaling mismatch") {
  auto s = c2();
  VectorFamily onb = family_from_columns({{1.0, 0.0}, {0.0, 1.0}}, s);
  CVector f(2), g(2);
  f << 1.0, Complex(0.0, 1.0);
  g << Complex(0.5, -0.5), 1.0;
  CHECK(weak_residual(onb, onb, f, g) <= 1e-15);

  VectorFamily scaled = family_from_columns({{2.0, 0.0}, {0.0, 2.0}}, s);
  CVector e0 = unit(2, 0);
  // sum <f, 2 e_n><e_n, g> = 2 <f, g>, so the residual is |<f,g>| = 1 here
  CHECK(weak_residual(scaled, onb, e0, e0) == doctest::Approx(1.0));
}

TEST_CASE("weak residual on the oscillator pair with interior bumps") {
  auto grid = std::make_shared<HermiteGrid>(129);
  OscillatorScenario osc = make_shifted_oscillator(0.3, 40, grid);
  auto bump = [&](double center, double width) {
    CVector v = CVector::Zero(grid->size());
    for (int i = 0; i < grid->size(); ++i) {
      double z = (grid->nodes()(i) - center) / width;
      if (std::abs(z) < 1.0) v[i] = std::exp(-1.0 / (1.0 - z * z));
    }
    return v;
  };
  CVector f = bump(0.5, 3.0);
  CVector g = bump(-0.3, 2.5);
  CHECK(weak_residual(osc.eta, osc.chi, f, g) <= 1e-6);
}

TEST_CASE("SubspaceBasis: projector, membership, dependence rejection") {
  auto s = HilbertGrid::uniform(4);
  CMatrix basis(4, 2);
  basis << 1.0, 1.0, 1.0, -1.0, 0.0, 1.0, 0.0, 0.0;
  SubspaceBasis D(basis, s);
  CHECK(D.subspace_dim() == 2);

  CMatrix P = D.projector();
  CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(D.contains(basis.col(0)));
  CHECK(D.contains((basis.col(0) - 0.5 * basis.col(1)).eval()));
  CHECK_FALSE(D.contains(unit(4, 3)));

  CMatrix dependent(4, 2);
  dependent << 1.0, 1.0, 0.0, 1e-12, 0.0, 0.0, 0.0, 0.0;
  CHECK_THROWS_AS(SubspaceBasis(dependent, s), UsageError);
}

TEST_CASE("weak residual bounded by strong residual norm (Cauchy-Schwarz chain)") {
  auto s = HilbertGrid::uniform(6);
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto rnd_mat = [&](int cols) {
    CMatrix m(6, cols);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = Complex(u(rng), u(rng));
    return m;
  };
  VectorFamily F(rnd_mat(6), s);
  VectorFamily G(rnd_mat(6), s);
  for (int trial = 0; trial < 5; ++trial) {
    CVector f(6), g(6);
    for (int i = 0; i < 6; ++i) {
      f[i] = Complex(u(rng), u(rng));
      g[i] = Complex(u(rng), u(rng));
    }
    // |sum <f,F_n><G_n,g> - <f,g>| = |<R f, g>| with R the reconstruction defect
    double strong = strong_residuals(F, G, {f}).front();
    CHECK(weak_residual(F, G, f, g) <= strong * norm(s, g) + 1e-12);
  }
}

TEST_CASE("family JSON round-trip is exact") {
  auto grid = std::make_shared<HermiteGrid>(9);
  CMatrix members = grid->hermite_functions(4);
  members(3, 1) = Complex(-0.125, 1.0 / 3.0);
  VectorFamily F(members, grid->space(), "roundtrip");

  std::string path = std::string("/tmp/qb_family_roundtrip.json");
  save_family(F, path);
  VectorFamily loaded = load_family(path);
  CHECK(loaded.name() == "roundtrip");
  CHECK(loaded.dim() == F.dim());
  CHECK(loaded.size() == F.size());
  CHECK((loaded.members() - F.members()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(loaded.space()->weights() == F.space()->weights());
  std::remove(path.c_str());
}

TEST_CASE("family file loading rejects tampered content") {
  auto s = HilbertGrid::uniform(2);
  VectorFamily F(CMatrix::Identity(2, 2), s, "guarded");
  std::string path = "/tmp/qb_family_tampered.json";
  save_family(F, path);
  std::string text;
  {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  // corrupt one weight: the digest in the header no longer matches
  auto pos = text.find("\"1\"");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 3, "\"2\"");
  {
    std::ofstream out(path);
    out << text;
  }
  CHECK_THROWS_AS(load_family(path), UsageError);
  CHECK_THROWS_AS(load_family("/tmp/does_not_exist_qb.json"), UsageError);
  std::remove(path.c_str());
}

TEST_SUITE_END();
