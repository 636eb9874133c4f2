#include "qb/sequences.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <json.hpp>

namespace qb {

VectorFamily::VectorFamily(CMatrix members, SpaceRef space, std::string name)
    : members_(std::move(members)), space_(std::move(space)), name_(std::move(name)) {
  if (!space_) throw UsageError("VectorFamily: missing space");
  if (members_.rows() != space_->dim())
    throw UsageError("VectorFamily: member length does not match space dimension");
  if (members_.cols() < 1) throw UsageError("VectorFamily: need at least one member");
}

CMatrix synthesis(const VectorFamily& F) { return F.members(); }

CMatrix euclidean_synthesis(const VectorFamily& F) {
  return F.space()->sqrt_weights().cast<Complex>().asDiagonal() * F.members();
}

CMatrix analysis(const VectorFamily& F) {
  return F.members().adjoint() * F.space()->weights().cast<Complex>().asDiagonal();
}

FrameBounds frame_bounds(const VectorFamily& F) {
  CMatrix S = euclidean_synthesis(F);
  CMatrix frame_op = S * S.adjoint();  // dim x dim, Hermitian PSD
  Eigen::SelfAdjointEigenSolver<CMatrix> es(frame_op, Eigen::EigenvaluesOnly);
  FrameBounds out;
  out.lower = std::max(0.0, es.eigenvalues().minCoeff());
  out.upper = std::max(0.0, es.eigenvalues().maxCoeff());
  out.tight = (out.upper - out.lower) <= 1e-12 * std::max(1.0, out.upper);
  return out;
}

double bessel_bound(const VectorFamily& F) { return frame_bounds(F).upper; }

int family_rank(const VectorFamily& F) {
  Eigen::BDCSVD<CMatrix> svd(euclidean_synthesis(F));
  const auto& sv = svd.singularValues();
  if (sv.size() == 0) return 0;
  double cutoff = 1e-10 * sv(0);
  if (sv(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) ++rank;
  return rank;
}

int excess(const VectorFamily& F) { return F.size() - family_rank(F); }

RieszResult is_riesz(const VectorFamily& F, double tol) {
  RieszResult out;
  out.bounds = frame_bounds(F);
  out.is_riesz = out.bounds.lower > tol && excess(F) == 0;
  return out;
}

CMatrix mixed_gram(const VectorFamily& F, const VectorFamily& G) {
  require_same_space(F.space(), G.space(), "mixed_gram");
  return F.members().adjoint() * F.space()->weights().cast<Complex>().asDiagonal() * G.members();
}

double biorthogonality_defect(const VectorFamily& F, const VectorFamily& G) {
  if (F.size() != G.size()) throw UsageError("biorthogonality_defect: length mismatch");
  CMatrix gram = mixed_gram(F, G);
  gram -= CMatrix::Identity(gram.rows(), gram.cols());
  return gram.cwiseAbs().maxCoeff();
}

std::vector<double> strong_residuals(const VectorFamily& analysis_family,
                                     const VectorFamily& synthesis_family,
                                     const std::vector<CVector>& tests) {
  if (analysis_family.size() != synthesis_family.size())
    throw UsageError("strong_residuals: length mismatch");
  require_same_space(analysis_family.space(), synthesis_family.space(), "strong_residuals");
  const SpaceRef& space = analysis_family.space();
  CMatrix reconstruct = synthesis(synthesis_family) * analysis(analysis_family);
  std::vector<double> out;
  out.reserve(tests.size());
  for (const CVector& v : tests) {
    if (v.size() != space->dim()) throw UsageError("strong_residuals: test vector length");
    out.push_back(norm(space, (reconstruct * v - v).eval()));
  }
  return out;
}

std::vector<double> partial_sum_trace(const VectorFamily& analysis_family,
                                      const VectorFamily& synthesis_family, const CVector& v) {
  if (analysis_family.size() != synthesis_family.size())
    throw UsageError("partial_sum_trace: length mismatch");
  require_same_space(analysis_family.space(), synthesis_family.space(), "partial_sum_trace");
  const SpaceRef& space = analysis_family.space();
  CVector partial = CVector::Zero(space->dim());
  std::vector<double> trace;
  trace.reserve(analysis_family.size());
  for (int n = 0; n < analysis_family.size(); ++n) {
    Complex c = inner(space, analysis_family.member(n), v);
    partial += c * synthesis_family.member(n);
    trace.push_back(norm(space, (partial - v).eval()));
  }
  return trace;
}

double weak_residual(const VectorFamily& F, const VectorFamily& G, const CVector& f,
                     const CVector& g) {
  if (F.size() != G.size()) throw UsageError("weak_residual: length mismatch");
  require_same_space(F.space(), G.space(), "weak_residual");
  const SpaceRef& space = F.space();
  Complex sum(0.0, 0.0);
  for (int n = 0; n < F.size(); ++n)
    sum += inner(space, f, F.member(n)) * inner(space, G.member(n), g);
  return std::abs(sum - inner(space, f, g));
}

SubspaceBasis::SubspaceBasis(CMatrix basis, SpaceRef space)
    : basis_(std::move(basis)), space_(std::move(space)) {
  if (!space_) throw UsageError("SubspaceBasis: missing space");
  if (basis_.rows() != space_->dim())
    throw UsageError("SubspaceBasis: basis vector length does not match space");
  if (basis_.cols() < 1) throw UsageError("SubspaceBasis: empty basis");
  CMatrix eucl = space_->sqrt_weights().cast<Complex>().asDiagonal() * basis_;
  Eigen::BDCSVD<CMatrix> svd(eucl, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-8)
    throw UsageError("SubspaceBasis: vectors are numerically dependent (sigma_min = " +
                     std::to_string(sv(sv.size() - 1)) + ")");
  // An already-orthonormal basis is kept verbatim: re-orthonormalizing would
  // smear rounding noise across entries whose true magnitudes span many
  // orders, which poisons products with strongly scaled operators.
  CMatrix gram_defect = eucl.adjoint() * eucl - CMatrix::Identity(basis_.cols(), basis_.cols());
  if (gram_defect.cwiseAbs().maxCoeff() <= 1e-12) {
    orthonormal_ = basis_;
    return;
  }
  orthonormal_ = space_->inv_sqrt_weights().cast<Complex>().asDiagonal() * CMatrix(svd.matrixU());
}

CMatrix SubspaceBasis::projector() const {
  // P = B B^H W for a weighted-orthonormal B.
  return orthonormal_ * orthonormal_.adjoint() *
         space_->weights().cast<Complex>().asDiagonal();
}

double SubspaceBasis::distance_to_span(const CVector& v) const {
  CVector residual = v - projector() * v;
  return norm(space_, residual);
}

bool SubspaceBasis::contains(const CVector& v, double rel_tol) const {
  double nv = norm(space_, v);
  if (nv == 0.0) return true;
  return distance_to_span(v) <= rel_tol * nv;
}

std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

namespace {

double parse_real(const std::string& s) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    throw UsageError("family file: malformed decimal string '" + s + "'");
  return v;
}

}  // namespace

std::string weights_digest(const HilbertGrid& space) {
  // FNV-1a over the canonical decimal rendering of each weight.
  uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (int i = 0; i < space.dim(); ++i) mix(format_real(space.weights()(i)));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016" PRIx64, h);
  return buf;
}

std::string family_to_json(const VectorFamily& F) {
  nlohmann::ordered_json j;
  j["format"] = "qb-family-v1";
  j["name"] = F.name();
  j["dim"] = F.dim();
  j["weights_digest"] = weights_digest(*F.space());
  j["count"] = F.size();
  nlohmann::ordered_json weights = nlohmann::ordered_json::array();
  for (int i = 0; i < F.dim(); ++i) weights.push_back(format_real(F.space()->weights()(i)));
  j["weights"] = std::move(weights);
  nlohmann::ordered_json members = nlohmann::ordered_json::array();
  for (int n = 0; n < F.size(); ++n) {
    nlohmann::ordered_json column = nlohmann::ordered_json::array();
    for (int i = 0; i < F.dim(); ++i) {
      column.push_back(nlohmann::ordered_json::array(
          {format_real(F.members()(i, n).real()), format_real(F.members()(i, n).imag())}));
    }
    members.push_back(std::move(column));
  }
  j["members"] = std::move(members);
  return j.dump(2) + "\n";
}

void save_family(const VectorFamily& F, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw UsageError("save_family: cannot open " + path);
  out << family_to_json(F);
}

VectorFamily load_family(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("load_family: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("load_family: ") + e.what());
  }
  if (j.value("format", "") != "qb-family-v1")
    throw UsageError("load_family: unknown format tag");
  const int dim = j.at("dim").get<int>();
  const int count = j.at("count").get<int>();
  RealVector w(dim);
  for (int i = 0; i < dim; ++i) w(i) = parse_real(j.at("weights").at(i).get<std::string>());
  SpaceRef space = HilbertGrid::weighted(std::move(w), "loaded");
  std::string digest = j.at("weights_digest").get<std::string>();
  if (digest != weights_digest(*space))
    throw UsageError("load_family: weights digest mismatch");
  CMatrix members(dim, count);
  for (int n = 0; n < count; ++n)
    for (int i = 0; i < dim; ++i) {
      const auto& cell = j.at("members").at(n).at(i);
      members(i, n) = Complex(parse_real(cell.at(0).get<std::string>()),
                              parse_real(cell.at(1).get<std::string>()));
    }
  return VectorFamily(std::move(members), std::move(space), j.value("name", ""));
}

}  // namespace qb
