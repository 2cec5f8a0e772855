#include "treeshift/multiplier.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "treeshift/linalg.hpp"

namespace treeshift {

namespace {

Eigen::Index full_length(Eigen::Index la, Eigen::Index lb, std::optional<Eigen::Index> max_length) {
  if (la == 0 || lb == 0) return 0;
  const Eigen::Index n = la + lb - 1;
  return max_length ? std::min(n, *max_length) : n;
}

/// Zeroes coefficient entries (j, n) with k_j + n past the truncation.
void mask_out_of_range(const SeparatedBasis& basis, GenerationIndex depth, Matrix& coeffs) {
  for (Eigen::Index n = 0; n < coeffs.cols(); ++n)
    for (Eigen::Index j = 0; j < coeffs.rows(); ++j)
      if (basis.generation(j) + n > depth) coeffs(j, n) = 0.0;
}

nlohmann::json complex_json(Scalar z) { return nlohmann::json::array({z.real(), z.imag()}); }

Scalar complex_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    throw MalformedSpec("complex entries must be [re, im] pairs");
  return {j[0].get<Real>(), j[1].get<Real>()};
}

nlohmann::json parse_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedSpec(std::string("invalid symbol JSON: ") + e.what());
  }
}

}  // namespace

ScalarSymbol ScalarSymbol::monomial(Eigen::Index m) {
  ScalarSymbol s;
  s.coeffs.assign(static_cast<std::size_t>(m + 1), Scalar(0));
  s.coeffs.back() = 1.0;
  return s;
}

OpSymbol OpSymbol::unit(Eigen::Index dim) { return {{Matrix::Identity(dim, dim)}}; }

OpSymbol OpSymbol::monomial(Eigen::Index m, const Matrix& a) {
  OpSymbol s;
  s.mats.assign(static_cast<std::size_t>(m), Matrix::Zero(a.rows(), a.cols()));
  s.mats.push_back(a);
  return s;
}

OpSymbol OpSymbol::from_scalar(const ScalarSymbol& a, Eigen::Index dim) {
  OpSymbol s;
  for (const Scalar& x : a.coeffs) s.mats.push_back(x * Matrix::Identity(dim, dim));
  return s;
}

ScalarSymbol convolve(const ScalarSymbol& a, const ScalarSymbol& b, std::optional<Eigen::Index> max_length) {
  const Eigen::Index n = full_length(a.size(), b.size(), max_length);
  ScalarSymbol out;
  out.coeffs.assign(static_cast<std::size_t>(n), Scalar(0));
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index i = std::max<Eigen::Index>(0, k - b.size() + 1); i <= std::min(k, a.size() - 1); ++i)
      out.coeffs[static_cast<std::size_t>(k)] += a.at(i) * b.at(k - i);
  return out;
}

OpSymbol convolve(const OpSymbol& a, const OpSymbol& b, std::optional<Eigen::Index> max_length) {
  if (a.size() > 0 && b.size() > 0 && a.dim() != b.dim()) throw DimensionMismatch("symbols act on different spaces");
  const Eigen::Index n = full_length(a.size(), b.size(), max_length);
  OpSymbol out;
  for (Eigen::Index k = 0; k < n; ++k) {
    Matrix acc = Matrix::Zero(a.dim(), a.dim());
    for (Eigen::Index i = std::max<Eigen::Index>(0, k - b.size() + 1); i <= std::min(k, a.size() - 1); ++i)
      acc.noalias() += a.mats[static_cast<std::size_t>(i)] * b.mats[static_cast<std::size_t>(k - i)];
    out.mats.push_back(std::move(acc));
  }
  return out;
}

CoeffSeq convolve_with_coeffs(const ScalarSymbol& phi, const CoeffSeq& c) {
  CoeffSeq out;
  out.exact_to = c.exact_to;
  out.coeffs = Matrix::Zero(c.dim(), c.length());
  for (Eigen::Index n = 0; n < c.length(); ++n)
    for (Eigen::Index k = 0; k <= std::min(n, phi.size() - 1); ++k) out[n] += phi.at(k) * c[n - k];
  return out;
}

CoeffSeq convolve_with_coeffs(const OpSymbol& phi, const CoeffSeq& c) {
  if (phi.size() > 0 && phi.dim() != c.dim()) throw DimensionMismatch("symbol does not match the coefficient space");
  CoeffSeq out;
  out.exact_to = c.exact_to;
  out.coeffs = Matrix::Zero(c.dim(), c.length());
  for (Eigen::Index n = 0; n < c.length(); ++n)
    for (Eigen::Index k = 0; k <= std::min(n, phi.size() - 1); ++k)
      out[n].noalias() += phi.mats[static_cast<std::size_t>(k)] * c[n - k];
  return out;
}

Vector scalar_mult_apply(const ShiftOperator& S, const ScalarSymbol& phi, const Vector& f) {
  const Tree& t = S.tree();
  if (f.size() != t.size()) throw DimensionMismatch("vector does not match the tree");
  Vector out(t.size());
  for (VertexId v = 0; v < t.size(); ++v) {
    Scalar acc = phi.at(0) * f[v];
    Real weight = 1.0;
    VertexId x = v;
    for (Eigen::Index k = 1; k < phi.size() && k <= t.generation(v); ++k) {
      weight *= S.weights()[x];
      x = t.parent(x);
      acc += weight * phi.at(k) * f[x];
    }
    out[v] = acc;
  }
  return out;
}

Vector scalar_mult_adjoint(const ShiftOperator& S, const ScalarSymbol& phi, const Vector& f) {
  const Tree& t = S.tree();
  if (f.size() != t.size()) throw DimensionMismatch("vector does not match the tree");
  Vector out = std::conj(phi.at(0)) * f;
  for (VertexId w = 0; w < t.size(); ++w) {
    if (f[w] == Scalar(0)) continue;
    Real weight = 1.0;
    VertexId x = w;
    for (Eigen::Index k = 1; k < phi.size() && k <= t.generation(w); ++k) {
      weight *= S.weights()[x];
      x = t.parent(x);
      out[x] += weight * std::conj(phi.at(k)) * f[w];
    }
  }
  return out;
}

Vector op_mult_apply(const ShiftOperator& S, const SeparatedBasis& basis, const OpSymbol& phi, const Vector& f) {
  return synthesize(S, basis, convolve_with_coeffs(phi, analytic_coeffs(S, basis, f, S.depth())));
}

SparseMatrix polynomial_in_shift(const ShiftOperator& S, const ScalarSymbol& p) {
  const SparseMatrix s = shift_matrix(S);
  SparseMatrix power(S.dim(), S.dim());
  power.setIdentity();
  SparseMatrix acc(S.dim(), S.dim());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    if (k > S.depth()) break;
    if (p.at(k) != Scalar(0)) acc += p.at(k) * power;
    power = (s * power).pruned();
  }
  return acc;
}

Matrix symbol_columns(const ShiftOperator& S, const SeparatedBasis& basis, const SparseMatrix& A, Eigen::Index j,
                      GenerationIndex K) {
  if (A.rows() != S.dim() || A.cols() != S.dim()) throw DimensionMismatch("operator does not match the tree");
  const Vector y = A * basis.vector(j);
  return analytic_coeffs(S, basis, y, K).coeffs;
}

OpSymbol extract_symbol(const ShiftOperator& S, const SeparatedBasis& basis, const SparseMatrix& A, GenerationIndex K) {
  if (basis.size() > kMaxDenseSymbolDim)
    throw DepthTooLargeForMemory("dense operator symbol would need dim(E) = " + std::to_string(basis.size()));
  OpSymbol out;
  out.mats.assign(static_cast<std::size_t>(K + 1), Matrix::Zero(basis.size(), basis.size()));
  for (Eigen::Index j = 0; j < basis.size(); ++j) {
    const Matrix cols = symbol_columns(S, basis, A, j, K);
    for (GenerationIndex k = 0; k <= K; ++k) out.mats[static_cast<std::size_t>(k)].col(j) = cols.col(k);
  }
  return out;
}

OpSymbol extract_symbol(const ShiftOperator& S, const SeparatedBasis& basis, const Matrix& A, GenerationIndex K) {
  return extract_symbol(S, basis, SparseMatrix(A.sparseView()), K);
}

Real commutator_norm(const ShiftOperator& S, const SparseMatrix& A) {
  if (A.rows() != S.dim() || A.cols() != S.dim()) throw DimensionMismatch("operator does not match the tree");
  const SparseMatrix s = shift_matrix(S);
  const SparseMatrix c = A * s - s * A;
  return c.norm();
}

VerificationReport commutant_check(const ShiftOperator& S, const SeparatedBasis& basis, const SparseMatrix& A,
                                   int trials, std::uint64_t seed, Real tol) {
  const Real comm = commutator_norm(S, A);
  if (comm > tol * std::max<Real>(1.0, A.norm()))
    throw NotInCommutant("||AS - SA|| = " + std::to_string(comm));

  const GenerationIndex D = S.depth();
  VerificationReport report;
  report.name = "commutant";
  report.tolerance = tol;
  report.exactness_depth = D;
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = trial_rng(seed, static_cast<std::uint64_t>(trial));
    const Vector f = random_vector(S.dim(), rng).normalized();
    const CoeffSeq c = analytic_coeffs(S, basis, f, D);
    const Matrix lhs = analytic_coeffs(S, basis, A * f, D).coeffs;

    // (φ̂_A * ĉ)(m + k) collects coords(P_E L^k A g_m) with g_m = ĉ(m) in E.
    Matrix rhs = Matrix::Zero(basis.size(), D + 1);
    for (GenerationIndex m = 0; m <= D; ++m) {
      if (c[m].isZero(0.0)) continue;
      const Vector g = basis.synthesize(c[m]);
      rhs.middleCols(m, D - m + 1) += analytic_coeffs(S, basis, A * g, D - m).coeffs;
    }
    mask_out_of_range(basis, D, rhs);
    const Real residual = (lhs - rhs).norm() / std::max<Real>(1.0, lhs.norm());
    report.residual = std::max(report.residual, residual);
  }
  report.passed = report.residual <= tol;
  report.detail = "commutator " + std::to_string(comm);
  return report;
}

VerificationReport commutant_check(const ShiftOperator& S, const SeparatedBasis& basis, const Matrix& A, int trials,
                                   std::uint64_t seed, Real tol) {
  return commutant_check(S, basis, SparseMatrix(A.sparseView()), trials, seed, tol);
}

std::string_view to_string(Verdict v) {
  return v == Verdict::BoundedSoFar ? "BoundedSoFar" : "DivergenceDetected";
}

MembershipReport classify_growth(std::vector<GenerationIndex> levels, std::vector<Real> norms, Real threshold) {
  MembershipReport out;
  out.threshold = threshold;
  std::vector<Real> xs, ys;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    if (!(norms[i] > 0.0)) continue;
    xs.push_back(static_cast<Real>(levels[i]));
    ys.push_back(std::log(norms[i]));
  }
  out.slope = fit_slope(xs, ys);
  out.verdict = out.slope > threshold ? Verdict::DivergenceDetected : Verdict::BoundedSoFar;
  out.depths = std::move(levels);
  out.norms = std::move(norms);
  return out;
}

MembershipReport membership_diagnostic(const ShiftOperator& S, const SeparatedBasis& basis, const OpSymbol& phi,
                                       GenerationIndex max_depth, Real threshold) {
  if (max_depth < 1 || max_depth > S.depth()) throw BadParams("max depth must lie in 1..depth");
  const Tree& t = S.tree();
  const VertexId cols = t.generation_end(max_depth);
  Matrix map(S.dim(), cols);
  for (VertexId u = 0; u < cols; ++u) map.col(u) = op_mult_apply(S, basis, phi, unit_vector(S, u));

  std::vector<GenerationIndex> levels;
  std::vector<Real> norms;
  for (GenerationIndex d = 1; d <= max_depth; ++d) {
    levels.push_back(d);
    norms.push_back(operator_norm(Matrix(map.leftCols(t.generation_end(d)))));
  }
  return classify_growth(std::move(levels), std::move(norms), threshold);
}

namespace {

template <class Symbol>
VerificationReport product_law(const ShiftOperator& S, const SeparatedBasis& basis, const Symbol& phi,
                               const Symbol& psi, int trials, std::uint64_t seed, Real tol) {
  const Symbol both = convolve(phi, psi);
  VerificationReport report;
  report.name = "product-law";
  report.tolerance = tol;
  report.exactness_depth = S.depth();
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = trial_rng(seed, static_cast<std::uint64_t>(trial));
    const CoeffSeq c = analytic_coeffs(S, basis, random_vector(S.dim(), rng).normalized(), S.depth());
    const CoeffSeq lhs = convolve_with_coeffs(phi, convolve_with_coeffs(psi, c));
    const CoeffSeq rhs = convolve_with_coeffs(both, c);
    const Real residual = (lhs.coeffs - rhs.coeffs).norm() / std::max<Real>(1.0, rhs.coeffs.norm());
    report.residual = std::max(report.residual, residual);
  }
  report.passed = report.residual <= tol;
  return report;
}

}  // namespace

VerificationReport product_law_check(const ShiftOperator& S, const SeparatedBasis& basis, const OpSymbol& phi,
                                     const OpSymbol& psi, int trials, std::uint64_t seed, Real tol) {
  return product_law(S, basis, phi, psi, trials, seed, tol);
}

VerificationReport product_law_check(const ShiftOperator& S, const SeparatedBasis& basis, const ScalarSymbol& phi,
                                     const ScalarSymbol& psi, int trials, std::uint64_t seed, Real tol) {
  return product_law(S, basis, phi, psi, trials, seed, tol);
}

VerificationReport scalar_equivalence_check(const ShiftOperator& S, const SeparatedBasis& basis,
                                            const ScalarSymbol& phi, int trials, std::uint64_t seed, Real tol) {
  VerificationReport report;
  report.name = "scalar-equivalence";
  report.tolerance = tol;
  report.exactness_depth = S.depth();
  for (int trial = 0; trial < trials; ++trial) {
    Rng rng = trial_rng(seed, static_cast<std::uint64_t>(trial));
    const Vector f = random_vector(S.dim(), rng).normalized();
    const Vector lhs = scalar_mult_apply(S, phi, f);
    const Vector rhs = synthesize(S, basis, convolve_with_coeffs(phi, analytic_coeffs(S, basis, f, S.depth())));
    report.residual = std::max(report.residual, (lhs - rhs).norm() / std::max<Real>(1.0, lhs.norm()));
  }
  report.passed = report.residual <= tol;
  return report;
}

OpSymbol from_two_ray_coordinates(const OpSymbol& phi, Real alpha) {
  if (phi.dim() != 2) throw DimensionMismatch("two-ray symbols act on a two-dimensional kernel");
  const Real scale = std::sqrt(1.0 + alpha * alpha);
  OpSymbol out = phi;
  for (Matrix& m : out.mats) {
    m(1, 0) *= scale;
    m(0, 1) /= scale;
  }
  return out;
}

OpSymbol two_ray_admissible_symbol(Real alpha, Scalar a0, Scalar d0, Scalar a1, Scalar d1) {
  if (!(alpha > 0.0)) throw BadParams("alpha must be positive");
  Matrix m0(2, 2), m1(2, 2);
  m0 << a0, 0.0, (d1 - a1) / alpha, d0;
  m1 << a1, alpha * (a0 - d0), 0.0, d1;
  return {{m0, m1}};
}

Vector two_ray_witness(const Tree& tree, Real alpha) {
  Vector f = Vector::Zero(tree.size());
  for (GenerationIndex n = 1; 3 * n <= tree.depth(); ++n) {
    const auto v = tree.find("(2," + std::to_string(3 * n) + ")");
    if (!v) throw BadParams("tree has no second ray");
    f[*v] = std::pow(alpha, 3 * n);
  }
  return f;
}

ScalarSymbol parse_scalar_symbol(std::string_view json_text) {
  const nlohmann::json j = parse_json(json_text);
  if (!j.is_object() || !j.contains("coeffs") || !j["coeffs"].is_array())
    throw MalformedSpec("scalar symbol needs a \"coeffs\" array");
  ScalarSymbol s;
  for (const auto& e : j["coeffs"]) s.coeffs.push_back(complex_from_json(e));
  return s;
}

OpSymbol parse_op_symbol(std::string_view json_text) {
  const nlohmann::json j = parse_json(json_text);
  if (!j.is_object() || !j.contains("dim") || !j.contains("mats") || !j["dim"].is_number_integer() ||
      !j["mats"].is_array())
    throw MalformedSpec("operator symbol needs \"dim\" and \"mats\"");
  const auto dim = j["dim"].get<Eigen::Index>();
  if (dim < 1) throw MalformedSpec("symbol dimension must be positive");
  OpSymbol s;
  for (const auto& m : j["mats"]) {
    if (!m.is_array() || static_cast<Eigen::Index>(m.size()) != dim * dim)
      throw MalformedSpec("each matrix needs dim*dim entries in row-major order");
    Matrix mat(dim, dim);
    for (Eigen::Index r = 0; r < dim; ++r)
      for (Eigen::Index c = 0; c < dim; ++c) mat(r, c) = complex_from_json(m[static_cast<std::size_t>(r * dim + c)]);
    s.mats.push_back(std::move(mat));
  }
  return s;
}

std::string dump_symbol(const ScalarSymbol& s) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const Scalar& z : s.coeffs) coeffs.push_back(complex_json(z));
  return nlohmann::json{{"coeffs", coeffs}}.dump();
}

std::string dump_symbol(const OpSymbol& s) {
  nlohmann::json mats = nlohmann::json::array();
  for (const Matrix& m : s.mats) {
    nlohmann::json entries = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) entries.push_back(complex_json(m(r, c)));
    mats.push_back(std::move(entries));
  }
  return nlohmann::json{{"dim", s.dim()}, {"mats", mats}}.dump();
}

}  // namespace treeshift
