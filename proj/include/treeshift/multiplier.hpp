#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "treeshift/common.hpp"
#include "treeshift/model.hpp"
#include "treeshift/shift.hpp"

namespace treeshift {

/// Scalar symbol φ̂(0), φ̂(1), ...; entries past the stored length are zero.
struct ScalarSymbol {
  std::vector<Scalar> coeffs;

  Eigen::Index size() const { return static_cast<Eigen::Index>(coeffs.size()); }
  Scalar at(Eigen::Index n) const { return n < size() ? coeffs[static_cast<std::size_t>(n)] : Scalar(0); }

  static ScalarSymbol unit() { return {{Scalar(1)}}; }
  /// χ_m: 1 in position m.
  static ScalarSymbol monomial(Eigen::Index m);
};

/// Operator symbol: one dim(E)×dim(E) matrix per power, in separated-basis
/// coordinates. Missing trailing matrices are zero.
struct OpSymbol {
  std::vector<Matrix> mats;

  Eigen::Index size() const { return static_cast<Eigen::Index>(mats.size()); }
  Eigen::Index dim() const { return mats.empty() ? 0 : mats.front().rows(); }

  static OpSymbol unit(Eigen::Index dim);
  /// χ_m · A.
  static OpSymbol monomial(Eigen::Index m, const Matrix& a);
  /// a_n · I.
  static OpSymbol from_scalar(const ScalarSymbol& a, Eigen::Index dim);
};

ScalarSymbol convolve(const ScalarSymbol& a, const ScalarSymbol& b, std::optional<Eigen::Index> max_length = {});
OpSymbol convolve(const OpSymbol& a, const OpSymbol& b, std::optional<Eigen::Index> max_length = {});

/// (φ̂ * ĉ)(n) = Σ_{k<=n} φ̂(k) ĉ(n-k); keeps the length of c.
CoeffSeq convolve_with_coeffs(const ScalarSymbol& phi, const CoeffSeq& c);
CoeffSeq convolve_with_coeffs(const OpSymbol& phi, const CoeffSeq& c);

/// (M f)(v) = Σ_{k<=|v|} λ_{par^k(v)|v} φ̂(k) f(par^k(v)) on the truncation.
Vector scalar_mult_apply(const ShiftOperator& S, const ScalarSymbol& phi, const Vector& f);
/// (M* f)(t) = Σ_{w ∈ Des(t)} λ_{t|w} conj(φ̂(|w|-|t|)) f(w).
Vector scalar_mult_adjoint(const ShiftOperator& S, const ScalarSymbol& phi, const Vector& f);

/// Compressed generalized multiplier: P_{≤depth} U* (φ̂ * U f).
Vector op_mult_apply(const ShiftOperator& S, const SeparatedBasis& basis, const OpSymbol& phi, const Vector& f);

/// p(S) as a sparse matrix of the compressed shift.
SparseMatrix polynomial_in_shift(const ShiftOperator& S, const ScalarSymbol& p);

/// Largest dim(E) for which dense operator symbols are materialized.
inline constexpr Eigen::Index kMaxDenseSymbolDim = 512;

/// Coefficients of A e'_j: column k holds coords(P_E L^k A e'_j).
Matrix symbol_columns(const ShiftOperator& S, const SeparatedBasis& basis, const SparseMatrix& A, Eigen::Index j,
                      GenerationIndex K);

/// φ̂_A(k) = P_E L^k A |_E for k = 0..K. Column j of φ̂_A(k) only sees the
/// truncation through A e'_j, so it matches the infinite tree while
/// k_j + k + (generation reach of A) <= depth.
OpSymbol extract_symbol(const ShiftOperator& S, const SeparatedBasis& basis, const SparseMatrix& A, GenerationIndex K);
OpSymbol extract_symbol(const ShiftOperator& S, const SeparatedBasis& basis, const Matrix& A, GenerationIndex K);

struct VerificationReport {
  std::string name;
  bool passed = false;
  Real residual = 0.0;
  Real tolerance = 0.0;
  GenerationIndex exactness_depth = 0;
  std::string detail;
};

/// Frobenius norm of A S - S A on the truncation; bounds the operator norm.
Real commutator_norm(const ShiftOperator& S, const SparseMatrix& A);

/// For `trials` random f checks P_E L^n (A f) = (φ̂_A * ĉ_f)(n) on every entry
/// the truncation can carry. Residuals are relative to max(1, |coefficients|).
/// Throws NotInCommutant when ||AS - SA||_F exceeds the power tolerance.
VerificationReport commutant_check(const ShiftOperator& S, const SeparatedBasis& basis, const SparseMatrix& A,
                                   int trials, std::uint64_t seed, Real tol = kPowerTolerance);
VerificationReport commutant_check(const ShiftOperator& S, const SeparatedBasis& basis, const Matrix& A, int trials,
                                   std::uint64_t seed, Real tol = kPowerTolerance);

enum class Verdict { BoundedSoFar, DivergenceDetected };
std::string_view to_string(Verdict v);

struct MembershipReport {
  /// Truncation levels; depths for tree diagnostics, sizes for sequence ones.
  std::vector<GenerationIndex> depths;
  std::vector<Real> norms;
  /// Growth of log(norm) per level.
  Real slope = 0.0;
  Real threshold = kDefaultSlopeThreshold;
  Verdict verdict = Verdict::BoundedSoFar;
};

/// Slope fit and verdict from (level, norm) samples.
MembershipReport classify_growth(std::vector<GenerationIndex> levels, std::vector<Real> norms, Real threshold);

/// Norm of f ↦ P_{≤depth} U*(φ̂ * Uf) on ℓ²(V_{≤d}) for d = 1..max_depth,
/// by exact singular values of the compressed map.
MembershipReport membership_diagnostic(const ShiftOperator& S, const SeparatedBasis& basis, const OpSymbol& phi,
                                       GenerationIndex max_depth, Real threshold = kDefaultSlopeThreshold);

/// Compares φ̂*(ψ̂*ĉ_f) with (φ̂*ψ̂)*ĉ_f for random f.
VerificationReport product_law_check(const ShiftOperator& S, const SeparatedBasis& basis, const OpSymbol& phi,
                                     const OpSymbol& psi, int trials, std::uint64_t seed,
                                     Real tol = kPowerTolerance);
VerificationReport product_law_check(const ShiftOperator& S, const SeparatedBasis& basis, const ScalarSymbol& phi,
                                     const ScalarSymbol& psi, int trials, std::uint64_t seed,
                                     Real tol = kPowerTolerance);

/// Compares the vertex formula for a scalar multiplier with U*((φ̂ I) * Uf).
VerificationReport scalar_equivalence_check(const ShiftOperator& S, const SeparatedBasis& basis,
                                            const ScalarSymbol& phi, int trials, std::uint64_t seed,
                                            Real tol = kPowerTolerance);

/// Two-ray tree helpers. The unnormalized kernel basis is {e_root, α e_(1,1) - e_(2,1)}.
OpSymbol from_two_ray_coordinates(const OpSymbol& phi, Real alpha);
/// The admissible two-term family
///   A0 = [[a0, 0], [(d1 - a1)/α, d0]],  A1 = [[a1, α(a0 - d0)], [0, d1]]
/// in unnormalized coordinates.
OpSymbol two_ray_admissible_symbol(Real alpha, Scalar a0, Scalar d0, Scalar a1, Scalar d1);
/// f(2, 3n) = α^{3n} for n >= 1 inside the truncation, zero elsewhere.
Vector two_ray_witness(const Tree& tree, Real alpha);

ScalarSymbol parse_scalar_symbol(std::string_view json_text);
OpSymbol parse_op_symbol(std::string_view json_text);
std::string dump_symbol(const ScalarSymbol& s);
std::string dump_symbol(const OpSymbol& s);

}  // namespace treeshift
