#pragma once

#include <vector>

#include "treeshift/common.hpp"
#include "treeshift/shift.hpp"

namespace treeshift {

/// Coefficients f̂(n) = P_E L^n f of the analytic model, n = 0..N.
///
/// Column n holds the coordinates of f̂(n) in the separated basis. Entry
/// (j, n) can only be non-zero when k_j + n fits inside the truncation.
struct CoeffSeq {
  Matrix coeffs;
  GenerationIndex exact_to = 0;

  Eigen::Index dim() const { return coeffs.rows(); }
  Eigen::Index length() const { return coeffs.cols(); }
  auto operator[](Eigen::Index n) const { return coeffs.col(n); }
  auto operator[](Eigen::Index n) { return coeffs.col(n); }
};

CoeffSeq analytic_coeffs(const ShiftOperator& S, const SeparatedBasis& basis, const Vector& f, GenerationIndex N);

/// Compressed inverse of the coefficient map: Σ_n S^n ĉ(n), with terms that
/// fall past the last generation dropped. Equals P_{≤depth} U* c.
Vector synthesize(const ShiftOperator& S, const SeparatedBasis& basis, const CoeffSeq& c);

struct Reconstruction {
  Vector vector;
  /// Norm of the part of c no vector supported in V_{≤support_depth} can match.
  Real residual = 0.0;
  /// Set when c does not pin down every coefficient inside the support
  /// bound; `vector` is then the minimal-norm solution.
  bool underdetermined = false;
};

/// Tolerance above which `reconstruct` reports an inconsistent system.
inline constexpr Real kInconsistencyTolerance = 1e-8;

/// Solves P_E L^n g = c(n) for g supported in V_{≤support_depth}.
///
/// The coefficient map is triangular in the layers S^n E (U S^n e = z^n e),
/// so the in-range equations are solved exactly by synthesis; out-of-range
/// coefficients contribute to the residual.
Reconstruction reconstruct(const ShiftOperator& S, const SeparatedBasis& basis, const CoeffSeq& c,
                           GenerationIndex support_depth);

/// ⟨a, b⟩ in the model space, pulled back through U.
Scalar model_inner_product(const ShiftOperator& S, const SeparatedBasis& basis, const CoeffSeq& a, const CoeffSeq& b);

/// Σ_n ĉ(n) z^n in separated-basis coordinates.
Vector evaluate(const CoeffSeq& c, Scalar z);

struct RadiusEstimate {
  Real estimate = 0.0;
  /// ||L^n||^{1/n} for n = 1, 2, ...
  std::vector<Real> sequence;
};

/// Estimates r(L) from ||L^n||^{1/n}, n <= min(iterations, depth), each norm
/// by power iteration; the estimate is the largest of the last five values.
RadiusEstimate spectral_radius_estimate(const ShiftOperator& S, int iterations);

struct KernelEval {
  Scalar z;
  Scalar lambda;
  Matrix matrix;
  GenerationIndex order = 0;
  Real radius = 0.0;
  Real tail_estimate = 0.0;
};

/// k(z, λ) = P_E (I - zL)⁻¹ (I - λ̄L*)⁻¹ |_E with both series cut at `order`.
KernelEval kernel_matrix(const ShiftOperator& S, const SeparatedBasis& basis, Scalar z, Scalar lambda,
                         GenerationIndex order, Real radius);
KernelEval kernel_matrix(const ShiftOperator& S, const SeparatedBasis& basis, Scalar z, Scalar lambda,
                         GenerationIndex order);

/// U* k(·, λ) e'_j = Σ_{n <= order} λ̄^n L*^n e'_j.
Vector kernel_function(const ShiftOperator& S, const SeparatedBasis& basis, Scalar lambda, Eigen::Index j,
                       GenerationIndex order);

struct EigenResidual {
  Real residual = 0.0;
  Real tail_bound = 0.0;
  GenerationIndex order = 0;
};

/// ||T̂* κ - λ κ|| / ||κ|| for κ = k(·, λ̄) e'_j. The series order is capped
/// so that κ stays inside the truncation.
EigenResidual eigenvector_residual(const ShiftOperator& S, const SeparatedBasis& basis, Scalar lambda,
                                   Eigen::Index j, GenerationIndex order, Real radius);

}  // namespace treeshift
