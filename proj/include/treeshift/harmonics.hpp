#pragma once

#include <vector>

#include "treeshift/common.hpp"
#include "treeshift/model.hpp"
#include "treeshift/multiplier.hpp"
#include "treeshift/shift.hpp"

namespace treeshift {

/// D_w: multiplies the j-th separated basis vector by w^{k_j}.
struct RotationDiagonal {
  Scalar w;
  std::vector<Scalar> phases;

  Vector apply(const Vector& coords) const;
  Vector apply_adjoint(const Vector& coords) const;
};

RotationDiagonal rotation_diagonal(const SeparatedBasis& basis, Scalar w);

/// f_w(u) = w^{|u|} f(u).
Vector rotate_vector(const ShiftOperator& S, const Vector& f, Scalar w);
/// n ↦ w^n D_w ĉ(n).
CoeffSeq rotate_coeffs(const SeparatedBasis& basis, const CoeffSeq& c, Scalar w);
/// n ↦ w^n D_w φ̂(n) D_w̄.
OpSymbol rotate_symbol(const OpSymbol& phi, const SeparatedBasis& basis, Scalar w);
/// n ↦ w^n φ̂(n).
ScalarSymbol rotate_symbol(const ScalarSymbol& phi, Scalar w);

/// Coefficients 1 - m/(n+1) of the n-th Fejér kernel, m = 0..n.
struct FejerSymbol {
  int order = 0;
  std::vector<Real> coeffs;

  Real at(Eigen::Index m) const { return m < static_cast<Eigen::Index>(coeffs.size()) ? coeffs[m] : 0.0; }
};

FejerSymbol fejer_symbol(int n);

/// Entrywise product p̂_n φ̂.
ScalarSymbol fejer_mean(const FejerSymbol& p, const ScalarSymbol& phi);

/// Operator norm of the compressed scalar multiplier; exact singular values
/// up to `kExactNormLimit` vertices, power iteration beyond.
Real scalar_multiplier_norm(const ShiftOperator& S, const ScalarSymbol& phi);
inline constexpr VertexId kExactNormLimit = 1500;

struct ConvergenceRow {
  int order = 0;
  int vector_id = 0;
  Real error = 0.0;
  Real norm_estimate = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  Real symbol_norm = 0.0;
  /// Largest ||M_{p̂_n φ̂}|| / ||M_φ̂|| over the tested orders.
  Real domination_ratio = 0.0;
};

/// ||M_{p̂_n φ̂} f - M_φ̂ f|| for each order and test vector, both sides
/// through coefficient convolution and synthesis.
ConvergenceReport cesaro_convergence_experiment(const ShiftOperator& S, const SeparatedBasis& basis,
                                                const ScalarSymbol& phi, const std::vector<int>& orders,
                                                const std::vector<Vector>& test_vectors);

/// max_f || (1/Q) Σ_q w̄_q^k M_{φ̂_{w_q}} f - M_{χ_k φ̂} f || over Q-th roots of unity.
/// quadrature_points = 0 selects (symbol length + |k| + 1).
Real circle_integral_check(const ShiftOperator& S, const ScalarSymbol& phi, int k, int quadrature_points,
                           const std::vector<Vector>& test_vectors);

}  // namespace treeshift
