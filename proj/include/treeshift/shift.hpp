#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/SparseCore>

#include "treeshift/common.hpp"
#include "treeshift/tree.hpp"

namespace treeshift {

using SparseMatrix = Eigen::SparseMatrix<Scalar>;

/// Weighted shift S_λ on ℓ²(V_{≤depth}).
///
/// Vectors are dense `Vector`s indexed by vertex. The last stored generation
/// has no children inside the truncation, so ||S e_u||² is only known for
/// |u| < depth; it is reported as 0 there.
class ShiftOperator {
 public:
  explicit ShiftOperator(WeightedTree wt);

  const Tree& tree() const { return tree_; }
  const WeightMap& weights() const { return weights_; }
  VertexId dim() const { return tree_.size(); }
  GenerationIndex depth() const { return tree_.depth(); }

  /// ||S e_u||² = Σ_{v ∈ Chi(u)} λ_v².
  Real norm_square(VertexId u) const { return norm_squares_[u]; }
  const RealVector& norm_squares() const { return norm_squares_; }

  /// c with S*S >= c² I on vertices above the last generation.
  Real lower_bound() const { return lower_bound_; }
  /// ||S|| restricted to the truncation.
  Real norm() const { return norm_; }

 private:
  Tree tree_;
  WeightMap weights_;
  RealVector norm_squares_;
  Real lower_bound_ = 0.0;
  Real norm_ = 0.0;
};

/// Orthonormal basis of N(S*) whose vectors each live in one generation.
///
/// Every vector is supported on the root or on one sibling group, which is a
/// contiguous vertex range, so only that block is stored. Vectors are ordered
/// by (generation, parent order, position).
class SeparatedBasis {
 public:
  Eigen::Index size() const { return static_cast<Eigen::Index>(first_.size()); }
  VertexId ambient_dim() const { return ambient_dim_; }

  GenerationIndex generation(Eigen::Index j) const { return generation_[j]; }
  const std::vector<GenerationIndex>& generations() const { return generation_; }
  GenerationIndex max_generation() const { return generation_.empty() ? 0 : generation_.back(); }
  /// Number of leading basis vectors with generation <= g.
  Eigen::Index count_up_to_generation(GenerationIndex g) const;

  /// e'_j as a dense ℓ² vector.
  Vector vector(Eigen::Index j) const;
  VertexId support_begin(Eigen::Index j) const { return first_[j]; }
  Eigen::Map<const Vector> block(Eigen::Index j) const {
    return Eigen::Map<const Vector>(values_.data() + offset_[j], length_[j]);
  }

  /// (⟨f, e'_j⟩)_j.
  Vector coordinates(const Vector& f) const;
  /// Σ_j c_j e'_j.
  Vector synthesize(const Vector& coords) const;

  void push_back(VertexId first, GenerationIndex generation, const Vector& values);

 private:
  friend SeparatedBasis separated_kernel_basis(const ShiftOperator& S);
  VertexId ambient_dim_ = 0;
  std::vector<VertexId> first_;
  std::vector<GenerationIndex> generation_;
  std::vector<Eigen::Index> offset_;
  std::vector<Eigen::Index> length_;
  std::vector<Scalar> values_;
};

/// (S f)(v) = λ_v f(par v). Throws SupportOverflow when f touches the last
/// generation, since the image would leave the truncation.
Vector apply_shift(const ShiftOperator& S, const Vector& f);
/// Compression P S P of S to the truncation: mass pushed past the last
/// generation is dropped.
Vector apply_shift_truncated(const ShiftOperator& S, const Vector& f);
/// (S* f)(u) = Σ_{v ∈ Chi(u)} λ_v f(v).
Vector apply_adjoint(const ShiftOperator& S, const Vector& f);
/// (L f)(u) = ||S e_u||⁻² Σ_{v ∈ Chi(u)} λ_v f(v) with L = (S*S)⁻¹S*.
Vector apply_left_inverse(const ShiftOperator& S, const Vector& f);
/// L* = S (S*S)⁻¹, the Cauchy dual; compressed like apply_shift_truncated.
Vector apply_left_inverse_adjoint(const ShiftOperator& S, const Vector& f);

SeparatedBasis separated_kernel_basis(const ShiftOperator& S);

/// P_E f = Σ_j ⟨f, e'_j⟩ e'_j.
Vector project_kernel(const ShiftOperator& S, const SeparatedBasis& basis, const Vector& f);

struct BalanceCheck {
  bool balanced = true;
  /// Two vertices of one generation with different ||S e_u||.
  std::optional<std::pair<VertexId, VertexId>> witness;
};

BalanceCheck is_balanced(const ShiftOperator& S, Real tol = kAlgebraicTolerance);

/// ||S e_u|| for |u| = m, m < depth; requires a balanced shift.
std::vector<Real> generation_norms(const ShiftOperator& S);

/// Sparse matrix of the compressed shift on ℓ²(V_{≤depth}).
SparseMatrix shift_matrix(const ShiftOperator& S);

/// Indicator vector e_u.
Vector unit_vector(const ShiftOperator& S, VertexId u);

/// Largest generation carrying a non-negligible entry of f (-1 for f = 0).
GenerationIndex support_depth(const Tree& tree, const Vector& f, Real tol = 0.0);

}  // namespace treeshift
