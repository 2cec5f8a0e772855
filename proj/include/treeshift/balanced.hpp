#pragma once

#include <vector>

#include "treeshift/common.hpp"
#include "treeshift/multiplier.hpp"
#include "treeshift/shift.hpp"

namespace treeshift {

/// Positive weights β_n of a weighted sequence space ℓ²(β).
struct BetaWeights {
  std::vector<Real> beta;

  Eigen::Index size() const { return static_cast<Eigen::Index>(beta.size()); }
  static BetaWeights constant(Eigen::Index n, Real value = 1.0) {
    return {std::vector<Real>(static_cast<std::size_t>(n), value)};
  }
};

/// β_n = ||S^n e'_j||² for n = 0..depth - k_j.
BetaWeights beta_from_shift(const ShiftOperator& S, const SeparatedBasis& basis, Eigen::Index j);

/// Continues β past its end with the last ratio β_{n+1}/β_n, up to `length`.
BetaWeights extend_geometrically(const BetaWeights& b, Eigen::Index length);

/// |⟨S^n f, S^n g⟩ - Π_{j=1..n} ||S e_{par^j(u')}||² ⟨f, g⟩| for f, g each
/// supported in one generation and u' in generation |f| + n.
Real balanced_inner_product_check(const ShiftOperator& S, const Vector& f, const Vector& g, int n, VertexId u_prime);

struct WoldDecomposition {
  /// Separated-basis coordinates of f_n, f = Σ_n S^n f_n.
  std::vector<Vector> parts;
  Real residual = 0.0;
  /// Σ_n ||S^n f_n||².
  Real layer_energy = 0.0;
  /// Largest |⟨S^m f_m, S^n f_n⟩| over m ≠ n.
  Real max_cross_term = 0.0;
};

/// Orthogonal projection of f onto the layers S^n E.
WoldDecomposition wold_decompose(const ShiftOperator& S, const SeparatedBasis& basis, const Vector& f);

/// Largest singular value of the weighted lower-triangular Toeplitz map
/// b ↦ a*b from ℓ²(β₁) to ℓ²(β₂) cut to size `levels[i]`, for sizes 8, 16, ...
/// up to trunc. The slope is the growth of log(norm) per doubling.
MembershipReport hinf_membership(const ScalarSymbol& a, const BetaWeights& beta1, const BetaWeights& beta2,
                                 Eigen::Index trunc, Real threshold = kDefaultSlopeThreshold);

struct RatioReport {
  bool passed = true;
  /// Largest relative excursion past the bound; 0 when all ratios fit.
  Real worst_violation = 0.0;
  Real min_ratio = 1.0;
  Real max_ratio = 1.0;
  Eigen::Index pairs = 0;
};

/// Checks (c/||S||)^{|k_i-k_j|} <= ||S^n e'_i|| / ||S^n e'_j|| <= (||S||/c)^{|k_i-k_j|}
/// for all pairs and n <= depth - max(k_i, k_j).
RatioReport ratio_bounds_check(const ShiftOperator& S, const SeparatedBasis& basis);

struct EntryVerdict {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
  MembershipReport report;
};

struct KomReport {
  MembershipReport operator_side;
  std::vector<EntryVerdict> entries;
  Verdict entry_verdict = Verdict::BoundedSoFar;
  bool agree = false;
  /// Set when β had to be continued past the truncation.
  bool beta_extended = false;
  Eigen::Index kernel_dim = 0;
};

/// Compares the membership diagnostic of φ̂ with the H^∞(β) diagnostics of its
/// entry sequences, β_n = ||S^n e_root||².
KomReport kom_characterization_check(const ShiftOperator& S, const SeparatedBasis& basis, const OpSymbol& phi,
                                     Eigen::Index trunc, Real threshold = kDefaultSlopeThreshold);

}  // namespace treeshift
