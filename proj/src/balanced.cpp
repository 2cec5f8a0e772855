#include "treeshift/balanced.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "treeshift/linalg.hpp"
#include "treeshift/model.hpp"

namespace treeshift {

namespace {

void require_balanced(const ShiftOperator& S) {
  if (!is_balanced(S).balanced) throw NotBalanced("shift is not balanced");
}

/// Generation carrying all of f, or -1 for f = 0.
GenerationIndex single_generation(const Tree& t, const Vector& f) {
  GenerationIndex g = -1;
  for (VertexId v = 0; v < t.size(); ++v) {
    if (f[v] == Scalar(0)) continue;
    if (g >= 0 && t.generation(v) != g) throw WrongGeneration("vector is spread over several generations");
    g = t.generation(v);
  }
  return g;
}

}  // namespace

BetaWeights beta_from_shift(const ShiftOperator& S, const SeparatedBasis& basis, Eigen::Index j) {
  if (j < 0 || j >= basis.size()) throw BadParams("basis index out of range");
  BetaWeights b;
  Vector v = basis.vector(j);
  b.beta.push_back(v.squaredNorm());
  for (GenerationIndex n = 1; basis.generation(j) + n <= S.depth(); ++n) {
    v = apply_shift(S, v);
    b.beta.push_back(v.squaredNorm());
  }
  return b;
}

BetaWeights extend_geometrically(const BetaWeights& b, Eigen::Index length) {
  if (b.beta.empty()) throw BadParams("cannot extend an empty weight sequence");
  BetaWeights out = b;
  const Real ratio = b.size() >= 2 ? b.beta.back() / b.beta[b.beta.size() - 2] : 1.0;
  while (out.size() < length) out.beta.push_back(out.beta.back() * ratio);
  return out;
}

Real balanced_inner_product_check(const ShiftOperator& S, const Vector& f, const Vector& g, int n, VertexId u_prime) {
  require_balanced(S);
  const Tree& t = S.tree();
  if (f.size() != t.size() || g.size() != t.size()) throw DimensionMismatch("vector does not match the tree");
  if (n < 0) throw BadParams("power must be non-negative");
  if (u_prime < 0 || u_prime >= t.size()) throw BadParams("vertex out of range");
  const GenerationIndex k = single_generation(t, f);
  single_generation(t, g);
  if (k >= 0 && t.generation(u_prime) != k + n) throw WrongGeneration("u' must lie n generations below f");
  if (t.generation(u_prime) < n) throw WrongGeneration("u' is too shallow");

  Real product = 1.0;
  for (int j = 1; j <= n; ++j) product *= S.norm_square(t.ancestor(u_prime, j));

  Vector sf = f, sg = g;
  for (int j = 0; j < n; ++j) {
    sf = apply_shift_truncated(S, sf);
    sg = apply_shift_truncated(S, sg);
  }
  return std::abs(sg.dot(sf) - product * g.dot(f));
}

WoldDecomposition wold_decompose(const ShiftOperator& S, const SeparatedBasis& basis, const Vector& f) {
  require_balanced(S);
  if (f.size() != S.dim()) throw DimensionMismatch("vector does not match the tree");
  const GenerationIndex D = S.depth();
  WoldDecomposition out;
  out.parts.assign(static_cast<std::size_t>(D + 1), Vector::Zero(basis.size()));
  for (Eigen::Index j = 0; j < basis.size(); ++j) {
    Vector v = basis.vector(j);
    for (GenerationIndex n = 0; basis.generation(j) + n <= D; ++n) {
      if (n > 0) v = apply_shift_truncated(S, v);
      out.parts[static_cast<std::size_t>(n)][j] = v.dot(f) / v.squaredNorm();
    }
  }

  std::vector<Vector> layers;
  Vector total = Vector::Zero(S.dim());
  for (GenerationIndex n = 0; n <= D; ++n) {
    Vector layer = basis.synthesize(out.parts[static_cast<std::size_t>(n)]);
    for (GenerationIndex k = 0; k < n; ++k) layer = apply_shift_truncated(S, layer);
    out.layer_energy += compensated_norm_squared(layer);
    total += layer;
    layers.push_back(std::move(layer));
  }
  for (std::size_t m = 0; m < layers.size(); ++m)
    for (std::size_t n = m + 1; n < layers.size(); ++n)
      out.max_cross_term = std::max(out.max_cross_term, std::abs(layers[n].dot(layers[m])));
  out.residual = (f - total).norm();
  return out;
}

MembershipReport hinf_membership(const ScalarSymbol& a, const BetaWeights& beta1, const BetaWeights& beta2,
                                 Eigen::Index trunc, Real threshold) {
  if (trunc < 2) throw BadParams("truncation must be at least 2");
  if (beta1.size() < trunc || beta2.size() < trunc) throw BadParams("weights are shorter than the truncation");
  for (Eigen::Index i = 0; i < trunc; ++i)
    if (!(beta1.beta[i] > 0.0) || !(beta2.beta[i] > 0.0)) throw BadParams("weights must be positive");

  std::vector<GenerationIndex> levels;
  for (Eigen::Index m = 8; m < trunc; m *= 2) levels.push_back(static_cast<GenerationIndex>(m));
  levels.push_back(static_cast<GenerationIndex>(trunc));

  Matrix full = Matrix::Zero(trunc, trunc);
  for (Eigen::Index j = 0; j < trunc; ++j)
    for (Eigen::Index i = j; i < trunc && i - j < a.size(); ++i)
      full(i, j) = std::sqrt(beta2.beta[i]) * a.at(i - j) / std::sqrt(beta1.beta[j]);

  std::vector<Real> norms;
  std::vector<Real> xs, ys;
  const bool zero = full.isZero(0.0);
  for (GenerationIndex m : levels) {
    if (zero) {
      norms.push_back(0.0);
      continue;
    }
    norms.push_back(operator_norm(Matrix(full.topLeftCorner(m, m))));
    if (norms.back() > 0.0) {
      xs.push_back(std::log2(static_cast<Real>(m)));
      ys.push_back(std::log(norms.back()));
    }
  }
  MembershipReport out;
  out.threshold = threshold;
  out.slope = fit_slope(xs, ys);
  out.verdict = out.slope > threshold ? Verdict::DivergenceDetected : Verdict::BoundedSoFar;
  out.depths = std::move(levels);
  out.norms = std::move(norms);
  return out;
}

RatioReport ratio_bounds_check(const ShiftOperator& S, const SeparatedBasis& basis) {
  require_balanced(S);
  if (S.lower_bound() <= 0.0) throw NotLeftInvertible("shift is not bounded below on the truncation");
  const GenerationIndex D = S.depth();
  const GenerationIndex K = basis.max_generation();
  const Real inf = std::numeric_limits<Real>::infinity();

  // lo[k][n], hi[k][n]: extreme ||S^n e'_j|| over basis vectors with k_j = k.
  std::vector<std::vector<Real>> lo(static_cast<std::size_t>(K + 1), std::vector<Real>(D + 1, inf));
  std::vector<std::vector<Real>> hi(static_cast<std::size_t>(K + 1), std::vector<Real>(D + 1, 0.0));
  std::vector<Eigen::Index> count(static_cast<std::size_t>(K + 1), 0);
  for (Eigen::Index j = 0; j < basis.size(); ++j) {
    const auto k = static_cast<std::size_t>(basis.generation(j));
    ++count[k];
    Vector v = basis.vector(j);
    for (GenerationIndex n = 0; basis.generation(j) + n <= D; ++n) {
      if (n > 0) v = apply_shift_truncated(S, v);
      const Real nrm = v.norm();
      lo[k][n] = std::min(lo[k][n], nrm);
      hi[k][n] = std::max(hi[k][n], nrm);
    }
  }

  RatioReport out;
  const Real base = S.norm() / S.lower_bound();
  for (GenerationIndex k = 0; k <= K; ++k) {
    for (GenerationIndex l = 0; l <= K; ++l) {
      if (count[k] == 0 || count[l] == 0) continue;
      const Real bound = std::pow(base, std::abs(k - l));
      for (GenerationIndex n = 0; std::max(k, l) + n <= D; ++n) {
        out.pairs += count[k] * count[l];
        const Real rmax = hi[k][n] / lo[l][n];
        const Real rmin = lo[k][n] / hi[l][n];
        out.max_ratio = std::max(out.max_ratio, rmax);
        out.min_ratio = std::min(out.min_ratio, rmin);
        out.worst_violation = std::max({out.worst_violation, rmax / bound - 1.0, 1.0 / (rmin * bound) - 1.0});
      }
    }
  }
  out.passed = out.worst_violation <= kAlgebraicTolerance;
  return out;
}

KomReport kom_characterization_check(const ShiftOperator& S, const SeparatedBasis& basis, const OpSymbol& phi,
                                     Eigen::Index trunc, Real threshold) {
  if (!is_balanced(S).balanced) throw PreconditionFailed("shift is not balanced");
  if (S.lower_bound() <= 0.0) throw PreconditionFailed("shift is not left-invertible");
  if (basis.size() > kMaxDenseSymbolDim) throw PreconditionFailed("kernel is too large for entrywise checks");
  if (phi.dim() != basis.size()) throw PreconditionFailed("symbol does not match the kernel");

  KomReport out;
  out.kernel_dim = basis.size();
  out.operator_side = membership_diagnostic(S, basis, phi, S.depth(), threshold);

  BetaWeights beta = beta_from_shift(S, basis, 0);
  if (beta.size() < trunc) {
    beta = extend_geometrically(beta, trunc);
    out.beta_extended = true;
  }
  for (Eigen::Index i = 0; i < basis.size(); ++i) {
    for (Eigen::Index j = 0; j < basis.size(); ++j) {
      ScalarSymbol a;
      for (const Matrix& m : phi.mats) a.coeffs.push_back(m(i, j));
      EntryVerdict e{i, j, hinf_membership(a, beta, beta, trunc, threshold)};
      if (e.report.verdict == Verdict::DivergenceDetected) out.entry_verdict = Verdict::DivergenceDetected;
      out.entries.push_back(std::move(e));
    }
  }
  out.agree = out.entry_verdict == out.operator_side.verdict;
  return out;
}

}  // namespace treeshift
