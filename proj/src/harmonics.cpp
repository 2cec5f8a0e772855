#include "treeshift/harmonics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "treeshift/linalg.hpp"

namespace treeshift {

namespace {

void require_unimodular(Scalar w) {
  if (std::abs(std::abs(w) - 1.0) > kAlgebraicTolerance) throw NotUnimodular("rotation needs |w| = 1");
}

Vector unit_root_powers(Scalar w, GenerationIndex top) {
  Vector p(top + 1);
  p[0] = 1.0;
  for (GenerationIndex g = 1; g <= top; ++g) p[g] = p[g - 1] * w;
  return p;
}

Real power_iteration_norm(const ShiftOperator& S, const ScalarSymbol& phi) {
  Rng rng(0x6e6f726dULL);
  Vector v = random_vector(S.dim(), rng).normalized();
  Real estimate = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vector w = scalar_mult_adjoint(S, phi, scalar_mult_apply(S, phi, v));
    const Real nrm = w.norm();
    if (nrm == 0.0) return 0.0;
    const Real next = std::sqrt(nrm);
    v = w / nrm;
    if (it > 0 && std::abs(next - estimate) <= 1e-12 * next) return next;
    estimate = next;
  }
  return estimate;
}

/// Vector sum with a per-entry Kahan carry.
class CompensatedSum {
 public:
  explicit CompensatedSum(Eigen::Index n) : sum_(Vector::Zero(n)), carry_(Vector::Zero(n)) {}
  void add(const Vector& x) {
    const Vector y = x - carry_;
    const Vector t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  const Vector& value() const { return sum_; }

 private:
  Vector sum_;
  Vector carry_;
};

}  // namespace

Vector RotationDiagonal::apply(const Vector& coords) const {
  Vector out = coords;
  for (Eigen::Index j = 0; j < out.size(); ++j) out[j] *= phases[static_cast<std::size_t>(j)];
  return out;
}

Vector RotationDiagonal::apply_adjoint(const Vector& coords) const {
  Vector out = coords;
  for (Eigen::Index j = 0; j < out.size(); ++j) out[j] *= std::conj(phases[static_cast<std::size_t>(j)]);
  return out;
}

RotationDiagonal rotation_diagonal(const SeparatedBasis& basis, Scalar w) {
  require_unimodular(w);
  const Vector p = unit_root_powers(w, basis.max_generation());
  RotationDiagonal d;
  d.w = w;
  for (Eigen::Index j = 0; j < basis.size(); ++j) d.phases.push_back(p[basis.generation(j)]);
  return d;
}

Vector rotate_vector(const ShiftOperator& S, const Vector& f, Scalar w) {
  require_unimodular(w);
  if (f.size() != S.dim()) throw DimensionMismatch("vector does not match the tree");
  const Vector p = unit_root_powers(w, S.depth());
  Vector out(f.size());
  for (VertexId u = 0; u < f.size(); ++u) out[u] = p[S.tree().generation(u)] * f[u];
  return out;
}

CoeffSeq rotate_coeffs(const SeparatedBasis& basis, const CoeffSeq& c, Scalar w) {
  const RotationDiagonal d = rotation_diagonal(basis, w);
  CoeffSeq out = c;
  Scalar wn = 1.0;
  for (Eigen::Index n = 0; n < c.length(); ++n) {
    out[n] = wn * d.apply(c[n]);
    wn *= w;
  }
  return out;
}

OpSymbol rotate_symbol(const OpSymbol& phi, const SeparatedBasis& basis, Scalar w) {
  const RotationDiagonal d = rotation_diagonal(basis, w);
  if (phi.size() > 0 && phi.dim() != basis.size()) throw DimensionMismatch("symbol does not match the kernel");
  OpSymbol out = phi;
  Scalar wn = 1.0;
  for (Matrix& m : out.mats) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        m(i, j) *= wn * d.phases[static_cast<std::size_t>(i)] * std::conj(d.phases[static_cast<std::size_t>(j)]);
    wn *= w;
  }
  return out;
}

ScalarSymbol rotate_symbol(const ScalarSymbol& phi, Scalar w) {
  require_unimodular(w);
  ScalarSymbol out = phi;
  Scalar wn = 1.0;
  for (Scalar& a : out.coeffs) {
    a *= wn;
    wn *= w;
  }
  return out;
}

FejerSymbol fejer_symbol(int n) {
  if (n < 0) throw BadParams("Fejér order must be non-negative");
  FejerSymbol p;
  p.order = n;
  for (int m = 0; m <= n; ++m) p.coeffs.push_back(1.0 - static_cast<Real>(m) / (n + 1));
  return p;
}

ScalarSymbol fejer_mean(const FejerSymbol& p, const ScalarSymbol& phi) {
  ScalarSymbol out;
  const Eigen::Index n = std::min<Eigen::Index>(phi.size(), static_cast<Eigen::Index>(p.coeffs.size()));
  for (Eigen::Index m = 0; m < n; ++m) out.coeffs.push_back(p.at(m) * phi.at(m));
  return out;
}

Real scalar_multiplier_norm(const ShiftOperator& S, const ScalarSymbol& phi) {
  if (S.dim() > kExactNormLimit) return power_iteration_norm(S, phi);
  Matrix m(S.dim(), S.dim());
  for (VertexId u = 0; u < S.dim(); ++u) m.col(u) = scalar_mult_apply(S, phi, unit_vector(S, u));
  return operator_norm(m);
}

ConvergenceReport cesaro_convergence_experiment(const ShiftOperator& S, const SeparatedBasis& basis,
                                                const ScalarSymbol& phi, const std::vector<int>& orders,
                                                const std::vector<Vector>& test_vectors) {
  ConvergenceReport report;
  report.symbol_norm = scalar_multiplier_norm(S, phi);
  std::vector<CoeffSeq> coeffs;
  std::vector<Vector> targets;
  for (const Vector& f : test_vectors) {
    coeffs.push_back(analytic_coeffs(S, basis, f, S.depth()));
    targets.push_back(synthesize(S, basis, convolve_with_coeffs(phi, coeffs.back())));
  }
  for (int n : orders) {
    const ScalarSymbol mean = fejer_mean(fejer_symbol(n), phi);
    const Real nrm = scalar_multiplier_norm(S, mean);
    if (report.symbol_norm > 0.0) report.domination_ratio = std::max(report.domination_ratio, nrm / report.symbol_norm);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      const Vector approx = synthesize(S, basis, convolve_with_coeffs(mean, coeffs[i]));
      report.rows.push_back({n, static_cast<int>(i), (approx - targets[i]).norm(), nrm});
    }
  }
  return report;
}

Real circle_integral_check(const ShiftOperator& S, const ScalarSymbol& phi, int k, int quadrature_points,
                           const std::vector<Vector>& test_vectors) {
  const int K = static_cast<int>(phi.size());
  const int Q = quadrature_points == 0 ? K + std::abs(k) + 1 : quadrature_points;
  if (Q < K + std::abs(k)) throw QuadratureTooCoarse("roots-of-unity rule is not exact for this symbol");

  ScalarSymbol target;
  if (k >= 0 && k < K) {
    target = ScalarSymbol::monomial(k);
    target.coeffs.back() = phi.at(k);
  }

  Real worst = 0.0;
  for (const Vector& f : test_vectors) {
    CompensatedSum acc(f.size());
    for (int q = 0; q < Q; ++q) {
      const Scalar w = std::polar(1.0, 2.0 * std::numbers::pi * q / Q);
      const Scalar weight = std::pow(std::conj(w), k) / static_cast<Real>(Q);
      acc.add(weight * scalar_mult_apply(S, rotate_symbol(phi, w), f));
    }
    const Vector expected = scalar_mult_apply(S, target, f);
    worst = std::max(worst, (acc.value() - expected).norm());
  }
  return worst;
}

}  // namespace treeshift
