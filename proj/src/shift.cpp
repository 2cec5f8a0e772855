#include "treeshift/shift.hpp"

#include <algorithm>
#include <cmath>

namespace treeshift {

ShiftOperator::ShiftOperator(WeightedTree wt) : tree_(std::move(wt.tree)), weights_(std::move(wt.weights)) {
  const VertexId n = tree_.size();
  if (weights_.size() != n) throw MalformedSpec("weight map does not match the tree");
  norm_squares_ = RealVector::Zero(n);
  for (VertexId v = 1; v < n; ++v) norm_squares_[tree_.parent(v)] += weights_[v] * weights_[v];

  Real lo = std::numeric_limits<Real>::infinity();
  Real hi = 0.0;
  for (VertexId u = 0; u < tree_.generation_begin(tree_.depth()); ++u) {
    lo = std::min(lo, norm_squares_[u]);
    hi = std::max(hi, norm_squares_[u]);
  }
  lower_bound_ = std::isfinite(lo) ? std::sqrt(lo) : 0.0;
  norm_ = std::sqrt(hi);
}

Eigen::Index SeparatedBasis::count_up_to_generation(GenerationIndex g) const {
  return std::upper_bound(generation_.begin(), generation_.end(), g) - generation_.begin();
}

Vector SeparatedBasis::vector(Eigen::Index j) const {
  Vector e = Vector::Zero(ambient_dim_);
  e.segment(first_[j], length_[j]) = block(j);
  return e;
}

Vector SeparatedBasis::coordinates(const Vector& f) const {
  Vector c(size());
  for (Eigen::Index j = 0; j < size(); ++j) c[j] = block(j).dot(f.segment(first_[j], length_[j]));
  return c;
}

Vector SeparatedBasis::synthesize(const Vector& coords) const {
  Vector f = Vector::Zero(ambient_dim_);
  for (Eigen::Index j = 0; j < size(); ++j)
    if (coords[j] != Scalar(0)) f.segment(first_[j], length_[j]) += coords[j] * block(j);
  return f;
}

void SeparatedBasis::push_back(VertexId first, GenerationIndex generation, const Vector& values) {
  first_.push_back(first);
  generation_.push_back(generation);
  offset_.push_back(static_cast<Eigen::Index>(values_.size()));
  length_.push_back(values.size());
  values_.insert(values_.end(), values.data(), values.data() + values.size());
}

Vector apply_shift(const ShiftOperator& S, const Vector& f) {
  const Tree& t = S.tree();
  const VertexId last = t.generation_begin(t.depth());
  for (VertexId v = last; v < t.size(); ++v)
    if (f[v] != Scalar(0)) throw SupportOverflow("S f leaves the truncation: f is supported on the last generation");
  return apply_shift_truncated(S, f);
}

Vector apply_shift_truncated(const ShiftOperator& S, const Vector& f) {
  const Tree& t = S.tree();
  Vector out = Vector::Zero(t.size());
  for (VertexId v = 1; v < t.size(); ++v) out[v] = S.weights()[v] * f[t.parent(v)];
  return out;
}

Vector apply_adjoint(const ShiftOperator& S, const Vector& f) {
  const Tree& t = S.tree();
  Vector out = Vector::Zero(t.size());
  for (VertexId v = 1; v < t.size(); ++v) out[t.parent(v)] += S.weights()[v] * f[v];
  return out;
}

Vector apply_left_inverse(const ShiftOperator& S, const Vector& f) {
  if (S.lower_bound() <= 0.0) throw NotLeftInvertible("shift is not bounded below on the truncation");
  Vector out = apply_adjoint(S, f);
  for (VertexId u = 0; u < S.dim(); ++u) {
    const Real ns = S.norm_square(u);
    out[u] = ns > 0.0 ? out[u] / ns : Scalar(0);
  }
  return out;
}

Vector apply_left_inverse_adjoint(const ShiftOperator& S, const Vector& f) {
  if (S.lower_bound() <= 0.0) throw NotLeftInvertible("shift is not bounded below on the truncation");
  const Tree& t = S.tree();
  Vector out = Vector::Zero(t.size());
  for (VertexId v = 1; v < t.size(); ++v) {
    const VertexId p = t.parent(v);
    out[v] = S.weights()[v] * f[p] / S.norm_square(p);
  }
  return out;
}

SeparatedBasis separated_kernel_basis(const ShiftOperator& S) {
  const Tree& t = S.tree();
  SeparatedBasis basis;
  basis.ambient_dim_ = t.size();
  basis.push_back(t.root(), 0, Vector::Ones(1));

  for (VertexId u = 0; u < t.size(); ++u) {
    const Eigen::Index m = t.child_count(u);
    if (m < 2) continue;
    const VertexId first = t.first_child(u);
    RealVector w(m);
    for (Eigen::Index i = 0; i < m; ++i) w[i] = S.weights()[first + i];

    // Differences against the first child span the complement of w; two
    // passes of modified Gram-Schmidt keep them orthonormal to round-off.
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m - 1);
    for (Eigen::Index i = 1; i < m; ++i) {
      Eigen::VectorXd v = Eigen::VectorXd::Zero(m);
      v[0] = w[i];
      v[i] = -w[0];
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index k = 0; k < i - 1; ++k) v -= q.col(k).dot(v) * q.col(k);
      q.col(i - 1) = v / v.norm();
    }
    for (Eigen::Index i = 0; i < m - 1; ++i)
      basis.push_back(first, t.generation(u) + 1, q.col(i).cast<Scalar>());
  }
  return basis;
}

Vector project_kernel(const ShiftOperator& S, const SeparatedBasis& basis, const Vector& f) {
  if (f.size() != S.dim()) throw DimensionMismatch("vector does not match the tree");
  return basis.synthesize(basis.coordinates(f));
}

BalanceCheck is_balanced(const ShiftOperator& S, Real tol) {
  const Tree& t = S.tree();
  BalanceCheck out;
  for (GenerationIndex g = 0; g < t.depth(); ++g) {
    const VertexId b = t.generation_begin(g);
    const Real ref = std::sqrt(S.norm_square(b));
    for (VertexId v = b + 1; v < t.generation_end(g); ++v) {
      if (std::abs(std::sqrt(S.norm_square(v)) - ref) > tol) {
        out.balanced = false;
        out.witness = std::make_pair(b, v);
        return out;
      }
    }
  }
  return out;
}

std::vector<Real> generation_norms(const ShiftOperator& S) {
  const auto check = is_balanced(S);
  if (!check.balanced) throw NotBalanced("shift is not balanced");
  std::vector<Real> c;
  for (GenerationIndex g = 0; g < S.depth(); ++g) c.push_back(std::sqrt(S.norm_square(S.tree().generation_begin(g))));
  return c;
}

SparseMatrix shift_matrix(const ShiftOperator& S) {
  const Tree& t = S.tree();
  std::vector<Eigen::Triplet<Scalar>> entries;
  entries.reserve(static_cast<std::size_t>(t.size()));
  for (VertexId v = 1; v < t.size(); ++v) entries.emplace_back(v, t.parent(v), S.weights()[v]);
  SparseMatrix m(t.size(), t.size());
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

Vector unit_vector(const ShiftOperator& S, VertexId u) {
  Vector e = Vector::Zero(S.dim());
  e[u] = 1.0;
  return e;
}

GenerationIndex support_depth(const Tree& tree, const Vector& f, Real tol) {
  for (VertexId v = tree.size() - 1; v >= 0; --v)
    if (std::abs(f[v]) > tol) return tree.generation(v);
  return -1;
}

}  // namespace treeshift
