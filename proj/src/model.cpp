#include "treeshift/model.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/QR>

namespace treeshift {

namespace {

void require_same_dim(const SeparatedBasis& basis, const CoeffSeq& c) {
  if (c.dim() != basis.size()) throw DimensionMismatch("coefficient sequence does not match dim E");
}

Real operator_norm_of_power(const ShiftOperator& S, int n, int iterations) {
  std::mt19937_64 rng(0x5eedULL + static_cast<std::uint64_t>(n));
  std::normal_distribution<Real> gauss;
  Vector v(S.dim());
  for (VertexId i = 0; i < S.dim(); ++i) v[i] = Scalar(gauss(rng), gauss(rng));
  v.normalize();

  Real estimate = 0.0;
  for (int it = 0; it < iterations; ++it) {
    Vector w = v;
    for (int k = 0; k < n; ++k) w = apply_left_inverse(S, w);
    for (int k = 0; k < n; ++k) w = apply_left_inverse_adjoint(S, w);
    const Real nrm = w.norm();
    if (nrm == 0.0) return 0.0;
    const Real next = std::sqrt(nrm);
    v = w / nrm;
    if (it > 0 && std::abs(next - estimate) <= kPowerTolerance * next) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return estimate;
}

}  // namespace

CoeffSeq analytic_coeffs(const ShiftOperator& S, const SeparatedBasis& basis, const Vector& f, GenerationIndex N) {
  if (f.size() != S.dim()) throw DimensionMismatch("vector does not match the tree");
  if (N < 0) throw BadParams("coefficient count must be non-negative");
  CoeffSeq out;
  out.coeffs = Matrix::Zero(basis.size(), N + 1);
  out.exact_to = N;
  Vector g = f;
  for (GenerationIndex n = 0; n <= N; ++n) {
    if (n > S.depth()) break;
    out.coeffs.col(n) = basis.coordinates(g);
    if (n < N) g = apply_left_inverse(S, g);
  }
  return out;
}

Vector synthesize(const ShiftOperator& S, const SeparatedBasis& basis, const CoeffSeq& c) {
  require_same_dim(basis, c);
  const Eigen::Index top = std::min<Eigen::Index>(c.length() - 1, S.depth());
  Vector acc = Vector::Zero(S.dim());
  for (Eigen::Index n = top; n >= 0; --n) {
    acc = apply_shift_truncated(S, acc);
    acc += basis.synthesize(c[n]);
  }
  return acc;
}

Reconstruction reconstruct(const ShiftOperator& S, const SeparatedBasis& basis, const CoeffSeq& c,
                           GenerationIndex support_depth) {
  require_same_dim(basis, c);
  if (support_depth < 0 || support_depth > S.depth())
    throw BadParams("support depth must lie inside the truncation");

  CoeffSeq in_range = c;
  Real outside = 0.0;
  for (Eigen::Index n = 0; n < c.length(); ++n)
    for (Eigen::Index j = 0; j < c.dim(); ++j)
      if (basis.generation(j) + n > support_depth) {
        outside += std::norm(c.coeffs(j, n));
        in_range.coeffs(j, n) = 0.0;
      }

  Reconstruction out;
  out.residual = std::sqrt(outside);
  if (out.residual > kInconsistencyTolerance)
    throw Inconsistent("coefficients outside the support bound do not vanish");
  out.vector = synthesize(S, basis, in_range);

  // Layers S^n e'_j with n past the given length are left free.
  const Eigen::Index N = c.length() - 1;
  std::vector<Vector> free;
  for (Eigen::Index j = 0; j < basis.size(); ++j) {
    const GenerationIndex k = basis.generation(j);
    if (k > support_depth) continue;
    Vector v = basis.vector(j);
    for (Eigen::Index n = 1; k + n <= support_depth; ++n) {
      v = apply_shift_truncated(S, v);
      if (n > N) free.push_back(v);
    }
  }
  if (!free.empty()) {
    out.underdetermined = true;
    Matrix span(S.dim(), static_cast<Eigen::Index>(free.size()));
    for (std::size_t i = 0; i < free.size(); ++i) span.col(static_cast<Eigen::Index>(i)) = free[i];
    Eigen::HouseholderQR<Matrix> qr(span);
    const Matrix q = qr.householderQ() * Matrix::Identity(S.dim(), span.cols());
    out.vector -= q * (q.adjoint() * out.vector);
  }
  return out;
}

Scalar model_inner_product(const ShiftOperator& S, const SeparatedBasis& basis, const CoeffSeq& a, const CoeffSeq& b) {
  return synthesize(S, basis, b).dot(synthesize(S, basis, a));
}

Vector evaluate(const CoeffSeq& c, Scalar z) {
  Vector acc = Vector::Zero(c.dim());
  for (Eigen::Index n = c.length() - 1; n >= 0; --n) acc = acc * z + c[n];
  return acc;
}

RadiusEstimate spectral_radius_estimate(const ShiftOperator& S, int iterations) {
  if (iterations < 1) throw BadParams("iterations must be positive");
  RadiusEstimate out;
  const int top = std::min(iterations, static_cast<int>(S.depth()));
  for (int n = 1; n <= top; ++n) {
    const Real nrm = operator_norm_of_power(S, n, 200);
    out.sequence.push_back(nrm > 0.0 ? std::pow(nrm, 1.0 / n) : 0.0);
  }
  const std::size_t from = out.sequence.size() > 5 ? out.sequence.size() - 5 : 0;
  for (std::size_t i = from; i < out.sequence.size(); ++i) out.estimate = std::max(out.estimate, out.sequence[i]);
  return out;
}

Vector kernel_function(const ShiftOperator& S, const SeparatedBasis& basis, Scalar lambda, Eigen::Index j,
                       GenerationIndex order) {
  if (j < 0 || j >= basis.size()) throw BadParams("basis index out of range");
  const Scalar w = std::conj(lambda);
  Vector term = basis.vector(j);
  Vector acc = term;
  Scalar power = 1.0;
  for (GenerationIndex n = 1; n <= order; ++n) {
    if (basis.generation(j) + n > S.depth()) break;
    term = apply_left_inverse_adjoint(S, term);
    power *= w;
    acc += power * term;
  }
  return acc;
}

KernelEval kernel_matrix(const ShiftOperator& S, const SeparatedBasis& basis, Scalar z, Scalar lambda,
                         GenerationIndex order, Real radius) {
  if (order < 0) throw BadParams("order must be non-negative");
  const Real r = std::max(std::abs(z), std::abs(lambda));
  if (radius * r >= 1.0) throw OutsideDisc("point lies outside the disc of convergence");

  KernelEval out;
  out.z = z;
  out.lambda = lambda;
  out.order = order;
  out.radius = radius;
  out.matrix = Matrix::Zero(basis.size(), basis.size());
  for (Eigen::Index j = 0; j < basis.size(); ++j) {
    const Vector x = kernel_function(S, basis, lambda, j, order);
    out.matrix.col(j) = evaluate(analytic_coeffs(S, basis, x, order), z);
  }
  const Real q = radius * r;
  out.tail_estimate = std::pow(q, order + 1) / (1.0 - q);
  return out;
}

KernelEval kernel_matrix(const ShiftOperator& S, const SeparatedBasis& basis, Scalar z, Scalar lambda,
                         GenerationIndex order) {
  return kernel_matrix(S, basis, z, lambda, order, spectral_radius_estimate(S, S.depth()).estimate);
}

EigenResidual eigenvector_residual(const ShiftOperator& S, const SeparatedBasis& basis, Scalar lambda,
                                   Eigen::Index j, GenerationIndex order, Real radius) {
  if (radius * std::abs(lambda) >= 1.0) throw OutsideDisc("eigenvalue lies outside the disc of convergence");
  if (S.lower_bound() <= 0.0) throw NotLeftInvertible("shift is not bounded below on the truncation");
  EigenResidual out;
  out.order = std::min<GenerationIndex>(order, S.depth() - basis.generation(j));
  const Vector x = kernel_function(S, basis, std::conj(lambda), j, out.order);
  const Real xn = x.norm();
  out.residual = (apply_adjoint(S, x) - lambda * x).norm() / xn;
  const Real inv_lower = 1.0 / S.lower_bound();
  out.tail_bound = std::pow(std::abs(lambda), out.order + 1) * std::pow(inv_lower, out.order) / xn;
  return out;
}

}  // namespace treeshift
