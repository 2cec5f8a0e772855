#pragma once

// Dense brute-force references. Everything here is built from the tree's
// parent pointers and weights only, never from library operators.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "treeshift/common.hpp"
#include "treeshift/tree.hpp"

namespace oracle {

using treeshift::Matrix;
using treeshift::Real;
using treeshift::Scalar;
using treeshift::Vector;
using treeshift::VertexId;
using treeshift::WeightedTree;

/// Compressed shift: column u holds λ_v at every child v of u.
inline Matrix shift(const WeightedTree& wt) {
  const VertexId n = wt.tree.size();
  Matrix s = Matrix::Zero(n, n);
  for (VertexId v = 1; v < n; ++v) s(v, wt.tree.parent(v)) = wt.weights[v];
  return s;
}

/// Moore-Penrose inverse of the compressed shift. Above the last generation
/// it equals (S*S)⁻¹S*, and it vanishes on the last generation's preimage.
inline Matrix left_inverse(const Matrix& s) { return s.completeOrthogonalDecomposition().pseudoInverse(); }

/// Orthonormal basis of N(S*) from a full SVD of S*.
inline Matrix kernel_basis(const Matrix& s) {
  Eigen::JacobiSVD<Matrix> svd(s.adjoint(), Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * sv[0]) ++rank;
  return svd.matrixV().rightCols(s.cols() - rank);
}

inline Matrix kernel_projector(const Matrix& s) {
  const Matrix k = kernel_basis(s);
  return k * k.adjoint();
}

inline Matrix power(const Matrix& m, int n) {
  Matrix out = Matrix::Identity(m.rows(), m.cols());
  for (int i = 0; i < n; ++i) out = m * out;
  return out;
}

/// P_E L^n f as vectors of ℓ², n = 0..N.
inline std::vector<Vector> projected_coefficients(const Matrix& s, const Vector& f, int N) {
  const Matrix l = left_inverse(s);
  const Matrix p = kernel_projector(s);
  std::vector<Vector> out;
  Vector x = f;
  for (int n = 0; n <= N; ++n) {
    out.push_back(p * x);
    x = l * x;
  }
  return out;
}

/// Σ_k φ_k S^k with the shift's matrix.
inline Matrix polynomial(const Matrix& s, const std::vector<Scalar>& coeffs) {
  Matrix out = Matrix::Zero(s.rows(), s.cols());
  Matrix pw = Matrix::Identity(s.rows(), s.cols());
  for (const Scalar& c : coeffs) {
    out += c * pw;
    pw = s * pw;
  }
  return out;
}

/// Product of two polynomials by the schoolbook double loop.
inline std::vector<Scalar> multiply(const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
  if (a.empty() || b.empty()) return {};
  std::vector<Scalar> out(a.size() + b.size() - 1, Scalar(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

inline Real spectral_norm(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m).singularValues()[0];
}

/// Largest |Σ a_k z^k| over a fine grid on the unit circle.
inline Real circle_sup(const std::vector<Scalar>& a, int points = 4096) {
  Real best = 0.0;
  for (int q = 0; q < points; ++q) {
    const Scalar z = std::polar(1.0, 2.0 * M_PI * q / points);
    Scalar s = 0.0, zk = 1.0;
    for (const Scalar& c : a) {
      s += c * zk;
      zk *= z;
    }
    best = std::max(best, std::abs(s));
  }
  return best;
}

/// Closed form of P_E L^n f on the two-ray tree for n >= 1, as a vector.
inline Vector two_ray_projection(const treeshift::Tree& t, Real alpha, const Vector& f, int n) {
  auto idx = [&](int ray, int gen) { return *t.find("(" + std::to_string(ray) + "," + std::to_string(gen) + ")"); };
  auto at = [&](int ray, int gen) { return gen <= t.depth() ? f[idx(ray, gen)] : Scalar(0); };
  const Real s = 1.0 + alpha * alpha;
  Vector out = Vector::Zero(t.size());
  out[0] = (at(1, n) + std::pow(alpha, 2 - n) * at(2, n)) / s;
  const Scalar c = (alpha * at(1, n + 1) - std::pow(alpha, -n) * at(2, n + 1)) / s;
  out[idx(1, 1)] += c * alpha;
  out[idx(2, 1)] -= c;
  return out;
}

inline Real max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace oracle
