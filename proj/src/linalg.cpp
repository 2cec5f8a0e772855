#include "treeshift/linalg.hpp"

#include <cmath>

#include <Eigen/SVD>

namespace treeshift {

Real operator_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Matrix> svd(m);
  return svd.singularValues()[0];
}

Real operator_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()[0];
}

Real fit_slope(std::span<const Real> xs, std::span<const Real> ys) {
  if (xs.size() != ys.size()) throw DimensionMismatch("slope fit needs paired samples");
  const auto n = static_cast<Real>(xs.size());
  if (xs.size() < 2) return 0.0;
  Real mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  Real sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0.0 ? sxy / sxx : 0.0;
}

Scalar random_scalar(Rng& rng) {
  std::normal_distribution<Real> gauss;
  const Real re = gauss(rng);
  const Real im = gauss(rng);
  return {re, im};
}

Vector random_vector(Eigen::Index n, Rng& rng) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = random_scalar(rng);
  return v;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = random_scalar(rng);
  return m;
}

Rng trial_rng(std::uint64_t seed, std::uint64_t trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  return Rng(seq);
}

Real compensated_norm_squared(const Vector& v) {
  Real sum = 0.0, carry = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const Real x = std::norm(v[i]);
    const Real t = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  return sum + carry;
}

}  // namespace treeshift
