#pragma once

#include <cstdint>
#include <random>
#include <span>

#include "treeshift/common.hpp"

namespace treeshift {

using Rng = std::mt19937_64;

/// Largest singular value.
Real operator_norm(const Matrix& m);
Real operator_norm(const Eigen::MatrixXd& m);

/// Least-squares slope of ys against xs.
Real fit_slope(std::span<const Real> xs, std::span<const Real> ys);

/// Entries with independent standard normal real and imaginary parts.
Vector random_vector(Eigen::Index n, Rng& rng);
Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng);
Scalar random_scalar(Rng& rng);

/// Per-trial stream derived from a base seed, so trials can run in any order.
Rng trial_rng(std::uint64_t seed, std::uint64_t trial);

/// Neumaier-compensated sum of squared moduli.
Real compensated_norm_squared(const Vector& v);

}  // namespace treeshift
