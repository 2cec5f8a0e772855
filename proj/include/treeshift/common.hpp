#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace treeshift {

using Real = double;
using Scalar = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

/// Vertices are numbered 0..n-1 in generation order; the root is always 0.
using VertexId = Eigen::Index;
using GenerationIndex = int;

inline constexpr VertexId kNoParent = -1;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TREESHIFT_DEFINE_ERROR(Name) \
  class Name : public Error {        \
   public:                           \
    using Error::Error;              \
  }

TREESHIFT_DEFINE_ERROR(MalformedSpec);
TREESHIFT_DEFINE_ERROR(NonpositiveWeight);
TREESHIFT_DEFINE_ERROR(UnknownExample);
TREESHIFT_DEFINE_ERROR(BadParams);
TREESHIFT_DEFINE_ERROR(DepthTooLargeForMemory);
TREESHIFT_DEFINE_ERROR(NotDescendant);
TREESHIFT_DEFINE_ERROR(SupportOverflow);
TREESHIFT_DEFINE_ERROR(NotLeftInvertible);
TREESHIFT_DEFINE_ERROR(Inconsistent);
TREESHIFT_DEFINE_ERROR(OutsideDisc);
TREESHIFT_DEFINE_ERROR(DimensionMismatch);
TREESHIFT_DEFINE_ERROR(NotInCommutant);
TREESHIFT_DEFINE_ERROR(NotUnimodular);
TREESHIFT_DEFINE_ERROR(QuadratureTooCoarse);
TREESHIFT_DEFINE_ERROR(NotBalanced);
TREESHIFT_DEFINE_ERROR(WrongGeneration);
TREESHIFT_DEFINE_ERROR(PreconditionFailed);
TREESHIFT_DEFINE_ERROR(ConfigError);

#undef TREESHIFT_DEFINE_ERROR

/// Absolute tolerance for algebraic identities on unit-norm inputs.
inline constexpr Real kAlgebraicTolerance = 1e-12;
/// Tolerance for identities that go through powers of L or S.
inline constexpr Real kPowerTolerance = 1e-10;
/// Default growth threshold (log-norm per depth step) for membership verdicts.
inline constexpr Real kDefaultSlopeThreshold = 0.02;

}  // namespace treeshift
