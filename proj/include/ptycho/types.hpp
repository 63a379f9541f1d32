#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace ptycho {

using Index = Eigen::Index;
using cplx = std::complex<double>;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

using CVec = Vec<cplx>;
using CMat = Mat<cplx>;
using RVec = Vec<double>;
using RMat = Mat<double>;

/// Shape or length mismatch between operands.
struct DimensionError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Parameters that violate an operation's preconditions.
struct ValidationError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Dense assemblies beyond this many rows are refused unless the caller raises the limit.
inline constexpr Index kDenseRowLimit = 4096;

/// Floor for calling a block rank-deficient, relative to the global largest singular value.
inline constexpr double kRankTol = 1e-10;

inline constexpr const char* kVersion = "0.3.1";

/// Mathematical modulo into [0, n).
inline Index wrap(Index i, Index n) {
  Index r = i % n;
  return r < 0 ? r + n : r;
}

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

inline void require_dims(bool ok, const std::string& msg) {
  if (!ok) throw DimensionError(msg);
}

/// sgn with the convention sgn(0) = 1.
template <typename Scalar>
Scalar sgn(const Scalar& z) {
  using std::abs;
  auto a = abs(z);
  return a == 0 ? Scalar(1) : z / a;
}

}  // namespace ptycho
