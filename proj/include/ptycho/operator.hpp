#pragma once

#include "ptycho/banded.hpp"
#include "ptycho/masks.hpp"

#include <cstdint>
#include <limits>
#include <vector>

namespace ptycho {

///@brief Real measurements y(l, j), l in [d/s), j in [D).
///
/// Stored as a dBar x D matrix, so column-major vec() gives the j*dBar + l ordering.
struct MeasurementGrid {
  Index dBar = 0;
  Index D = 0;
  RMat values;

  MeasurementGrid() = default;
  MeasurementGrid(Index dBar_, Index D_) : dBar(dBar_), D(D_), values(RMat::Zero(dBar_, D_)) {}
  explicit MeasurementGrid(RMat v) : dBar(v.rows()), D(v.cols()), values(std::move(v)) {}

  /// Flattened in j*dBar + l order.
  RVec stacked() const { return Eigen::Map<const RVec>(values.data(), values.size()); }
  static MeasurementGrid from_stacked(const RVec& v, Index dBar, Index D);
  double norm() const { return values.norm(); }
};

enum class NoiseModel { Gaussian, Adversarial };

struct NoiseSpec {
  NoiseModel model = NoiseModel::Gaussian;
  /// SNR = |A(X0)| / |n|; infinity means no noise.
  double targetSnr = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;
};

///@brief g_m^j = diag(m_j m_j^*, m) for every mask j and offset m in (-delta, delta).
struct DiagonalCorrelations {
  Index d = 0;
  Index delta = 0;
  /// g[j][m + delta - 1], each a length-d vector.
  std::vector<std::vector<CVec>> g;

  const CVec& at(Index j, Index m) const { return g[j][m + delta - 1]; }
};

DiagonalCorrelations diagonal_correlations(const MaskFamily& family);

/// y(l, j) = |<x0, S^{s l} m_j>|^2.
MeasurementGrid forward(const MaskFamily& family, const CVec& x0, Index s);
/// y(l, j) = <S^{s l} m_j m_j^* S^{-s l}, X>.
MeasurementGrid forward(const MaskFamily& family, const BandedHermitian& X);

/// Dense matrix with A * diag_vectorize(X) = stacked(forward(family, X)).
CMat assemble_dense_A(const MaskFamily& family, Index s, Index max_rows = kDenseRowLimit);

/// Adds noise scaled so |reference| / |n| equals the target SNR exactly.
/// The adversarial model uses `direction` (unit or not) instead of a random draw.
MeasurementGrid add_noise(const MeasurementGrid& y, const NoiseSpec& ns, const MeasurementGrid& reference,
                          const MeasurementGrid* direction = nullptr);

/// Plain i.i.d. N(0,1) grid; deterministic in seed.
MeasurementGrid gaussian_grid(Index dBar, Index D, std::uint64_t seed);

}  // namespace ptycho
