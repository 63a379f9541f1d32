#pragma once

#include "ptycho/banded.hpp"
#include "ptycho/masks.hpp"
#include "ptycho/operator.hpp"

#include <optional>
#include <utility>
#include <vector>

namespace ptycho {

///@brief Orthonormal coordinate selector onto the band inside the diagonal vectorization.
struct PtychoBasis {
  BandSpec spec;
  /// residues[m + delta - 1]: kept residues r in [0, s) on offset m.
  std::vector<std::vector<Index>> residues;
  /// Kept positions of diag_vectorize, offset-major, then i ascending.
  std::vector<Index> columns;

  Index offsets() const { return spec.offsets(); }
  Index size() const { return Index(columns.size()); }
  /// Dense (2 delta - 1) d x size() selector N.
  CMat matrix() const;
};

PtychoBasis build_ptycho_basis(const BandSpec& spec);

/// Per-frequency blocks of the measurement operator on the band.
///
/// Column c of every block is the (offset, residue) pair cols[c]; block k maps the
/// unnormalized length-dBar DFTs of the band data to the DFTs of the measurements.
struct BlockSpectrum {
  BandSpec spec;
  std::vector<std::pair<Index, Index>> cols;
  std::vector<CMat> blocks;
  /// Singular values per block, descending; min(D, cols) of them.
  std::vector<RVec> singularValues;
  double sigmaMax = 0.0;
  /// Smallest singular value over blocks; 0 if a block has fewer rows than columns.
  double sigmaMin = 0.0;
  double kappa = 0.0;
  bool spanning = false;
  /// Frequency of the weakest block.
  Index witness = -1;

  /// All singular values, sorted ascending.
  RVec all_singular_values() const;
};

/// Block matrices only, no SVD.
BlockSpectrum block_matrices(const MaskFamily& family, Index s);
BlockSpectrum block_spectrum(const MaskFamily& family, Index s);

struct SpanResult {
  bool spanning = false;
  std::optional<Index> witness;
};
SpanResult spanning_check(const MaskFamily& family, Index s);

struct FourierKappa {
  double kappa = 0.0;
  double sigmaMin = 0.0;
  double sigmaMax = 0.0;
  /// Per frequency k: min over offsets of the block's singular values.
  RVec perFrequencyMinima;
  bool exact = true;
  /// Condition number of the modulation matrix; 1 when K = D.
  double modulationKappa = 1.0;
  bool spanning = true;
  /// (offset m, frequency k) where the minimum is attained.
  std::pair<Index, Index> witness{0, 0};
};

/// Closed-form kappa for Fourier families at s = 1 (an upper bound when K > D).
FourierKappa fourier_family_kappa(const Mask& gamma, Index K = 0, Index D = 0);

/// g_m = diag(gamma gamma^*, m) for m in (-delta, delta), indexed m + delta - 1.
std::vector<CVec> window_correlations(const Mask& gamma);

/// D x (2 delta - 1) matrix w_K^{j m}/sqrt(K), m = 1-delta..delta-1.
CMat modulation_matrix(Index K, Index D, Index delta);

/// Every divisor k > 1 of d exceeds delta.
bool is_strictly_rough(Index d, Index delta);

/// Real unit-norm measurement perturbation aligned with the weakest block's smallest left singular vector.
MeasurementGrid worst_noise_direction(const MaskFamily& family, Index s);

}  // namespace ptycho
