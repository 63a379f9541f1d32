#pragma once

#include "ptycho/banded.hpp"
#include "ptycho/inversion.hpp"
#include "ptycho/masks.hpp"
#include "ptycho/operator.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace ptycho {

enum class EigSolver { Auto, Dense, Iterative };

struct RecoveryConfig {
  std::optional<Covering> covering;  ///< defaults to the delta-interval covering with stride s
  EigSolver eig = EigSolver::Auto;
  Index denseThreshold = 2048;  ///< Auto uses the dense solver up to this d
  double tolerance = 1e-12;
  Index maxIterations = 0;  ///< 0 means 50 d
  cplx zeroPhaseFill = 1.0;
};

struct PhaseResult {
  CVec phase;
  double lambda1 = 0.0;
  double lambda2 = 0.0;  ///< NaN when the iterative solver is used
  bool degenerate = false;
  Index iterations = 0;
};

struct RecoveryReport {
  CVec x;
  RVec magnitude;
  CVec phase;
  std::optional<double> alignedError;
  std::optional<double> alignedRelError;
  std::optional<double> spectralGapTau;
  bool degenerate = false;
  double asymmetry = 0.0;
  InverseMode mode = InverseMode::BlockPinv;
};

/// Blockwise magnitude estimate from the leading eigenvectors of |X| on each covering set.
RVec blk_mag(const BandedHermitian& X, const Covering& covering);

/// (max mu / min mu) (1 + 2 sqrt 2) / min_i |x0 on J_i| * distance.
double blk_mag_error_bound(const CVec& x0, const Covering& covering, double frob_distance);

/// sgn of the leading eigenvector of sgn(X) on the band (zeros replaced by the fill value).
PhaseResult phase_estimate(const BandedHermitian& X, const RecoveryConfig& config = {});

struct GapResult {
  double tau = 0.0;
  bool in_regime = false;  ///< s | delta and delta | d
  RVec degrees;            ///< row sums of T_{delta,s}(1 1^*), diagonal included
};

/// Second-smallest eigenvalue of I - D^{-1/2} W D^{-1/2}, W the band pattern without self-loops.
GapResult spectral_gap_tau(const BandSpec& spec);

/// min over theta of |x - e^{i theta} x0|.
double aligned_error(const CVec& x, const CVec& x0);

RecoveryReport recover(const MeasurementGrid& y, const InversePlan& plan, const RecoveryConfig& config = {},
                       const CVec* truth = nullptr);

/// Signal with magnitudes uniform in [lo, hi] and uniform phases.
CVec random_signal(Index d, std::uint64_t seed, double lo = 0.5, double hi = 1.5);

/// Hermitian banded matrix with i.i.d. complex Gaussian entries on the band.
BandedHermitian random_banded(const BandSpec& spec, std::uint64_t seed);

struct SweepRow {
  double snr = 0.0;
  double aligned_rel_error = 0.0;
  double mag_error = 0.0;
  double phase_error = 0.0;
};

/// Relative aligned, magnitude and phase errors of one recovery against the truth.
SweepRow score_recovery(const RecoveryReport& rep, const CVec& x0);

/// Mean errors over `trials` random signals for each SNR (Gaussian noise).
std::vector<SweepRow> snr_sweep(const InversePlan& plan, const std::vector<double>& snrs, int trials,
                                std::uint64_t seed, const RecoveryConfig& config = {});

}  // namespace ptycho
