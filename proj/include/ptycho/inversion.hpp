#pragma once

#include "ptycho/banded.hpp"
#include "ptycho/conditioning.hpp"
#include "ptycho/masks.hpp"
#include "ptycho/operator.hpp"

#include <memory>
#include <string>
#include <vector>

namespace ptycho {

enum class InverseMode { FastFourier, BlockPinv };

std::string to_string(InverseMode m);

///@brief Precomputed frequency-domain factors for solving A(X) = y on the band.
struct InversePlan {
  std::shared_ptr<const MaskFamily> family;
  BandSpec spec;
  InverseMode mode = InverseMode::BlockPinv;

  /// FastFourier: conj of the unnormalized DFT of g_m, indexed m + delta - 1.
  std::vector<CVec> zeta;
  Index K = 0;

  /// BlockPinv: column layout and per-frequency pseudo-inverses.
  std::vector<std::pair<Index, Index>> cols;
  std::vector<CMat> pinv;
  PtychoBasis basis;
};

/// Fast mode for s = 1 Fourier families with K = D >= 2 delta - 1; block pseudo-inverse otherwise.
/// Throws ValidationError naming the weakest frequency when the family does not span.
InversePlan plan_inverse(const MaskFamily& family, Index s, bool allow_fast = true);

struct InverseDiagnostics {
  /// |X - X^*| / |X| before symmetrization, over the band.
  double asymmetry = 0.0;
};

BandedHermitian invert(const InversePlan& plan, const MeasurementGrid& y, InverseDiagnostics* diag = nullptr);

/// Fast mode only: chi_m = diag(X, m) for one offset, before symmetrization.
CVec recover_diagonal(const InversePlan& plan, const MeasurementGrid& y, Index m);

struct BenchRow {
  Index d = 0;
  Index delta = 0;
  InverseMode mode = InverseMode::FastFourier;
  double median_ms = 0.0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  /// Least-squares slope of log t against log d.
  double exponent = 0.0;
  /// Slope of log t against log(d log d).
  double exponent_dlogd = 0.0;
};

/// Times invert() for each d at fixed delta, median over `reps` runs.
BenchResult invert_benchmark(const std::string& mask, Index delta, const std::vector<Index>& sizes, int reps = 5);

/// Slope of the least-squares line through (x_i, y_i).
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace ptycho
