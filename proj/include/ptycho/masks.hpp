#pragma once

#include "ptycho/types.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ptycho {

///@brief Length-d vector supported on the first delta indices, with index 0 in the support.
struct Mask {
  Index d = 0;
  Index delta = 0;
  CVec values;

  Mask() = default;
  Mask(Index d, Index delta, CVec values);
};

struct FourierStructure {
  Mask window;
  Index K = 0;
};

///@brief D masks sharing (d, delta), optionally with a window/modulation description.
struct MaskFamily {
  Index d = 0;
  Index delta = 0;
  std::vector<CVec> masks;
  std::optional<FourierStructure> fourier;
  std::string kind = "custom";
  std::map<std::string, double> params;

  Index D() const { return Index(masks.size()); }
  /// D x delta matrix of the masks' supports.
  CMat support_matrix() const;
  /// Checks the Mask invariants for every member.
  void validate() const;
  /// Multiplies every mask by t (drops nothing; structure kept).
  MaskFamily scaled(double t) const;
};

/// gamma_i = a^i on [delta); a defaults to max(4, (delta-1)/2).
Mask exponential_mask(Index d, Index delta, std::optional<double> a = {});
/// gamma = a e_0 + 1_[delta]; a defaults to 2 delta - 1 and must exceed delta - 1.
Mask near_flat_mask(Index d, Index delta, std::optional<double> a = {});
/// gamma = 1_[delta].
Mask constant_mask(Index d, Index delta);

double default_exponential_a(Index delta);
double default_near_flat_a(Index delta);

/// m_j(n) = gamma_n w_K^{j n}, j in [D); K and D default to 2 delta - 1.
MaskFamily local_fourier_family(const Mask& gamma, Index K = 0, Index D = 0);

/// Default mask count s (2 delta - s) for stride s.
inline Index default_mask_count(Index delta, Index s) { return s * (2 * delta - s); }

/// D masks with i.i.d. standard complex Gaussian entries on [delta).
MaskFamily random_gaussian_family(Index d, Index delta, Index D, std::uint64_t seed);

/// Family built from a descriptor: "exp[:a=..]", "expdecay[:a=..]", "flat[:a=..]", "const",
/// "rand[:seed=..,D=..]", "file:path". expdecay uses the window e^{-i/a}, a a decay length.
MaskFamily family_from_descriptor(const std::string& desc, Index d, Index delta, Index s);

}  // namespace ptycho
