#pragma once

#include "ptycho/types.hpp"

#include <vector>

namespace ptycho {

///@brief Ambient dimension d, band half-width delta and shift stride s.
struct BandSpec {
  Index d = 0;
  Index delta = 1;
  Index s = 1;

  /// Throws unless s | d, 1 <= s <= delta and 2 delta - 1 <= d.
  void validate() const;
  Index dbar() const { return d / s; }
  Index offsets() const { return 2 * delta - 1; }

  /// Entry (i, i+m) lies in the band; m in (-delta, delta), i taken mod d.
  bool in_band(Index i, Index m) const;
  /// Entry (i, j) lies in the band.
  bool contains(Index i, Index j) const;
  /// Number of stored positions on offset m: (d/s) * min(s, delta - |m|).
  Index count_on(Index m) const;
  /// Residues r in [0, s) such that (r + s q, r + s q + m) is in the band.
  std::vector<Index> residues(Index m) const;

  bool operator==(const BandSpec&) const = default;
};

/// T_{delta,s}(1 1^*) as a dense 0/1 matrix.
RMat band_pattern(const BandSpec& spec);

///@brief Hermitian d x d matrix supported on the band, stored by nonnegative offsets.
class BandedHermitian {
 public:
  BandedHermitian() = default;
  explicit BandedHermitian(const BandSpec& spec);
  /// diags[m] for m = 0..delta-1; entries outside the band are zeroed, diag 0 made real.
  BandedHermitian(const BandSpec& spec, std::vector<CVec> diags);

  static BandedHermitian zeros(const BandSpec& spec) { return BandedHermitian(spec); }
  /// T_{delta,s}(x x^*).
  static BandedHermitian rank_one(const BandSpec& spec, const CVec& x);

  const BandSpec& spec() const { return spec_; }
  /// diag(X, m) for m in (-delta, delta).
  CVec diagonal(Index m) const;
  const CVec& stored(Index m) const { return diags_[m]; }
  cplx operator()(Index i, Index j) const;

  CMat to_dense() const;
  double frobenius_norm() const;

  BandedHermitian& operator+=(const BandedHermitian& o);
  BandedHermitian& operator*=(double a);
  friend BandedHermitian operator+(BandedHermitian a, const BandedHermitian& b) { return a += b; }
  friend BandedHermitian operator-(BandedHermitian a, const BandedHermitian& b) {
    BandedHermitian nb = b;
    nb *= -1.0;
    return a += nb;
  }
  friend BandedHermitian operator*(double a, BandedHermitian x) { return x *= a; }

 private:
  void enforce();

  BandSpec spec_;
  std::vector<CVec> diags_;
};

/// Orthogonal projection onto T_{delta,s}; input must be Hermitian to 1e-10.
BandedHermitian project_band(const CMat& M, const BandSpec& spec);

/// Concatenation of diag(X, m), m = 1-delta, ..., delta-1.
CVec diag_vectorize(const BandedHermitian& X);
/// Inverse of diag_vectorize on Hermitian inputs (reads offsets m >= 0).
BandedHermitian diag_devectorize(const CVec& v, const BandSpec& spec);

/// Frobenius distance over the band, both halves counted.
double band_frobenius_distance(const BandedHermitian& X, const BandedHermitian& Y);

///@brief Validated collection of index sets whose indicator outer products lie in the band.
class Covering {
 public:
  Covering(const BandSpec& spec, std::vector<std::vector<Index>> sets);

  const BandSpec& spec() const { return spec_; }
  const std::vector<std::vector<Index>>& sets() const { return sets_; }
  const std::vector<Index>& multiplicity() const { return mu_; }
  Index max_mu() const;
  Index min_mu() const;

 private:
  BandSpec spec_;
  std::vector<std::vector<Index>> sets_;
  std::vector<Index> mu_;
};

/// Sets {s l, ..., s l + m - 1} mod d for l in [d/s).
Covering make_interval_covering(const BandSpec& spec, Index m);
/// Consecutive disjoint blocks of the longest length that divides d and fits the band.
Covering make_partition_covering(const BandSpec& spec);

}  // namespace ptycho
