#include "ptycho/banded.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <sstream>

namespace ptycho {

void BandSpec::validate() const {
  std::ostringstream os;
  if (d < 1 || delta < 1 || s < 1) {
    os << "band spec needs positive d, delta, s (got d=" << d << ", delta=" << delta << ", s=" << s << ")";
    throw ValidationError(os.str());
  }
  if (d % s != 0) {
    os << "stride s=" << s << " must divide d=" << d;
    throw ValidationError(os.str());
  }
  if (s > delta) {
    os << "stride s=" << s << " exceeds band width delta=" << delta;
    throw ValidationError(os.str());
  }
  if (2 * delta - 1 > d) {
    os << "band too wide: 2*delta-1=" << 2 * delta - 1 << " > d=" << d;
    throw ValidationError(os.str());
  }
}

bool BandSpec::in_band(Index i, Index m) const {
  if (m <= -delta || m >= delta) return false;
  Index row = m >= 0 ? i : i + m;
  return wrap(row, d) % s < delta - std::abs(m);
}

bool BandSpec::contains(Index i, Index j) const {
  Index off = wrap(j - i, d);
  if (off < delta) return in_band(i, off);
  if (off > d - delta) return in_band(i, off - d);
  return false;
}

Index BandSpec::count_on(Index m) const {
  if (m <= -delta || m >= delta) return 0;
  return dbar() * std::min(s, delta - std::abs(m));
}

std::vector<Index> BandSpec::residues(Index m) const {
  std::vector<Index> out;
  for (Index r = 0; r < s; ++r)
    if (in_band(r, m)) out.push_back(r);
  return out;
}

RMat band_pattern(const BandSpec& spec) {
  RMat P = RMat::Zero(spec.d, spec.d);
  for (Index i = 0; i < spec.d; ++i)
    for (Index j = 0; j < spec.d; ++j)
      if (spec.contains(i, j)) P(i, j) = 1.0;
  return P;
}

BandedHermitian::BandedHermitian(const BandSpec& spec) : spec_(spec) {
  spec_.validate();
  diags_.assign(spec.delta, CVec::Zero(spec.d));
}

BandedHermitian::BandedHermitian(const BandSpec& spec, std::vector<CVec> diags)
    : spec_(spec), diags_(std::move(diags)) {
  spec_.validate();
  require_dims(Index(diags_.size()) == spec.delta, "one stored diagonal per offset 0..delta-1");
  for (const auto& v : diags_) require_dims(v.size() == spec.d, "stored diagonal length must be d");
  enforce();
}

void BandedHermitian::enforce() {
  for (Index m = 0; m < spec_.delta; ++m)
    for (Index i = 0; i < spec_.d; ++i)
      if (!spec_.in_band(i, m)) diags_[m](i) = 0.0;
  diags_[0] = diags_[0].real().cast<cplx>();
}

BandedHermitian BandedHermitian::rank_one(const BandSpec& spec, const CVec& x) {
  require_dims(x.size() == spec.d, "rank_one: vector length must be d");
  std::vector<CVec> dg(spec.delta, CVec(spec.d));
  for (Index m = 0; m < spec.delta; ++m)
    for (Index i = 0; i < spec.d; ++i) dg[m](i) = x(i) * std::conj(x(wrap(i + m, spec.d)));
  return BandedHermitian(spec, std::move(dg));
}

CVec BandedHermitian::diagonal(Index m) const {
  require(m > -spec_.delta && m < spec_.delta, "diagonal offset outside band");
  if (m >= 0) return diags_[m];
  // X_{i, i+m} = conj(X_{i+m, i})
  CVec out(spec_.d);
  for (Index i = 0; i < spec_.d; ++i) out(i) = std::conj(diags_[-m](wrap(i + m, spec_.d)));
  return out;
}

cplx BandedHermitian::operator()(Index i, Index j) const {
  const Index d = spec_.d;
  Index off = wrap(j - i, d);
  if (off < spec_.delta) return diags_[off](wrap(i, d));
  if (off > d - spec_.delta) return std::conj(diags_[d - off](wrap(j, d)));
  return 0.0;
}

CMat BandedHermitian::to_dense() const {
  const Index d = spec_.d;
  require(d <= kDenseRowLimit, "to_dense: dense size guard exceeded");
  CMat M = CMat::Zero(d, d);
  for (Index m = 0; m < spec_.delta; ++m)
    for (Index i = 0; i < d; ++i) {
      Index j = wrap(i + m, d);
      M(i, j) = diags_[m](i);
      M(j, i) = std::conj(diags_[m](i));
    }
  return M;
}

double BandedHermitian::frobenius_norm() const {
  double acc = diags_[0].squaredNorm();
  for (Index m = 1; m < spec_.delta; ++m) acc += 2.0 * diags_[m].squaredNorm();
  return std::sqrt(acc);
}

BandedHermitian& BandedHermitian::operator+=(const BandedHermitian& o) {
  require(spec_ == o.spec_, "band spec mismatch");
  for (Index m = 0; m < spec_.delta; ++m) diags_[m] += o.diags_[m];
  return *this;
}

BandedHermitian& BandedHermitian::operator*=(double a) {
  for (auto& v : diags_) v *= a;
  return *this;
}

BandedHermitian project_band(const CMat& M, const BandSpec& spec) {
  spec.validate();
  require_dims(M.rows() == spec.d && M.cols() == spec.d, "project_band: matrix must be d x d");
  double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  require((M - M.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
          "project_band: input is not Hermitian");
  std::vector<CVec> dg(spec.delta, CVec(spec.d));
  for (Index m = 0; m < spec.delta; ++m)
    for (Index i = 0; i < spec.d; ++i) dg[m](i) = M(i, wrap(i + m, spec.d));
  return BandedHermitian(spec, std::move(dg));
}

CVec diag_vectorize(const BandedHermitian& X) {
  const auto& sp = X.spec();
  CVec v(sp.offsets() * sp.d);
  for (Index m = 1 - sp.delta; m < sp.delta; ++m)
    v.segment((m + sp.delta - 1) * sp.d, sp.d) = X.diagonal(m);
  return v;
}

BandedHermitian diag_devectorize(const CVec& v, const BandSpec& spec) {
  spec.validate();
  require_dims(v.size() == spec.offsets() * spec.d, "diag_devectorize: length must be (2 delta - 1) d");
  std::vector<CVec> dg(spec.delta);
  for (Index m = 0; m < spec.delta; ++m) dg[m] = v.segment((m + spec.delta - 1) * spec.d, spec.d);
  return BandedHermitian(spec, std::move(dg));
}

double band_frobenius_distance(const BandedHermitian& X, const BandedHermitian& Y) {
  require(X.spec() == Y.spec(), "band_frobenius_distance: spec mismatch");
  return (X - Y).frobenius_norm();
}

Covering::Covering(const BandSpec& spec, std::vector<std::vector<Index>> sets)
    : spec_(spec), sets_(std::move(sets)), mu_(spec.d, 0) {
  spec_.validate();
  for (auto& J : sets_) {
    for (auto& j : J) {
      require(j >= 0 && j < spec.d, "covering: index out of range");
    }
    std::sort(J.begin(), J.end());
    require(std::adjacent_find(J.begin(), J.end()) == J.end(), "covering: repeated index in a set");
    for (Index a : J)
      for (Index b : J)
        if (!spec.contains(a, b)) {
          std::ostringstream os;
          os << "covering: set leaves the band at entry (" << a << "," << b << ")";
          throw ValidationError(os.str());
        }
    for (Index j : J) ++mu_[j];
  }
  for (Index j = 0; j < spec.d; ++j)
    if (mu_[j] == 0) {
      std::ostringstream os;
      os << "covering: index " << j << " is not covered";
      throw ValidationError(os.str());
    }
}

Index Covering::max_mu() const { return *std::max_element(mu_.begin(), mu_.end()); }
Index Covering::min_mu() const { return *std::min_element(mu_.begin(), mu_.end()); }

Covering make_interval_covering(const BandSpec& spec, Index m) {
  spec.validate();
  require(m >= 1, "interval covering: block length must be positive");
  if (m > spec.delta) {
    std::ostringstream os;
    os << "interval covering: block length m=" << m << " exceeds delta=" << spec.delta;
    throw ValidationError(os.str());
  }
  std::vector<std::vector<Index>> sets;
  for (Index l = 0; l < spec.dbar(); ++l) {
    std::vector<Index> J;
    for (Index t = 0; t < m; ++t) J.push_back(wrap(spec.s * l + t, spec.d));
    sets.push_back(std::move(J));
  }
  return Covering(spec, std::move(sets));
}

Covering make_partition_covering(const BandSpec& spec) {
  spec.validate();
  for (Index b = spec.delta; b >= 1; --b) {
    if (spec.d % b) continue;
    std::vector<std::vector<Index>> sets;
    bool ok = true;
    for (Index start = 0; start < spec.d && ok; start += b) {
      std::vector<Index> J;
      for (Index t = 0; t < b; ++t) J.push_back(start + t);
      for (Index a : J)
        for (Index c : J) ok = ok && spec.contains(a, c);
      sets.push_back(std::move(J));
    }
    if (ok) return Covering(spec, std::move(sets));
  }
  throw ValidationError("no partition covering fits the band");  // unreachable: b = 1 always fits
}

}  // namespace ptycho
