#include "ptycho/operator.hpp"

#include "ptycho/rng.hpp"

#include <cassert>
#include <cmath>
#include <sstream>

namespace ptycho {

MeasurementGrid MeasurementGrid::from_stacked(const RVec& v, Index dBar, Index D) {
  require_dims(v.size() == dBar * D, "measurement vector length must be dBar * D");
  return MeasurementGrid(RMat(Eigen::Map<const RMat>(v.data(), dBar, D)));
}

DiagonalCorrelations diagonal_correlations(const MaskFamily& family) {
  DiagonalCorrelations dc;
  dc.d = family.d;
  dc.delta = family.delta;
  const Index d = family.d;
  for (const auto& mk : family.masks) {
    std::vector<CVec> row;
    for (Index m = 1 - family.delta; m < family.delta; ++m) {
      CVec g(d);
      for (Index i = 0; i < d; ++i) g(i) = mk(i) * std::conj(mk(wrap(i + m, d)));
      row.push_back(std::move(g));
    }
    dc.g.push_back(std::move(row));
  }
  return dc;
}

namespace {

void check_stride(Index d, Index s) {
  if (s < 1 || d % s != 0) {
    std::ostringstream os;
    os << "stride s=" << s << " must divide d=" << d;
    throw ValidationError(os.str());
  }
}

}  // namespace

MeasurementGrid forward(const MaskFamily& family, const CVec& x0, Index s) {
  const Index d = family.d, delta = family.delta;
  check_stride(d, s);
  require_dims(x0.size() == d, "forward: signal length must equal d");
  MeasurementGrid y(d / s, family.D());
  for (Index j = 0; j < family.D(); ++j) {
    const CVec& mk = family.masks[j];
    for (Index l = 0; l < d / s; ++l) {
      cplx acc = 0.0;
      for (Index n = 0; n < delta; ++n) acc += x0(wrap(n + s * l, d)) * std::conj(mk(n));
      y.values(l, j) = std::norm(acc);
    }
  }
  return y;
}

MeasurementGrid forward(const MaskFamily& family, const BandedHermitian& X) {
  const auto& sp = X.spec();
  require(family.d == sp.d && family.delta == sp.delta, "forward: family and band disagree on (d, delta)");
  const Index d = sp.d, delta = sp.delta, s = sp.s;
  std::vector<CVec> chi;
  for (Index m = 1 - delta; m < delta; ++m) chi.push_back(X.diagonal(m));
  MeasurementGrid y(sp.dbar(), family.D());
  double scale = 0.0;
  for (Index j = 0; j < family.D(); ++j) {
    const CVec& mk = family.masks[j];
    for (Index l = 0; l < sp.dbar(); ++l) {
      cplx acc = 0.0;
      // support of g_m: n and n+m both in [0, delta)
      for (Index m = 1 - delta; m < delta; ++m) {
        const CVec& c = chi[m + delta - 1];
        for (Index n = std::max<Index>(0, -m); n < std::min(delta, delta - m); ++n) {
          cplx g = mk(n) * std::conj(mk(n + m));
          acc += std::conj(g) * c(wrap(n + s * l, d));
        }
      }
      assert(std::abs(acc.imag()) <= 1e-9 * std::max(1.0, std::abs(acc)) + 1e-9 * scale);
      scale = std::max(scale, std::abs(acc));
      y.values(l, j) = acc.real();
    }
  }
  return y;
}

CMat assemble_dense_A(const MaskFamily& family, Index s, Index max_rows) {
  const Index d = family.d, delta = family.delta;
  check_stride(d, s);
  const Index dbar = d / s, D = family.D();
  if (dbar * D > max_rows) {
    std::ostringstream os;
    os << "assemble_dense_A: " << dbar * D << " rows exceed the dense size guard (" << max_rows << ")";
    throw ValidationError(os.str());
  }
  auto dc = diagonal_correlations(family);
  CMat A = CMat::Zero(dbar * D, (2 * delta - 1) * d);
  for (Index j = 0; j < D; ++j)
    for (Index l = 0; l < dbar; ++l)
      for (Index m = 1 - delta; m < delta; ++m) {
        const CVec& g = dc.at(j, m);
        for (Index i = 0; i < d; ++i) A(j * dbar + l, (m + delta - 1) * d + i) = std::conj(g(wrap(i - s * l, d)));
      }
  return A;
}

MeasurementGrid gaussian_grid(Index dBar, Index D, std::uint64_t seed) {
  CounterRng rng(seed, 0x6e6f697365);
  MeasurementGrid n(dBar, D);
  for (Index j = 0; j < D; ++j)
    for (Index l = 0; l < dBar; ++l) n.values(l, j) = rng.normal();
  return n;
}

MeasurementGrid add_noise(const MeasurementGrid& y, const NoiseSpec& ns, const MeasurementGrid& reference,
                          const MeasurementGrid* direction) {
  require(ns.targetSnr > 0.0, "noise: target SNR must be positive");
  if (std::isinf(ns.targetSnr)) return y;
  double rn = reference.norm();
  require(rn > 0.0, "noise: reference measurements are all zero, SNR undefined");
  MeasurementGrid n;
  if (ns.model == NoiseModel::Adversarial) {
    require(direction != nullptr, "noise: adversarial model needs a direction");
    n = *direction;
  } else {
    n = gaussian_grid(y.dBar, y.D, ns.seed);
  }
  require_dims(n.dBar == y.dBar && n.D == y.D, "noise: grid shape mismatch");
  double nn = n.norm();
  require(nn > 0.0, "noise: zero noise direction");
  MeasurementGrid out = y;
  out.values += n.values * (rn / ns.targetSnr / nn);
  return out;
}

}  // namespace ptycho
