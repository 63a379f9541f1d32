#include "ptycho/conditioning.hpp"

#include "ptycho/structure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ptycho {

CMat PtychoBasis::matrix() const {
  const Index rows = spec.offsets() * spec.d;
  require(rows <= 8 * kDenseRowLimit, "ptycho basis: dense size guard exceeded");
  CMat N = CMat::Zero(rows, size());
  for (Index c = 0; c < size(); ++c) N(columns[c], c) = 1.0;
  return N;
}

PtychoBasis build_ptycho_basis(const BandSpec& spec) {
  spec.validate();
  PtychoBasis b;
  b.spec = spec;
  for (Index m = 1 - spec.delta; m < spec.delta; ++m) {
    b.residues.push_back(spec.residues(m));
    for (Index i = 0; i < spec.d; ++i)
      if (spec.in_band(i, m)) b.columns.push_back((m + spec.delta - 1) * spec.d + i);
  }
  return b;
}

RVec BlockSpectrum::all_singular_values() const {
  Index n = 0;
  for (const auto& s : singularValues) n += s.size();
  RVec all(n);
  n = 0;
  for (const auto& s : singularValues) {
    all.segment(n, s.size()) = s;
    n += s.size();
  }
  std::sort(all.data(), all.data() + all.size());
  return all;
}

BlockSpectrum block_matrices(const MaskFamily& family, Index s) {
  BandSpec spec{family.d, family.delta, s};
  spec.validate();
  const Index dbar = spec.dbar(), D = family.D();
  BlockSpectrum bs;
  bs.spec = spec;
  for (Index m = 1 - spec.delta; m < spec.delta; ++m)
    for (Index r : spec.residues(m)) bs.cols.emplace_back(m, r);
  const Index C = Index(bs.cols.size());
  bs.blocks.assign(dbar, CMat::Zero(D, C));

  auto dc = diagonal_correlations(family);
  auto plan = dft_plan(dbar);
  CVec G(dbar);
  for (Index j = 0; j < D; ++j)
    for (Index c = 0; c < C; ++c) {
      auto [m, r] = bs.cols[c];
      const CVec& g = dc.at(j, m);
      for (Index q = 0; q < dbar; ++q) G(q) = g(s * q + r);
      plan->forward(G.data());
      for (Index k = 0; k < dbar; ++k) bs.blocks[k](j, c) = std::conj(G(k));
    }
  return bs;
}

namespace {

void finish(BlockSpectrum& bs) {
  const Index C = Index(bs.cols.size());
  bs.sigmaMax = 0.0;
  for (const auto& sv : bs.singularValues)
    if (sv.size()) bs.sigmaMax = std::max(bs.sigmaMax, sv.maxCoeff());
  bs.sigmaMin = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < Index(bs.singularValues.size()); ++k) {
    const RVec& sv = bs.singularValues[k];
    double lo = sv.size() < C ? 0.0 : sv.minCoeff();
    if (lo < bs.sigmaMin) {
      bs.sigmaMin = lo;
      bs.witness = k;
    }
  }
  bs.spanning = bs.sigmaMin > kRankTol * bs.sigmaMax;
  bs.kappa = bs.spanning ? bs.sigmaMax / bs.sigmaMin : std::numeric_limits<double>::infinity();
}

bool square_fourier(const MaskFamily& f) {
  return f.fourier && f.fourier->K == f.D() && f.D() >= 2 * f.delta - 1;
}

}  // namespace

BlockSpectrum block_spectrum(const MaskFamily& family, Index s) {
  BlockSpectrum bs = block_matrices(family, s);
  bs.singularValues.reserve(bs.blocks.size());
  for (const auto& M : bs.blocks) {
    if (s == 1 && square_fourier(family)) {
      // M = F diag(c) with F^*F = K I: singular values are sqrt(K)|c|
      RVec sv = M.colwise().norm().transpose();
      std::sort(sv.data(), sv.data() + sv.size(), std::greater<double>());
      bs.singularValues.push_back(sv.head(std::min(M.rows(), M.cols())));
    } else {
      Eigen::JacobiSVD<CMat> svd(M);
      bs.singularValues.push_back(svd.singularValues());
    }
  }
  finish(bs);
  return bs;
}

SpanResult spanning_check(const MaskFamily& family, Index s) {
  auto bs = block_spectrum(family, s);
  SpanResult r;
  r.spanning = bs.spanning;
  if (!bs.spanning) r.witness = bs.witness;
  return r;
}

std::vector<CVec> window_correlations(const Mask& gamma) {
  const Index d = gamma.d, delta = gamma.delta;
  std::vector<CVec> g;
  for (Index m = 1 - delta; m < delta; ++m) {
    CVec v(d);
    for (Index i = 0; i < d; ++i) v(i) = gamma.values(i) * std::conj(gamma.values(wrap(i + m, d)));
    g.push_back(std::move(v));
  }
  return g;
}

CMat modulation_matrix(Index K, Index D, Index delta) {
  CMat F(D, 2 * delta - 1);
  for (Index j = 0; j < D; ++j)
    for (Index m = 1 - delta; m < delta; ++m)
      F(j, m + delta - 1) =
          std::polar(1.0 / std::sqrt(double(K)), 2.0 * std::numbers::pi * double(wrap(j * m, K)) / double(K));
  return F;
}

FourierKappa fourier_family_kappa(const Mask& gamma, Index K, Index D) {
  const Index d = gamma.d, delta = gamma.delta;
  if (D == 0) D = 2 * delta - 1;
  if (K == 0) K = D;
  require(D >= 2 * delta - 1, "fourier kappa: need D >= 2 delta - 1");
  require(K >= D, "fourier kappa: need K >= D");
  require(2 * delta - 1 <= d, "fourier kappa: need 2 delta - 1 <= d");
  for (Index n = 0; n < delta; ++n)
    require(gamma.values(n) != 0.0, "fourier kappa: window support must be all of [delta]");

  FourierKappa out;
  auto plan = dft_plan(d);
  auto g = window_correlations(gamma);
  RMat mag(2 * delta - 1, d);
  for (Index t = 0; t < 2 * delta - 1; ++t) mag.row(t) = plan->forward(g[t]).cwiseAbs().transpose();

  double sK = std::sqrt(double(K));
  out.perFrequencyMinima = (mag.colwise().minCoeff().transpose() * sK).eval();
  Index mi, ki;
  double lo = mag.minCoeff(&mi, &ki);
  double hi = mag.maxCoeff();
  out.witness = {mi - (delta - 1), ki};
  out.spanning = lo > kRankTol * hi;

  if (K == D) {
    out.sigmaMax = sK * hi;
    out.sigmaMin = sK * lo;
  } else {
    out.exact = false;
    Eigen::JacobiSVD<CMat> svd(modulation_matrix(K, D, delta) * sK);
    const auto& fs = svd.singularValues();
    out.modulationKappa = fs(0) / fs(fs.size() - 1);
    out.sigmaMax = hi * fs(0);
    out.sigmaMin = lo * fs(fs.size() - 1);
  }
  out.kappa = out.spanning ? (hi / lo) * out.modulationKappa : std::numeric_limits<double>::infinity();
  return out;
}

bool is_strictly_rough(Index d, Index delta) {
  require(d >= 1 && delta >= 1, "is_strictly_rough: need d, delta >= 1");
  for (Index k = 2; k <= std::min(d, delta); ++k)
    if (d % k == 0) return false;
  return true;
}

MeasurementGrid worst_noise_direction(const MaskFamily& family, Index s) {
  auto bs = block_matrices(family, s);
  const Index dbar = bs.spec.dbar(), D = family.D(), C = Index(bs.cols.size());
  Index kw = 0;
  double best = std::numeric_limits<double>::infinity();
  CVec u;
  for (Index k = 0; k < dbar; ++k) {
    Eigen::JacobiSVD<CMat> svd(bs.blocks[k], Eigen::ComputeFullU);
    Index idx = std::min(D, C) - 1;
    double sv = svd.singularValues()(idx);
    if (sv < best) {
      best = sv;
      kw = k;
      u = svd.matrixU().col(idx);
    }
  }
  MeasurementGrid n(dbar, D);
  CMat z(dbar, D);
  for (Index l = 0; l < dbar; ++l)
    for (Index j = 0; j < D; ++j)
      z(l, j) = std::polar(1.0, 2.0 * std::numbers::pi * double((kw * l) % dbar) / double(dbar)) * u(j);
  n.values = z.real();
  if (n.values.norm() < 1e-8 * z.norm()) n.values = z.imag();
  n.values /= n.values.norm();
  return n;
}

}  // namespace ptycho
