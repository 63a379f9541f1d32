#include "ptycho/inversion.hpp"

#include "ptycho/rng.hpp"
#include "ptycho/structure.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

namespace ptycho {

std::string to_string(InverseMode m) { return m == InverseMode::FastFourier ? "fast-fourier" : "block-pinv"; }

namespace {

bool fast_eligible(const MaskFamily& f, Index s) {
  return s == 1 && f.fourier && f.fourier->K == f.D() && f.D() >= 2 * f.delta - 1;
}

[[noreturn]] void refuse(Index k, const std::string& what) {
  std::ostringstream os;
  os << "mask family does not span the band: " << what << " is rank-deficient at frequency " << k;
  throw ValidationError(os.str());
}

}  // namespace

InversePlan plan_inverse(const MaskFamily& family, Index s, bool allow_fast) {
  InversePlan p;
  p.family = std::make_shared<const MaskFamily>(family);
  p.spec = BandSpec{family.d, family.delta, s};
  p.spec.validate();
  const Index d = family.d, delta = family.delta;

  if (allow_fast && fast_eligible(family, s)) {
    p.mode = InverseMode::FastFourier;
    p.K = family.fourier->K;
    auto g = window_correlations(family.fourier->window);
    auto plan = dft_plan(d);
    double hi = 0.0, lo = std::numeric_limits<double>::infinity();
    Index wk = 0;
    for (Index t = 0; t < 2 * delta - 1; ++t) {
      CVec z = plan->forward(g[t]).conjugate();
      for (Index k = 0; k < d; ++k) {
        double a = std::abs(z(k));
        hi = std::max(hi, a);
        if (a < lo) lo = a, wk = k;
      }
      p.zeta.push_back(std::move(z));
    }
    if (!(lo > kRankTol * hi)) refuse(wk, "window correlation spectrum");
    return p;
  }

  p.mode = InverseMode::BlockPinv;
  auto bs = block_matrices(family, s);
  p.cols = bs.cols;
  p.basis = build_ptycho_basis(p.spec);
  const Index C = Index(bs.cols.size());
  std::vector<Eigen::JacobiSVD<CMat>> svds;
  double hi = 0.0;
  for (const auto& M : bs.blocks) {
    svds.emplace_back(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    hi = std::max(hi, svds.back().singularValues()(0));
  }
  for (Index k = 0; k < Index(svds.size()); ++k) {
    const auto& svd = svds[k];
    const RVec& sv = svd.singularValues();
    if (sv.size() < C || !(sv(sv.size() - 1) > kRankTol * hi)) refuse(k, "block");
    RVec inv = sv.cwiseInverse();
    p.pinv.push_back(svd.matrixV() * inv.asDiagonal() * svd.matrixU().adjoint());
  }
  return p;
}

namespace {

/// Fast mode: all 2 delta - 1 diagonals, unsymmetrized.
std::vector<CVec> fast_diagonals(const InversePlan& p, const MeasurementGrid& y) {
  const Index d = p.spec.d, delta = p.spec.delta, K = p.K, D = p.family->D();
  auto pK = dft_plan(K);
  auto pd = dft_plan(d);
  // w_m(l) = (1/K) sum_j w_K^{-jm} y(l, j)
  std::vector<CVec> w(2 * delta - 1, CVec(d));
  CVec row(K);
  for (Index l = 0; l < d; ++l) {
    row.setZero();
    for (Index j = 0; j < D; ++j) row(j) = y.values(l, j);
    pK->forward(row.data());
    for (Index m = 1 - delta; m < delta; ++m) w[m + delta - 1](l) = row(wrap(m, K)) / double(K);
  }
  for (Index t = 0; t < 2 * delta - 1; ++t) {
    pd->forward(w[t].data());
    w[t].array() /= p.zeta[t].array();
    pd->backward(w[t].data());
    w[t] /= double(d);
  }
  return w;
}

std::vector<CVec> block_diagonals(const InversePlan& p, const MeasurementGrid& y) {
  const Index d = p.spec.d, s = p.spec.s, dbar = p.spec.dbar(), D = p.family->D(), delta = p.spec.delta;
  const Index C = Index(p.cols.size());
  auto pl = dft_plan(dbar);
  CMat yh(dbar, D);
  for (Index j = 0; j < D; ++j) {
    CVec c = y.values.col(j).cast<cplx>();
    pl->forward(c.data());
    yh.col(j) = c;
  }
  CMat xh(dbar, C);
  for (Index k = 0; k < dbar; ++k) xh.row(k) = (p.pinv[k] * yh.row(k).transpose()).transpose();
  std::vector<CVec> chi(2 * delta - 1, CVec::Zero(d));
  for (Index c = 0; c < C; ++c) {
    CVec v = xh.col(c);
    pl->backward(v.data());
    auto [m, r] = p.cols[c];
    for (Index q = 0; q < dbar; ++q) chi[m + delta - 1](s * q + r) = v(q) / double(dbar);
  }
  return chi;
}

BandedHermitian symmetrize(const BandSpec& spec, const std::vector<CVec>& chi, InverseDiagnostics* diag) {
  const Index d = spec.d, delta = spec.delta;
  std::vector<CVec> out(delta, CVec(d));
  double num = 0.0, den = 0.0;
  for (Index m = 0; m < delta; ++m) {
    const CVec& pos = chi[m + delta - 1];
    const CVec& neg = chi[-m + delta - 1];
    for (Index i = 0; i < d; ++i) {
      // X_{i,i+m} vs conj(X_{i+m,i})
      cplx mirror = std::conj(neg(wrap(i + m, d)));
      cplx diff = pos(i) - mirror;
      out[m](i) = 0.5 * (pos(i) + mirror);
      double w = m == 0 ? 1.0 : 2.0;
      num += w * std::norm(diff);
      den += w * std::norm(out[m](i));
    }
  }
  if (diag) diag->asymmetry = den > 0 ? std::sqrt(num / den) : std::sqrt(num);
  return BandedHermitian(spec, std::move(out));
}

void check_grid(const InversePlan& p, const MeasurementGrid& y) {
  if (y.dBar != p.spec.dbar() || y.D != p.family->D()) {
    std::ostringstream os;
    os << "measurement grid is " << y.dBar << " x " << y.D << ", plan expects " << p.spec.dbar() << " x "
       << p.family->D();
    throw DimensionError(os.str());
  }
}

}  // namespace

BandedHermitian invert(const InversePlan& plan, const MeasurementGrid& y, InverseDiagnostics* diag) {
  check_grid(plan, y);
  auto chi = plan.mode == InverseMode::FastFourier ? fast_diagonals(plan, y) : block_diagonals(plan, y);
  return symmetrize(plan.spec, chi, diag);
}

CVec recover_diagonal(const InversePlan& plan, const MeasurementGrid& y, Index m) {
  check_grid(plan, y);
  require(m > -plan.spec.delta && m < plan.spec.delta, "recover_diagonal: offset outside band");
  auto chi = plan.mode == InverseMode::FastFourier ? fast_diagonals(plan, y) : block_diagonals(plan, y);
  return chi[m + plan.spec.delta - 1];
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  require_dims(x.size() == y.size() && x.size() >= 2, "fit_slope: need two or more paired points");
  double n = double(x.size()), mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxy / sxx;
}

BenchResult invert_benchmark(const std::string& mask, Index delta, const std::vector<Index>& sizes, int reps) {
  BenchResult out;
  std::vector<double> lx, lxl, lt;
  for (Index d : sizes) {
    auto fam = family_from_descriptor(mask, d, delta, 1);
    auto plan = plan_inverse(fam, 1);
    CounterRng rng(std::uint64_t(d), 0x62656e6368);
    CVec x(d);
    for (Index i = 0; i < d; ++i) x(i) = rng.cnormal();
    auto y = forward(fam, x, 1);
    invert(plan, y);  // warm caches
    std::vector<double> ms;
    for (int r = 0; r < reps; ++r) {
      auto t0 = std::chrono::steady_clock::now();
      auto X = invert(plan, y);
      auto t1 = std::chrono::steady_clock::now();
      ms.push_back(std::chrono::duration<double, std::milli>(t1 - t0).count());
      (void)X;
    }
    std::sort(ms.begin(), ms.end());
    double med = ms[ms.size() / 2];
    out.rows.push_back({d, delta, plan.mode, med});
    lx.push_back(std::log(double(d)));
    lxl.push_back(std::log(double(d) * std::log(double(d))));
    lt.push_back(std::log(std::max(med, 1e-6)));
  }
  if (sizes.size() >= 2) {
    out.exponent = fit_slope(lx, lt);
    out.exponent_dlogd = fit_slope(lxl, lt);
  }
  return out;
}

}  // namespace ptycho
