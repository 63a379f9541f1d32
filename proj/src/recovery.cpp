#include "ptycho/recovery.hpp"

#include "ptycho/rng.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace ptycho {

RVec blk_mag(const BandedHermitian& X, const Covering& covering) {
  require(X.spec() == covering.spec(), "blk_mag: covering was built for a different band");
  const Index d = X.spec().d;
  RVec acc = RVec::Zero(d);
  for (const auto& J : covering.sets()) {
    const Index n = Index(J.size());
    CMat B(n, n);
    for (Index a = 0; a < n; ++a)
      for (Index b = 0; b < n; ++b) B(a, b) = X(J[a], J[b]);
    Eigen::SelfAdjointEigenSolver<CMat> hs(B, Eigen::EigenvaluesOnly);
    double spec_norm = hs.eigenvalues().cwiseAbs().maxCoeff();
    if (spec_norm == 0.0) continue;
    Eigen::SelfAdjointEigenSolver<RMat> es(B.cwiseAbs());
    RVec u = es.eigenvectors().col(n - 1);
    if (u.sum() < 0) u = -u;
    for (Index a = 0; a < n; ++a)
      if (u(a) < 0 && u(a) >= -1e-12) u(a) = 0.0;
    u *= std::sqrt(spec_norm) / u.norm();
    for (Index a = 0; a < n; ++a) acc(J[a]) += u(a);
  }
  const auto& mu = covering.multiplicity();
  for (Index j = 0; j < d; ++j) acc(j) /= double(mu[j]);
  return acc;
}

double blk_mag_error_bound(const CVec& x0, const Covering& covering, double frob_distance) {
  double lo = std::numeric_limits<double>::infinity();
  for (const auto& J : covering.sets()) {
    double n2 = 0.0;
    for (Index j : J) n2 += std::norm(x0(j));
    lo = std::min(lo, std::sqrt(n2));
  }
  double ratio = double(covering.max_mu()) / double(covering.min_mu());
  return ratio * (1.0 + 2.0 * std::numbers::sqrt2) / lo * frob_distance;
}

namespace {

CVec sgn_vec(const CVec& v) {
  CVec out(v.size());
  for (Index i = 0; i < v.size(); ++i) out(i) = sgn(v(i));
  return out;
}

/// y = Xt x for Xt = sgn(X) on the band.
void band_sign_matvec(const BandSpec& sp, const std::vector<CVec>& diag_sgn, const CVec& x, CVec& y) {
  const Index d = sp.d;
  y.setZero(d);
  for (Index m = 0; m < sp.delta; ++m) {
    const CVec& t = diag_sgn[m];
    for (Index i = 0; i < d; ++i) {
      if (!sp.in_band(i, m)) continue;
      Index j = wrap(i + m, d);
      y(i) += t(i) * x(j);
      if (m) y(j) += std::conj(t(i)) * x(i);
    }
  }
}

}  // namespace

PhaseResult phase_estimate(const BandedHermitian& X, const RecoveryConfig& cfg) {
  const auto& sp = X.spec();
  const Index d = sp.d;
  std::vector<CVec> ts(sp.delta, CVec::Zero(d));
  for (Index m = 0; m < sp.delta; ++m)
    for (Index i = 0; i < d; ++i)
      if (sp.in_band(i, m)) {
        cplx v = X.stored(m)(i);
        ts[m](i) = v == 0.0 ? cfg.zeroPhaseFill : v / std::abs(v);
      }

  PhaseResult out;
  bool dense = cfg.eig == EigSolver::Dense || (cfg.eig == EigSolver::Auto && d <= cfg.denseThreshold);
  if (dense) {
    CMat T = BandedHermitian(sp, ts).to_dense();
    Eigen::SelfAdjointEigenSolver<CMat> es(T);
    const auto& ev = es.eigenvalues();
    out.lambda1 = ev(d - 1);
    out.lambda2 = d > 1 ? ev(d - 2) : -std::numeric_limits<double>::infinity();
    out.degenerate = d > 1 && (out.lambda1 - out.lambda2) < 1e-10 * std::abs(out.lambda1);
    out.phase = sgn_vec(es.eigenvectors().col(d - 1));
    return out;
  }

  // shifted power iteration; Gershgorin bound keeps the spectrum positive
  const double shift = double(2 * sp.delta - 1);
  const Index cap = cfg.maxIterations > 0 ? cfg.maxIterations : 50 * d;
  CounterRng rng(0x7068617365);
  CVec v(d), w(d);
  for (Index i = 0; i < d; ++i) v(i) = 1.0 + 0.01 * rng.cnormal();
  v.normalize();
  double lam = 0.0;
  Index it = 0;
  for (; it < cap; ++it) {
    band_sign_matvec(sp, ts, v, w);
    w += shift * v;
    lam = v.dot(w).real();
    double res = (w - lam * v).norm();
    v = w.normalized();
    if (res <= cfg.tolerance * std::abs(lam)) break;
  }
  out.lambda1 = lam - shift;
  out.lambda2 = std::numeric_limits<double>::quiet_NaN();
  out.iterations = it;
  out.phase = sgn_vec(v);
  return out;
}

GapResult spectral_gap_tau(const BandSpec& spec) {
  spec.validate();
  const Index d = spec.d;
  GapResult g;
  g.in_regime = spec.delta % spec.s == 0 && spec.d % spec.delta == 0;
  RMat P = band_pattern(spec);
  g.degrees = P.rowwise().sum();
  RMat W = P;
  W.diagonal().setZero();
  RVec deg = W.rowwise().sum();
  RVec is = deg.cwiseSqrt().cwiseInverse();
  RMat L = RMat::Identity(d, d) - is.asDiagonal() * W * is.asDiagonal();
  Eigen::SelfAdjointEigenSolver<RMat> es(L, Eigen::EigenvaluesOnly);
  g.tau = d > 1 ? es.eigenvalues()(1) : 0.0;
  return g;
}

double aligned_error(const CVec& x, const CVec& x0) {
  require_dims(x.size() == x0.size(), "aligned_error: length mismatch");
  // rotate x0 onto x; avoids the cancellation in |x|^2 + |x0|^2 - 2|<x0, x>|
  cplx c = x0.dot(x);
  cplx u = c == 0.0 ? cplx(1.0) : c / std::abs(c);
  return (x - u * x0).norm();
}

RecoveryReport recover(const MeasurementGrid& y, const InversePlan& plan, const RecoveryConfig& config,
                       const CVec* truth) {
  RecoveryReport rep;
  rep.mode = plan.mode;
  InverseDiagnostics diag;
  BandedHermitian X = invert(plan, y, &diag);
  rep.asymmetry = diag.asymmetry;
  Covering cov = config.covering ? *config.covering : make_interval_covering(plan.spec, plan.spec.delta);
  require(cov.spec() == plan.spec, "recover: covering does not match the measurement band");
  rep.magnitude = blk_mag(X, cov);
  auto ph = phase_estimate(X, config);
  rep.phase = ph.phase;
  rep.degenerate = ph.degenerate;
  rep.x = rep.magnitude.cast<cplx>().cwiseProduct(rep.phase);
  if (truth) {
    rep.alignedError = aligned_error(rep.x, *truth);
    rep.alignedRelError = *rep.alignedError / truth->norm();
  }
  return rep;
}

CVec random_signal(Index d, std::uint64_t seed, double lo, double hi) {
  CounterRng rng(seed, 0x7369676e);
  CVec x(d);
  for (Index i = 0; i < d; ++i) {
    double r = lo + (hi - lo) * rng.uniform();
    x(i) = std::polar(r, 2.0 * std::numbers::pi * rng.uniform());
  }
  return x;
}

BandedHermitian random_banded(const BandSpec& spec, std::uint64_t seed) {
  CounterRng rng(seed, 0x62616e64);
  std::vector<CVec> dg(spec.delta, CVec(spec.d));
  for (auto& v : dg)
    for (Index i = 0; i < spec.d; ++i) v(i) = rng.cnormal();
  return BandedHermitian(spec, std::move(dg));
}

SweepRow score_recovery(const RecoveryReport& rep, const CVec& x0) {
  const Index d = x0.size();
  require_dims(rep.x.size() == d, "score_recovery: length mismatch");
  SweepRow r;
  r.snr = std::numeric_limits<double>::quiet_NaN();
  r.aligned_rel_error = aligned_error(rep.x, x0) / x0.norm();
  r.mag_error = (rep.magnitude - x0.cwiseAbs()).norm() / x0.norm();
  CVec s0(d);
  for (Index i = 0; i < d; ++i) s0(i) = sgn(x0(i));
  r.phase_error = aligned_error(rep.phase, s0) / std::sqrt(double(d));
  return r;
}

std::vector<SweepRow> snr_sweep(const InversePlan& plan, const std::vector<double>& snrs, int trials,
                                std::uint64_t seed, const RecoveryConfig& config) {
  const Index d = plan.spec.d;
  std::vector<SweepRow> rows;
  for (double snr : snrs) {
    SweepRow r;
    r.snr = snr;
    for (int t = 0; t < trials; ++t) {
      std::uint64_t ts = mix64(seed ^ mix64(std::uint64_t(t)));
      CVec x0 = random_signal(d, ts);
      auto y0 = forward(*plan.family, x0, plan.spec.s);
      NoiseSpec ns{NoiseModel::Gaussian, snr, ts + 1};
      auto y = add_noise(y0, ns, y0);
      SweepRow e = score_recovery(recover(y, plan, config, &x0), x0);
      r.aligned_rel_error += e.aligned_rel_error;
      r.mag_error += e.mag_error;
      r.phase_error += e.phase_error;
    }
    r.aligned_rel_error /= trials;
    r.mag_error /= trials;
    r.phase_error /= trials;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace ptycho
