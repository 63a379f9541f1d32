#include "ptycho/selftest.hpp"

#include "ptycho/ptycho.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

namespace ptycho {

namespace {

CVec cnormal_vec(Index n, std::uint64_t seed) {
  CounterRng rng(seed, 0x5e1f);
  CVec v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.cnormal();
  return v;
}

double rel(double err, double scale) { return scale > 0.0 ? err / scale : err; }

SelfTestResult check(const std::string& module, const std::string& what, double tol,
                     const std::function<double()>& body) {
  SelfTestResult r{module, false, 0.0, tol, what};
  try {
    r.error = body();
    r.pass = std::isfinite(r.error) && r.error <= tol;
  } catch (const std::exception& e) {
    r.error = std::numeric_limits<double>::infinity();
    r.detail += std::string(" threw: ") + e.what();
  }
  return r;
}

}  // namespace

std::vector<SelfTestResult> run_selftest() {
  std::vector<SelfTestResult> out;

  out.push_back(check("structure", "circ diagonalized by DFT, d=12", 1e-10, [] {
    const Index d = 12;
    CVec v = cnormal_vec(d, 1);
    CMat F = dft_matrix(d);
    CVec lam = std::sqrt(double(d)) * F.adjoint() * v;
    CMat C = circ(v);
    return rel((C - F * lam.asDiagonal() * F.adjoint()).norm(), C.norm());
  }));
  out.push_back(check("structure", "interleave inverse, (6,4)", 0.0, [] {
    CMat P = interleave_matrix<cplx>(InterleavePerm{6, 4}), Q = interleave_matrix<cplx>(InterleavePerm{4, 6});
    return (P * Q - CMat::Identity(24, 24)).cwiseAbs().maxCoeff();
  }));

  out.push_back(check("banded", "vectorize round trip and projection, (12,4,2)", 1e-14, [] {
    BandSpec sp{12, 4, 2};
    BandedHermitian X = random_banded(sp, 3);
    double e = band_frobenius_distance(diag_devectorize(diag_vectorize(X), sp), X);
    e = std::max(e, band_frobenius_distance(project_band(X.to_dense(), sp), X));
    return rel(e, X.frobenius_norm());
  }));

  out.push_back(check("masks", "fourier family entries from the modulation law", 1e-14, [] {
    MaskFamily f = local_fourier_family(near_flat_mask(16, 4));
    const Index K = f.fourier->K;
    double e = 0.0;
    for (Index j = 0; j < f.D(); ++j)
      for (Index n = 0; n < f.d; ++n) {
        cplx w = n < f.delta ? f.fourier->window.values(n) *
                                   std::exp(cplx(0.0, 2.0 * std::numbers::pi * double(j * n) / double(K)))
                             : cplx(0.0);
        e = std::max(e, std::abs(f.masks[j](n) - w));
      }
    return e;
  }));

  out.push_back(check("operator", "forward equals dense A, (12,4,2) random", 1e-12, [] {
    MaskFamily f = random_gaussian_family(12, 4, default_mask_count(4, 2), 5);
    BandSpec sp{12, 4, 2};
    BandedHermitian X = random_banded(sp, 6);
    RVec y = forward(f, X).stacked();
    CVec Ax = assemble_dense_A(f, 2) * diag_vectorize(X);
    return rel((Ax - y.cast<cplx>()).norm(), y.norm());
  }));
  out.push_back(check("operator", "rank-one path equals banded path", 1e-12, [] {
    MaskFamily f = local_fourier_family(exponential_mask(24, 6));
    CVec x = cnormal_vec(24, 7);
    RVec a = forward(f, x, 3).stacked();
    RVec b = forward(f, BandedHermitian::rank_one(BandSpec{24, 6, 3}, x)).stacked();
    return rel((a - b).norm(), b.norm());
  }));

  out.push_back(check("conditioning", "block kappa equals dense SVD, (12,4,2) random", 1e-8, [] {
    MaskFamily f = random_gaussian_family(12, 4, default_mask_count(4, 2), 8);
    BlockSpectrum bs = block_spectrum(f, 2);
    CMat AN = assemble_dense_A(f, 2) * build_ptycho_basis(BandSpec{12, 4, 2}).matrix();
    RVec sv = Eigen::JacobiSVD<CMat>(AN).singularValues();
    double k = sv.maxCoeff() / sv.minCoeff();
    return rel(std::abs(bs.kappa - k), k);
  }));
  out.push_back(check("conditioning", "fourier closed form equals block spectrum, (16,3)", 1e-8, [] {
    Mask g = near_flat_mask(16, 3);
    double a = fourier_family_kappa(g).kappa, b = block_spectrum(local_fourier_family(g), 1).kappa;
    return rel(std::abs(a - b), b);
  }));

  out.push_back(check("inversion", "fast inverse round trip, (16,3)", 1e-10, [] {
    MaskFamily f = local_fourier_family(near_flat_mask(16, 3));
    InversePlan p = plan_inverse(f, 1);
    require(p.mode == InverseMode::FastFourier, "expected fast mode");
    BandedHermitian X = random_banded(BandSpec{16, 3, 1}, 9);
    return rel(band_frobenius_distance(invert(p, forward(f, X)), X), X.frobenius_norm());
  }));
  out.push_back(check("inversion", "block inverse round trip, (12,4,2)", 1e-10, [] {
    MaskFamily f = random_gaussian_family(12, 4, default_mask_count(4, 2), 10);
    InversePlan p = plan_inverse(f, 2);
    BandedHermitian X = random_banded(BandSpec{12, 4, 2}, 11);
    return rel(band_frobenius_distance(invert(p, forward(f, X)), X), X.frobenius_norm());
  }));

  out.push_back(check("recovery", "noiseless recovery, (24,6,3)", 1e-8, [] {
    MaskFamily f = random_gaussian_family(24, 6, default_mask_count(6, 3), 12);
    InversePlan p = plan_inverse(f, 3);
    CVec x0 = random_signal(24, 13);
    RecoveryReport r = recover(forward(f, x0, 3), p, {}, &x0);
    return *r.alignedRelError;
  }));

  out.push_back(check("io", "measurement CSV round trip", 0.0, [] {
    MeasurementGrid y = gaussian_grid(6, 5, 14);
    std::stringstream ss;
    write_grid_csv(ss, y, "selftest");
    MeasurementGrid z = read_grid_csv(ss);
    return (y.values - z.values).cwiseAbs().maxCoeff();
  }));

  return out;
}

}  // namespace ptycho
