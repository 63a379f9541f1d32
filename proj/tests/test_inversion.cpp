#include <doctest.h>

#include "oracles.hpp"

using namespace ptycho;
using oracle::maxabs;
using oracle::rand_cvec;

namespace {

double rel_band(const BandedHermitian& a, const BandedHermitian& b) {
  return band_frobenius_distance(a, b) / std::max(1e-300, b.frobenius_norm());
}

}  // namespace

TEST_CASE("plan modes") {
  CHECK(plan_inverse(local_fourier_family(near_flat_mask(16, 4)), 1).mode == InverseMode::FastFourier);
  CHECK(plan_inverse(local_fourier_family(near_flat_mask(16, 4)), 1, false).mode == InverseMode::BlockPinv);
  CHECK(plan_inverse(random_gaussian_family(12, 4, 12, 1), 2).mode == InverseMode::BlockPinv);
  // 7 masks cannot cover the 12 unknowns per frequency at s = 2
  CHECK_THROWS_AS(plan_inverse(local_fourier_family(near_flat_mask(16, 4)), 2), ValidationError);
  CHECK(to_string(InverseMode::FastFourier) == "fast-fourier");
  CHECK(to_string(InverseMode::BlockPinv) == "block-pinv");

  try {
    plan_inverse(local_fourier_family(constant_mask(6, 3)), 1);
    FAIL("expected refusal");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("frequency") != std::string::npos);
  }
  CHECK_THROWS_AS(plan_inverse(local_fourier_family(constant_mask(6, 3)), 1, false), ValidationError);
}

TEST_CASE("noiseless round trip") {
  const Index d = 24, delta = 4;
  for (Index s : {1, 2}) {
    BandSpec sp{d, delta, s};
    std::vector<MaskFamily> fams{random_gaussian_family(d, delta, default_mask_count(delta, s) + 2, 5)};
    if (s == 1) fams.push_back(local_fourier_family(near_flat_mask(d, delta)));
    for (const auto& f : fams) {
      auto plan = plan_inverse(f, s);
      for (std::uint64_t t = 0; t < 3; ++t) {
        CVec x = rand_cvec(d, 40 + t);
        InverseDiagnostics dg;
        auto X = invert(plan, forward(f, x, s), &dg);
        CHECK(rel_band(X, BandedHermitian::rank_one(sp, x)) <= 1e-9);
        CHECK(dg.asymmetry <= 1e-10);
      }
    }
  }
}

TEST_CASE("fast inverse equals dense solve") {
  MaskFamily f = local_fourier_family(exponential_mask(16, 3));
  auto plan = plan_inverse(f, 1);
  REQUIRE(plan.mode == InverseMode::FastFourier);
  CMat A = assemble_dense_A(f, 1);
  REQUIRE(A.rows() == A.cols());
  Eigen::PartialPivLU<CMat> lu(A);
  for (std::uint64_t t = 0; t < 20; ++t) {
    MeasurementGrid y = gaussian_grid(16, 5, t);
    CVec ref = lu.solve(CVec(y.stacked().cast<cplx>()));
    CVec got = diag_vectorize(invert(plan, y));
    CHECK((got - ref).norm() <= 1e-10 * ref.norm());
  }
}

TEST_CASE("block inverse equals dense restricted least squares") {
  for (Index D : {12, 16}) {
    MaskFamily f = random_gaussian_family(12, 4, D, 8);
    auto plan = plan_inverse(f, 2);
    CMat N = plan.basis.matrix();
    CMat AN = assemble_dense_A(f, 2) * N;
    Eigen::JacobiSVD<CMat> svd(AN, Eigen::ComputeThinU | Eigen::ComputeThinV);
    for (std::uint64_t t = 0; t < 5; ++t) {
      MeasurementGrid y = gaussian_grid(6, D, 100 + t);
      CVec ref = N * svd.solve(CVec(y.stacked().cast<cplx>()));
      InverseDiagnostics dg;
      CVec got = diag_vectorize(invert(plan, y, &dg));
      CHECK((got - ref).norm() <= 1e-10 * ref.norm());
      CHECK(dg.asymmetry <= 1e-10);
    }
  }
}

TEST_CASE("zero, linearity and range inverse") {
  for (auto [d, delta, s, fast] : {std::tuple<Index, Index, Index, bool>{16, 4, 1, true}, {12, 4, 2, false}, {24, 6, 3, false}}) {
    BandSpec sp{d, delta, s};
    MaskFamily f = fast ? local_fourier_family(near_flat_mask(d, delta))
                        : random_gaussian_family(d, delta, default_mask_count(delta, s), 13);
    auto plan = plan_inverse(f, s);
    const Index D = f.D();
    CHECK(invert(plan, MeasurementGrid(d / s, D)).frobenius_norm() == 0.0);

    MeasurementGrid y1 = gaussian_grid(d / s, D, 1), y2 = gaussian_grid(d / s, D, 2);
    MeasurementGrid comb(RMat(2.5 * y1.values - 0.75 * y2.values));
    auto lhs = invert(plan, comb);
    auto rhs = 2.5 * invert(plan, y1) - 0.75 * invert(plan, y2);
    CHECK(rel_band(lhs, rhs) <= 1e-10);

    for (std::uint64_t t = 0; t < 3; ++t) {
      auto y = forward(f, random_banded(sp, t));
      auto back = forward(f, invert(plan, y));
      CHECK((back.values - y.values).norm() <= 1e-9 * y.norm());
    }
    CHECK_THROWS_AS(invert(plan, MeasurementGrid(d / s + 1, D)), DimensionError);
  }
}

TEST_CASE("per-diagonal recovery matches the full inverse") {
  MaskFamily f = local_fourier_family(near_flat_mask(20, 5));
  auto plan = plan_inverse(f, 1);
  MeasurementGrid y = gaussian_grid(20, f.D(), 3);
  auto X = invert(plan, y);
  for (Index m = -4; m <= 4; ++m) {
    CVec chi = recover_diagonal(plan, y, m);
    CHECK((chi - X.diagonal(m)).norm() <= 1e-10 * X.frobenius_norm());
  }
  CHECK_THROWS_AS(recover_diagonal(plan, y, 5), ValidationError);
}

TEST_CASE("benchmark harness shape") {
  auto r = invert_benchmark("flat", 3, {64, 128}, 3);
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].mode == InverseMode::FastFourier);
  CHECK(r.rows[1].median_ms > 0.0);
  CHECK(std::isfinite(r.exponent));
  CHECK(fit_slope({0, 1, 2}, {1, 3, 5}) == doctest::Approx(2.0));
  CHECK_THROWS_AS(fit_slope({1}, {1}), DimensionError);
  // the dense oracle refuses these sizes
  CHECK_THROWS_AS(assemble_dense_A(family_from_descriptor("flat", 1 << 14, 8, 1), 1), ValidationError);
}
