#include <doctest.h>

#include "oracles.hpp"

#include <cstdio>
#include <fstream>

using namespace ptycho;
using oracle::maxabs;

TEST_CASE("exponential mask") {
  Mask g = exponential_mask(8, 3, 2.0);
  CVec want = CVec::Zero(8);
  want.head(3) << 1, 2, 4;
  CHECK(maxabs(g.values - want) == 0.0);
  CHECK(default_exponential_a(3) == 4.0);
  CHECK(default_exponential_a(21) == 10.0);

  Mask g9 = exponential_mask(20, 9);
  for (Index i = 0; i < 9; ++i) CHECK(g9.values(i) == cplx(std::pow(4.0, double(i))));
  for (Index i = 9; i < 20; ++i) CHECK(g9.values(i) == cplx(0));

  CHECK_THROWS_AS(exponential_mask(8, 3, 1.0), ValidationError);
  CHECK_THROWS_AS(exponential_mask(8, 3, -2.0), ValidationError);
  CHECK_THROWS_AS(exponential_mask(8, 5, 2.0), ValidationError);
}

TEST_CASE("near-flat mask") {
  Mask g = near_flat_mask(16, 4);
  CVec want = CVec::Zero(16);
  want.head(4) << 8, 1, 1, 1;
  CHECK(maxabs(g.values - want) == 0.0);
  CHECK(g.values.squaredNorm() == doctest::Approx(67.0));
  for (double a : {3.5, 5.0, 11.0}) CHECK(near_flat_mask(16, 4, a).values.squaredNorm() == doctest::Approx(a * a + 2 * a + 4));
  CHECK_THROWS_AS(near_flat_mask(16, 4, 3.0), ValidationError);
  CHECK_THROWS_AS(near_flat_mask(16, 4, 1.0), ValidationError);
}

TEST_CASE("constant mask") {
  Mask g = constant_mask(5, 2);
  CVec want(5);
  want << 1, 1, 0, 0, 0;
  CHECK(maxabs(g.values - want) == 0.0);
  CHECK(constant_mask(5, 5).values.sum() == cplx(5));
}

TEST_CASE("mask invariants are enforced") {
  CVec v = CVec::Zero(6);
  v(1) = 1;
  CHECK_THROWS_AS(Mask(6, 3, v), ValidationError);  // index 0 not in support
  v(0) = 1;
  v(4) = 1;
  CHECK_THROWS_AS(Mask(6, 3, v), ValidationError);  // beyond delta
  CHECK_THROWS_AS(Mask(6, 3, CVec::Ones(5)), DimensionError);
}

TEST_CASE("local fourier family") {
  CVec e = CVec::Zero(4);
  e(0) = 1;
  MaskFamily f1 = local_fourier_family(Mask(4, 1, e));
  CHECK(f1.D() == 1);
  CHECK(maxabs(f1.masks[0] - e) == 0.0);

  MaskFamily f = local_fourier_family(constant_mask(4, 2));
  CHECK(f.D() == 3);
  CHECK(f.fourier->K == 3);
  cplx w3 = std::polar(1.0, 2.0 * std::numbers::pi / 3.0);
  CHECK(std::abs(f.masks[1](0) - 1.0) < 1e-15);
  CHECK(std::abs(f.masks[1](1) - w3) < 1e-15);
  CHECK(f.masks[1](2) == cplx(0));

  Mask gam = exponential_mask(20, 5);
  MaskFamily g = local_fourier_family(gam, 11, 9);
  CHECK(g.D() == 9);
  for (const auto& m : g.masks)
    for (Index n = 0; n < 20; ++n) CHECK(std::abs(std::abs(m(n)) - std::abs(gam.values(n))) < 1e-12);

  CVec hole = CVec::Zero(10);
  hole(0) = 1;
  hole(2) = 1;
  CHECK_THROWS_AS(local_fourier_family(Mask(10, 3, hole)), ValidationError);
  CHECK_THROWS_AS(local_fourier_family(gam, 4, 4), ValidationError);
  CHECK_THROWS_AS(local_fourier_family(gam, 8, 9), ValidationError);
}

TEST_CASE("modulation rows are orthogonal when K = D") {
  for (Index delta : {2, 3, 5}) {
    MaskFamily f = local_fourier_family(constant_mask(3 * delta, delta));
    CMat Mod(f.D(), delta);
    for (Index j = 0; j < f.D(); ++j) Mod.row(j) = f.masks[j].head(delta).transpose();
    // rows of the full K x K modulation are orthogonal; restricted to [delta] the columns are
    CMat G = Mod.adjoint() * Mod;
    CHECK(maxabs(G - double(f.D()) * CMat::Identity(delta, delta)) < 1e-12);
    CMat full(f.D(), f.D());
    for (Index j = 0; j < f.D(); ++j)
      for (Index n = 0; n < f.D(); ++n)
        full(j, n) = std::polar(1.0, 2.0 * std::numbers::pi * double(j * n) / double(f.D()));
    CHECK(maxabs(full * full.adjoint() - double(f.D()) * CMat::Identity(f.D(), f.D())) < 1e-12);
  }
}

TEST_CASE("random gaussian family") {
  MaskFamily a = random_gaussian_family(12, 4, 12, 5), b = random_gaussian_family(12, 4, 12, 5);
  MaskFamily c = random_gaussian_family(12, 4, 12, 6);
  CHECK(a.D() == 12);
  for (Index j = 0; j < 12; ++j) {
    CHECK(maxabs(a.masks[j] - b.masks[j]) == 0.0);
    CHECK(a.masks[j].tail(8).isZero(0.0));
  }
  CHECK(maxabs(a.masks[0] - c.masks[0]) > 0.0);
  CHECK(default_mask_count(4, 2) == 12);
  CHECK(default_mask_count(6, 3) == 27);
  CHECK(default_mask_count(5, 1) == 9);
  CHECK_NOTHROW(a.validate());
}

TEST_CASE("constructor outputs satisfy mask invariants across parameters") {
  CounterRng rng(42);
  for (int t = 0; t < 200; ++t) {
    Index delta = 1 + Index(rng.uniform() * 10);
    Index d = 2 * delta - 1 + Index(rng.uniform() * 10);
    double a = 0.1 + rng.uniform() * 20;
    if (a != 1.0) CHECK_NOTHROW(local_fourier_family(exponential_mask(d, delta, a)).validate());
    CHECK_NOTHROW(local_fourier_family(near_flat_mask(d, delta, double(delta) + a)).validate());
    CHECK_NOTHROW(local_fourier_family(constant_mask(d, delta)).validate());
    CHECK_NOTHROW(random_gaussian_family(d, delta, 3, std::uint64_t(t)).validate());
  }
}

TEST_CASE("family descriptors") {
  MaskFamily e = family_from_descriptor("exp:a=2", 12, 3, 1);
  CHECK(e.kind == "exp");
  CHECK(e.params.at("a") == 2.0);
  CHECK(e.D() == 5);
  CHECK(e.masks[0](2) == cplx(4));
  CHECK(family_from_descriptor("flat", 16, 4, 1).masks[0](0) == cplx(8));
  CHECK(family_from_descriptor("const", 7, 3, 1).D() == 5);
  MaskFamily r = family_from_descriptor("rand:seed=3", 12, 4, 2);
  CHECK(r.D() == 12);
  CHECK(family_from_descriptor("rand:seed=3,D=7", 12, 4, 2).D() == 7);
  CHECK_THROWS_AS(family_from_descriptor("bogus", 12, 3, 1), ValidationError);
  CHECK_THROWS_AS(family_from_descriptor("exp:b=2", 12, 3, 1), ValidationError);
  CHECK_THROWS_AS(family_from_descriptor("exp:a=x", 12, 3, 1), ValidationError);
  CHECK_THROWS_AS(family_from_descriptor("file:/nonexistent/m.json", 12, 3, 1), ValidationError);

  std::string path = "ptycho_test_family.json";
  {
    std::ofstream os(path);
    os << family_to_json(r);
  }
  MaskFamily back = family_from_descriptor("file:" + path, 12, 4, 2);
  CHECK(back.D() == r.D());
  CHECK(maxabs(back.masks[5] - r.masks[5]) == 0.0);
  CHECK_THROWS_AS(family_from_descriptor("file:" + path, 12, 3, 1), ValidationError);
  std::remove(path.c_str());
}

TEST_CASE("decaying exponential descriptor") {
  auto f = family_from_descriptor("expdecay:a=2", 16, 4, 1);
  REQUIRE(f.fourier);
  for (Index n = 0; n < 4; ++n) CHECK(std::abs(f.fourier->window.values(n) - std::exp(-double(n) / 2.0)) < 1e-15);
  CHECK(f.params.at("a") == 2.0);
  auto g = family_from_descriptor("expdecay", 64, 16, 1);
  CHECK(std::abs(g.fourier->window.values(1) - std::exp(-1.0 / 7.5)) < 1e-15);
  CHECK_THROWS_AS(family_from_descriptor("expdecay:a=0", 16, 4, 1), ValidationError);
}
