#include <doctest.h>

#include "oracles.hpp"

#include <sstream>

using namespace ptycho;
using oracle::maxabs;

TEST_CASE("real formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(std::stod(fmt_real(v)) == v);
}

TEST_CASE("grid csv round trip") {
  MeasurementGrid g = gaussian_grid(4, 3, 7);
  std::ostringstream os;
  write_grid_csv(os, g, "ptycho 0.3.1\nd=4 delta=2");
  std::string text = os.str();
  CHECK(text.rfind("# ptycho 0.3.1\n# d=4 delta=2\nell,j,value\n0,1,", 0) == 0);
  std::istringstream is(text);
  MeasurementGrid back = read_grid_csv(is);
  CHECK(back.values == g.values);

  std::istringstream bad1("ell,j,value\n0,1,1.0\n");
  CHECK_NOTHROW(read_grid_csv(bad1));
  std::istringstream bad2("x,y\n");
  CHECK_THROWS_AS(read_grid_csv(bad2), ValidationError);
  std::istringstream bad3("ell,j,value\n0,1,1.0\n1,2,3.0\n");
  CHECK_THROWS_AS(read_grid_csv(bad3), ValidationError);
  std::istringstream bad4("ell,j,value\n0,1,abc\n");
  CHECK_THROWS_AS(read_grid_csv(bad4), ValidationError);
}

TEST_CASE("grid json round trip") {
  MeasurementGrid g = gaussian_grid(5, 2, 3);
  CHECK(grid_from_json(grid_to_json(g)).values == g.values);
  CHECK_THROWS_AS(grid_from_json("{\"dBar\": 2}"), ValidationError);
  CHECK_THROWS_AS(grid_from_json("not json"), ValidationError);
}

TEST_CASE("banded json round trip") {
  BandedHermitian X = random_banded(BandSpec{12, 4, 2}, 3);
  BandedHermitian Y = banded_from_json(banded_to_json(X));
  CHECK(Y.spec() == X.spec());
  CHECK(maxabs(Y.to_dense() - X.to_dense()) == 0.0);
}

TEST_CASE("family json round trip") {
  MaskFamily f = family_from_descriptor("exp:a=3", 14, 4, 1);
  MaskFamily g = family_from_json(family_to_json(f));
  CHECK(g.D() == f.D());
  CHECK(g.kind == "exp");
  CHECK(g.params.at("a") == 3.0);
  REQUIRE(g.fourier.has_value());
  CHECK(g.fourier->K == 7);
  for (Index j = 0; j < f.D(); ++j) CHECK(maxabs(g.masks[j] - f.masks[j]) == 0.0);
  // Fourier structure survives, so the fast inverse stays available
  CHECK(plan_inverse(g, 1).mode == InverseMode::FastFourier);
  CHECK_THROWS_AS(family_from_json("{\"d\": 4, \"delta\": 2, \"masks\": [[[0,0],[1,0],[0,0],[0,0]]]}"), ValidationError);
}
