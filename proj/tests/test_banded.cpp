#include <doctest.h>

#include "oracles.hpp"

#include <set>

using namespace ptycho;
using oracle::maxabs;
using oracle::rand_cmat;

namespace {

CMat hermitian(Index d, std::uint64_t seed) {
  CMat M = rand_cmat(d, d, seed);
  return (M + M.adjoint()) / 2.0;
}

// union of supports of S^{s l} 1_[delta] 1_[delta]^* S^{-s l}
RMat pattern_by_union(Index d, Index delta, Index s) {
  RMat P = RMat::Zero(d, d);
  for (Index l = 0; l < d / s; ++l)
    for (Index a = 0; a < delta; ++a)
      for (Index b = 0; b < delta; ++b) P(wrap(s * l + a, d), wrap(s * l + b, d)) = 1.0;
  return P;
}

RMat circular_band(Index n, Index k) {
  RMat P = RMat::Zero(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      Index off = wrap(i - j, n);
      if (std::min(off, n - off) < k) P(i, j) = 1.0;
    }
  return P;
}

}  // namespace

TEST_CASE("band spec validation") {
  CHECK_NOTHROW((BandSpec{8, 3, 2}.validate()));
  CHECK_THROWS_AS((BandSpec{9, 3, 2}.validate()), ValidationError);
  CHECK_THROWS_AS((BandSpec{8, 2, 4}.validate()), ValidationError);
  CHECK_THROWS_AS((BandSpec{8, 5, 1}.validate()), ValidationError);
  CHECK_THROWS_AS((BandSpec{0, 1, 1}.validate()), ValidationError);
}

TEST_CASE("band index set equals union of shifted blocks") {
  for (Index d = 3; d <= 16; ++d)
    for (Index delta = 1; 2 * delta - 1 <= d; ++delta)
      for (Index s = 1; s <= delta; ++s) {
        if (d % s) continue;
        BandSpec sp{d, delta, s};
        RMat P = band_pattern(sp);
        CHECK(P == pattern_by_union(d, delta, s));
        if (s == 1) CHECK(P == circular_band(d, delta));
        RMat full = band_pattern(BandSpec{d, delta, 1});
        CHECK((P.array() <= full.array()).all());
        if (s > 1) CHECK(P.sum() < full.sum());
        for (Index m = 1 - delta; m < delta; ++m) {
          Index cnt = 0;
          for (Index i = 0; i < d; ++i) cnt += sp.in_band(i, m);
          CHECK(cnt == sp.count_on(m));
        }
      }
}

TEST_CASE("project_band on all-ones, d=8 delta=3 s=2") {
  BandSpec sp{8, 3, 2};
  BandedHermitian X = project_band(CMat::Ones(8, 8), sp);
  CMat D = X.to_dense();
  // starred pattern: blocks {1,2,3},{3,4,5},{5,6,7},{7,8,1}
  const char* rows[8] = {"11100011", "11100000", "11111000", "00111000",
                         "00111110", "00001110", "10001111", "10000011"};
  for (Index i = 0; i < 8; ++i)
    for (Index j = 0; j < 8; ++j) CHECK(D(i, j) == cplx(rows[i][j] == '1' ? 1.0 : 0.0));
}

TEST_CASE("project_band: preservation, idempotence, validation") {
  BandSpec full{9, 5, 1};
  CMat M = hermitian(9, 3);
  CHECK(maxabs(project_band(M, full).to_dense() - M) <= 1e-15);

  BandSpec sp{12, 4, 2};
  CMat H = hermitian(12, 4);
  BandedHermitian X = project_band(H, sp);
  CHECK(maxabs(project_band(X.to_dense(), sp).to_dense() - X.to_dense()) == 0.0);
  RMat P = band_pattern(sp);
  CMat D = X.to_dense();
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 12; ++j) CHECK(std::abs(D(i, j) - P(i, j) * H(i, j)) <= 1e-15);

  CMat bad = rand_cmat(12, 12, 5);
  CHECK_THROWS_AS(project_band(bad, sp), ValidationError);
  CHECK_THROWS_AS(project_band(CMat::Zero(5, 5), sp), DimensionError);
}

TEST_CASE("banded storage is Hermitian and confined to the band") {
  BandSpec sp{12, 4, 3};
  BandedHermitian X = random_banded(sp, 9);
  CMat D = X.to_dense();
  CHECK(maxabs(D - D.adjoint()) == 0.0);
  RMat P = band_pattern(sp);
  for (Index i = 0; i < 12; ++i)
    for (Index j = 0; j < 12; ++j) {
      if (P(i, j) == 0.0) CHECK(D(i, j) == cplx(0));
      CHECK(X(i, j) == D(i, j));
    }
  for (Index m = 1 - 4; m < 4; ++m)
    for (Index i = 0; i < 12; ++i) CHECK(X.diagonal(m)(i) == D(i, wrap(i + m, 12)));
}

TEST_CASE("diag_vectorize") {
  BandSpec s1{5, 1, 1};
  BandedHermitian X1 = project_band(hermitian(5, 1), s1);
  CVec v1 = diag_vectorize(X1);
  CHECK(v1.size() == 5);
  CHECK(maxabs(v1 - X1.to_dense().diagonal()) == 0.0);

  BandSpec sp{8, 3, 1};
  BandedHermitian X = random_banded(sp, 2);
  CHECK(maxabs(diag_devectorize(diag_vectorize(X), sp).to_dense() - X.to_dense()) == 0.0);

  CVec x(4);
  x << 1, cplx(0, 1), -1, cplx(0, -1);
  BandedHermitian R = BandedHermitian::rank_one(BandSpec{4, 2, 1}, x);
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(R.diagonal(1)(i) - cplx(0, -1)) <= 1e-15);
  CVec v = diag_vectorize(R);
  CHECK(v.size() == 12);
  // order: m = -1, 0, 1
  CHECK(maxabs(v.segment(8, 4) - R.diagonal(1)) == 0.0);
  CHECK(maxabs(v.segment(0, 4) - R.diagonal(-1)) == 0.0);
}

TEST_CASE("rank_one matches projected outer product") {
  BandSpec sp{24, 6, 3};
  CVec x = oracle::rand_cvec(24, 8);
  CMat xx = x * x.adjoint();
  CHECK(maxabs(BandedHermitian::rank_one(sp, x).to_dense() - project_band(xx, sp).to_dense()) <= 1e-14);
}

TEST_CASE("interval coverings") {
  Covering c1 = make_interval_covering(BandSpec{7, 3, 1}, 1);
  for (Index m : c1.multiplicity()) CHECK(m == 1);

  Covering c2 = make_interval_covering(BandSpec{9, 4, 1}, 4);
  for (Index m : c2.multiplicity()) CHECK(m == 4);

  Covering c3 = make_interval_covering(BandSpec{8, 3, 2}, 3);
  std::vector<std::vector<Index>> want{{0, 1, 2}, {2, 3, 4}, {4, 5, 6}, {0, 6, 7}};  // sets are stored sorted
  CHECK(c3.sets() == want);
  std::vector<Index> mu{2, 1, 2, 1, 2, 1, 2, 1};
  CHECK(c3.multiplicity() == mu);
  CHECK(c3.max_mu() == 2);
  CHECK(c3.min_mu() == 1);

  CHECK_THROWS_AS(make_interval_covering(BandSpec{8, 3, 2}, 4), ValidationError);
  // m < s leaves gaps
  CHECK_THROWS_AS(make_interval_covering(BandSpec{8, 3, 2}, 1), ValidationError);
}

TEST_CASE("covering validation is eager") {
  BandSpec sp{8, 3, 2};
  CHECK_THROWS_AS(Covering(sp, {{0, 1, 2}, {2, 3, 4}, {4, 5, 6}}), ValidationError);  // 7 uncovered
  CHECK_THROWS_AS(Covering(sp, {{0, 1, 2, 3}, {4, 5, 6, 7}}), ValidationError);       // leaves band
  CHECK_THROWS_AS(Covering(sp, {{0, 9}}), ValidationError);
  CHECK_NOTHROW(Covering(sp, {{0, 1}, {2, 3}, {4, 5}, {6, 7}}));

  Covering p = make_partition_covering(BandSpec{24, 6, 3});
  CHECK(p.sets().size() == 4);
  for (Index m : p.multiplicity()) CHECK(m == 1);
  Covering p2 = make_partition_covering(BandSpec{12, 4, 2});
  CHECK(p2.sets().front().size() == 4);
  Covering p3 = make_partition_covering(BandSpec{10, 3, 1});
  CHECK(p3.sets().front().size() == 2);
}

TEST_CASE("band_frobenius_distance") {
  BandSpec sp{10, 3, 1};
  BandedHermitian X = random_banded(sp, 1), Y = random_banded(sp, 2);
  CHECK(band_frobenius_distance(X, X) == 0.0);
  std::vector<CVec> dg(3, CVec::Zero(10));
  dg[0](0) = 3.0;
  CHECK(band_frobenius_distance(X + BandedHermitian(sp, dg), X) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(band_frobenius_distance(X, Y) == doctest::Approx((X.to_dense() - Y.to_dense()).norm()).epsilon(1e-13));
  CHECK(X.frobenius_norm() == doctest::Approx(X.to_dense().norm()).epsilon(1e-13));
  CHECK_THROWS(band_frobenius_distance(X, random_banded(BandSpec{10, 4, 1}, 3)));
}

TEST_CASE("kronecker structure of the strided band") {
  for (auto [d, delta, s] : {std::tuple<Index, Index, Index>{12, 4, 2}, {24, 6, 3}, {8, 4, 2}}) {
    RMat P = project_band(CMat::Ones(d, d), BandSpec{d, delta, s}).to_dense().real();
    RMat K = kron(circular_band(d / s, delta / s), RMat::Ones(s, s));
    CHECK(P == K);

    Eigen::SelfAdjointEigenSolver<RMat> big(P), small(circular_band(d / s, delta / s));
    std::vector<double> prod;
    for (Index i = 0; i < d / s; ++i) {
      prod.push_back(small.eigenvalues()(i) * double(s));
      for (Index k = 1; k < s; ++k) prod.push_back(0.0);
    }
    std::sort(prod.begin(), prod.end());
    for (Index i = 0; i < d; ++i) CHECK(std::abs(big.eigenvalues()(i) - prod[i]) <= 1e-8);
  }
}
