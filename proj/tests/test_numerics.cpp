#include "liftcalc/numerics.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace lifts;

TEST_CASE("rank, range and kernel of a known rank-2 matrix") {
  Rng rng(3);
  Mat A = gaussian(6, 2, rng) * gaussian(2, 5, rng);
  CHECK(numerical_rank(A) == 2);
  Mat R = range_basis(A), K = kernel_basis(A);
  CHECK(R.cols() == 2);
  CHECK(K.cols() == 3);
  CHECK((A * K).norm() < 1e-10);
  CHECK((R.transpose() * R - Mat::Identity(2, 2)).norm() < 1e-12);
  CHECK(((Mat::Identity(6, 6) - projector(R, 6)) * A).norm() < 1e-10);
}

TEST_CASE("rounding-level matrices have rank zero") {
  Mat A = Mat::Constant(3, 2, 1e-16);
  CHECK(numerical_rank(A) == 0);
  TolerancePolicy tol;
  CHECK(tol.rank_threshold(1e-16, 3, 2) == doctest::Approx(tol.zero_tol));
}

TEST_CASE("pinv satisfies the Moore-Penrose identities") {
  Rng rng(4);
  Mat A = gaussian(5, 2, rng) * gaussian(2, 4, rng);
  Mat P = pinv(A);
  CHECK((A * P * A - A).norm() < 1e-10);
  CHECK((P * A * P - P).norm() < 1e-10);
  CHECK((A * P - (A * P).transpose()).norm() < 1e-10);
  CHECK((P * A - (P * A).transpose()).norm() < 1e-10);
}

TEST_CASE("min_norm_solve returns the solution orthogonal to the kernel") {
  Mat A(1, 2);
  A << 1.0, 1.0;
  Vec b = Vec::Constant(1, 2.0);
  Vec x = min_norm_solve(A, b);
  CHECK(x(0) == doctest::Approx(1.0));
  CHECK(x(1) == doctest::Approx(1.0));
}

TEST_CASE("nnls matches the active-set solution of a small problem") {
  // b lies outside the cone of the columns; the optimum uses the first column only
  Mat A(2, 2);
  A << 1.0, 0.0, 0.0, 1.0;
  Vec b(2);
  b << 2.0, -1.0;
  Vec x = nnls(A, b);
  CHECK(x(0) == doctest::Approx(2.0));
  CHECK(x(1) == doctest::Approx(0.0));
  Rng rng(5);
  Mat G = gaussian(4, 6, rng).cwiseAbs();
  Vec w = Vec::LinSpaced(6, 0.0, 1.0);
  Vec y = nnls(G, G * w);
  CHECK((G * y - G * w).norm() < 1e-8);
  CHECK(y.minCoeff() >= 0.0);
}

TEST_CASE("intersection and distance of subspaces") {
  Mat B1 = Mat::Identity(3, 3).leftCols(2);
  Mat B2(3, 2);
  B2 << 1, 0, 0, 0, 0, 1;
  Mat I = intersect_basis(B1, B2, 3);
  REQUIRE(I.cols() == 1);
  CHECK(std::abs(I(0, 0)) == doctest::Approx(1.0));
  CHECK(subspace_distance(B1, B1, 3) < 1e-12);
  CHECK(subspace_distance(B1, B2, 3) == doctest::Approx(1.0));
  Mat C = complement_basis(B1, 3);
  REQUIRE(C.cols() == 1);
  CHECK(std::abs(C(2, 0)) == doctest::Approx(1.0));
}

TEST_CASE("sym_eig is ascending and reconstructs the matrix") {
  Rng rng(6);
  Mat S = sym(gaussian(5, 5, rng));
  SymEig e = sym_eig(S);
  for (Index i = 1; i < 5; ++i) CHECK(e.values(i) >= e.values(i - 1));
  CHECK((e.vectors * e.values.asDiagonal() * e.vectors.transpose() - S).norm() < 1e-10);
  CHECK(min_eig(S) == doctest::Approx(e.values(0)));
  CHECK(max_eig(S) == doctest::Approx(e.values(4)));
}

TEST_CASE("loglog_slope recovers power laws") {
  std::vector<double> t{1e-1, 1e-2, 1e-3}, r2, r3;
  for (double s : t) {
    r2.push_back(5.0 * s * s);
    r3.push_back(s * s * s);
  }
  CHECK(loglog_slope(t, r2) == doctest::Approx(2.0));
  CHECK(loglog_slope(t, r3) == doctest::Approx(3.0));
}

TEST_CASE("split_seed is deterministic and separates streams") {
  CHECK(split_seed(7, 1) == split_seed(7, 1));
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t k = 0; k < 64; ++k) seen.insert(split_seed(s, k));
  CHECK(seen.size() == 256);
}

TEST_CASE("vec and unvec are column-major inverses") {
  Mat A(2, 3);
  A << 1, 2, 3, 4, 5, 6;
  Vec v = vec(A);
  CHECK(v(1) == 4.0);
  CHECK(unvec(v, 2, 3) == A);
}

TEST_CASE("non-finite input is rejected") {
  Mat A = Mat::Identity(2, 2);
  A(0, 1) = std::nan("");
  CHECK_THROWS_AS(require_finite(A, "test"), Error);
}
