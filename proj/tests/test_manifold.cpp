#include "liftcalc/manifold.hpp"

#include <doctest.h>

#include <cmath>

using namespace lifts;

TEST_CASE("sphere tangent basis is orthonormal and orthogonal to y") {
  Manifold S = Manifold::sphere(3);
  CHECK(S.dim() == 3);
  Vec y = random_point(S, 2);
  CHECK(manifold_residual(S, y) < 1e-12);
  Mat T = tangent_basis(S, y);
  CHECK(T.cols() == 3);
  CHECK((T.transpose() * y).norm() < 1e-12);
  CHECK((T.transpose() * T - Mat::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("the corrected curve stays on M to third order") {
  for (Manifold M : {Manifold::sphere(2), Manifold::stiefel(4, 2)}) {
    Vec y = random_point(M, 9);
    Vec v = random_tangent(M, y, 10);
    Vec u = second_order_correction(M, y, v);
    std::vector<double> t{1e-1, 1e-2, 1e-3}, r;
    for (double s : t) r.push_back(M.h(y + s * v + 0.5 * s * s * u).norm());
    CHECK(loglog_slope(t, r) > 2.9);
  }
}

TEST_CASE("projection lands on the manifold") {
  Manifold St = Manifold::stiefel(4, 2);
  CHECK(St.dim() == 4 * 2 - 3);
  Rng rng(1);
  Vec z = gaussian_vec(8, rng);
  Vec y = project_to_manifold(St, z);
  CHECK(manifold_residual(St, y) < 1e-10);
  Mat Y = unvec(y, 4, 2);
  CHECK((Y.transpose() * Y - Mat::Identity(2, 2)).norm() < 1e-10);
}

TEST_CASE("product manifold offsets and dimension") {
  Manifold P = Manifold::product({Manifold::sphere(2), Manifold::chart(2)});
  CHECK(P.ambient_dim() == 5);
  CHECK(P.dim() == 4);
  CHECK(P.offset(1) == 3);
  Vec y = random_point(P, 3);
  CHECK(manifold_residual(P, y) < 1e-10);
  CHECK(tangent_basis(P, y).cols() == 4);
}

TEST_CASE("rank drop of the defining function is reported") {
  // {y1^2 - y2^2 = 0} is singular at the origin
  SmoothMap h;
  h.in_dim = 2;
  h.out_dim = 1;
  h.value = [](const Vec& y) { return Vec::Constant(1, y(0) * y(0) - y(1) * y(1)).eval(); };
  h.jacobian = [](const Vec& y) {
    Mat J(1, 2);
    J << 2 * y(0), -2 * y(1);
    return J;
  };
  h.second = [](const Vec&, const Vec& v) { return Vec::Constant(1, 2 * v(0) * v(0) - 2 * v(1) * v(1)).eval(); };
  Manifold M = Manifold::embedded(h, "cross");
  Vec o = Vec::Zero(2);
  try {
    tangent_basis(M, o);
    FAIL("expected ConstantRankViolation");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConstantRankViolation);
  }
  Vec p(2);
  p << 1.0, 1.0;
  CHECK(tangent_basis(M, p).cols() == 1);
}

TEST_CASE("finite-difference maps are flagged and accurate") {
  SmoothMap f = SmoothMap::from_value(2, 1, [](const Vec& x) { return Vec::Constant(1, x(0) * x(0) * x(1)).eval(); });
  CHECK(f.finite_difference);
  Vec x(2);
  x << 1.0, 2.0;
  Mat J = f.jacobian(x);
  CHECK(J(0, 0) == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(J(0, 1) == doctest::Approx(1.0).epsilon(1e-6));
  Vec v(2);
  v << 1.0, 1.0;
  // D^2 f[v,v] = 2 x1 v0^2 + 4 x0 v0 v1 = 4 + 4
  CHECK(f.second(x, v)(0) == doctest::Approx(8.0).epsilon(1e-4));
}
