#include "liftcalc/catalog.hpp"
#include "liftcalc/lift.hpp"

#include <doctest.h>

#include <cmath>

using namespace lifts;

namespace {

/// L and Q of y -> y.^2 on the unit sphere, written out by hand.
Vec hadamard_L(const Vec& y, const Vec& v) { return 2.0 * y.cwiseProduct(v); }
Vec hadamard_Q(const Vec& y, const Vec& v) {
  return 2.0 * v.cwiseProduct(v) - 2.0 * v.squaredNorm() * y.cwiseProduct(y);
}

Vec second_difference(const std::function<Vec(const Vec&)>& f, const Vec& z, const Vec& v, double h) {
  return (f(z + h * v) - 2.0 * f(z) + f(z - h * v)) / (h * h);
}

}  // namespace

TEST_CASE("L and Q of the Hadamard lift agree with the hand-derived formulas") {
  CatalogEntry e = build("hadamard", {.n = 4});
  for (std::uint64_t s = 0; s < 5; ++s) {
    Vec y = random_point(e.lift.manifold, s);
    Vec v = random_tangent(e.lift.manifold, y, s + 100);
    LQData d = lq(e.lift, y);
    Vec a = d.T.transpose() * v;
    CHECK((d.L * a - hadamard_L(y, v)).norm() < 1e-10);
    CHECK((qmap(e.lift, y, v) - hadamard_Q(y, v)).norm() < 1e-10);
  }
}

TEST_CASE("qform_matrix is the quadratic form of <w, Q>") {
  CatalogEntry e = build("svd");
  Rng rng(2);
  Vec y = e.sample_point("repeated", rng);
  LQData d = lq(e.lift, y);
  Mat C = complement_basis(d.im_L, d.x.size());
  REQUIRE(C.cols() > 0);
  Vec w = C * gaussian_vec(C.cols(), rng);
  Mat S = qform_matrix(e.lift, d, w);
  for (int k = 0; k < 5; ++k) {
    Vec a = gaussian_vec(d.T.cols(), rng);
    CHECK(a.dot(S * a) == doctest::Approx(w.dot(qmap_coords(e.lift, d, a))).epsilon(1e-9));
  }
  Vec along = d.im_L.col(0);
  try {
    qform_matrix(e.lift, d, along);
    FAIL("expected NotCoexact");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::NotCoexact);
  }
  // the polarization needs no coexactness and agrees on the complement
  CHECK((second_form(e.lift, d, w) - S).norm() < 1e-9);
}

TEST_CASE("composition with a submersion follows the chain rule") {
  Lift had = build("hadamard", {.n = 2}).lift;
  Submersion psi;
  psi.domain = Manifold::chart(2);
  psi.map.in_dim = 2;
  psi.map.out_dim = 2;
  psi.map.value = [](const Vec& z) { return Vec(z / z.norm()); };
  psi.map.jacobian = [](const Vec& z) {
    double r = z.norm();
    return Mat((Mat::Identity(2, 2) - z * z.transpose() / (r * r)) / r);
  };
  psi.map.second = [](const Vec& z, const Vec& v) {
    double r = z.norm(), r2 = r * r;
    double zv = z.dot(v);
    return Vec((-2.0 * zv * v - v.squaredNorm() * z) / (r2 * r) + 3.0 * zv * zv * z / (r2 * r2 * r));
  };
  Lift c = compose_submersion(had, psi);
  Vec z(2);
  z << 0.8, -1.3;
  Vec v(2);
  v << 0.3, 0.7;
  LQData d = lq(c, z);
  CHECK(d.T.cols() == 2);
  auto f = [&](const Vec& q) { return value(had, psi.map.value(q)); };
  Vec Lv = d.L * (d.T.transpose() * v);
  CHECK((Lv - (f(z + 1e-6 * v) - f(z - 1e-6 * v)) / 2e-6).norm() < 1e-8);
  CHECK((qmap(c, z, v) - second_difference(f, z, v, 1e-4)).norm() < 1e-6);
  // the radial direction is in ker L
  CHECK(d.ker_L.cols() == 1);
}

TEST_CASE("composition rejects a map that is not a submersion") {
  Lift had = build("hadamard", {.n = 2}).lift;
  Submersion psi;
  psi.domain = Manifold::chart(1);
  psi.map.in_dim = 1;
  psi.map.out_dim = 2;
  psi.map.value = [](const Vec& t) { return Vec((Vec(2) << std::cos(t(0) * t(0)), std::sin(t(0) * t(0))).finished()); };
  psi.map.jacobian = [](const Vec& t) {
    double s = t(0) * t(0);
    return Mat((Mat(2, 1) << -2 * t(0) * std::sin(s), 2 * t(0) * std::cos(s)).finished());
  };
  psi.map.second = [](const Vec& t, const Vec& v) {
    double s = t(0) * t(0), a = v(0) * v(0);
    return Vec((Vec(2) << a * (-2 * std::sin(s) - 4 * s * std::cos(s)), a * (2 * std::cos(s) - 4 * s * std::sin(s)))
                   .finished());
  };
  Lift c = compose_submersion(had, psi);
  try {
    lq(c, Vec::Zero(1));
    FAIL("expected NotSubmersion");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NotSubmersion);
  }
  CHECK_NOTHROW(lq(c, Vec::Constant(1, 0.5)));
}

TEST_CASE("product lifts are block diagonal") {
  Lift a = sphere_inclusion(3), b = build("hadamard", {.n = 2}).lift;
  Lift p = product({a, b});
  Vec y(5);
  y << 0.0, 0.6, 0.8, std::sqrt(0.5), -std::sqrt(0.5);
  LQData d = lq(p, y);
  CHECK(d.T.cols() == 3);
  CHECK(d.x.size() == 5);
  LQData da = lq(a, y.head(3)), db = lq(b, y.tail(2));
  Svd s = svd(d.L), sa = svd(da.L), sb = svd(db.L);
  std::vector<double> want{sa.s(0), sa.s(1), sb.s(0)}, got{s.s(0), s.s(1), s.s(2)};
  std::sort(want.begin(), want.end());
  std::sort(got.begin(), got.end());
  for (int i = 0; i < 3; ++i) CHECK(got[i] == doctest::Approx(want[i]));
}

TEST_CASE("fiber product with the identity reproduces the factor lift") {
  Lift had = build("hadamard", {.n = 2}).lift;
  Lift fp = fiber_product(SmoothMap::identity(2), had);
  Vec yh(2);
  yh << 0.6, 0.8;
  Vec z(4);
  z << yh.cwiseProduct(yh), yh;
  CHECK(manifold_residual(fp.manifold, z) < 1e-12);
  LQData d = lq(fp, z);
  REQUIRE(d.T.cols() == 1);
  // the tangent (2 y.v, v) has norm sqrt(|2 y.v|^2 + 1) for unit v
  Vec v(2);
  v << -0.8, 0.6;
  double lv = hadamard_L(yh, v).norm();
  CHECK(d.L.norm() == doctest::Approx(lv / std::sqrt(lv * lv + 1.0)));
}

TEST_CASE("Taylor check passes on smooth lifts and flags exact expansions") {
  Lift s = sphere_inclusion(3);
  Vec y = random_point(s.manifold, 4);
  TaylorReport r = taylor_check(s, y, 1);
  CHECK(r.passed);
  CHECK(r.t.size() == 4);
  CHECK(r.first_slope >= 1.9);
  CatalogEntry lr = build("lr");
  TaylorReport q = taylor_check(lr.lift, random_point(lr.lift.manifold, 2), 3);
  CHECK(q.passed);
  CHECK(q.second_exact);  // phi is quadratic
}
