#include "liftcalc/catalog.hpp"

#include <doctest.h>

using namespace lifts;

TEST_CASE("every regime samples points on the manifold") {
  for (const std::string& id : catalog_ids()) {
    CatalogEntry e = build(id);
    CHECK(!e.regimes.empty());
    Rng rng(1);
    for (const std::string& reg : e.regimes) {
      CAPTURE(id);
      CAPTURE(reg);
      Vec y = e.sample_point(reg, rng);
      CHECK(manifold_residual(e.lift.manifold, y) < 1e-8);
      CHECK(set_residual(e.set, value(e.lift, y)) < 1e-8);
    }
    CHECK_THROWS_AS(e.sample_point("no_such_regime", rng), Error);
  }
}

TEST_CASE("closed-form L and Q agree with the numerical ones") {
  for (const std::string& id : catalog_ids()) {
    CatalogEntry e = build(id);
    if (!e.closed_L) continue;
    Rng rng(2);
    for (const std::string& reg : e.regimes) {
      Vec y = e.sample_point(reg, rng);
      LQData d = lq(e.lift, y);
      Mat perp = Mat::Identity(d.x.size(), d.x.size()) - d.im_L * d.im_L.transpose();
      for (int k = 0; k < 3; ++k) {
        Vec v = d.T * gaussian_vec(d.T.cols(), rng);
        CAPTURE(id);
        CAPTURE(reg);
        CHECK((e.closed_L(y, v) - d.L * (d.T.transpose() * v)).norm() < 1e-9 * (1 + v.squaredNorm()));
        if (e.closed_Q) CHECK((perp * (e.closed_Q(y, v) - qmap(e.lift, y, v))).norm() < 1e-8 * (1 + v.squaredNorm()));
      }
    }
  }
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(build("no_such_entry"), Error);
  CHECK_THROWS_AS(build("svd", {.n = 3, .m = 3, .r = 3}), Error);
  CHECK_THROWS_AS(build("desing_chart", {.n = 4, .m = 3, .r = 2, .perm = {0, 0, 1, 2}}), Error);
}

TEST_CASE("degenerate families shrink L like 1/i with a constant Q") {
  for (auto [id, reg] : {std::pair{"lr", "balanced_deficient"}, std::pair{"desing_chart", "rank_deficient"}}) {
    CatalogEntry e = build(id);
    Rng rng(3);
    Vec y = e.sample_point(reg, rng);
    LQData d = lq(e.lift, y);
    Mat perp = Mat::Identity(d.x.size(), d.x.size()) - d.im_L * d.im_L.transpose();
    auto a = e.degenerate(y, 8.0), b = e.degenerate(y, 16.0);
    REQUIRE(!a.empty());
    REQUIRE(a.size() == b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      double la = (d.L * (d.T.transpose() * a[k].v)).norm(), lb = (d.L * (d.T.transpose() * b[k].v)).norm();
      CAPTURE(id);
      CHECK(la / lb == doctest::Approx(2.0).epsilon(0.1));
      CHECK((perp * (qmap(e.lift, y, a[k].v) - a[k].q_limit)).norm() < 1e-9);
    }
  }
}

TEST_CASE("points where every property holds have no pathological sequence") {
  CatalogEntry e = build("lr");
  Rng rng(4);
  Vec y = e.sample_point("full_rank", rng);
  CHECK(e.expect(Property::LocalToLocal, y) == Expectation::Holds);
  try {
    e.pathological(y, 4);
    FAIL("expected NoPathology");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::NoPathology);
  }
}
