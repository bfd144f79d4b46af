#include "liftcalc/checker.hpp"

#include <doctest.h>

#include <cmath>

using namespace lifts;

namespace {

Vec disk_point() { return Vec::Unit(3, 0); }

}  // namespace

TEST_CASE("disk-quartic lift at (1,0,0)") {
  CatalogEntry e = build("disk_quartic");
  Vec y = disk_point();
  PropertyReport r = check_point(e, y, {.seed = 1});
  CHECK(r.verdicts.at(Property::OneToOne).verdict == Verdict::Fails);
  CHECK(r.chain.a_sufficient.verdict == Verdict::Fails);
  CHECK(r.chain.b_dual.verdict == Verdict::Fails);
  CHECK(r.chain.w_condition.verdict == Verdict::Fails);
  CHECK(r.chain.necessary.verdict == Verdict::Holds);
  CHECK(r.monotone);
  REQUIRE(r.linear_witness);
  CHECK(r.linear_witness->valid());
}

TEST_CASE("quadratic witness on the disk: (1,0) works, (-1,0) is in the dual cone") {
  CatalogEntry e = build("disk_quartic");
  Vec y = disk_point();
  TangentCone cone = cone_at(e.set, value(e.lift, y));
  Vec w(2);
  w << 1.0, 0.0;
  WitnessCost c = witness_quadratic_cost(e.lift, y, w, cone);
  CHECK(c.valid());
  CHECK(c.alpha == doctest::Approx(2.0));
  CHECK(c.grad_norm_upstairs <= 1e-10);
  CHECK(c.hess_min_eig_upstairs >= -1e-8);
  CHECK(c.downstream_gap == doctest::Approx(-1.0));
  // g = <w, phi> + alpha/2 |phi - x|^2 along the boundary circle is minimized at y
  Cost f = c.cost();
  double g0 = f.value(value(e.lift, y));
  for (double t = -0.5; t <= 0.5; t += 0.01) {
    Vec yt(3);
    yt << std::cos(t), std::sin(t), 0.0;
    CHECK(f.value(value(e.lift, yt)) >= g0 - 1e-12);
  }
  try {
    witness_quadratic_cost(e.lift, y, -w, cone);
    FAIL("expected InvalidWitness");
  } catch (const Error& err) {
    CHECK(err.code() == Errc::InvalidWitness);
  }
  CHECK(stationarity_gap(cone, -w) == doctest::Approx(0.0));
}

TEST_CASE("set membership helpers on the disk") {
  CatalogEntry e = build("disk_quartic");
  Vec y = disk_point();
  Vec d(2);
  d << -1.0, 0.0;
  CHECK(a_set_contains(e.lift, y, d, &e, 1) == Tri::False);
  Vec w(2);
  w << 1.0, 0.0;
  // the form <w, Q> vanishes on ker L at this point
  CHECK(w_set_member(e.lift, y, w));
  CHECK(w_set_member(e.lift, y, -w));
}

TEST_CASE("interior points of the Hadamard lift satisfy everything") {
  CatalogEntry e = build("hadamard");
  Rng rng(2);
  Vec y = e.sample_point("interior", rng);
  PropertyReport r = check_point(e, y, {.seed = 2});
  for (Property p : {Property::LocalToLocal, Property::OneToOne, Property::TwoToOne})
    CHECK(r.verdicts.at(p).verdict == Verdict::Holds);
  CHECK_FALSE(r.linear_witness);
  CHECK_FALSE(r.quadratic_witness);
}

TEST_CASE("boundary of the simplex: 1=>1 holds via the chain") {
  CatalogEntry e = build("hadamard");
  Rng rng(3);
  for (int k = 0; k < 3; ++k) {
    Vec y = e.sample_point("boundary", rng);
    PropertyReport r = check_point(e, y, {.seed = static_cast<std::uint64_t>(k)});
    CHECK(r.monotone);
    for (Property p : {Property::LocalToLocal, Property::OneToOne, Property::TwoToOne})
      CHECK(matches(e.expect(p, y), r.verdicts.at(p).verdict));
  }
}

TEST_CASE("nodal cubic: the node fails 1=>1 with a valid linear witness") {
  CatalogEntry e = build("nodal_cubic");
  Vec y(3);
  y << 0.0, 0.0, 1.0;
  PropertyReport r = check_point(e, y, {.seed = 4});
  CHECK(r.verdicts.at(Property::OneToOne).verdict == Verdict::Fails);
  REQUIRE(r.linear_witness);
  CHECK(r.linear_witness->valid());
  // orthogonal to the branch velocity (1, 1)
  CHECK(std::abs(r.linear_witness->w(0) + r.linear_witness->w(1)) < 1e-9);
}

TEST_CASE("rank-one tensors at the origin fail the necessary condition") {
  CatalogEntry e = build("cp_rank1");
  Vec y = Vec::Zero(e.lift.manifold.ambient_dim());
  PropertyReport r = check_point(e, y, {.seed = 5});
  CHECK(r.chain.necessary.verdict == Verdict::Fails);
  CHECK(r.monotone);
}

TEST_CASE("reports are deterministic and digests distinguish points") {
  CatalogEntry e = build("svd");
  Rng rng(6);
  Vec y = e.sample_point("repeated", rng);
  CHECK(check_point(e, y, {.seed = 9}).to_json().dump() == check_point(e, y, {.seed = 9}).to_json().dump());
  Vec z = y;
  z(0) += 1e-12;
  CHECK(point_digest(y) != point_digest(z));
  CHECK(point_digest(y) == point_digest(y));
}

TEST_CASE("monotonicity detects a Holds followed by a Fails") {
  PropertyReport r;
  r.chain.a_sufficient.verdict = Verdict::Holds;
  r.chain.b_dual.verdict = Verdict::Holds;
  r.chain.w_condition.verdict = Verdict::Fails;
  r.chain.necessary.verdict = Verdict::Holds;
  CHECK_FALSE(chain_monotone(r));
  r.chain.w_condition.verdict = Verdict::Holds;
  CHECK(chain_monotone(r));
  r.chain.a_sufficient.verdict = Verdict::Inconclusive;
  r.chain.b_dual.verdict = Verdict::Inconclusive;
  r.chain.w_condition.verdict = Verdict::Fails;
  r.chain.necessary.verdict = Verdict::Holds;
  CHECK(chain_monotone(r));
}

TEST_CASE("expectation matching") {
  CHECK(matches(Expectation::Holds, Verdict::Holds));
  CHECK_FALSE(matches(Expectation::Holds, Verdict::Inconclusive));
  CHECK_FALSE(matches(Expectation::Fails, Verdict::Holds));
  CHECK(matches(Expectation::Unspecified, Verdict::Inconclusive));
}
