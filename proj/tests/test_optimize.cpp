#include "liftcalc/catalog.hpp"
#include "liftcalc/optimize.hpp"

#include <doctest.h>

#include <cmath>

using namespace lifts;

namespace {

Cost random_cost(Index n, std::uint64_t seed) {
  Rng rng(seed);
  Mat A = sym(gaussian(n, n, rng));
  return Cost::quadratic_quartic(A, gaussian_vec(n, rng), 0.1);
}

}  // namespace

TEST_CASE("gradient and Hessian form pass the slope check") {
  for (const char* id : {"hadamard", "lr", "burer_monteiro", "svd"}) {
    CatalogEntry e = build(id);
    Vec y = random_point(e.lift.manifold, 5);
    SlopeReport r = fd_validate(e.lift, random_cost(e.lift.ambient_dim(), 6), y, 7);
    CAPTURE(id);
    CHECK(r.passed);
  }
}

TEST_CASE("a corrupted Jacobian is caught by the slope check") {
  CatalogEntry e = build("hadamard", {.n = 4});
  Lift bad = e.lift;
  auto J = bad.phi.jacobian;
  bad.phi.jacobian = [J](const Vec& y) { return Mat(1.1 * J(y)); };
  Vec y = random_point(bad.manifold, 1);
  SlopeReport r = fd_validate(bad, random_cost(4, 2), y, 3);
  CHECK_FALSE(r.passed);
  CHECK(r.grad_slope < 1.5);
}

TEST_CASE("directional derivatives agree with central differences") {
  CatalogEntry e = build("desing_chart");
  Rng rng(3);
  Vec y = e.sample_point("rank_deficient", rng);
  Cost f = random_cost(e.lift.ambient_dim(), 4);
  LQData d = lq(e.lift, y);
  Vec a = gaussian_vec(d.T.cols(), rng);
  a /= a.norm();
  Vec v = d.T * a;
  CHECK(grad_g(e.lift, d, f).dot(a) == doctest::Approx(fd_directional(e.lift, f, y, v, 1e-5)).epsilon(1e-6));
  CHECK(a.dot(hess_g(e.lift, d, f) * a) == doctest::Approx(fd_second(e.lift, f, y, v, 1e-3)).epsilon(1e-4));
}

TEST_CASE("cost oracles") {
  Vec w(2), c(2), x(2);
  w << 1, -2;
  c << 0.5, 0.5;
  x << 1, 1;
  Cost q = Cost::quadratic_shift(w, 2.0, c);
  CHECK(q.value(x) == doctest::Approx(-1.0 + 0.5));
  CHECK((q.gradient(x) - (w + 2.0 * (x - c))).norm() < 1e-15);
  CHECK((cost_hessian(q, x) - 2.0 * Mat::Identity(2, 2)).norm() < 1e-15);
  CHECK(Cost::linear(w).hess_vec(x, x).norm() == 0.0);
}

TEST_CASE("the solver finds the smallest eigenvalue on the sphere") {
  Rng rng(8);
  Mat A = sym(gaussian(5, 5, rng));
  Lift s = sphere_inclusion(5);
  Cost f = Cost::quadratic_quartic(A, Vec::Zero(5));
  SolverParams p;
  p.seed = 1;
  SolverResult r = find_second_order_point(s, f, random_point(s.manifold, 2), p);
  CHECK(r.converged);
  CHECK(r.value == doctest::Approx(0.5 * min_eig(A)).epsilon(1e-8));
  CHECK(r.grad_norm <= p.grad_tol);
  CHECK_FALSE(r.trace.empty());
}

TEST_CASE("the solver reports its best iterate when out of iterations") {
  Rng rng(9);
  Mat A = sym(gaussian(4, 4, rng));
  Lift s = sphere_inclusion(4);
  SolverParams p;
  p.max_iters = 1;
  try {
    find_second_order_point(s, Cost::quadratic_quartic(A, gaussian_vec(4, rng)), random_point(s.manifold, 3), p);
    FAIL("expected NotConverged");
  } catch (const NotConvergedError& e) {
    CHECK(e.code() == Errc::NotConverged);
    CHECK(e.best().y.size() == 4);
  }
}
