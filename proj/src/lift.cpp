#include "liftcalc/lift.hpp"

#include <cmath>
#include <limits>
#include <memory>

namespace lifts {

Vec value(const Lift& lift, const Vec& y) {
  if (y.size() != lift.manifold.ambient_dim()) throw Error(Errc::InvalidInput, "value: dimension mismatch");
  double res = manifold_residual(lift.manifold, y);
  if (res > 1e-8) throw Error(Errc::InvalidInput, "value: point off manifold, residual " + std::to_string(res));
  return lift.phi.value(y);
}

LQData lq(const Lift& lift, const Vec& y, const TolerancePolicy& tol) {
  for (const auto& check : lift.point_checks) check(y);
  LQData d;
  d.y = y;
  d.x = value(lift, y);
  d.T = tangent_basis(lift.manifold, y, tol);
  d.L = lift.phi.jacobian(y) * d.T;
  d.im_L = range_basis(d.L, tol);
  d.ker_L = kernel_basis(d.L, tol);
  d.ker_perp = complement_basis(d.ker_L, d.T.cols(), tol);
  return d;
}

Vec qmap(const Lift& lift, const Vec& y, const Vec& v) {
  Vec u = second_order_correction(lift.manifold, y, v);
  return lift.phi.second(y, v) + lift.phi.jacobian(y) * u;
}

TaylorReport taylor_check(const Lift& lift, const Vec& y, std::uint64_t seed) {
  TaylorReport rep;
  Vec v = random_tangent(lift.manifold, y, seed);
  Vec u = second_order_correction(lift.manifold, y, v);
  const Vec x = lift.phi.value(y);
  const Vec lv = lift.phi.jacobian(y) * v;
  const Vec qv = qmap(lift, y, v);
  const double floor = 1e2 * std::numeric_limits<double>::epsilon() * std::max(1.0, x.norm());
  std::vector<double> t1, r1, t2, r2;
  for (double t : {1e-1, 1e-2, 1e-3, 1e-4}) {
    Vec xt = lift.phi.value(curve(lift.manifold, y, v, u, t));
    double a = (xt - x - t * lv).norm();
    double b = (xt - x - t * lv - 0.5 * t * t * qv).norm();
    rep.t.push_back(t);
    rep.first.push_back(a);
    rep.second.push_back(b);
    if (a > floor) {
      t1.push_back(t);
      r1.push_back(a);
    }
    if (b > floor) {
      t2.push_back(t);
      r2.push_back(b);
    }
  }
  rep.first_exact = t1.size() < 2;
  rep.second_exact = t2.size() < 2;
  rep.first_slope = rep.first_exact ? std::numeric_limits<double>::infinity() : loglog_slope(t1, r1);
  rep.second_slope = rep.second_exact ? std::numeric_limits<double>::infinity() : loglog_slope(t2, r2);
  rep.passed = rep.first_slope >= 1.9 && rep.second_slope >= 2.9;
  return rep;
}

Vec qmap_coords(const Lift& lift, const LQData& d, const Vec& a) { return qmap(lift, d.y, d.T * a); }

Mat second_form(const Lift& lift, const LQData& d, const Vec& w) {
  const Index n = d.T.cols();
  Mat B = Mat::Zero(n, n);
  if (w.norm() == 0.0) return B;
  Vec diag(n);
  for (Index i = 0; i < n; ++i) diag(i) = w.dot(qmap(lift, d.y, d.T.col(i)));
  for (Index i = 0; i < n; ++i) {
    B(i, i) = diag(i);
    for (Index j = i + 1; j < n; ++j) {
      double qij = w.dot(qmap(lift, d.y, d.T.col(i) + d.T.col(j)));
      B(i, j) = B(j, i) = 0.5 * (qij - diag(i) - diag(j));
    }
  }
  return B;
}

Mat qform_matrix(const Lift& lift, const LQData& d, const Vec& w0) {
  Vec w = w0;
  if (d.im_L.cols() > 0) {
    Vec along = d.im_L * (d.im_L.transpose() * w0);
    if (along.norm() > 1e-8 * std::max(1.0, w0.norm()))
      throw Error(Errc::NotCoexact, "w has component " + std::to_string(along.norm()) + " in im L");
    w -= along;
  }
  return second_form(lift, d, w);
}

Mat qform_matrix(const Lift& lift, const Vec& y, const Vec& w) { return qform_matrix(lift, lq(lift, y), w); }

Lift compose_submersion(const Lift& phi, const Submersion& psi) {
  if (psi.map.in_dim != psi.domain.ambient_dim() || psi.map.out_dim != phi.manifold.ambient_dim())
    throw Error(Errc::InvalidInput, "compose_submersion: dimension mismatch");
  Lift out;
  out.manifold = psi.domain;
  out.name = phi.name + "∘submersion";
  SmoothMap f;
  f.in_dim = psi.map.in_dim;
  f.out_dim = phi.phi.out_dim;
  auto p = std::make_shared<SmoothMap>(phi.phi);
  auto s = std::make_shared<SmoothMap>(psi.map);
  f.value = [p, s](const Vec& z) { return p->value(s->value(z)); };
  f.jacobian = [p, s](const Vec& z) { return Mat(p->jacobian(s->value(z)) * s->jacobian(z)); };
  f.second = [p, s](const Vec& z, const Vec& v) {
    Vec y = s->value(z);
    Vec dv = s->jacobian(z) * v;
    return Vec(p->second(y, dv) + p->jacobian(y) * s->second(z, v));
  };
  f.finite_difference = phi.phi.finite_difference || psi.map.finite_difference;
  out.phi = f;
  out.point_checks = phi.point_checks;
  auto M = std::make_shared<Manifold>(phi.manifold);
  auto N = std::make_shared<Manifold>(psi.domain);
  out.point_checks.push_back([M, N, s](const Vec& z) {
    Vec y = s->value(z);
    Mat TM = tangent_basis(*M, y);
    Mat TN = tangent_basis(*N, z);
    Mat J = TM.transpose() * s->jacobian(z) * TN;
    if (numerical_rank(J) != TM.cols())
      throw Error(Errc::NotSubmersion, "Jacobian of psi is not surjective onto T_yM");
  });
  return out;
}

Lift product(const std::vector<Lift>& lifts) {
  if (lifts.empty()) throw Error(Errc::InvalidInput, "product: no factors");
  if (lifts.size() == 1) return lifts[0];
  std::vector<Manifold> ms;
  std::vector<Index> in_off, out_off, in_dim, out_dim;
  Index a = 0, b = 0;
  bool fd = false;
  std::string name = "product(";
  for (std::size_t i = 0; i < lifts.size(); ++i) {
    ms.push_back(lifts[i].manifold);
    in_off.push_back(a);
    out_off.push_back(b);
    in_dim.push_back(lifts[i].manifold.ambient_dim());
    out_dim.push_back(lifts[i].phi.out_dim);
    a += in_dim.back();
    b += out_dim.back();
    fd = fd || lifts[i].phi.finite_difference;
    name += (i ? "," : "") + lifts[i].name;
  }
  name += ")";
  auto maps = std::make_shared<std::vector<SmoothMap>>();
  for (const auto& l : lifts) maps->push_back(l.phi);
  Lift out;
  out.manifold = Manifold::product(ms);
  out.name = name;
  SmoothMap f;
  f.in_dim = a;
  f.out_dim = b;
  f.finite_difference = fd;
  f.value = [=](const Vec& y) {
    Vec x(b);
    for (std::size_t i = 0; i < maps->size(); ++i)
      x.segment(out_off[i], out_dim[i]) = (*maps)[i].value(y.segment(in_off[i], in_dim[i]));
    return x;
  };
  f.jacobian = [=](const Vec& y) {
    Mat J = Mat::Zero(b, a);
    for (std::size_t i = 0; i < maps->size(); ++i)
      J.block(out_off[i], in_off[i], out_dim[i], in_dim[i]) = (*maps)[i].jacobian(y.segment(in_off[i], in_dim[i]));
    return J;
  };
  f.second = [=](const Vec& y, const Vec& v) {
    Vec x(b);
    for (std::size_t i = 0; i < maps->size(); ++i)
      x.segment(out_off[i], out_dim[i]) =
          (*maps)[i].second(y.segment(in_off[i], in_dim[i]), v.segment(in_off[i], in_dim[i]));
    return x;
  };
  out.phi = f;
  for (std::size_t i = 0; i < lifts.size(); ++i)
    for (const auto& c : lifts[i].point_checks) {
      Index o = in_off[i], d = in_dim[i];
      out.point_checks.push_back([c, o, d](const Vec& y) { c(y.segment(o, d)); });
    }
  return out;
}

Lift fiber_product(const SmoothMap& F, const Lift& psi, std::string name) {
  if (F.out_dim != psi.phi.out_dim) throw Error(Errc::InvalidInput, "fiber_product: codomains differ");
  const Index nx = F.in_dim;
  const Index ny = psi.manifold.ambient_dim();
  const Index kF = F.out_dim;
  const Index kN = psi.manifold.codim();
  auto Fp = std::make_shared<SmoothMap>(F);
  auto P = std::make_shared<SmoothMap>(psi.phi);
  auto N = std::make_shared<Manifold>(psi.manifold);
  SmoothMap H;
  H.in_dim = nx + ny;
  H.out_dim = kF + kN;
  H.finite_difference = F.finite_difference || psi.phi.finite_difference;
  H.value = [=](const Vec& z) {
    Vec out(kF + kN);
    out.head(kF) = Fp->value(z.head(nx)) - P->value(z.tail(ny));
    if (kN) out.tail(kN) = N->h(z.tail(ny));
    return out;
  };
  H.jacobian = [=](const Vec& z) {
    Mat J = Mat::Zero(kF + kN, nx + ny);
    J.topLeftCorner(kF, nx) = Fp->jacobian(z.head(nx));
    J.topRightCorner(kF, ny) = -P->jacobian(z.tail(ny));
    if (kN) J.bottomRightCorner(kN, ny) = N->dh(z.tail(ny));
    return J;
  };
  H.second = [=](const Vec& z, const Vec& v) {
    Vec out(kF + kN);
    out.head(kF) = Fp->second(z.head(nx), v.head(nx)) - P->second(z.tail(ny), v.tail(ny));
    if (kN) out.tail(kN) = N->d2h(z.tail(ny), v.tail(ny));
    return out;
  };
  Lift out;
  out.manifold = Manifold::embedded(H, name);
  out.name = name;
  Mat sel = Mat::Zero(nx, nx + ny);
  sel.leftCols(nx) = Mat::Identity(nx, nx);
  out.phi = SmoothMap::linear(sel);
  auto M = std::make_shared<Manifold>(out.manifold);
  out.point_checks.push_back([M](const Vec& z) { check_constant_rank(*M, z); });
  return out;
}

}  // namespace lifts
