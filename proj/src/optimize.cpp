#include "liftcalc/optimize.hpp"

#include <cmath>
#include <limits>

namespace lifts {

const char* cost_kind_name(Cost::Kind k) {
  switch (k) {
    case Cost::Kind::Linear: return "Linear";
    case Cost::Kind::QuadraticShift: return "QuadraticShift";
    case Cost::Kind::Custom: return "Custom";
  }
  return "?";
}

Cost Cost::linear(const Vec& w) {
  Cost f;
  f.kind = Kind::Linear;
  f.dim = w.size();
  f.w = w;
  f.value = [w](const Vec& x) { return w.dot(x); };
  f.gradient = [w](const Vec&) { return w; };
  f.hess_vec = [](const Vec&, const Vec& u) { return Vec(Vec::Zero(u.size())); };
  return f;
}

Cost Cost::quadratic_shift(const Vec& w, double alpha, const Vec& center) {
  if (w.size() != center.size()) throw Error(Errc::InvalidInput, "quadratic_shift: dimension mismatch");
  Cost f;
  f.kind = Kind::QuadraticShift;
  f.dim = w.size();
  f.w = w;
  f.alpha = alpha;
  f.center = center;
  f.value = [w, alpha, center](const Vec& x) { return w.dot(x) + 0.5 * alpha * (x - center).squaredNorm(); };
  f.gradient = [w, alpha, center](const Vec& x) { return Vec(w + alpha * (x - center)); };
  f.hess_vec = [alpha](const Vec&, const Vec& u) { return Vec(alpha * u); };
  return f;
}

Cost Cost::quadratic_quartic(const Mat& A, const Vec& b, double c) {
  if (A.rows() != A.cols() || A.rows() != b.size()) throw Error(Errc::InvalidInput, "quadratic_quartic: dimension mismatch");
  Cost f;
  f.kind = Kind::Custom;
  f.dim = b.size();
  f.value = [A, b, c](const Vec& x) {
    double s = x.squaredNorm();
    return 0.5 * x.dot(A * x) + b.dot(x) + 0.25 * c * s * s;
  };
  f.gradient = [A, b, c](const Vec& x) { return Vec(A * x + b + c * x.squaredNorm() * x); };
  f.hess_vec = [A, c](const Vec& x, const Vec& u) {
    return Vec(A * u + c * (x.squaredNorm() * u + 2.0 * x.dot(u) * x));
  };
  return f;
}

Cost Cost::constant(Index dim, double value) {
  Cost f;
  f.kind = Kind::Custom;
  f.dim = dim;
  f.value = [value](const Vec&) { return value; };
  f.gradient = [dim](const Vec&) { return Vec(Vec::Zero(dim)); };
  f.hess_vec = [](const Vec&, const Vec& u) { return Vec(Vec::Zero(u.size())); };
  return f;
}

Mat cost_hessian(const Cost& f, const Vec& x) {
  const Index n = x.size();
  Mat H(n, n);
  for (Index j = 0; j < n; ++j) H.col(j) = f.hess_vec(x, Vec::Unit(n, j));
  return sym(H);
}

double g_value(const Lift& lift, const Cost& f, const Vec& y) { return f.value(lift.phi.value(y)); }

Vec grad_g(const Lift&, const LQData& d, const Cost& f) { return d.L.transpose() * f.gradient(d.x); }

Vec grad_g(const Lift& lift, const Vec& y, const Cost& f) { return grad_g(lift, lq(lift, y), f); }

Mat hess_g(const Lift& lift, const LQData& d, const Cost& f) {
  Mat HL(d.L.rows(), d.L.cols());
  for (Index j = 0; j < d.L.cols(); ++j) HL.col(j) = f.hess_vec(d.x, d.L.col(j));
  Mat H = d.L.transpose() * HL + second_form(lift, d, f.gradient(d.x));
  return sym(H);
}

Mat hess_g(const Lift& lift, const Vec& y, const Cost& f) { return hess_g(lift, lq(lift, y), f); }

namespace {

double g_on_curve(const Lift& lift, const Cost& f, const Vec& y, const Vec& v, const Vec& u, double t) {
  return g_value(lift, f, curve(lift.manifold, y, v, u, t));
}

/// Residuals above `factor` times the rounding floor, with their t values.
double fit_slope(const std::vector<double>& t, const std::vector<double>& r, const std::vector<double>& floor,
                 bool& at_noise) {
  std::vector<double> tt, rr;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (r[i] > 10.0 * floor[i]) {
      tt.push_back(t[i]);
      rr.push_back(r[i]);
    }
  at_noise = tt.size() < 2;
  return at_noise ? std::numeric_limits<double>::infinity() : loglog_slope(tt, rr);
}

}  // namespace

double fd_directional(const Lift& lift, const Cost& f, const Vec& y, const Vec& v, double h) {
  Vec u = second_order_correction(lift.manifold, y, v);
  return (g_on_curve(lift, f, y, v, u, h) - g_on_curve(lift, f, y, v, u, -h)) / (2.0 * h);
}

double fd_second(const Lift& lift, const Cost& f, const Vec& y, const Vec& v, double h) {
  Vec u = second_order_correction(lift.manifold, y, v);
  return (g_on_curve(lift, f, y, v, u, h) - 2.0 * g_value(lift, f, y) + g_on_curve(lift, f, y, v, u, -h)) / (h * h);
}

SlopeReport fd_validate(const Lift& lift, const Cost& f, const Vec& y, std::uint64_t seed) {
  LQData d = lq(lift, y);
  Rng rng(seed);
  SlopeReport rep;
  if (d.T.cols() == 0) {
    rep.grad_at_noise = rep.hess_at_noise = rep.passed = true;
    return rep;
  }
  Vec a = gaussian_vec(d.T.cols(), rng);
  a /= a.norm();
  Vec v = d.T * a;
  Vec u = second_order_correction(lift.manifold, y, v);
  const double g0 = g_value(lift, f, y);
  const double g1 = grad_g(lift, d, f).dot(a);
  const double q = a.dot(hess_g(lift, d, f) * a);
  const double eps = std::numeric_limits<double>::epsilon();
  const Vec x = value(lift, y);
  const double size = std::abs(g0) + f.gradient(x).norm() * (x.norm() + 1.0) + 1.0;
  std::vector<double> floor1, floor2;
  for (double t : {1e-2, 1e-3, 1e-4, 1e-5}) {
    double gp = g_on_curve(lift, f, y, v, u, t);
    double gm = g_on_curve(lift, f, y, v, u, -t);
    double noise = 1e3 * eps * size;
    rep.t.push_back(t);
    rep.grad_residual.push_back(std::abs(gp - g0 - t * g1));
    rep.hess_residual.push_back(std::abs((gp - 2.0 * g0 + gm) / (t * t) - q));
    floor1.push_back(noise);
    floor2.push_back(4.0 * noise / (t * t));
  }
  rep.grad_slope = fit_slope(rep.t, rep.grad_residual, floor1, rep.grad_at_noise);
  rep.hess_slope = fit_slope(rep.t, rep.hess_residual, floor2, rep.hess_at_noise);
  rep.passed = (rep.grad_at_noise || rep.grad_slope >= 1.9) && (rep.hess_at_noise || rep.hess_slope >= 0.9);
  return rep;
}

namespace {

struct Trial {
  bool ok = false;
  Vec y;
  double value = 0;
};

Trial try_step(const Lift& lift, const Cost& f, const Vec& y, const Vec& dir, double t) {
  Trial tr;
  try {
    tr.y = project_to_manifold(lift.manifold, y + t * dir);
    tr.value = g_value(lift, f, tr.y);
    tr.ok = std::isfinite(tr.value);
  } catch (const Error&) {
    tr.ok = false;
  }
  return tr;
}

/// Armijo backtracking: accept when g decreases by at least c * t * slope (slope < 0).
Trial armijo(const Lift& lift, const Cost& f, const Vec& y, double g0, const Vec& dir, double slope, double t0) {
  double t = t0;
  for (int k = 0; k < 60; ++k, t *= 0.5) {
    Trial tr = try_step(lift, f, y, dir, t);
    if (tr.ok && tr.value <= g0 + 1e-4 * t * slope) return tr;
  }
  return {};
}

}  // namespace

SolverResult find_second_order_point(const Lift& lift, const Cost& f, const Vec& y0, const SolverParams& params) {
  Rng rng(params.seed);
  Vec y = manifold_residual(lift.manifold, y0) > 1e-12 ? project_to_manifold(lift.manifold, y0) : y0;
  SolverResult res;
  double gval = g_value(lift, f, y);
  double step = 1.0;
  for (int it = 0; it < params.max_iters; ++it) {
    LQData d = lq(lift, y);
    Vec grad = grad_g(lift, d, f);
    Mat H = hess_g(lift, d, f);
    SymEig ev = sym_eig(H);
    const double gn = grad.norm();
    const double lmin = ev.values.size() ? ev.values(0) : 0.0;
    res.trace.push_back({it, gval, gn, lmin});
    res.y = y;
    res.value = gval;
    res.grad_norm = gn;
    res.min_eig = lmin;
    res.iterations = it;
    if (gn <= params.grad_tol && lmin >= -params.hess_tol) {
      res.converged = true;
      return res;
    }
    Trial next;
    if (gn > params.grad_tol) {
      const double scale = std::max(1.0, std::abs(ev.values.size() ? ev.values(ev.values.size() - 1) : 0.0));
      if (lmin > 1e-8 * scale) {
        Vec p = -ev.vectors * ((ev.vectors.transpose() * grad).array() / ev.values.array()).matrix();
        if (std::abs(grad.dot(p)) < 1e-10 * (1.0 + std::abs(gval))) {
          // predicted decrease below rounding of g: accept the full step when it halves the gradient
          Trial full = try_step(lift, f, y, d.T * p, 1.0);
          if (full.ok && full.value <= gval + 1e-12 * (1.0 + std::abs(gval))) {
            try {
              if (grad_g(lift, full.y, f).norm() < 0.5 * gn) next = full;
            } catch (const Error&) {
            }
          }
        }
        if (!next.ok) next = armijo(lift, f, y, gval, d.T * p, grad.dot(p), 1.0);
      }
      if (!next.ok) {
        next = armijo(lift, f, y, gval, d.T * (-grad), -gn * gn, std::min(1e6, 2.0 * step));
        if (next.ok) step = std::max((next.y - y).norm() / std::max(gn, 1e-300), 1e-12);
      }
    }
    if (!next.ok && lmin < -params.hess_tol) {
      // negative curvature: Armijo on the curvature model along both signs, keep the better
      Vec v = d.T * ev.vectors.col(0);
      Trial best;
      for (double sg : {1.0, -1.0}) {
        double t = 1.0;
        for (int k = 0; k < 60; ++k, t *= 0.5) {
          Trial tr = try_step(lift, f, y, sg * v, t);
          if (tr.ok && tr.value <= gval + 1e-4 * 0.5 * t * t * lmin) {
            if (!best.ok || tr.value < best.value) best = tr;
            break;
          }
        }
      }
      next = best;
    }
    if (!next.ok) {
      // stalled: random perturbation of the configured radius
      Vec a = gaussian_vec(d.T.cols(), rng);
      if (a.norm() > 0) a /= a.norm();
      next = try_step(lift, f, y, d.T * a, params.perturbation);
      if (!next.ok) break;
    }
    y = next.y;
    gval = next.value;
  }
  throw NotConvergedError("find_second_order_point: no certificate after " + std::to_string(params.max_iters) +
                              " iterations (grad " + std::to_string(res.grad_norm) + ", min eig " +
                              std::to_string(res.min_eig) + ")",
                          res);
}

double downstream_stationarity(const Lift& lift, const Cost& f, const Vec& y, const TangentCone& cone) {
  return stationarity_gap(cone, f.gradient(value(lift, y)));
}

}  // namespace lifts
