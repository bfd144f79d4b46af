#pragma once

#include "liftcalc/cones.hpp"
#include "liftcalc/lift.hpp"

namespace lifts {

/// Downstairs cost f with value, gradient and Hessian-vector oracles.
struct Cost {
  enum class Kind { Linear, QuadraticShift, Custom };
  Kind kind = Kind::Custom;
  Index dim = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> gradient;
  std::function<Vec(const Vec&, const Vec&)> hess_vec;
  Vec w;             // Linear / QuadraticShift
  double alpha = 0;  // QuadraticShift
  Vec center;        // QuadraticShift

  /// f(x) = <w, x>
  static Cost linear(const Vec& w);
  /// f(x) = <w, x> + alpha/2 ||x - center||^2
  static Cost quadratic_shift(const Vec& w, double alpha, const Vec& center);
  /// f(x) = 1/2 x^T A x + b^T x + c/4 ||x||^4 (A symmetric)
  static Cost quadratic_quartic(const Mat& A, const Vec& b, double c = 0.0);
  static Cost constant(Index dim, double value);
};

const char* cost_kind_name(Cost::Kind k);

/// Dense Hessian of f at x from the Hessian-vector oracle.
Mat cost_hessian(const Cost& f, const Vec& x);

double g_value(const Lift& lift, const Cost& f, const Vec& y);
/// Riemannian gradient of g = f o phi in the tangent basis of lq(): L^T grad f.
Vec grad_g(const Lift& lift, const LQData& d, const Cost& f);
Vec grad_g(const Lift& lift, const Vec& y, const Cost& f);
/// Hessian form <Hess f L v, L v> + <grad f, Q(v)> in the tangent basis of lq().
Mat hess_g(const Lift& lift, const LQData& d, const Cost& f);
Mat hess_g(const Lift& lift, const Vec& y, const Cost& f);

/// Central difference of g along the curve through y with velocity v and min-norm acceleration.
double fd_directional(const Lift& lift, const Cost& f, const Vec& y, const Vec& v, double h);
/// Second central difference of g along the same curve.
double fd_second(const Lift& lift, const Cost& f, const Vec& y, const Vec& v, double h);

struct SlopeReport {
  std::vector<double> t;
  std::vector<double> grad_residual;  // |g(c(t)) - g - t g'|
  std::vector<double> hess_residual;  // |(g(c(t)) - 2 g + g(c(-t))) / t^2 - q|
  double grad_slope = 0;
  double hess_slope = 0;
  bool grad_at_noise = false;  // residuals indistinguishable from rounding
  bool hess_at_noise = false;
  bool passed = false;
};

/// Finite-difference slope check of grad_g and hess_g along a random tangent direction.
SlopeReport fd_validate(const Lift& lift, const Cost& f, const Vec& y, std::uint64_t seed = 0);

struct SolverParams {
  double grad_tol = 1e-9;
  double hess_tol = 1e-7;
  int max_iters = 5000;
  double perturbation = 1e-3;
  std::uint64_t seed = 0;
};

struct TraceRow {
  int iter = 0;
  double value = 0;
  double grad_norm = 0;
  double min_eig = 0;
};

struct SolverResult {
  Vec y;
  double value = 0;
  double grad_norm = 0;
  double min_eig = 0;
  int iterations = 0;
  bool converged = false;
  std::vector<TraceRow> trace;
};

/// Thrown by find_second_order_point when max_iters is exhausted; carries the best iterate.
class NotConvergedError : public Error {
 public:
  NotConvergedError(const std::string& what, SolverResult best) : Error(Errc::NotConverged, what), best_(std::move(best)) {}
  const SolverResult& best() const { return best_; }

 private:
  SolverResult best_;
};

SolverResult find_second_order_point(const Lift& lift, const Cost& f, const Vec& y0, const SolverParams& params = {});

/// stationarity_gap(cone, grad f(phi(y))).
double downstream_stationarity(const Lift& lift, const Cost& f, const Vec& y, const TangentCone& cone);

}  // namespace lifts
