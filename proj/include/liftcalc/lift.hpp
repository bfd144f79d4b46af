#pragma once

#include "liftcalc/manifold.hpp"

namespace lifts {

/// phi: M -> E, given through an extension phi_bar on the coordinates of M.
struct Lift {
  Manifold manifold;
  SmoothMap phi;
  std::string name;
  /// Extra validity checks run by lq() at the queried point (e.g. submersion rank).
  std::vector<std::function<void(const Vec&)>> point_checks;

  Index ambient_dim() const { return phi.out_dim; }
};

struct LQData {
  Vec y;
  Vec x;
  Mat T;         // orthonormal tangent basis of T_yM (manifold coordinates)
  Mat L;         // ambient_dim x dim M, L e_j = Dphi(y)[T_j]
  Mat im_L;      // orthonormal basis of im L (ambient)
  Mat ker_L;     // orthonormal basis of ker L (tangent coordinates)
  Mat ker_perp;  // orthonormal complement of ker L (tangent coordinates)
};

Vec value(const Lift& lift, const Vec& y);
LQData lq(const Lift& lift, const Vec& y, const TolerancePolicy& tol = {});
/// Q_y(v) for an ambient tangent vector v, realized with the min-norm correction.
Vec qmap(const Lift& lift, const Vec& y, const Vec& v);
/// Q_y(T a) for tangent coordinates a.
Vec qmap_coords(const Lift& lift, const LQData& d, const Vec& a);
/// Symmetric matrix of v -> <w, Q_y(v)> for any w (no coexactness check).
Mat second_form(const Lift& lift, const LQData& d, const Vec& w);
/// Symmetric matrix of v -> <w, Q_y(v)> in the tangent basis d.T; w must be orthogonal to im L.
Mat qform_matrix(const Lift& lift, const LQData& d, const Vec& w);
Mat qform_matrix(const Lift& lift, const Vec& y, const Vec& w);

struct TaylorReport {
  std::vector<double> t;
  std::vector<double> first;   // |phi(c(t)) - x - t L v|
  std::vector<double> second;  // |phi(c(t)) - x - t L v - t^2/2 Q v|
  double first_slope = 0;
  double second_slope = 0;
  bool first_exact = false;  // residuals at rounding level
  bool second_exact = false;
  bool passed = false;
};

/// Expansion of phi along the canonical curve in a random unit tangent direction,
/// t in {1e-1, ..., 1e-4}; passes with slopes >= 1.9 and >= 2.9.
TaylorReport taylor_check(const Lift& lift, const Vec& y, std::uint64_t seed = 0);

/// A submersion psi: N -> M given by a map on coordinates.
struct Submersion {
  Manifold domain;
  SmoothMap map;
};

Lift compose_submersion(const Lift& phi, const Submersion& psi);
Lift product(const std::vector<Lift>& lifts);
/// Fiber product of F: E -> E' with psi: N -> E'; M = {(x,y): F(x) = psi(y)}, phi(x,y) = x.
Lift fiber_product(const SmoothMap& F, const Lift& psi, std::string name = "fiber_product");

}  // namespace lifts
