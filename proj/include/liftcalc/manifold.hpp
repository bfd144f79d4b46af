#pragma once

#include "liftcalc/numerics.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace lifts {

/// A smooth map between coordinate spaces with first and second derivative oracles.
struct SmoothMap {
  Index in_dim = 0;
  Index out_dim = 0;
  std::function<Vec(const Vec&)> value;
  std::function<Mat(const Vec&)> jacobian;                // out_dim x in_dim
  std::function<Vec(const Vec&, const Vec&)> second;      // D^2 f(x)[v, v]
  bool finite_difference = false;                         // derivatives are FD fallbacks

  static SmoothMap identity(Index n);
  static SmoothMap linear(const Mat& A);
  /// Derivatives by central differences (h = 1e-5); the result is flagged.
  static SmoothMap from_value(Index in_dim, Index out_dim, std::function<Vec(const Vec&)> f);
};

enum class ManifoldKind { Chart, Embedded, Product, Sphere, Stiefel };

/// Upstairs manifold M, always realized through a (possibly empty) defining function
/// h: R^N -> R^k whose zero set is M.
class Manifold {
 public:
  static Manifold chart(Index dim);
  static Manifold embedded(SmoothMap h, std::string name = "embedded");
  /// S^n inside R^{n+1}.
  static Manifold sphere(Index n);
  /// St(m, r) inside R^{m x r}, column-major coordinates.
  static Manifold stiefel(Index m, Index r);
  static Manifold product(std::vector<Manifold> factors);

  ManifoldKind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  Index ambient_dim() const { return ambient_; }
  Index codim() const { return codim_; }
  Index dim() const { return ambient_ - codim_; }
  const std::vector<Manifold>& factors() const { return factors_; }
  /// Coordinate offset of factor i inside the product coordinates.
  Index offset(std::size_t i) const { return offsets_.at(i); }

  Vec h(const Vec& y) const;
  Mat dh(const Vec& y) const;
  Vec d2h(const Vec& y, const Vec& v) const;

  /// Optional custom sampler for random_point.
  void set_sampler(std::function<Vec(Rng&)> s) { sampler_ = std::move(s); }
  bool has_sampler() const { return static_cast<bool>(sampler_); }
  Vec sample(Rng& rng) const { return sampler_(rng); }

 private:
  ManifoldKind kind_ = ManifoldKind::Chart;
  std::string name_;
  Index ambient_ = 0;
  Index codim_ = 0;
  SmoothMap defining_;
  std::vector<Manifold> factors_;
  std::vector<Index> offsets_;
  std::function<Vec(Rng&)> sampler_;
};

/// Residual ||h(y)||, zero for charts.
double manifold_residual(const Manifold& M, const Vec& y);

Mat tangent_basis(const Manifold& M, const Vec& y, const TolerancePolicy& tol = {});
Vec second_order_correction(const Manifold& M, const Vec& y, const Vec& v,
                            const TolerancePolicy& tol = {});
/// Gauss-Newton projection of z onto M (min-norm steps).
Vec project_to_manifold(const Manifold& M, const Vec& z, int max_iter = 50);
Vec curve(const Manifold& M, const Vec& y, const Vec& v, const Vec& u, double t);
Vec project_tangent(const Manifold& M, const Vec& y, const Vec& z);
Vec random_point(const Manifold& M, std::uint64_t seed);
Vec random_tangent(const Manifold& M, const Vec& y, std::uint64_t seed);
/// Spot-check that rank Dh equals codim at y and at four nearby points of M.
void check_constant_rank(const Manifold& M, const Vec& y, std::uint64_t seed = 0,
                         const TolerancePolicy& tol = {});

}  // namespace lifts
