#include "liftcalc/manifold.hpp"

#include <cmath>

namespace lifts {

SmoothMap SmoothMap::identity(Index n) {
  SmoothMap f;
  f.in_dim = f.out_dim = n;
  f.value = [](const Vec& x) { return x; };
  f.jacobian = [n](const Vec&) { return Mat(Mat::Identity(n, n)); };
  f.second = [n](const Vec&, const Vec&) { return Vec(Vec::Zero(n)); };
  return f;
}

SmoothMap SmoothMap::linear(const Mat& A) {
  SmoothMap f;
  f.in_dim = A.cols();
  f.out_dim = A.rows();
  f.value = [A](const Vec& x) { return Vec(A * x); };
  f.jacobian = [A](const Vec&) { return A; };
  Index m = A.rows();
  f.second = [m](const Vec&, const Vec&) { return Vec(Vec::Zero(m)); };
  return f;
}

SmoothMap SmoothMap::from_value(Index in_dim, Index out_dim, std::function<Vec(const Vec&)> fv) {
  SmoothMap f;
  f.in_dim = in_dim;
  f.out_dim = out_dim;
  f.value = fv;
  f.finite_difference = true;
  f.jacobian = [fv, in_dim, out_dim](const Vec& x) {
    const double h = 1e-5;
    Mat J(out_dim, in_dim);
    for (Index j = 0; j < in_dim; ++j) {
      Vec e = Vec::Zero(in_dim);
      e(j) = h;
      J.col(j) = (fv(x + e) - fv(x - e)) / (2 * h);
    }
    return J;
  };
  f.second = [fv](const Vec& x, const Vec& v) {
    const double h = 1e-4;
    return Vec((fv(x + h * v) - 2 * fv(x) + fv(x - h * v)) / (h * h));
  };
  return f;
}

Manifold Manifold::chart(Index dim) {
  Manifold M;
  M.kind_ = ManifoldKind::Chart;
  M.name_ = "chart";
  M.ambient_ = dim;
  M.codim_ = 0;
  M.defining_.in_dim = dim;
  M.defining_.out_dim = 0;
  M.defining_.value = [](const Vec&) { return Vec(0); };
  M.defining_.jacobian = [dim](const Vec&) { return Mat(0, dim); };
  M.defining_.second = [](const Vec&, const Vec&) { return Vec(0); };
  M.sampler_ = [dim](Rng& rng) { return gaussian_vec(dim, rng); };
  return M;
}

Manifold Manifold::embedded(SmoothMap h, std::string name) {
  Manifold M;
  M.kind_ = ManifoldKind::Embedded;
  M.name_ = std::move(name);
  M.ambient_ = h.in_dim;
  M.codim_ = h.out_dim;
  M.defining_ = std::move(h);
  return M;
}

Manifold Manifold::sphere(Index n) {
  SmoothMap h;
  h.in_dim = n + 1;
  h.out_dim = 1;
  h.value = [](const Vec& y) { return Vec::Constant(1, y.squaredNorm() - 1.0).eval(); };
  h.jacobian = [](const Vec& y) { return Mat(2.0 * y.transpose()); };
  h.second = [](const Vec&, const Vec& v) { return Vec::Constant(1, 2.0 * v.squaredNorm()).eval(); };
  Manifold M = embedded(h, "sphere");
  M.kind_ = ManifoldKind::Sphere;
  M.sampler_ = [n](Rng& rng) {
    Vec g = gaussian_vec(n + 1, rng);
    return Vec(g / g.norm());
  };
  return M;
}

namespace {

// upper triangle (with diagonal) of a symmetric r x r matrix, column by column
Vec upper(const Mat& S) {
  const Index r = S.rows();
  Vec out(r * (r + 1) / 2);
  Index k = 0;
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i <= j; ++i) out(k++) = S(i, j);
  return out;
}

}  // namespace

Manifold Manifold::stiefel(Index m, Index r) {
  if (r > m || r < 1) throw Error(Errc::InvalidInput, "stiefel: need 1 <= r <= m");
  SmoothMap h;
  h.in_dim = m * r;
  h.out_dim = r * (r + 1) / 2;
  h.value = [m, r](const Vec& y) {
    Mat U = unvec(y, m, r);
    return upper(U.transpose() * U - Mat::Identity(r, r));
  };
  h.jacobian = [m, r](const Vec& y) {
    Mat U = unvec(y, m, r);
    Mat J(r * (r + 1) / 2, m * r);
    for (Index c = 0; c < m * r; ++c) {
      Mat E = Mat::Zero(m, r);
      E(c % m, c / m) = 1.0;
      Mat S = E.transpose() * U;
      J.col(c) = upper(S + S.transpose());
    }
    return J;
  };
  h.second = [m, r](const Vec&, const Vec& v) {
    Mat V = unvec(v, m, r);
    return upper(2.0 * V.transpose() * V);
  };
  Manifold M = embedded(h, "stiefel");
  M.kind_ = ManifoldKind::Stiefel;
  M.sampler_ = [m, r](Rng& rng) { return vec(random_orthonormal(m, r, rng)); };
  return M;
}

Manifold Manifold::product(std::vector<Manifold> factors) {
  if (factors.empty()) throw Error(Errc::InvalidInput, "product manifold needs a factor");
  Manifold M;
  M.kind_ = ManifoldKind::Product;
  M.name_ = "product";
  std::vector<Index> offs, hoffs;
  Index a = 0, k = 0;
  for (const auto& f : factors) {
    offs.push_back(a);
    hoffs.push_back(k);
    a += f.ambient_dim();
    k += f.codim();
  }
  M.ambient_ = a;
  M.codim_ = k;
  M.offsets_ = offs;
  auto fs = std::make_shared<std::vector<Manifold>>(factors);
  SmoothMap h;
  h.in_dim = a;
  h.out_dim = k;
  h.value = [fs, offs, hoffs, k](const Vec& y) {
    Vec out(k);
    for (std::size_t i = 0; i < fs->size(); ++i) {
      const auto& f = (*fs)[i];
      out.segment(hoffs[i], f.codim()) = f.h(y.segment(offs[i], f.ambient_dim()));
    }
    return out;
  };
  h.jacobian = [fs, offs, hoffs, k, a](const Vec& y) {
    Mat J = Mat::Zero(k, a);
    for (std::size_t i = 0; i < fs->size(); ++i) {
      const auto& f = (*fs)[i];
      J.block(hoffs[i], offs[i], f.codim(), f.ambient_dim()) = f.dh(y.segment(offs[i], f.ambient_dim()));
    }
    return J;
  };
  h.second = [fs, offs, hoffs, k](const Vec& y, const Vec& v) {
    Vec out(k);
    for (std::size_t i = 0; i < fs->size(); ++i) {
      const auto& f = (*fs)[i];
      out.segment(hoffs[i], f.codim()) =
          f.d2h(y.segment(offs[i], f.ambient_dim()), v.segment(offs[i], f.ambient_dim()));
    }
    return out;
  };
  M.defining_ = h;
  bool all_sampled = true;
  for (const auto& f : factors) all_sampled = all_sampled && f.has_sampler();
  if (all_sampled) {
    M.sampler_ = [fs, a, offs](Rng& rng) {
      Vec y(a);
      for (std::size_t i = 0; i < fs->size(); ++i)
        y.segment(offs[i], (*fs)[i].ambient_dim()) = (*fs)[i].sample(rng);
      return y;
    };
  }
  M.factors_ = std::move(factors);
  return M;
}

Vec Manifold::h(const Vec& y) const { return defining_.value(y); }
Mat Manifold::dh(const Vec& y) const { return defining_.jacobian(y); }
Vec Manifold::d2h(const Vec& y, const Vec& v) const { return defining_.second(y, v); }

double manifold_residual(const Manifold& M, const Vec& y) {
  if (M.codim() == 0) return 0.0;
  return M.h(y).norm();
}

Mat tangent_basis(const Manifold& M, const Vec& y, const TolerancePolicy& tol) {
  if (y.size() != M.ambient_dim()) throw Error(Errc::InvalidInput, "tangent_basis: dimension mismatch");
  if (M.codim() == 0) return Mat::Identity(M.ambient_dim(), M.ambient_dim());
  Mat J = M.dh(y);
  Mat K = kernel_basis(J, tol);
  if (K.cols() != M.dim())
    throw Error(Errc::ConstantRankViolation,
                "rank Dh(y) = " + std::to_string(M.ambient_dim() - K.cols()) + ", declared " +
                    std::to_string(M.codim()));
  return K;
}

Vec second_order_correction(const Manifold& M, const Vec& y, const Vec& v, const TolerancePolicy& tol) {
  if (M.codim() == 0) return Vec::Zero(M.ambient_dim());
  Mat J = M.dh(y);
  if (numerical_rank(J, tol) != M.codim())
    throw Error(Errc::ConstantRankViolation, "second_order_correction: rank drop of Dh(y)");
  return min_norm_solve(J, -M.d2h(y, v), tol);
}

Vec project_to_manifold(const Manifold& M, const Vec& z0, int max_iter) {
  if (M.codim() == 0) return z0;
  Vec z = z0;
  double res = M.h(z).norm();
  for (int it = 0; it < max_iter && res > 1e-15; ++it) {
    Vec step = min_norm_solve(M.dh(z), M.h(z));
    Vec zn = z - step;
    double nres = M.h(zn).norm();
    if (!std::isfinite(nres)) break;
    if (nres >= res && res < 1e-12) break;
    z = zn;
    res = nres;
  }
  if (!(res <= 1e-10)) throw Error(Errc::RetractionFailure, "Gauss-Newton residual " + std::to_string(res));
  return z;
}

Vec curve(const Manifold& M, const Vec& y, const Vec& v, const Vec& u, double t) {
  if (t == 0.0) return y;
  Vec z = y + t * v + 0.5 * t * t * u;
  return project_to_manifold(M, z);
}

Vec project_tangent(const Manifold& M, const Vec& y, const Vec& z) {
  Mat B = tangent_basis(M, y);
  return B * (B.transpose() * z);
}

Vec random_point(const Manifold& M, std::uint64_t seed) {
  Rng rng(seed);
  if (M.has_sampler()) return M.sample(rng);
  for (int attempt = 0; attempt < 20; ++attempt) {
    try {
      return project_to_manifold(M, gaussian_vec(M.ambient_dim(), rng), 200);
    } catch (const Error&) {
    }
  }
  throw Error(Errc::RetractionFailure, "random_point: no convergent start");
}

Vec random_tangent(const Manifold& M, const Vec& y, std::uint64_t seed) {
  Rng rng(seed);
  Mat B = tangent_basis(M, y);
  if (B.cols() == 0) return Vec::Zero(M.ambient_dim());
  Vec a = gaussian_vec(B.cols(), rng);
  Vec v = B * a;
  return v / v.norm();
}

void check_constant_rank(const Manifold& M, const Vec& y, std::uint64_t seed, const TolerancePolicy& tol) {
  if (M.codim() == 0) return;
  auto check = [&](const Vec& p) {
    Index r = numerical_rank(M.dh(p), tol);
    if (r != M.codim())
      throw Error(Errc::ConstantRankViolation,
                  "rank Dh = " + std::to_string(r) + " near y, declared " + std::to_string(M.codim()));
  };
  check(y);
  for (int i = 0; i < 4; ++i) {
    Vec v = random_tangent(M, y, split_seed(seed, static_cast<std::uint64_t>(i)));
    check(curve(M, y, v, Vec::Zero(y.size()), 1e-3));
  }
}

}  // namespace lifts
