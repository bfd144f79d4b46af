#include "liftcalc/cones.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lifts {

const char* set_kind_name(SetKind k) {
  switch (k) {
    case SetKind::Simplex: return "simplex";
    case SetKind::StochasticMatrices: return "stochastic_matrices";
    case SetKind::Ball: return "ball";
    case SetKind::Annulus: return "annulus";
    case SetKind::BoundedRank: return "bounded_rank";
    case SetKind::PsdBoundedRank: return "psd_bounded_rank";
    case SetKind::SmoothSdpSlice: return "smooth_sdp_slice";
    case SetKind::NodalCubic: return "nodal_cubic";
    case SetKind::Disk: return "disk";
    case SetKind::Orthant: return "orthant";
    case SetKind::Product: return "product";
    case SetKind::Preimage: return "preimage";
    case SetKind::Rank1Tensors: return "rank1_tensors";
  }
  return "?";
}

const char* cone_kind_name(ConeKind k) {
  switch (k) {
    case ConeKind::Subspace: return "subspace";
    case ConeKind::BoundedRank: return "bounded_rank";
    case ConeKind::PsdRank: return "psd_rank";
    case ConeKind::Polyhedral: return "polyhedral";
    case ConeKind::Product: return "product";
    case ConeKind::IntersectSlice: return "intersect_slice";
    case ConeKind::LineUnion: return "line_union";
    case ConeKind::Rank1: return "rank1";
    case ConeKind::Preimage: return "preimage";
  }
  return "?";
}

// ---------------------------------------------------------------- sets

SetDesc SetDesc::simplex(Index n) {
  SetDesc s;
  s.kind = SetKind::Simplex;
  s.n = n;
  return s;
}
SetDesc SetDesc::stochastic(Index n, Index m) {
  SetDesc s;
  s.kind = SetKind::StochasticMatrices;
  s.n = n;
  s.m = m;
  return s;
}
SetDesc SetDesc::ball(Index n) {
  SetDesc s;
  s.kind = SetKind::Ball;
  s.n = n;
  return s;
}
SetDesc SetDesc::disk(Index n) {
  SetDesc s = ball(n);
  s.kind = SetKind::Disk;
  return s;
}
SetDesc SetDesc::annulus(Index n, double r1, double r2) {
  if (!(0 < r1 && r1 < r2)) throw Error(Errc::InvalidInput, "annulus: need 0 < r1 < r2");
  SetDesc s;
  s.kind = SetKind::Annulus;
  s.n = n;
  s.r1 = r1;
  s.r2 = r2;
  return s;
}
SetDesc SetDesc::bounded_rank(Index m, Index n, Index r) {
  SetDesc s;
  s.kind = SetKind::BoundedRank;
  s.m = m;
  s.n = n;
  s.r = r;
  return s;
}
SetDesc SetDesc::psd_bounded_rank(Index n, Index r) {
  SetDesc s;
  s.kind = SetKind::PsdBoundedRank;
  s.n = n;
  s.r = r;
  return s;
}
SetDesc SetDesc::smooth_sdp_slice(std::vector<Mat> A, Vec b, Index n, Index r) {
  if (static_cast<Index>(A.size()) != b.size()) throw Error(Errc::InvalidInput, "slice: |A| != |b|");
  SetDesc s;
  s.kind = SetKind::SmoothSdpSlice;
  s.A = std::move(A);
  s.b = std::move(b);
  s.n = n;
  s.r = r;
  return s;
}
SetDesc SetDesc::nodal_cubic() {
  SetDesc s;
  s.kind = SetKind::NodalCubic;
  s.n = 2;
  return s;
}
SetDesc SetDesc::orthant(Index n) {
  SetDesc s;
  s.kind = SetKind::Orthant;
  s.n = n;
  return s;
}
SetDesc SetDesc::product(std::vector<SetDesc> factors) {
  SetDesc s;
  s.kind = SetKind::Product;
  s.factors = std::move(factors);
  return s;
}
SetDesc SetDesc::preimage(SmoothMap F, SetDesc inner) {
  if (F.out_dim != inner.ambient_dim()) throw Error(Errc::InvalidInput, "preimage: dimension mismatch");
  SetDesc s;
  s.kind = SetKind::Preimage;
  s.n = F.in_dim;
  s.F = std::make_shared<SmoothMap>(std::move(F));
  s.inner = std::make_shared<SetDesc>(std::move(inner));
  return s;
}
SetDesc SetDesc::rank1_tensors(std::vector<Index> dims) {
  SetDesc s;
  s.kind = SetKind::Rank1Tensors;
  s.dims = std::move(dims);
  return s;
}

Index SetDesc::ambient_dim() const {
  switch (kind) {
    case SetKind::Simplex:
    case SetKind::Ball:
    case SetKind::Disk:
    case SetKind::Annulus:
    case SetKind::Orthant:
    case SetKind::NodalCubic:
    case SetKind::Preimage: return n;
    case SetKind::StochasticMatrices: return n * m;
    case SetKind::BoundedRank: return m * n;
    case SetKind::PsdBoundedRank:
    case SetKind::SmoothSdpSlice: return n * n;
    case SetKind::Product: {
      Index d = 0;
      for (const auto& f : factors) d += f.ambient_dim();
      return d;
    }
    case SetKind::Rank1Tensors:
      return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<Index>());
  }
  return 0;
}

// ---------------------------------------------------------------- tensors

namespace {

Index tensor_size(const std::vector<Index>& dims) {
  return std::accumulate(dims.begin(), dims.end(), Index{1}, std::multiplies<Index>());
}

std::vector<Index> multi_index(Index lin, const std::vector<Index>& dims) {
  std::vector<Index> idx(dims.size());
  for (std::size_t k = 0; k < dims.size(); ++k) {
    idx[k] = lin % dims[k];
    lin /= dims[k];
  }
  return idx;
}

// contraction of t with all factors except mode k
Vec contract_except(const Vec& t, const std::vector<Index>& dims, const std::vector<Vec>& f, std::size_t k) {
  Vec out = Vec::Zero(dims[k]);
  for (Index lin = 0; lin < t.size(); ++lin) {
    auto idx = multi_index(lin, dims);
    double p = t(lin);
    for (std::size_t j = 0; j < dims.size(); ++j)
      if (j != k) p *= f[j](idx[j]);
    out(idx[k]) += p;
  }
  return out;
}

Mat unfold(const Vec& t, const std::vector<Index>& dims, std::size_t k) {
  Index total = t.size();
  Mat M = Mat::Zero(dims[k], total / dims[k]);
  for (Index lin = 0; lin < total; ++lin) {
    auto idx = multi_index(lin, dims);
    Index col = 0, stride = 1;
    for (std::size_t j = 0; j < dims.size(); ++j) {
      if (j == k) continue;
      col += idx[j] * stride;
      stride *= dims[j];
    }
    M(idx[k], col) = t(lin);
  }
  return M;
}

}  // namespace

Vec outer(const std::vector<Vec>& factors) {
  std::vector<Index> dims;
  for (const auto& f : factors) dims.push_back(f.size());
  Vec t(tensor_size(dims));
  for (Index lin = 0; lin < t.size(); ++lin) {
    auto idx = multi_index(lin, dims);
    double p = 1.0;
    for (std::size_t j = 0; j < dims.size(); ++j) p *= factors[j](idx[j]);
    t(lin) = p;
  }
  return t;
}

Rank1Fit best_rank1(const Vec& t, const std::vector<Index>& dims, int restarts, std::uint64_t seed) {
  Rank1Fit best;
  best.factors.clear();
  for (Index d : dims) best.factors.push_back(Vec::Zero(d));
  best.tensor = Vec::Zero(t.size());
  if (t.norm() == 0.0) {
    for (auto& f : best.factors) f(0) = 1.0;
    return best;
  }
  Rng rng(seed);
  for (int rs = 0; rs <= restarts; ++rs) {
    std::vector<Vec> f(dims.size());
    for (std::size_t k = 0; k < dims.size(); ++k) {
      if (rs == 0) {
        f[k] = svd(unfold(t, dims, k)).U.col(0);
      } else {
        f[k] = gaussian_vec(dims[k], rng);
        f[k].normalize();
      }
    }
    double lam = 0;
    for (int it = 0; it < 500; ++it) {
      double prev = lam;
      for (std::size_t k = 0; k < dims.size(); ++k) {
        Vec g = contract_except(t, dims, f, k);
        double nrm = g.norm();
        if (nrm == 0.0) break;
        f[k] = g / nrm;
      }
      Vec g = contract_except(t, dims, f, 0);
      lam = g.dot(f[0]);
      if (std::abs(std::abs(lam) - std::abs(prev)) < 1e-15 * std::max(1.0, std::abs(lam))) break;
    }
    if (std::abs(lam) > std::abs(best.lambda)) {
      best.lambda = lam;
      best.factors = f;
    }
  }
  best.tensor = best.lambda * outer(best.factors);
  return best;
}

// ---------------------------------------------------------------- residuals

namespace {

double psd_rank_residual(const Mat& X, Index r) {
  double asym = (X - X.transpose()).norm();
  SymEig e = sym_eig(X);
  const Index n = X.rows();
  double neg = std::max(0.0, -e.values(0));
  double extra = 0.0;
  if (r < n) extra = std::max(0.0, e.values(n - 1 - r));  // (r+1)-th largest
  return std::max({asym, neg, extra});
}

}  // namespace

double set_residual(const SetDesc& set, const Vec& x) {
  if (x.size() != set.ambient_dim()) throw Error(Errc::InvalidInput, "set_residual: dimension mismatch");
  switch (set.kind) {
    case SetKind::Simplex:
      return std::max(std::abs(x.sum() - 1.0), std::max(0.0, -x.minCoeff()));
    case SetKind::StochasticMatrices: {
      double res = 0;
      for (Index j = 0; j < set.m; ++j)
        res = std::max(res, set_residual(SetDesc::simplex(set.n), x.segment(j * set.n, set.n)));
      return res;
    }
    case SetKind::Ball:
    case SetKind::Disk: return std::max(0.0, x.norm() - 1.0);
    case SetKind::Annulus: return std::max({0.0, set.r1 - x.norm(), x.norm() - set.r2});
    case SetKind::Orthant: return std::max(0.0, -x.minCoeff());
    case SetKind::BoundedRank: {
      Vec s = svd(unvec(x, set.m, set.n)).s;
      return set.r < s.size() ? s(set.r) : 0.0;
    }
    case SetKind::PsdBoundedRank: return psd_rank_residual(unvec(x, set.n, set.n), set.r);
    case SetKind::SmoothSdpSlice: {
      Mat X = unvec(x, set.n, set.n);
      double res = psd_rank_residual(X, set.r);
      for (std::size_t i = 0; i < set.A.size(); ++i)
        res = std::max(res, std::abs((set.A[i].cwiseProduct(X)).sum() - set.b(static_cast<Index>(i))));
      return res;
    }
    case SetKind::NodalCubic: return std::abs(x(1) * x(1) - x(0) * x(0) * (x(0) + 1.0));
    case SetKind::Product: {
      double res = 0;
      Index o = 0;
      for (const auto& f : set.factors) {
        res = std::max(res, set_residual(f, x.segment(o, f.ambient_dim())));
        o += f.ambient_dim();
      }
      return res;
    }
    case SetKind::Preimage: return set_residual(*set.inner, set.F->value(x));
    case SetKind::Rank1Tensors: return (x - best_rank1(x, set.dims).tensor).norm();
  }
  return 0;
}

Vec project_simplex(const Vec& v) {
  const Index n = v.size();
  std::vector<double> u(v.data(), v.data() + n);
  std::sort(u.begin(), u.end(), std::greater<double>());
  double css = 0, theta = 0;
  for (Index i = 0; i < n; ++i) {
    css += u[static_cast<std::size_t>(i)];
    double t = (css - 1.0) / static_cast<double>(i + 1);
    if (u[static_cast<std::size_t>(i)] - t > 0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

namespace {

Mat truncate_rank(const Mat& X, Index r) {
  Svd d = svd(X);
  Index k = std::min<Index>(r, d.s.size());
  return d.U.leftCols(k) * d.s.head(k).asDiagonal() * d.V.leftCols(k).transpose();
}

Mat project_psd_rank(const Mat& X, Index r) {
  SymEig e = sym_eig(sym(X));
  const Index n = X.rows();
  Mat out = Mat::Zero(n, n);
  for (Index i = n - 1; i >= std::max<Index>(0, n - r); --i) {
    double lam = std::max(0.0, e.values(i));
    out += lam * e.vectors.col(i) * e.vectors.col(i).transpose();
  }
  return out;
}

// R with R R^T = X for PSD X of rank <= r (padded with zero columns).
Mat psd_factor(const Mat& X, Index r) {
  SymEig e = sym_eig(sym(X));
  const Index n = X.rows();
  Mat R = Mat::Zero(n, r);
  for (Index j = 0; j < std::min(r, n); ++j) {
    double lam = std::max(0.0, e.values(n - 1 - j));
    R.col(j) = std::sqrt(lam) * e.vectors.col(n - 1 - j);
  }
  return R;
}

Vec nodal_point(double t) { return Vec((Vec(2) << t * t - 1.0, t * t * t - t).finished()); }

}  // namespace

Vec sample_near(const SetDesc& set, const Vec& x, double radius, Rng& rng) {
  const Index d = set.ambient_dim();
  auto step = [&]() {
    Vec g = gaussian_vec(d, rng);
    return Vec(radius * uniform(0.2, 1.0, rng) * g / g.norm());
  };
  switch (set.kind) {
    case SetKind::Simplex: return project_simplex(x + step());
    case SetKind::StochasticMatrices: {
      Vec z = x + step();
      for (Index j = 0; j < set.m; ++j) z.segment(j * set.n, set.n) = project_simplex(z.segment(j * set.n, set.n));
      return z;
    }
    case SetKind::Ball:
    case SetKind::Disk: {
      Vec z = x + step();
      return z.norm() > 1.0 ? Vec(z / z.norm()) : z;
    }
    case SetKind::Annulus: {
      Vec z = x + step();
      double nz = z.norm();
      if (nz < set.r1) z *= set.r1 / nz;
      if (nz > set.r2) z *= set.r2 / nz;
      return z;
    }
    case SetKind::Orthant: return (x + step()).cwiseMax(0.0);
    case SetKind::BoundedRank: return vec(truncate_rank(unvec(x + step(), set.m, set.n), set.r));
    case SetKind::PsdBoundedRank: return vec(project_psd_rank(unvec(x + step(), set.n, set.n), set.r));
    case SetKind::SmoothSdpSlice: {
      const Index n = set.n, r = set.r, m = static_cast<Index>(set.A.size());
      Mat R = psd_factor(unvec(x, n, n), r);
      Mat G = gaussian(n, r, rng);
      R += radius * uniform(0.2, 1.0, rng) * G / G.norm();
      for (int it = 0; it < 100; ++it) {
        Vec h(m);
        Mat J(m, n * r);
        for (Index i = 0; i < m; ++i) {
          h(i) = (set.A[static_cast<std::size_t>(i)] * R).cwiseProduct(R).sum() - set.b(i);
          Mat S = set.A[static_cast<std::size_t>(i)] + set.A[static_cast<std::size_t>(i)].transpose();
          J.row(i) = vec(S * R).transpose();
        }
        if (h.norm() < 1e-14) break;
        R -= unvec(min_norm_solve(J, h), n, r);
      }
      return vec(R * R.transpose());
    }
    case SetKind::NodalCubic: {
      double t0 = std::sqrt(std::max(0.0, x(0) + 1.0));
      std::vector<double> ts;
      for (double t : {t0, -t0})
        if ((nodal_point(t) - x).norm() < 1e-6) ts.push_back(t);
      if (ts.empty()) throw Error(Errc::SamplerExhausted, "nodal cubic: no parameter for x");
      double t = ts[static_cast<std::size_t>(uniform(0.0, 1.0, rng) < 0.5 ? 0 : ts.size() - 1)];
      double dt = radius * uniform(0.2, 1.0, rng) * (uniform(0.0, 1.0, rng) < 0.5 ? -1.0 : 1.0) / 2.0;
      return nodal_point(t + dt);
    }
    case SetKind::Product: {
      Vec z(d);
      Index o = 0;
      double sub = radius / std::sqrt(static_cast<double>(set.factors.size()));
      for (const auto& f : set.factors) {
        z.segment(o, f.ambient_dim()) = sample_near(f, x.segment(o, f.ambient_dim()), sub, rng);
        o += f.ambient_dim();
      }
      return z;
    }
    case SetKind::Preimage: {
      Vec s = step();
      for (int k = 0; k < 40; ++k) {
        Vec z = x + s;
        if (set_residual(set, z) <= 1e-12) return z;
        s *= 0.5;
      }
      throw Error(Errc::SamplerExhausted, "preimage sampler");
    }
    case SetKind::Rank1Tensors: return best_rank1(x + step(), set.dims).tensor;
  }
  throw Error(Errc::SamplerExhausted, "no sampler");
}

// ---------------------------------------------------------------- cone construction

namespace {

TangentCone subspace(const Mat& basis, Index dim) {
  TangentCone c;
  c.kind = ConeKind::Subspace;
  c.dim = dim;
  c.basis = basis;
  return c;
}

TangentCone polyhedral(const Mat& E, const Mat& G, Index dim) {
  if (G.rows() == 0) return subspace(E.rows() ? kernel_basis(E) : Mat(Mat::Identity(dim, dim)), dim);
  TangentCone c;
  c.kind = ConeKind::Polyhedral;
  c.dim = dim;
  c.E = E;
  c.G = G;
  for (Index i = 0; i < c.G.rows(); ++i) c.G.row(i).normalize();
  return c;
}

// Orthonormal basis of {U A V^T + U B Vp^T + Up C V^T} in R^{m x n}.
Mat lowrank_tangent_basis(const Mat& U, const Mat& Up, const Mat& V, const Mat& Vp) {
  const Index m = U.rows(), n = V.rows(), s = U.cols();
  std::vector<Vec> cols;
  for (Index i = 0; i < s; ++i) {
    for (Index j = 0; j < s; ++j) cols.push_back(vec(U.col(i) * V.col(j).transpose()));
    for (Index j = 0; j < Vp.cols(); ++j) cols.push_back(vec(U.col(i) * Vp.col(j).transpose()));
  }
  for (Index i = 0; i < Up.cols(); ++i)
    for (Index j = 0; j < s; ++j) cols.push_back(vec(Up.col(i) * V.col(j).transpose()));
  Mat B(m * n, static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) B.col(static_cast<Index>(k)) = cols[k];
  return B;
}

// Orthonormal basis of {U [V1 V2; V2^T 0] U^T} with U = [Us Up].
Mat psd_free_basis(const Mat& Us, const Mat& Up) {
  const Index n = Us.rows(), s = Us.cols();
  std::vector<Vec> cols;
  const double r2 = 1.0 / std::sqrt(2.0);
  for (Index i = 0; i < s; ++i) {
    cols.push_back(vec(Us.col(i) * Us.col(i).transpose()));
    for (Index j = i + 1; j < s; ++j)
      cols.push_back(vec(r2 * (Us.col(i) * Us.col(j).transpose() + Us.col(j) * Us.col(i).transpose())));
    for (Index j = 0; j < Up.cols(); ++j)
      cols.push_back(vec(r2 * (Us.col(i) * Up.col(j).transpose() + Up.col(j) * Us.col(i).transpose())));
  }
  Mat B(n * n, static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) B.col(static_cast<Index>(k)) = cols[k];
  return B;
}

Mat constraint_rows(const std::vector<Mat>& A) {
  if (A.empty()) return Mat(0, 0);
  Mat R(static_cast<Index>(A.size()), A[0].size());
  for (std::size_t i = 0; i < A.size(); ++i) R.row(static_cast<Index>(i)) = vec(A[i]).transpose();
  return R;
}

}  // namespace

TangentCone cone_at(const SetDesc& set, const Vec& x, const TolerancePolicy& tol) {
  const Index d = set.ambient_dim();
  if (x.size() != d) throw Error(Errc::InvalidInput, "cone_at: dimension mismatch");
  double res = set_residual(set, x);
  if (res > 1e-9 * std::max(1.0, x.norm()))
    throw Error(Errc::InvalidInput, std::string("cone_at: point not in ") + set_kind_name(set.kind) +
                                        ", residual " + std::to_string(res));
  const double act = tol.psd_tol;
  switch (set.kind) {
    case SetKind::Simplex:
    case SetKind::Orthant: {
      Mat E = set.kind == SetKind::Simplex ? Mat(Mat::Ones(1, d)) : Mat(0, d);
      std::vector<Index> active;
      for (Index i = 0; i < d; ++i)
        if (x(i) <= act) active.push_back(i);
      Mat G = Mat::Zero(static_cast<Index>(active.size()), d);
      for (std::size_t k = 0; k < active.size(); ++k) G(static_cast<Index>(k), active[k]) = 1.0;
      return polyhedral(E, G, d);
    }
    case SetKind::StochasticMatrices: {
      TangentCone c;
      c.kind = ConeKind::Product;
      c.dim = d;
      for (Index j = 0; j < set.m; ++j) {
        c.offsets.push_back(j * set.n);
        c.parts.push_back(cone_at(SetDesc::simplex(set.n), x.segment(j * set.n, set.n), tol));
      }
      return c;
    }
    case SetKind::Ball:
    case SetKind::Disk:
      if (x.norm() < 1.0 - act) return subspace(Mat::Identity(d, d), d);
      return polyhedral(Mat(0, d), Mat(-x.transpose() / x.norm()), d);
    case SetKind::Annulus:
      if (x.norm() > set.r1 + act && x.norm() < set.r2 - act) return subspace(Mat::Identity(d, d), d);
      if (x.norm() <= set.r1 + act) return polyhedral(Mat(0, d), Mat(x.transpose() / x.norm()), d);
      return polyhedral(Mat(0, d), Mat(-x.transpose() / x.norm()), d);
    case SetKind::BoundedRank: {
      const Index m = set.m, n = set.n, r = set.r;
      if (r >= std::min(m, n)) return subspace(Mat::Identity(d, d), d);
      Mat X = unvec(x, m, n);
      Svd sv = svd(X);
      Index s = numerical_rank(X, tol);
      TangentCone c;
      c.m = m;
      c.n = n;
      c.s = s;
      c.r = r;
      c.U = sv.U.leftCols(s);
      c.V = sv.V.leftCols(s);
      c.Uperp = complement_basis(c.U, m, tol);
      c.Vperp = complement_basis(c.V, n, tol);
      c.rank_gap = s < sv.s.size() ? sv.s(s) : 0.0;
      if (s >= r) {
        TangentCone sub = subspace(lowrank_tangent_basis(c.U, c.Uperp, c.V, c.Vperp), d);
        sub.s = s;
        sub.rank_gap = s > 0 ? sv.s(s - 1) : 0.0;
        return sub;
      }
      c.kind = ConeKind::BoundedRank;
      c.dim = d;
      return c;
    }
    case SetKind::PsdBoundedRank: {
      const Index n = set.n, r = set.r;
      Mat X = sym(unvec(x, n, n));
      SymEig e = sym_eig(X);
      Index s = numerical_rank(X, tol);
      TangentCone c;
      c.n = c.m = n;
      c.s = s;
      c.r = r;
      c.U = e.vectors.rightCols(s).rowwise().reverse();
      c.Uperp = e.vectors.leftCols(n - s);
      c.rank_gap = n - s - 1 >= 0 ? std::abs(e.values(n - s - 1)) : 0.0;
      if (s >= r) {
        TangentCone sub = subspace(psd_free_basis(c.U, c.Uperp), d);
        sub.s = s;
        return sub;
      }
      c.kind = ConeKind::PsdRank;
      c.dim = d;
      return c;
    }
    case SetKind::SmoothSdpSlice: {
      TangentCone base = cone_at(SetDesc::psd_bounded_rank(set.n, set.r), x, tol);
      Mat A = constraint_rows(set.A);
      if (base.kind == ConeKind::Subspace) {
        if (A.rows() == 0) return base;
        Mat K = kernel_basis(A * base.basis, tol);
        TangentCone sub = subspace(range_basis(base.basis * K, tol), d);
        sub.s = base.s;
        return sub;
      }
      TangentCone c;
      c.kind = ConeKind::IntersectSlice;
      c.dim = d;
      c.A = A;
      c.s = base.s;
      c.r = base.r;
      c.rank_gap = base.rank_gap;
      c.base = std::make_shared<TangentCone>(base);
      return c;
    }
    case SetKind::NodalCubic: {
      if (x.norm() <= act) {
        TangentCone c;
        c.kind = ConeKind::LineUnion;
        c.dim = 2;
        c.basis = Mat(2, 2);
        c.basis << 1, 1, 1, -1;
        c.basis /= std::sqrt(2.0);
        return c;
      }
      Vec grad(2);
      grad << -(3 * x(0) * x(0) + 2 * x(0)), 2 * x(1);
      Mat t(2, 1);
      t << -grad(1), grad(0);
      return subspace(t / t.norm(), 2);
    }
    case SetKind::Product: {
      TangentCone c;
      c.kind = ConeKind::Product;
      c.dim = d;
      Index o = 0;
      for (const auto& f : set.factors) {
        c.offsets.push_back(o);
        c.parts.push_back(cone_at(f, x.segment(o, f.ambient_dim()), tol));
        o += f.ambient_dim();
      }
      return c;
    }
    case SetKind::Preimage: {
      TangentCone base = cone_at(*set.inner, set.F->value(x), tol);
      Mat J = set.F->jacobian(x);
      if (auto B = as_subspace(base)) {
        Mat P = Mat::Identity(J.rows(), J.rows()) - projector(*B, J.rows());
        return subspace(kernel_basis(P * J, tol), d);
      }
      TangentCone c;
      c.kind = ConeKind::Preimage;
      c.dim = d;
      c.A = J;
      c.base = std::make_shared<TangentCone>(base);
      return c;
    }
    case SetKind::Rank1Tensors: {
      TangentCone c;
      c.dims = set.dims;
      c.dim = d;
      if (x.norm() <= act) {
        c.kind = ConeKind::Rank1;
        return c;
      }
      Rank1Fit fit = best_rank1(x, set.dims);
      std::vector<Vec> cols;
      for (std::size_t k = 0; k < set.dims.size(); ++k)
        for (Index i = 0; i < set.dims[k]; ++i) {
          std::vector<Vec> f = fit.factors;
          f[k] = Vec::Unit(set.dims[k], i);
          cols.push_back(outer(f));
        }
      Mat B(d, static_cast<Index>(cols.size()));
      for (std::size_t k = 0; k < cols.size(); ++k) B.col(static_cast<Index>(k)) = cols[k];
      return subspace(range_basis(B, tol), d);
    }
  }
  throw Error(Errc::InvalidInput, "cone_at: unsupported set");
}

std::optional<Mat> as_subspace(const TangentCone& cone) {
  switch (cone.kind) {
    case ConeKind::Subspace: return cone.basis;
    case ConeKind::Polyhedral:
      if (cone.G.rows() == 0) return cone.E.rows() ? kernel_basis(cone.E) : Mat(Mat::Identity(cone.dim, cone.dim));
      return std::nullopt;
    case ConeKind::Product: {
      std::vector<Mat> bs;
      Index cols = 0;
      for (const auto& p : cone.parts) {
        auto b = as_subspace(p);
        if (!b) return std::nullopt;
        bs.push_back(*b);
        cols += b->cols();
      }
      Mat B = Mat::Zero(cone.dim, cols);
      Index c = 0;
      for (std::size_t i = 0; i < bs.size(); ++i) {
        B.block(cone.offsets[i], c, bs[i].rows(), bs[i].cols()) = bs[i];
        c += bs[i].cols();
      }
      return B;
    }
    default: return std::nullopt;
  }
}

// ---------------------------------------------------------------- membership

namespace {

// (Up^T V Vp) for BoundedRank, (Up^T sym(V) Up) for PsdRank
Mat perp_block(const TangentCone& c, const Vec& v) {
  if (c.kind == ConeKind::BoundedRank) return c.Uperp.transpose() * unvec(v, c.m, c.n) * c.Vperp;
  return c.Uperp.transpose() * sym(unvec(v, c.n, c.n)) * c.Uperp;
}

double sval(const Mat& M, Index k) {
  if (M.size() == 0) return 0.0;
  Vec s = svd(M).s;
  return k < s.size() ? s(k) : 0.0;
}

}  // namespace

MemberResult member(const TangentCone& cone, const Vec& v, double tol) {
  if (v.size() != cone.dim) throw Error(Errc::InvalidInput, "member: dimension mismatch");
  double viol = 0;
  switch (cone.kind) {
    case ConeKind::Subspace: viol = (v - cone.basis * (cone.basis.transpose() * v)).norm(); break;
    case ConeKind::Polyhedral: {
      if (cone.E.rows()) viol = (cone.E * v).cwiseAbs().maxCoeff();
      if (cone.G.rows()) viol = std::max(viol, std::max(0.0, -(cone.G * v).minCoeff()));
      break;
    }
    case ConeKind::BoundedRank: viol = sval(perp_block(cone, v), cone.r - cone.s); break;
    case ConeKind::PsdRank: {
      Mat V = unvec(v, cone.n, cone.n);
      Mat B = perp_block(cone, v);
      double neg = B.size() ? std::max(0.0, -min_eig(B)) : 0.0;
      viol = std::max({(V - V.transpose()).norm() / std::sqrt(2.0), neg, sval(B, cone.r - cone.s)});
      break;
    }
    case ConeKind::LineUnion: {
      viol = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < cone.basis.cols(); ++j)
        viol = std::min(viol, (v - cone.basis.col(j) * cone.basis.col(j).dot(v)).norm());
      break;
    }
    case ConeKind::Rank1: viol = (v - best_rank1(v, cone.dims).tensor).norm(); break;
    case ConeKind::Product:
      for (std::size_t i = 0; i < cone.parts.size(); ++i)
        viol = std::max(viol, member(cone.parts[i], v.segment(cone.offsets[i], cone.parts[i].dim), tol).violation);
      break;
    case ConeKind::IntersectSlice: {
      viol = member(*cone.base, v, tol).violation;
      for (Index i = 0; i < cone.A.rows(); ++i)
        viol = std::max(viol, std::abs(cone.A.row(i).dot(v)) / cone.A.row(i).norm());
      break;
    }
    case ConeKind::Preimage: viol = member(*cone.base, cone.A * v, tol).violation; break;
  }
  return {viol <= tol, viol};
}

// ---------------------------------------------------------------- duals and gaps

namespace {

// Projection onto cl(base* + range(A^T)) by accelerated gradient on the multipliers.
Vec project_slice_dual(const TangentCone& base, const Mat& A, const Vec& z) {
  const Index m = A.rows();
  if (m == 0) return project_dual(base, z);
  const double Lip = std::pow(svd(A).s(0), 2);
  Vec lam = Vec::Zero(m), y = lam;
  double tk = 1.0;
  auto resid = [&](const Vec& l) {
    Vec q = z - A.transpose() * l;
    return Vec(q - project_dual(base, q));
  };
  for (int it = 0; it < 5000; ++it) {
    Vec g = -A * resid(y);
    Vec next = y - g / Lip;
    double tn = 0.5 * (1 + std::sqrt(1 + 4 * tk * tk));
    Vec ny = next + ((tk - 1) / tn) * (next - lam);
    double moved = (next - lam).norm();
    lam = next;
    y = ny;
    tk = tn;
    if (g.norm() < 1e-14 && moved < 1e-15) break;
  }
  Vec q = z - A.transpose() * lam;
  return A.transpose() * lam + project_dual(base, q);
}

// Projection onto cl(J^T base*) by accelerated projected gradient.
Vec project_preimage_dual(const TangentCone& base, const Mat& J, const Vec& z) {
  const Index k = J.rows();
  double Lip = std::pow(svd(J).s(0), 2);
  if (Lip == 0) return Vec::Zero(z.size());
  Vec mu = Vec::Zero(k), y = mu;
  double tk = 1.0;
  for (int it = 0; it < 5000; ++it) {
    Vec g = -J * (z - J.transpose() * y);
    Vec next = project_dual(base, y - g / Lip);
    double tn = 0.5 * (1 + std::sqrt(1 + 4 * tk * tk));
    y = next + ((tk - 1) / tn) * (next - mu);
    double moved = (next - mu).norm();
    mu = next;
    tk = tn;
    if (moved < 1e-15) break;
  }
  return J.transpose() * mu;
}

}  // namespace

Vec project_dual(const TangentCone& cone, const Vec& z) {
  switch (cone.kind) {
    case ConeKind::Subspace: return z - cone.basis * (cone.basis.transpose() * z);
    case ConeKind::LineUnion: {
      Mat B = range_basis(cone.basis);
      return z - B * (B.transpose() * z);
    }
    case ConeKind::BoundedRank:
    case ConeKind::Rank1: return Vec::Zero(z.size());
    case ConeKind::PsdRank: {
      const Index n = cone.n;
      Mat Z = unvec(z, n, n);
      Mat skew = 0.5 * (Z - Z.transpose());
      Mat W3 = cone.Uperp.transpose() * sym(Z) * cone.Uperp;
      Mat P = Mat::Zero(n - cone.s, n - cone.s);
      if (W3.size()) {
        SymEig e = sym_eig(W3);
        for (Index i = 0; i < e.values.size(); ++i)
          if (e.values(i) > 0) P += e.values(i) * e.vectors.col(i) * e.vectors.col(i).transpose();
      }
      return vec(skew + cone.Uperp * P * cone.Uperp.transpose());
    }
    case ConeKind::Polyhedral: {
      const Index d = cone.dim;
      Mat Qe = cone.E.rows() ? range_basis(cone.E.transpose()) : Mat(d, 0);
      Mat Pc = Mat::Identity(d, d) - projector(Qe, d);
      Vec mu = nnls(Pc * cone.G.transpose(), Pc * z);
      Vec gm = cone.G.transpose() * mu;
      return gm + projector(Qe, d) * (z - gm);
    }
    case ConeKind::Product: {
      Vec out(z.size());
      for (std::size_t i = 0; i < cone.parts.size(); ++i)
        out.segment(cone.offsets[i], cone.parts[i].dim) =
            project_dual(cone.parts[i], z.segment(cone.offsets[i], cone.parts[i].dim));
      return out;
    }
    case ConeKind::IntersectSlice: return project_slice_dual(*cone.base, cone.A, z);
    case ConeKind::Preimage: return project_preimage_dual(*cone.base, cone.A, z);
  }
  return z;
}

double stationarity_gap(const TangentCone& cone, const Vec& w) {
  if (w.size() != cone.dim) throw Error(Errc::InvalidInput, "stationarity_gap: dimension mismatch");
  switch (cone.kind) {
    case ConeKind::Subspace: return -(cone.basis.transpose() * w).norm();
    case ConeKind::LineUnion: return -(cone.basis.transpose() * w).cwiseAbs().maxCoeff();
    case ConeKind::BoundedRank: {
      Mat W = unvec(w, cone.m, cone.n);
      Mat Wp = cone.Uperp * (cone.Uperp.transpose() * W * cone.Vperp) * cone.Vperp.transpose();
      double t0 = (W - Wp).squaredNorm();
      Vec s = svd(Wp).s;
      double top = 0;
      for (Index i = 0; i < std::min<Index>(cone.r - cone.s, s.size()); ++i) top += s(i) * s(i);
      return -std::sqrt(t0 + top);
    }
    case ConeKind::PsdRank: {
      Mat S = sym(unvec(w, cone.n, cone.n));
      Mat W1 = cone.U.transpose() * S * cone.U;
      Mat W2 = cone.U.transpose() * S * cone.Uperp;
      Mat W3 = cone.Uperp.transpose() * S * cone.Uperp;
      double c2 = W1.squaredNorm() + 2.0 * W2.squaredNorm();
      double d2 = 0;
      if (W3.size()) {
        Vec ev = sym_eig(W3).values;  // ascending
        for (Index i = 0; i < std::min<Index>(cone.r - cone.s, ev.size()); ++i)
          if (ev(i) < 0) d2 += ev(i) * ev(i);
      }
      return -std::sqrt(c2 + d2);
    }
    case ConeKind::Rank1: return -std::abs(best_rank1(w, cone.dims).lambda);
    case ConeKind::Product: {
      double acc = 0;
      for (std::size_t i = 0; i < cone.parts.size(); ++i) {
        double g = stationarity_gap(cone.parts[i], w.segment(cone.offsets[i], cone.parts[i].dim));
        acc += g * g;
      }
      return -std::sqrt(acc);
    }
    case ConeKind::Polyhedral:
    case ConeKind::IntersectSlice:
    case ConeKind::Preimage: return -(w - project_dual(cone, w)).norm();
  }
  return 0;
}

// ---------------------------------------------------------------- sampling

namespace {

struct Split {
  Mat free;  // basis of the linear part
  Vec q;     // sample of the nonlinear part
};

// Decompose a sample of a rank-type cone into a free linear part and a sampled block.
std::optional<Split> split_sample(const TangentCone& c, Rng& rng) {
  Split sp;
  switch (c.kind) {
    case ConeKind::Subspace:
      sp.free = c.basis;
      sp.q = Vec::Zero(c.dim);
      return sp;
    case ConeKind::PsdRank: {
      sp.free = psd_free_basis(c.U, c.Uperp);
      Index k = std::min(c.r - c.s, c.Uperp.cols());
      Mat C = gaussian(c.Uperp.cols(), std::max<Index>(1, uniform(0, 1, rng) < 0.5 ? k : 1), rng);
      sp.q = vec(c.Uperp * C * C.transpose() * c.Uperp.transpose());
      return sp;
    }
    case ConeKind::BoundedRank: {
      sp.free = lowrank_tangent_basis(c.U, c.Uperp, c.V, c.Vperp);
      Index k = std::min({c.r - c.s, c.Uperp.cols(), c.Vperp.cols()});
      Index kk = uniform(0, 1, rng) < 0.5 ? k : 1;
      Mat P = gaussian(c.Uperp.cols(), kk, rng), Q = gaussian(c.Vperp.cols(), kk, rng);
      sp.q = vec(c.Uperp * P * Q.transpose() * c.Vperp.transpose());
      return sp;
    }
    default: return std::nullopt;
  }
}

Vec sample_one(const TangentCone& cone, Rng& rng) {
  switch (cone.kind) {
    case ConeKind::Subspace: {
      if (cone.basis.cols() == 0) return Vec::Zero(cone.dim);
      return cone.basis * gaussian_vec(cone.basis.cols(), rng);
    }
    case ConeKind::Polyhedral: {
      Vec g = gaussian_vec(cone.dim, rng);
      return g + project_dual(cone, -g);
    }
    case ConeKind::BoundedRank:
    case ConeKind::PsdRank: {
      Split sp = *split_sample(cone, rng);
      double a = uniform(0.0, 1.0, rng);
      Vec lin = sp.free * gaussian_vec(sp.free.cols(), rng);
      double ln = lin.norm(), qn = sp.q.norm();
      return (ln > 0 ? Vec(a * lin / ln) : lin) + (qn > 0 ? Vec((1 - a) * sp.q / qn) : sp.q);
    }
    case ConeKind::LineUnion: {
      Index j = static_cast<Index>(uniform(0.0, static_cast<double>(cone.basis.cols()), rng));
      j = std::min(j, cone.basis.cols() - 1);
      return (uniform(0, 1, rng) < 0.5 ? -1.0 : 1.0) * cone.basis.col(j);
    }
    case ConeKind::Rank1: {
      std::vector<Vec> f;
      for (Index d : cone.dims) f.push_back(gaussian_vec(d, rng));
      return outer(f);
    }
    case ConeKind::Product: {
      Vec out(cone.dim);
      for (std::size_t i = 0; i < cone.parts.size(); ++i) {
        Vec p = sample_one(cone.parts[i], rng);
        double pn = p.norm();
        out.segment(cone.offsets[i], cone.parts[i].dim) = pn > 0 ? Vec(uniform(0.1, 1.0, rng) * p / pn) : p;
      }
      return out;
    }
    case ConeKind::IntersectSlice: {
      auto sp = split_sample(*cone.base, rng);
      if (!sp) throw Error(Errc::SamplerExhausted, "slice sampling needs a rank-type base");
      Mat AB = cone.A * sp->free;
      Vec rhs = -cone.A * sp->q;
      Vec alpha = min_norm_solve(AB, rhs);
      Mat K = kernel_basis(AB);
      if (K.cols()) alpha += K * gaussian_vec(K.cols(), rng) * (0.2 + sp->q.norm());
      Vec v = sp->free * alpha + sp->q;
      if ((cone.A * v).norm() > 1e-10 * std::max(1.0, v.norm())) return Vec::Zero(cone.dim);
      return v;
    }
    case ConeKind::Preimage: {
      Vec d = sample_one(*cone.base, rng);
      Vec v = min_norm_solve(cone.A, d);
      Mat K = kernel_basis(cone.A);
      if (K.cols()) v += K * gaussian_vec(K.cols(), rng);
      if ((cone.A * v - d).norm() > 1e-10 * std::max(1.0, d.norm())) return Vec::Zero(cone.dim);
      return v;
    }
  }
  return Vec::Zero(cone.dim);
}

}  // namespace

std::vector<Vec> sample_directions(const TangentCone& cone, int k, std::uint64_t seed) {
  if (k < 1) throw Error(Errc::InvalidInput, "sample_directions: k >= 1 required");
  Rng rng(seed);
  std::vector<Vec> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < k) {
    if (++attempts > 50 * k + 100) throw Error(Errc::SamplerExhausted, "cone has no nonzero samples");
    Vec v = sample_one(cone, rng);
    double nv = v.norm();
    if (nv < 1e-12) continue;
    out.push_back(v / nv);
  }
  return out;
}

std::vector<Vec> empirical_tangents(const SetDesc& set, const Vec& x, int k, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Vec> out;
  int attempts = 0;
  while (static_cast<int>(out.size()) < k) {
    if (++attempts > 20 * k + 100) throw Error(Errc::SamplerExhausted, "empirical_tangents");
    Vec z = sample_near(set, x, 1e-5, rng);
    if (set_residual(set, z) > 1e-9) continue;
    double dist = (z - x).norm();
    if (dist < 1e-13 || dist > 1e-4) continue;
    out.push_back((z - x) / dist);
  }
  return out;
}

}  // namespace lifts
