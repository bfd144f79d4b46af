#include "liftcalc/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lifts {

const char* property_name(Property p) {
  switch (p) {
    case Property::LocalToLocal: return "local=>local";
    case Property::OneToOne: return "1=>1";
    case Property::TwoToOne: return "2=>1";
  }
  return "?";
}

const char* expectation_name(Expectation e) {
  switch (e) {
    case Expectation::Holds: return "Holds";
    case Expectation::Fails: return "Fails";
    case Expectation::Unspecified: return "Unspecified";
  }
  return "?";
}

namespace {

constexpr double kZero = 1e-8;

Expectation holds_if(bool b) { return b ? Expectation::Holds : Expectation::Fails; }

using Directional = std::function<Vec(const Vec&, const Vec&)>;

SmoothMap make_map(Index in, Index out, std::function<Vec(const Vec&)> value, Directional dir, Directional second) {
  SmoothMap f;
  f.in_dim = in;
  f.out_dim = out;
  f.value = std::move(value);
  f.jacobian = [dir, in, out](const Vec& y) {
    Mat J(out, in);
    for (Index c = 0; c < in; ++c) J.col(c) = dir(y, Vec::Unit(in, c));
    return J;
  };
  f.second = std::move(second);
  return f;
}

Mat perm_matrix(const std::vector<Index>& perm) {
  const Index n = static_cast<Index>(perm.size());
  Mat P = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i) P(i, perm[static_cast<std::size_t>(i)]) = 1.0;
  return P;
}

// ------------------------------------------------------------ hadamard

Lift hadamard_lift(Index n) {
  Lift l;
  l.manifold = Manifold::sphere(n - 1);
  l.name = "hadamard";
  l.phi.in_dim = l.phi.out_dim = n;
  l.phi.value = [](const Vec& y) { return Vec(y.cwiseProduct(y)); };
  l.phi.jacobian = [](const Vec& y) { return Mat(Mat(2.0 * y.asDiagonal())); };
  l.phi.second = [](const Vec&, const Vec& v) { return Vec(2.0 * v.cwiseProduct(v)); };
  return l;
}

Vec hadamard_point(Index n, bool boundary, Rng& rng) {
  for (;;) {
    Vec g = gaussian_vec(n, rng);
    if (boundary) {
      std::vector<Index> idx(static_cast<std::size_t>(n));
      std::iota(idx.begin(), idx.end(), Index{0});
      std::shuffle(idx.begin(), idx.end(), rng);
      Index zeros = 1 + static_cast<Index>(uniform(0.0, 1.0, rng) * static_cast<double>(n - 1));
      zeros = std::min(zeros, n - 1);
      for (Index k = 0; k < zeros; ++k) g(idx[static_cast<std::size_t>(k)]) = 0.0;
    } else if (g.cwiseAbs().minCoeff() < 0.05) {
      continue;
    }
    if (g.norm() > 1e-3) return g / g.norm();
  }
}

Vec hadamard_closed_q(const Vec& y, const Vec& v) { return 2.0 * v.cwiseProduct(v) - 2.0 * v.squaredNorm() * y.cwiseProduct(y); }

CatalogEntry make_hadamard(const EntryParams& p) {
  if (p.n < 2) throw Error(Errc::InvalidInput, "hadamard: need n >= 2");
  const Index n = p.n;
  CatalogEntry e;
  e.id = "hadamard";
  e.params = p;
  e.lift = hadamard_lift(n);
  e.set = SetDesc::simplex(n);
  e.regimes = {"interior", "boundary"};
  e.sample_point = [n](const std::string& reg, Rng& rng) {
    if (reg == "interior") return hadamard_point(n, false, rng);
    if (reg == "boundary") return hadamard_point(n, true, rng);
    throw Error(Errc::InvalidInput, "hadamard: unknown regime " + reg);
  };
  e.expected = [](Property prop, const Vec& y) {
    if (prop == Property::OneToOne) return holds_if(y.cwiseAbs().minCoeff() > kZero);
    return Expectation::Holds;
  };
  e.closed_L = [](const Vec& y, const Vec& v) { return Vec(2.0 * y.cwiseProduct(v)); };
  e.closed_Q = [](const Vec& y, const Vec& v) { return hadamard_closed_q(y, v); };
  e.fiber_distance = [n](const Vec& y, const Vec& x, int samples, Rng& rng) {
    FiberDistance fd;
    Vec root = x.cwiseMax(0.0).cwiseSqrt();
    const bool enumerate = n <= 9;
    const long total = enumerate ? (1L << n) : samples;
    double best = std::numeric_limits<double>::infinity();
    for (long k = 0; k < total; ++k) {
      Vec s = root;
      for (Index j = 0; j < n; ++j) {
        bool neg = enumerate ? ((k >> j) & 1L) : (uniform(0.0, 1.0, rng) < 0.5);
        if (neg) s(j) = -s(j);
      }
      best = std::min(best, (s - y).norm());
    }
    fd.sampled_min = best;
    fd.samples = static_cast<int>(total);
    if (enumerate) fd.lower_bound = best;
    return fd;
  };
  return e;
}

CatalogEntry make_hadprod(const EntryParams& p) {
  if (p.n < 2 || p.m < 1) throw Error(Errc::InvalidInput, "hadprod: need n >= 2, m >= 1");
  const Index n = p.n, m = p.m;
  CatalogEntry e;
  e.id = "hadprod";
  e.params = p;
  std::vector<Lift> factors(static_cast<std::size_t>(m), hadamard_lift(n));
  e.lift = product(factors);
  e.lift.name = "hadprod";
  e.set = SetDesc::stochastic(n, m);
  e.regimes = {"interior", "boundary"};
  e.sample_point = [n, m](const std::string& reg, Rng& rng) {
    if (reg != "interior" && reg != "boundary") throw Error(Errc::InvalidInput, "hadprod: unknown regime " + reg);
    Vec y(n * m);
    Index hit = static_cast<Index>(uniform(0.0, 1.0, rng) * static_cast<double>(m));
    hit = std::min(hit, m - 1);
    for (Index j = 0; j < m; ++j) {
      bool boundary = reg == "boundary" && (j == hit || uniform(0.0, 1.0, rng) < 0.3);
      y.segment(j * n, n) = hadamard_point(n, boundary, rng);
    }
    return y;
  };
  e.expected = [](Property prop, const Vec& y) {
    if (prop == Property::OneToOne) return holds_if(y.cwiseAbs().minCoeff() > kZero);
    return Expectation::Holds;
  };
  e.closed_L = [](const Vec& y, const Vec& v) { return Vec(2.0 * y.cwiseProduct(v)); };
  e.closed_Q = [n, m](const Vec& y, const Vec& v) {
    Vec q(n * m);
    for (Index j = 0; j < m; ++j) q.segment(j * n, n) = hadamard_closed_q(y.segment(j * n, n), v.segment(j * n, n));
    return q;
  };
  return e;
}

// ------------------------------------------------------------ fiber products

Lift square_chart(Index k) {
  Lift l;
  l.manifold = Manifold::chart(k);
  l.name = "square";
  l.phi.in_dim = l.phi.out_dim = k;
  l.phi.value = [](const Vec& y) { return Vec(y.cwiseProduct(y)); };
  l.phi.jacobian = [](const Vec& y) { return Mat(Mat(2.0 * y.asDiagonal())); };
  l.phi.second = [](const Vec&, const Vec& v) { return Vec(2.0 * v.cwiseProduct(v)); };
  return l;
}

CatalogEntry make_ball(const EntryParams& p) {
  if (p.n < 1) throw Error(Errc::InvalidInput, "ball: need n >= 1");
  const Index n = p.n;
  SmoothMap F;
  F.in_dim = n;
  F.out_dim = 1;
  F.value = [](const Vec& x) { return Vec::Constant(1, 1.0 - x.squaredNorm()).eval(); };
  F.jacobian = [](const Vec& x) { return Mat(-2.0 * x.transpose()); };
  F.second = [](const Vec&, const Vec& v) { return Vec::Constant(1, -2.0 * v.squaredNorm()).eval(); };
  CatalogEntry e;
  e.id = "ball";
  e.params = p;
  e.lift = fiber_product(F, square_chart(1), "ball");
  e.set = SetDesc::ball(n);
  e.regimes = {"interior", "boundary"};
  e.sample_point = [n](const std::string& reg, Rng& rng) {
    Vec dir = gaussian_vec(n, rng);
    dir /= dir.norm();
    Vec y(n + 1);
    if (reg == "interior") {
      double rho = uniform(0.0, 0.9, rng);
      y.head(n) = rho * dir;
      y(n) = (uniform(0.0, 1.0, rng) < 0.5 ? -1.0 : 1.0) * std::sqrt(1.0 - rho * rho);
    } else if (reg == "boundary") {
      y.head(n) = dir;
      y(n) = 0.0;
    } else {
      throw Error(Errc::InvalidInput, "ball: unknown regime " + reg);
    }
    return y;
  };
  e.expected = [n](Property prop, const Vec& y) {
    if (prop == Property::OneToOne) return holds_if(std::abs(y(n)) > kZero);
    return Expectation::Holds;
  };
  return e;
}

CatalogEntry make_annulus(const EntryParams& p) {
  if (p.n < 1 || !(p.r1 > 0) || !(p.r2 > p.r1)) throw Error(Errc::InvalidInput, "annulus: need n >= 1, 0 < r1 < r2");
  const Index n = p.n;
  const double r1 = p.r1, r2 = p.r2;
  SmoothMap F;
  F.in_dim = n;
  F.out_dim = 2;
  F.value = [r1, r2](const Vec& x) {
    double s = x.squaredNorm();
    return Vec((Vec(2) << s - r1 * r1, r2 * r2 - s).finished());
  };
  F.jacobian = [n](const Vec& x) {
    Mat J(2, n);
    J.row(0) = 2.0 * x.transpose();
    J.row(1) = -2.0 * x.transpose();
    return J;
  };
  F.second = [](const Vec&, const Vec& v) {
    double s = 2.0 * v.squaredNorm();
    return Vec((Vec(2) << s, -s).finished());
  };
  CatalogEntry e;
  e.id = "annulus";
  e.params = p;
  e.lift = fiber_product(F, square_chart(2), "annulus");
  e.set = SetDesc::annulus(n, r1, r2);
  e.regimes = {"interior", "inner", "outer"};
  e.sample_point = [n, r1, r2](const std::string& reg, Rng& rng) {
    Vec dir = gaussian_vec(n, rng);
    dir /= dir.norm();
    double rho;
    if (reg == "interior")
      rho = r1 + (r2 - r1) * uniform(0.1, 0.9, rng);
    else if (reg == "inner")
      rho = r1;
    else if (reg == "outer")
      rho = r2;
    else
      throw Error(Errc::InvalidInput, "annulus: unknown regime " + reg);
    auto sgn = [&rng]() { return uniform(0.0, 1.0, rng) < 0.5 ? -1.0 : 1.0; };
    Vec y(n + 2);
    y.head(n) = rho * dir;
    y(n) = reg == "inner" ? 0.0 : sgn() * std::sqrt(rho * rho - r1 * r1);
    y(n + 1) = reg == "outer" ? 0.0 : sgn() * std::sqrt(r2 * r2 - rho * rho);
    return y;
  };
  e.expected = [n](Property prop, const Vec& y) {
    if (prop == Property::OneToOne) return holds_if(std::abs(y(n)) > kZero && std::abs(y(n + 1)) > kZero);
    return Expectation::Holds;
  };
  return e;
}

// ------------------------------------------------------------ PSD factorizations

SmoothMap gram_map(Index n, Index r) {
  return make_map(
      n * r, n * n, [n, r](const Vec& y) {
        Mat R = unvec(y, n, r);
        return vec(R * R.transpose());
      },
      [n, r](const Vec& y, const Vec& v) {
        Mat R = unvec(y, n, r), D = unvec(v, n, r);
        return vec(D * R.transpose() + R * D.transpose());
      },
      [n, r](const Vec&, const Vec& v) {
        Mat D = unvec(v, n, r);
        return vec(2.0 * D * D.transpose());
      });
}

/// Closed-form membership of d in A_R for X = RR^T; d outside T_X or rank budget => false.
std::optional<bool> psd_a_decompose(Index n, Index r, const Vec& y, const Vec& d) {
  Mat R = unvec(y, n, r);
  Mat D = unvec(d, n, n);
  double scale = std::max(1.0, D.norm());
  if ((D - D.transpose()).norm() > 1e-9 * scale) return false;
  Mat X = R * R.transpose();
  Index s = numerical_rank(R);
  SymEig ex = sym_eig(X);
  Mat Uperp = ex.vectors.leftCols(n - s);
  Mat D3 = sym(Uperp.transpose() * D * Uperp);
  SymEig e3 = sym_eig(D3);
  if (e3.values.size() > 0 && e3.values(0) < -1e-9 * scale) return false;
  const Index budget = r - s;
  const Index k = D3.rows();
  if (k > budget && e3.values(k - budget - 1) > 1e-9 * scale) return false;
  if (budget == 0) {
    // X has full rank r: A_R = im L and D3 must vanish.
    return D3.norm() <= 1e-9 * scale;
  }
  Index kk = std::min(budget, k);
  Mat F = Mat::Zero(k, budget);
  for (Index j = 0; j < kk; ++j) {
    double lam = std::max(0.0, e3.values(k - 1 - j));
    F.col(j) = e3.vectors.col(k - 1 - j) * std::sqrt(lam / 2.0);
  }
  Mat KR = kernel_basis(R);
  Mat Rdot = Uperp * F * KR.transpose();
  Mat Qv = 2.0 * Rdot * Rdot.transpose();
  // residual must lie in im L = {E R^T + R E^T}: symmetric with vanishing Uperp block
  Mat res = D - Qv;
  double off = (Uperp.transpose() * sym(res) * Uperp).norm();
  return off <= 1e-8 * scale;
}

CatalogEntry make_psd_lowrank(const EntryParams& p) {
  if (p.n < 1 || p.r < 1 || p.r > p.n) throw Error(Errc::InvalidInput, "psd_lowrank: need 1 <= r <= n");
  const Index n = p.n, r = p.r;
  CatalogEntry e;
  e.id = "psd_lowrank";
  e.params = p;
  e.lift.manifold = Manifold::chart(n * r);
  e.lift.phi = gram_map(n, r);
  e.lift.name = "psd_lowrank";
  e.set = SetDesc::psd_bounded_rank(n, r);
  e.regimes = {"full_rank", "rank_deficient"};
  e.sample_point = [n, r](const std::string& reg, Rng& rng) {
    if (reg == "full_rank") return vec(gaussian(n, r, rng));
    if (reg == "rank_deficient") {
      Index s = std::min(r - 1, static_cast<Index>(uniform(0.0, 1.0, rng) * static_cast<double>(r)));
      if (s == 0) return Vec(Vec::Zero(n * r));
      return vec(gaussian(n, s, rng) * gaussian(s, r, rng));
    }
    throw Error(Errc::InvalidInput, "psd_lowrank: unknown regime " + reg);
  };
  e.expected = [n, r](Property prop, const Vec& y) {
    if (prop == Property::OneToOne) return holds_if(numerical_rank(unvec(y, n, r)) == r);
    return Expectation::Holds;
  };
  e.closed_L = [n, r](const Vec& y, const Vec& v) {
    Mat R = unvec(y, n, r), D = unvec(v, n, r);
    return vec(D * R.transpose() + R * D.transpose());
  };
  e.closed_Q = [n, r](const Vec&, const Vec& v) {
    Mat D = unvec(v, n, r);
    return vec(2.0 * D * D.transpose());
  };
  e.a_decompose = [n, r](const Vec& y, const Vec& d) { return psd_a_decompose(n, r, y, d); };
  return e;
}

/// Solves <A_i F, F> = b_i for F (n x s) by Gauss-Newton from F.
bool solve_slice(const std::vector<Mat>& A, const Vec& b, Mat& F) {
  const Index m = static_cast<Index>(A.size());
  for (int it = 0; it < 200; ++it) {
    Vec c(m);
    Mat J(m, F.size());
    for (Index i = 0; i < m; ++i) {
      c(i) = (F.transpose() * A[static_cast<std::size_t>(i)] * F).trace() - b(i);
      J.row(i) = vec(2.0 * A[static_cast<std::size_t>(i)] * F).transpose();
    }
    if (!c.allFinite()) return false;
    if (c.norm() <= 1e-14 * std::max(1.0, b.norm())) return true;
    F -= unvec(min_norm_solve(J, c), F.rows(), F.cols());
  }
  return false;
}

CatalogEntry make_burer_monteiro(const EntryParams& p0) {
  EntryParams p = p0;
  if (p.n < 2 || p.r < 1 || p.r > p.n) throw Error(Errc::InvalidInput, "burer_monteiro: need 1 <= r <= n");
  const Index n = p.n, r = p.r;
  if (p.A.empty()) {
    Rng rng(split_seed(p.seed, 0xB3));
    Mat R0 = gaussian(n, r, rng);
    p.b = Vec(p.constraints);
    for (Index i = 0; i < p.constraints; ++i) {
      Mat G = gaussian(n, n, rng);
      Mat Ai = sym(G);
      p.A.push_back(Ai);
      p.b(i) = (R0.transpose() * Ai * R0).trace();
    }
  }
  const Index m = static_cast<Index>(p.A.size());
  if (p.b.size() != m) throw Error(Errc::InvalidInput, "burer_monteiro: |b| != number of constraints");
  for (const auto& Ai : p.A)
    if (Ai.rows() != n || Ai.cols() != n || (Ai - Ai.transpose()).norm() > 1e-12)
      throw Error(Errc::InvalidInput, "burer_monteiro: constraints must be symmetric n x n");
  auto A = std::make_shared<std::vector<Mat>>(p.A);
  Vec b = p.b;

  SmoothMap F;
  F.in_dim = n * n;
  F.out_dim = n * n + m;
  F.value = [A, b, n, m](const Vec& x) {
    Vec out(n * n + m);
    out.head(n * n) = x;
    for (Index i = 0; i < m; ++i) out(n * n + i) = vec((*A)[static_cast<std::size_t>(i)]).dot(x) - b(i);
    return out;
  };
  F.jacobian = [A, n, m](const Vec&) {
    Mat J = Mat::Zero(n * n + m, n * n);
    J.topRows(n * n) = Mat::Identity(n * n, n * n);
    for (Index i = 0; i < m; ++i) J.row(n * n + i) = vec((*A)[static_cast<std::size_t>(i)]).transpose();
    return J;
  };
  F.second = [n, m](const Vec&, const Vec&) { return Vec(Vec::Zero(n * n + m)); };

  Lift psi;
  psi.manifold = Manifold::chart(n * r);
  psi.name = "gram";
  SmoothMap g = gram_map(n, r);
  psi.phi.in_dim = n * r;
  psi.phi.out_dim = n * n + m;
  psi.phi.value = [g, n, m](const Vec& y) {
    Vec out = Vec::Zero(n * n + m);
    out.head(n * n) = g.value(y);
    return out;
  };
  psi.phi.jacobian = [g, n, m, r](const Vec& y) {
    Mat J = Mat::Zero(n * n + m, n * r);
    J.topRows(n * n) = g.jacobian(y);
    return J;
  };
  psi.phi.second = [g, n, m](const Vec& y, const Vec& v) {
    Vec out = Vec::Zero(n * n + m);
    out.head(n * n) = g.second(y, v);
    return out;
  };

  CatalogEntry e;
  e.id = "burer_monteiro";
  e.params = p;
  e.lift = fiber_product(F, psi, "burer_monteiro");
  e.set = SetDesc::smooth_sdp_slice(p.A, p.b, n, r);
  e.regimes = {"full_rank", "rank_deficient"};
  e.sample_point = [A, b, n, r, m](const std::string& reg, Rng& rng) {
    if (reg != "full_rank" && reg != "rank_deficient")
      throw Error(Errc::InvalidInput, "burer_monteiro: unknown regime " + reg);
    if (reg == "rank_deficient" && r < 2) throw Error(Errc::InvalidInput, "burer_monteiro: rank_deficient needs r >= 2");
    for (int attempt = 0; attempt < 100; ++attempt) {
      Index s = r;
      if (reg == "rank_deficient")
        s = std::min(r - 1, 1 + static_cast<Index>(uniform(0.0, 1.0, rng) * static_cast<double>(r - 1)));
      Mat Fm = gaussian(n, s, rng);
      if (!solve_slice(*A, b, Fm)) continue;
      if (numerical_rank(Fm) != s) continue;
      Mat R = Mat::Zero(n, r);
      R.leftCols(s) = Fm;
      R = R * random_orthonormal(r, r, rng).transpose();
      Mat AR(n * r, m);
      for (Index i = 0; i < m; ++i) AR.col(i) = vec((*A)[static_cast<std::size_t>(i)] * R);
      if (numerical_rank(AR) != m || svd(AR).s(m - 1) < 1e-3 * svd(AR).s(0)) continue;
      Vec y(n * n + n * r);
      y.head(n * n) = vec(R * R.transpose());
      y.tail(n * r) = vec(R);
      return y;
    }
    throw Error(Errc::SamplerExhausted, "burer_monteiro: no feasible point found");
  };
  e.expected = [n, r](Property prop, const Vec& y) {
    if (prop == Property::OneToOne) return holds_if(numerical_rank(unvec(y.tail(n * r), n, r)) == r);
    return Expectation::Holds;
  };
  return e;
}

// ------------------------------------------------------------ LR

/// `need` orthonormal directions orthogonal to col(X), avoiding col(F) first and then
/// the directions where F is largest.
Mat lr_added_directions(const Mat& F, const Mat& colX, Index rows, Index need) {
  Mat both(rows, colX.cols() + F.cols());
  both << colX, F;
  Mat pool = complement_basis(range_basis(both), rows);
  Mat add(rows, need);
  Index k = std::min(need, pool.cols());
  add.leftCols(k) = pool.leftCols(k);
  if (k < need) {
    Mat have(rows, colX.cols() + k);
    have << colX, add.leftCols(k);
    Mat B = complement_basis(have, rows);
    SymEig ev = sym_eig(sym(B.transpose() * F * F.transpose() * B));
    add.rightCols(need - k) = B * ev.vectors.leftCols(need - k);
  }
  return add;
}

CatalogEntry make_lr(const EntryParams& p) {
  if (p.m < 1 || p.n < 1 || p.r < 1 || p.r >= std::min(p.m, p.n))
    throw Error(Errc::InvalidInput, "lr: need 1 <= r < min(m, n)");
  const Index m = p.m, n = p.n, r = p.r;
  auto split = [m, n, r](const Vec& y) { return std::pair<Mat, Mat>(unvec(y.head(m * r), m, r), unvec(y.tail(n * r), n, r)); };
  auto join = [m, n, r](const Mat& L, const Mat& R) {
    Vec y(m * r + n * r);
    y.head(m * r) = vec(L);
    y.tail(n * r) = vec(R);
    return y;
  };
  CatalogEntry e;
  e.id = "lr";
  e.params = p;
  e.lift.manifold = Manifold::chart(m * r + n * r);
  e.lift.name = "lr";
  Directional dir = [split](const Vec& y, const Vec& v) {
    auto [L, R] = split(y);
    auto [Ld, Rd] = split(v);
    return vec(Ld * R.transpose() + L * Rd.transpose());
  };
  e.lift.phi = make_map(
      m * r + n * r, m * n,
      [split](const Vec& y) {
        auto [L, R] = split(y);
        return vec(L * R.transpose());
      },
      dir,
      [split](const Vec&, const Vec& v) {
        auto [Ld, Rd] = split(v);
        return vec(2.0 * Ld * Rd.transpose());
      });
  e.set = SetDesc::bounded_rank(m, n, r);
  e.regimes = {"full_rank", "balanced_deficient", "unbalanced"};
  e.sample_point = [m, n, r, join](const std::string& reg, Rng& rng) {
    if (reg == "full_rank") return join(gaussian(m, r, rng), gaussian(n, r, rng));
    Index s = std::min(r - 1, static_cast<Index>(uniform(0.0, 1.0, rng) * static_cast<double>(r)));
    if (reg == "balanced_deficient") {
      if (s == 0) return join(Mat::Zero(m, r), Mat::Zero(n, r));
      return join(gaussian(m, s, rng) * gaussian(s, r, rng), gaussian(n, s, rng) * gaussian(s, r, rng));
    }
    if (reg == "unbalanced") {
      Mat R = s == 0 ? Mat(Mat::Zero(n, r)) : Mat(gaussian(n, s, rng) * gaussian(s, r, rng));
      Mat L = gaussian(m, r, rng);
      if (uniform(0.0, 1.0, rng) < 0.5) return join(L, R);
      // mirrored: rank R = r, rank L = s
      Mat L2 = s == 0 ? Mat(Mat::Zero(m, r)) : Mat(gaussian(m, s, rng) * gaussian(s, r, rng));
      return join(L2, gaussian(n, r, rng));
    }
    throw Error(Errc::InvalidInput, "lr: unknown regime " + reg);
  };
  e.expected = [split, r](Property prop, const Vec& y) {
    auto [L, R] = split(y);
    Index rl = numerical_rank(L), rr = numerical_rank(R), rx = numerical_rank(Mat(L * R.transpose()));
    switch (prop) {
      case Property::LocalToLocal: return holds_if(rl == rr && rr == rx);
      case Property::OneToOne: return holds_if(rx == r);
      case Property::TwoToOne: return Expectation::Holds;
    }
    return Expectation::Unspecified;
  };
  e.closed_L = dir;
  e.closed_Q = [split](const Vec&, const Vec& v) {
    auto [Ld, Rd] = split(v);
    return vec(2.0 * Ld * Rd.transpose());
  };
  e.degenerate = [split, join, m, n, r](const Vec& y, double i) {
    auto [L, R] = split(y);
    Index rl = numerical_rank(L), rr = numerical_rank(R);
    if (rl == r && rr == r) throw Error(Errc::NoDegeneracy, "lr: L and R have full rank");
    const bool left = rl < r;
    // w in the kernel of the deficient factor, chosen to keep the other factor's image large
    Mat K = kernel_basis(left ? L : R);
    Mat other = left ? R : L;
    Vec w = K.col(0);
    if (K.cols() > 1) {
      Svd s = svd(other * K);
      w = K * s.V.col(0);
    }
    w /= w.norm();
    std::vector<DegenerateDirection> out;
    for (Index a = 0; a < m; ++a)
      for (Index bb = 0; bb < n; ++bb)
        for (double sg : {1.0, -1.0}) {
          Vec u = sg * Vec::Unit(m, a), v = Vec::Unit(n, bb);
          Mat Ld, Rd;
          if (left) {
            Ld = (1.0 / i) * u * w.transpose();
            Rd = (i / 2.0) * v * w.transpose();
          } else {
            Ld = (i / 2.0) * u * w.transpose();
            Rd = (1.0 / i) * v * w.transpose();
          }
          out.push_back({join(Ld, Rd), vec(u * v.transpose())});
        }
    return out;
  };
  e.pathological = [split, m, n, r](const Vec& y, int i) {
    auto [L, R] = split(y);
    Mat X = L * R.transpose();
    Index rl = numerical_rank(L), rr = numerical_rank(R), rx = numerical_rank(X);
    if (rl == rr && rr == rx) throw Error(Errc::NoPathology, "lr: local=>local holds at this point");
    Mat colX = range_basis(X), rowX = range_basis(Mat(X.transpose()));
    Mat addL = lr_added_directions(L, colX, m, r - rx);
    Mat addR = lr_added_directions(R, rowX, n, r - rx);
    Mat step = addL * addR.transpose();
    return vec(X + step / (step.norm() * static_cast<double>(i)));
  };
  e.fiber_distance = [split, m, n, r](const Vec& y, const Vec& x, int samples, Rng& rng) {
    auto [L, R] = split(y);
    Mat X = unvec(x, m, n);
    Svd s = svd(X);
    FiberDistance fd;
    fd.samples = samples;
    Mat Lx = s.U.leftCols(r) * s.s.head(r).cwiseSqrt().asDiagonal();
    Mat Rx = s.V.leftCols(r) * s.s.head(r).cwiseSqrt().asDiagonal();
    const bool full = numerical_rank(X) == r;
    Mat J0 = full ? Mat(pinv(Lx) * L) : Mat(Mat::Identity(r, r));
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < samples; ++k) {
      Mat J = J0;
      // additive: J0 is singular when L is rank deficient
      if (k > 0) J = J0 + uniform(0.0, 0.5, rng) * gaussian(r, r, rng) / std::sqrt(double(r));
      if (std::abs(J.determinant()) < 1e-10) continue;
      Mat Lp = Lx * J, Rp = Rx * J.inverse().transpose();
      best = std::min(best, std::sqrt((Lp - L).squaredNorm() + (Rp - R).squaredNorm()));
    }
    fd.sampled_min = best;
    if (full) {
      Mat Pc = projector(range_basis(X), m), Pr = projector(range_basis(Mat(X.transpose())), n);
      fd.lower_bound = std::max(((Mat::Identity(m, m) - Pc) * L).norm(), ((Mat::Identity(n, n) - Pr) * R).norm());
    }
    return fd;
  };
  return e;
}

// ------------------------------------------------------------ desingularization chart

CatalogEntry make_desing(const EntryParams& p0) {
  EntryParams p = p0;
  if (p.m < 1 || p.n < 2 || p.r < 1 || p.r >= std::min(p.m, p.n))
    throw Error(Errc::InvalidInput, "desing_chart: need 1 <= r < min(m, n)");
  const Index m = p.m, n = p.n, r = p.r, k = n - r;
  if (p.perm.empty()) {
    p.perm.resize(static_cast<std::size_t>(n));
    std::iota(p.perm.begin(), p.perm.end(), Index{0});
  }
  {
    auto sorted = p.perm;
    std::sort(sorted.begin(), sorted.end());
    for (Index i = 0; i < n; ++i)
      if (static_cast<Index>(sorted.size()) != n || sorted[static_cast<std::size_t>(i)] != i)
        throw Error(Errc::InvalidInput, "desing_chart: perm is not a permutation of 0..n-1");
  }
  const Mat Pi = perm_matrix(p.perm);
  auto split = [m, r, k](const Vec& y) { return std::pair<Mat, Mat>(unvec(y.head(m * r), m, r), unvec(y.tail(r * k), r, k)); };
  auto join = [m, r, k](const Mat& Z, const Mat& W) {
    Vec y(m * r + r * k);
    y.head(m * r) = vec(Z);
    y.tail(r * k) = vec(W);
    return y;
  };
  auto assemble = [m, n, r, k, Pi](const Mat& left, const Mat& right) {
    Mat B(m, n);
    B.leftCols(k) = left;
    B.rightCols(r) = right;
    return Mat(B * Pi);
  };
  CatalogEntry e;
  e.id = "desing_chart";
  e.params = p;
  e.lift.manifold = Manifold::chart(m * r + r * k);
  e.lift.name = "desing_chart";
  Directional dir = [split, assemble](const Vec& y, const Vec& v) {
    auto [Z, W] = split(y);
    auto [Zd, Wd] = split(v);
    return vec(assemble(-Zd * W - Z * Wd, Zd));
  };
  Directional q = [split, assemble, m, r](const Vec&, const Vec& v) {
    auto [Zd, Wd] = split(v);
    return vec(assemble(-2.0 * Zd * Wd, Mat::Zero(m, r)));
  };
  e.lift.phi = make_map(
      m * r + r * k, m * n,
      [split, assemble](const Vec& y) {
        auto [Z, W] = split(y);
        return vec(assemble(-Z * W, Z));
      },
      dir, q);
  e.set = SetDesc::bounded_rank(m, n, r);
  e.regimes = {"full_rank", "rank_deficient"};
  e.sample_point = [m, r, k, join](const std::string& reg, Rng& rng) {
    Mat W = gaussian(r, k, rng);
    if (reg == "full_rank") return join(gaussian(m, r, rng), W);
    if (reg == "rank_deficient") {
      Index s = std::min(r - 1, static_cast<Index>(uniform(0.0, 1.0, rng) * static_cast<double>(r)));
      Mat Z = s == 0 ? Mat(Mat::Zero(m, r)) : Mat(gaussian(m, s, rng) * gaussian(s, r, rng));
      return join(Z, W);
    }
    throw Error(Errc::InvalidInput, "desing_chart: unknown regime " + reg);
  };
  e.expected = [split, r](Property prop, const Vec& y) {
    if (prop == Property::TwoToOne) return Expectation::Holds;
    return holds_if(numerical_rank(split(y).first) == r);
  };
  e.closed_L = dir;
  e.closed_Q = q;
  e.degenerate = [split, join, assemble, m, r, k](const Vec& y, double i) {
    auto [Z, W] = split(y);
    if (numerical_rank(Z) == r) throw Error(Errc::NoDegeneracy, "desing_chart: Z has full rank");
    Vec w = kernel_basis(Z).col(0);
    std::vector<DegenerateDirection> out;
    for (Index a = 0; a < m; ++a)
      for (Index bb = 0; bb < k; ++bb)
        for (double sg : {1.0, -1.0}) {
          Vec u = sg * Vec::Unit(m, a), v = Vec::Unit(k, bb);
          Mat Zd = (1.0 / i) * u * w.transpose();
          Mat Wd = i * w * v.transpose();
          out.push_back({join(Zd, Wd), vec(assemble(-2.0 * u * v.transpose(), Mat::Zero(m, r)))});
        }
    return out;
  };
  e.pathological = [split, m, n, r, k, Pi](const Vec& y, int i) {
    auto [Z, W] = split(y);
    if (numerical_rank(Z) == r) throw Error(Errc::NoPathology, "desing_chart: local=>local holds at full rank");
    Mat Wfull(r + k, k);
    Wfull.topRows(k) = Mat::Identity(k, k);
    Wfull.bottomRows(r) = W;
    // a maximizes |Wa| relative to |[a; Wa]| so the added direction leaves the chart's kernel subspace
    Svd sw = svd(W);
    Vec a = sw.V.col(0);
    Vec vperp = Pi.transpose() * (Wfull * a);
    vperp /= vperp.norm();
    Vec uperp = complement_basis(range_basis(Z), m).col(0);
    Mat B(m, n);
    B.leftCols(k) = -Z * W;
    B.rightCols(r) = Z;
    Mat X = B * Pi;
    return vec(X + (1.0 / static_cast<double>(i)) * uperp * vperp.transpose());
  };
  e.fiber_distance = [split, m, n, r, k, Pi](const Vec& y, const Vec& x, int samples, Rng& rng) {
    auto [Z, W] = split(y);
    Mat B = unvec(x, m, n) * Pi.transpose();
    Mat Zp = B.rightCols(r);
    Mat left = B.leftCols(k);
    FiberDistance fd;
    fd.samples = samples;
    Mat W0 = -pinv(Zp) * left;
    if ((Zp * W0 + left).norm() > 1e-9 * std::max(1.0, left.norm())) {
      fd.sampled_min = std::numeric_limits<double>::infinity();
      fd.lower_bound = fd.sampled_min;
      return fd;
    }
    Mat Kz = kernel_basis(Zp);
    Mat Pk = Kz.cols() ? Mat(Kz * Kz.transpose()) : Mat(Mat::Zero(r, r));
    double exact = std::sqrt((Zp - Z).squaredNorm() + (W0 - (Mat::Identity(r, r) - Pk) * W).squaredNorm());
    double best = std::numeric_limits<double>::infinity();
    for (int s = 0; s < samples; ++s) {
      Mat N = Pk * (W - W0);
      if (s > 0 && Kz.cols() > 0) N += uniform(0.0, 0.5, rng) * Pk * gaussian(r, k, rng);
      best = std::min(best, std::sqrt((Zp - Z).squaredNorm() + (W0 + N - W).squaredNorm()));
    }
    fd.sampled_min = best;
    fd.lower_bound = exact;
    return fd;
  };
  return e;
}

// ------------------------------------------------------------ SVD lifts

Mat sym_from_coords(const Vec& c, Index r) {
  Mat M(r, r);
  Index idx = 0;
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i <= j; ++i) {
      double v = c(idx++);
      if (i == j)
        M(i, i) = v;
      else
        M(i, j) = M(j, i) = v / std::sqrt(2.0);
    }
  return M;
}

Vec coords_from_sym(const Mat& M) {
  const Index r = M.rows();
  Vec c(r * (r + 1) / 2);
  Index idx = 0;
  for (Index j = 0; j < r; ++j)
    for (Index i = 0; i <= j; ++i) c(idx++) = i == j ? M(i, i) : std::sqrt(2.0) * M(i, j);
  return c;
}

std::vector<Vec> complement_outer(const Mat& U, const Mat& V) {
  Mat Up = complement_basis(U, U.rows()), Vp = complement_basis(V, V.rows());
  std::vector<Vec> out;
  for (Index a = 0; a < Up.cols(); ++a)
    for (Index b = 0; b < Vp.cols(); ++b) out.push_back(vec(Up.col(a) * Vp.col(b).transpose()));
  if (Up.cols() && Vp.cols()) {
    Index k = std::min(Up.cols(), Vp.cols());
    out.push_back(vec(Up.leftCols(k) * Vp.leftCols(k).transpose()));
  }
  return out;
}

/// Distinct-magnitude nonzero values sigma_j = +-(1 + j + 0.3 u).
Vec distinct_values(Index r, Rng& rng) {
  Vec s(r);
  for (Index j = 0; j < r; ++j) s(j) = (uniform(0.0, 1.0, rng) < 0.5 ? -1.0 : 1.0) * (1.0 + j + uniform(0.0, 0.3, rng));
  return s;
}

CatalogEntry make_svd(const EntryParams& p) {
  if (p.m < 1 || p.n < 1 || p.r < 1 || p.r >= std::min(p.m, p.n))
    throw Error(Errc::InvalidInput, "svd: need 1 <= r < min(m, n)");
  const Index m = p.m, n = p.n, r = p.r;
  const Index du = m * r, dv = n * r;
  struct Parts {
    Mat U;
    Vec s;
    Mat V;
  };
  auto split = [m, n, r, du, dv](const Vec& y) {
    return Parts{unvec(y.head(du), m, r), y.segment(du, r), unvec(y.tail(dv), n, r)};
  };
  auto join = [du, dv, r](const Mat& U, const Vec& s, const Mat& V) {
    Vec y(du + r + dv);
    y.head(du) = vec(U);
    y.segment(du, r) = s;
    y.tail(dv) = vec(V);
    return y;
  };
  CatalogEntry e;
  e.id = "svd";
  e.params = p;
  e.lift.manifold = Manifold::product({Manifold::stiefel(m, r), Manifold::chart(r), Manifold::stiefel(n, r)});
  e.lift.name = "svd";
  Directional dir = [split](const Vec& y, const Vec& v) {
    Parts a = split(y), d = split(v);
    return vec(d.U * a.s.asDiagonal() * a.V.transpose() + a.U * d.s.asDiagonal() * a.V.transpose() +
               a.U * a.s.asDiagonal() * d.V.transpose());
  };
  e.lift.phi = make_map(
      du + r + dv, m * n,
      [split](const Vec& y) {
        Parts a = split(y);
        return vec(a.U * a.s.asDiagonal() * a.V.transpose());
      },
      dir,
      [split](const Vec& y, const Vec& v) {
        Parts a = split(y), d = split(v);
        return vec(2.0 * (d.U * d.s.asDiagonal() * a.V.transpose() + d.U * a.s.asDiagonal() * d.V.transpose() +
                          a.U * d.s.asDiagonal() * d.V.transpose()));
      });
  e.set = SetDesc::bounded_rank(m, n, r);
  e.regimes = {"generic", "repeated", "zero"};
  e.sample_point = [m, n, r, join](const std::string& reg, Rng& rng) {
    Mat U = random_orthonormal(m, r, rng), V = random_orthonormal(n, r, rng);
    Vec s = distinct_values(r, rng);
    if (reg == "generic") return join(U, s, V);
    std::vector<Index> idx(static_cast<std::size_t>(r));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    if (reg == "repeated") {
      if (r < 2) throw Error(Errc::InvalidInput, "svd: repeated regime needs r >= 2");
      s(idx[1]) = (uniform(0.0, 1.0, rng) < 0.5 ? -1.0 : 1.0) * std::abs(s(idx[0]));
      return join(U, s, V);
    }
    if (reg == "zero") {
      s(idx[0]) = 0.0;
      return join(U, s, V);
    }
    throw Error(Errc::InvalidInput, "svd: unknown regime " + reg);
  };
  auto nonzero_distinct = [split, r](const Vec& y) {
    Vec a = split(y).s.cwiseAbs();
    double sc = std::max(1.0, a.maxCoeff());
    for (Index i = 0; i < r; ++i) {
      if (a(i) <= kZero * sc) return false;
      for (Index j = i + 1; j < r; ++j)
        if (std::abs(a(i) - a(j)) <= kZero * sc) return false;
    }
    return true;
  };
  e.expected = [nonzero_distinct, split](Property prop, const Vec& y) {
    bool ok = nonzero_distinct(y);
    if (prop != Property::TwoToOne) return holds_if(ok);
    if (ok) return Expectation::Holds;
    if (split(y).s.cwiseAbs().maxCoeff() <= kZero) return Expectation::Fails;
    return Expectation::Unspecified;
  };
  e.closed_L = dir;
  e.pathological = [split, r, m, n](const Vec& y, int i) {
    Parts a = split(y);
    Vec mag = a.s.cwiseAbs();
    double sc = std::max(1.0, mag.maxCoeff());
    Vec alpha(r);
    for (Index j = 0; j < r; ++j) alpha(j) = 0.1 * static_cast<double>(j + 1) / static_cast<double>(i);
    for (Index k = 0; k < r; ++k)
      for (Index l = k + 1; l < r; ++l)
        if (mag(k) > kZero * sc && std::abs(mag(k) - mag(l)) <= kZero * sc) {
          Mat G = Mat::Identity(r, r);
          const double c = 1.0 / std::sqrt(2.0);
          G(k, k) = G(l, l) = c;
          G(l, k) = c;
          G(k, l) = -c;
          Vec sg(r);
          for (Index j = 0; j < r; ++j) sg(j) = a.s(j) < 0 ? -1.0 : 1.0;
          Mat S = sg.asDiagonal();
          Mat U2 = a.U * S * G * S, V2 = a.V * G;
          return vec(U2 * (a.s + alpha).asDiagonal() * V2.transpose());
        }
    for (Index k = 0; k < r; ++k)
      if (mag(k) <= kZero * sc) {
        Mat U2 = a.U, V2 = a.V;
        U2.col(k) = complement_basis(a.U, m).col(0);
        V2.col(k) = complement_basis(a.V, n).col(0);
        return vec(U2 * (a.s + alpha).asDiagonal() * V2.transpose());
      }
    throw Error(Errc::NoPathology, "svd: |sigma| nonzero and distinct");
  };
  e.fiber_distance = [split, m, n, r](const Vec& y, const Vec& x, int samples, Rng& rng) {
    Parts a = split(y);
    Svd s = svd(unvec(x, m, n));
    FiberDistance fd;
    bool distinct = s.s(r - 1) > 1e-12;
    for (Index j = 0; j + 1 < r; ++j) distinct = distinct && (s.s(j) - s.s(j + 1)) > 1e-12;
    std::vector<Index> perm(static_cast<std::size_t>(r));
    std::iota(perm.begin(), perm.end(), Index{0});
    double perms = std::tgamma(static_cast<double>(r) + 1.0);
    const bool enumerate = distinct && perms * std::pow(4.0, static_cast<double>(r)) <= 500.0;
    double best = std::numeric_limits<double>::infinity();
    auto eval = [&](const std::vector<Index>& pm, long signs) {
      Mat U2(m, r), V2(n, r);
      Vec s2(r);
      for (Index j = 0; j < r; ++j) {
        double eu = ((signs >> (2 * j)) & 1L) ? -1.0 : 1.0;
        double ev = ((signs >> (2 * j + 1)) & 1L) ? -1.0 : 1.0;
        Index pj = pm[static_cast<std::size_t>(j)];
        U2.col(j) = eu * s.U.col(pj);
        V2.col(j) = ev * s.V.col(pj);
        s2(j) = eu * ev * s.s(pj);
      }
      double d2 = (U2 - a.U).squaredNorm() + (s2 - a.s).squaredNorm() + (V2 - a.V).squaredNorm();
      best = std::min(best, std::sqrt(d2));
    };
    int count = 0;
    if (enumerate) {
      do {
        for (long sg = 0; sg < (1L << (2 * r)); ++sg, ++count) eval(perm, sg);
      } while (std::next_permutation(perm.begin(), perm.end()));
      fd.lower_bound = best;
    } else {
      for (; count < samples; ++count) {
        std::shuffle(perm.begin(), perm.end(), rng);
        long sg = static_cast<long>(uniform(0.0, 1.0, rng) * static_cast<double>(1L << (2 * r)));
        eval(perm, sg);
      }
    }
    fd.sampled_min = best;
    fd.samples = count;
    return fd;
  };
  e.witness_candidates = [split](const Vec& y) {
    Parts a = split(y);
    return complement_outer(a.U, a.V);
  };
  return e;
}

CatalogEntry make_msvd(const EntryParams& p) {
  if (p.m < 1 || p.n < 1 || p.r < 1 || p.r >= std::min(p.m, p.n))
    throw Error(Errc::InvalidInput, "msvd: need 1 <= r < min(m, n)");
  const Index m = p.m, n = p.n, r = p.r;
  const Index du = m * r, dm = r * (r + 1) / 2, dv = n * r;
  struct Parts {
    Mat U;
    Mat M;
    Mat V;
  };
  auto split = [m, n, r, du, dm, dv](const Vec& y) {
    return Parts{unvec(y.head(du), m, r), sym_from_coords(y.segment(du, dm), r), unvec(y.tail(dv), n, r)};
  };
  auto join = [du, dm, dv](const Mat& U, const Mat& M, const Mat& V) {
    Vec y(du + dm + dv);
    y.head(du) = vec(U);
    y.segment(du, dm) = coords_from_sym(M);
    y.tail(dv) = vec(V);
    return y;
  };
  CatalogEntry e;
  e.id = "msvd";
  e.params = p;
  e.lift.manifold = Manifold::product({Manifold::stiefel(m, r), Manifold::chart(dm), Manifold::stiefel(n, r)});
  e.lift.name = "msvd";
  Directional dir = [split](const Vec& y, const Vec& v) {
    Parts a = split(y), d = split(v);
    return vec(d.U * a.M * a.V.transpose() + a.U * d.M * a.V.transpose() + a.U * a.M * d.V.transpose());
  };
  e.lift.phi = make_map(
      du + dm + dv, m * n,
      [split](const Vec& y) {
        Parts a = split(y);
        return vec(a.U * a.M * a.V.transpose());
      },
      dir,
      [split](const Vec& y, const Vec& v) {
        Parts a = split(y), d = split(v);
        return vec(2.0 * (d.U * d.M * a.V.transpose() + d.U * a.M * d.V.transpose() + a.U * d.M * d.V.transpose()));
      });
  e.set = SetDesc::bounded_rank(m, n, r);
  e.regimes = {"generic", "opposite", "singular"};
  e.sample_point = [m, n, r, join](const std::string& reg, Rng& rng) {
    Mat U = random_orthonormal(m, r, rng), V = random_orthonormal(n, r, rng);
    Mat Q = random_orthonormal(r, r, rng);
    Vec lam = distinct_values(r, rng);
    std::vector<Index> idx(static_cast<std::size_t>(r));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::shuffle(idx.begin(), idx.end(), rng);
    if (reg == "opposite") {
      if (r < 2) throw Error(Errc::InvalidInput, "msvd: opposite regime needs r >= 2");
      lam(idx[1]) = -lam(idx[0]);
    } else if (reg == "singular") {
      lam(idx[0]) = 0.0;
    } else if (reg != "generic") {
      throw Error(Errc::InvalidInput, "msvd: unknown regime " + reg);
    }
    return join(U, Mat(Q * lam.asDiagonal() * Q.transpose()), V);
  };
  auto pair_sums_nonzero = [split, r](const Vec& y) {
    Vec lam = sym_eig(split(y).M).values;
    double sc = std::max(1.0, lam.cwiseAbs().maxCoeff());
    for (Index i = 0; i < r; ++i)
      for (Index j = i; j < r; ++j)
        if (std::abs(lam(i) + lam(j)) <= kZero * sc) return false;
    return true;
  };
  e.expected = [pair_sums_nonzero](Property prop, const Vec& y) {
    bool ok = pair_sums_nonzero(y);
    if (prop != Property::TwoToOne) return holds_if(ok);
    return ok ? Expectation::Holds : Expectation::Unspecified;
  };
  e.closed_L = dir;
  e.witness_candidates = [split](const Vec& y) {
    Parts a = split(y);
    return complement_outer(a.U, a.V);
  };
  return e;
}

// ------------------------------------------------------------ tensors and curves

CatalogEntry make_cp_rank1(const EntryParams& p0) {
  EntryParams p = p0;
  if (p.dims.size() < 2) throw Error(Errc::InvalidInput, "cp_rank1: need at least two factors");
  for (Index d : p.dims)
    if (d < 1) throw Error(Errc::InvalidInput, "cp_rank1: dimensions must be positive");
  const auto dims = p.dims;
  std::vector<Index> off;
  Index total = 0, out = 1;
  for (Index d : dims) {
    off.push_back(total);
    total += d;
    out *= d;
  }
  auto factors = [dims, off](const Vec& y) {
    std::vector<Vec> f;
    for (std::size_t i = 0; i < dims.size(); ++i) f.push_back(y.segment(off[i], dims[i]));
    return f;
  };
  CatalogEntry e;
  e.id = "cp_rank1";
  e.params = p;
  e.lift.manifold = Manifold::chart(total);
  e.lift.name = "cp_rank1";
  e.lift.phi = make_map(
      total, out, [factors](const Vec& y) { return outer(factors(y)); },
      [factors](const Vec& y, const Vec& v) {
        auto f = factors(y), d = factors(v);
        Vec acc = Vec::Zero(outer(f).size());
        for (std::size_t i = 0; i < f.size(); ++i) {
          auto g = f;
          g[i] = d[i];
          acc += outer(g);
        }
        return acc;
      },
      [factors](const Vec& y, const Vec& v) {
        auto f = factors(y), d = factors(v);
        Vec acc = Vec::Zero(outer(f).size());
        for (std::size_t i = 0; i < f.size(); ++i)
          for (std::size_t j = i + 1; j < f.size(); ++j) {
            auto g = f;
            g[i] = d[i];
            g[j] = d[j];
            acc += 2.0 * outer(g);
          }
        return acc;
      });
  e.set = SetDesc::rank1_tensors(dims);
  e.regimes = {"origin", "generic"};
  e.sample_point = [total](const std::string& reg, Rng& rng) {
    if (reg == "origin") return Vec(Vec::Zero(total));
    if (reg == "generic") return gaussian_vec(total, rng);
    throw Error(Errc::InvalidInput, "cp_rank1: unknown regime " + reg);
  };
  e.expected = [factors](Property prop, const Vec& y) {
    bool all_nonzero = true;
    for (const auto& f : factors(y)) all_nonzero = all_nonzero && f.norm() > kZero;
    if (all_nonzero) return Expectation::Holds;
    if (y.norm() <= kZero && prop != Property::LocalToLocal && factors(y).size() >= 3) return Expectation::Fails;
    return Expectation::Unspecified;
  };
  return e;
}

Vec nodal_param(double t) { return Vec((Vec(3) << t * t - 1.0, t * t * t - t, t).finished()); }

CatalogEntry make_nodal(const EntryParams& p) {
  SmoothMap h;
  h.in_dim = 3;
  h.out_dim = 2;
  h.value = [](const Vec& y) { return Vec((Vec(2) << y(0) - y(2) * y(2) + 1.0, y(1) - y(0) * y(2)).finished()); };
  h.jacobian = [](const Vec& y) {
    Mat J(2, 3);
    J << 1.0, 0.0, -2.0 * y(2), -y(2), 1.0, -y(0);
    return J;
  };
  h.second = [](const Vec&, const Vec& v) { return Vec((Vec(2) << -2.0 * v(2) * v(2), -2.0 * v(0) * v(2)).finished()); };
  CatalogEntry e;
  e.id = "nodal_cubic";
  e.params = p;
  e.lift.manifold = Manifold::embedded(h, "nodal_curve");
  e.lift.manifold.set_sampler([](Rng& rng) { return nodal_param(uniform(-2.0, 2.0, rng)); });
  Mat sel = Mat::Zero(2, 3);
  sel(0, 0) = sel(1, 1) = 1.0;
  e.lift.phi = SmoothMap::linear(sel);
  e.lift.name = "nodal_cubic";
  e.set = SetDesc::nodal_cubic();
  e.regimes = {"node", "smooth"};
  e.sample_point = [](const std::string& reg, Rng& rng) {
    if (reg == "node") return nodal_param(uniform(0.0, 1.0, rng) < 0.5 ? -1.0 : 1.0);
    if (reg == "smooth") {
      for (;;) {
        double t = uniform(-2.0, 2.0, rng);
        if (std::abs(std::abs(t) - 1.0) > 0.1) return nodal_param(t);
      }
    }
    throw Error(Errc::InvalidInput, "nodal_cubic: unknown regime " + reg);
  };
  auto at_node = [](const Vec& y) { return std::abs(y(0)) <= kZero && std::abs(y(1)) <= kZero; };
  e.expected = [at_node](Property, const Vec& y) { return holds_if(!at_node(y)); };
  e.closed_L = [](const Vec&, const Vec& v) { return Vec(v.head(2)); };
  e.pathological = [at_node](const Vec& y, int i) {
    if (!at_node(y)) throw Error(Errc::NoPathology, "nodal_cubic: smooth point");
    double t = -y(2) + 0.1 / static_cast<double>(i);
    return Vec(nodal_param(t).head(2));
  };
  e.fiber_distance = [](const Vec& y, const Vec& x, int, Rng&) {
    FiberDistance fd;
    fd.samples = 1;
    double best;
    if (std::abs(x(0)) > 1e-12) {
      best = (nodal_param(x(1) / x(0)) - y).norm();
    } else if (x.norm() <= 1e-12) {
      best = std::min((nodal_param(1.0) - y).norm(), (nodal_param(-1.0) - y).norm());
    } else {
      best = (nodal_param(0.0) - y).norm();
    }
    fd.sampled_min = best;
    fd.lower_bound = best;
    return fd;
  };
  e.witness_candidates = [at_node](const Vec& y) {
    std::vector<Vec> out;
    if (!at_node(y)) return out;
    // orthogonal to the branch velocity (2t, 3t^2 - 1) = 2 (t, 1) at t = +-1
    for (double s : {1.0, -1.0}) out.push_back((Vec(2) << s, -s * y(2)).finished());
    return out;
  };
  return e;
}

CatalogEntry make_disk_quartic(const EntryParams& p) {
  SmoothMap h;
  h.in_dim = 3;
  h.out_dim = 1;
  h.value = [](const Vec& y) { return Vec::Constant(1, y(0) * y(0) + y(1) * y(1) + std::pow(y(2), 4) - 1.0).eval(); };
  h.jacobian = [](const Vec& y) {
    Mat J(1, 3);
    J << 2.0 * y(0), 2.0 * y(1), 4.0 * std::pow(y(2), 3);
    return J;
  };
  h.second = [](const Vec& y, const Vec& v) {
    return Vec::Constant(1, 2.0 * v(0) * v(0) + 2.0 * v(1) * v(1) + 12.0 * y(2) * y(2) * v(2) * v(2)).eval();
  };
  CatalogEntry e;
  e.id = "disk_quartic";
  e.params = p;
  e.lift.manifold = Manifold::embedded(h, "quartic_sphere");
  auto sample = [](bool boundary, Rng& rng) {
    double th = uniform(0.0, 2.0 * M_PI, rng);
    double z = 0.0;
    if (!boundary) {
      z = uniform(0.2, 0.95, rng) * (uniform(0.0, 1.0, rng) < 0.5 ? -1.0 : 1.0);
    }
    double rho = std::sqrt(1.0 - std::pow(z, 4));
    return Vec((Vec(3) << rho * std::cos(th), rho * std::sin(th), z).finished());
  };
  e.lift.manifold.set_sampler([sample](Rng& rng) { return sample(uniform(0.0, 1.0, rng) < 0.2, rng); });
  Mat sel = Mat::Zero(2, 3);
  sel(0, 0) = sel(1, 1) = 1.0;
  e.lift.phi = SmoothMap::linear(sel);
  e.lift.name = "disk_quartic";
  e.set = SetDesc::disk(2);
  e.regimes = {"boundary", "interior"};
  e.sample_point = [sample](const std::string& reg, Rng& rng) {
    if (reg == "boundary") return sample(true, rng);
    if (reg == "interior") return sample(false, rng);
    throw Error(Errc::InvalidInput, "disk_quartic: unknown regime " + reg);
  };
  e.expected = [](Property prop, const Vec& y) {
    if (prop == Property::LocalToLocal) return Expectation::Holds;
    return holds_if(std::abs(y(2)) > kZero);
  };
  e.closed_L = [](const Vec&, const Vec& v) { return Vec(v.head(2)); };
  e.b_exact = [](const Vec& y) -> std::optional<std::vector<Vec>> {
    if (std::abs(y(2)) > kZero) return std::nullopt;
    return std::vector<Vec>{};
  };
  return e;
}

CatalogEntry make_eigen_simplex(const EntryParams& p0) {
  EntryParams p = p0;
  if (p.U.size() == 0) {
    if (p.n < 2) throw Error(Errc::InvalidInput, "eigen_simplex: need n >= 2");
    Rng rng(split_seed(p.seed, 0xE5));
    p.U = random_orthonormal(p.n, p.n, rng);
  }
  const Index n = p.U.rows();
  if (p.U.cols() != n || (p.U.transpose() * p.U - Mat::Identity(n, n)).norm() > 1e-10)
    throw Error(Errc::InvalidInput, "eigen_simplex: U must be orthogonal");
  p.n = n;
  const Mat U = p.U;
  Submersion psi{Manifold::sphere(n - 1), SmoothMap::linear(U.transpose())};
  CatalogEntry base = make_hadamard(p);
  CatalogEntry e;
  e.id = "eigen_simplex";
  e.params = p;
  e.lift = compose_submersion(base.lift, psi);
  e.lift.name = "eigen_simplex";
  e.lift.manifold.set_sampler([n](Rng& rng) {
    Vec g = gaussian_vec(n, rng);
    return Vec(g / g.norm());
  });
  e.set = base.set;
  e.regimes = base.regimes;
  auto bs = base.sample_point;
  e.sample_point = [bs, U](const std::string& reg, Rng& rng) { return Vec(U * bs(reg, rng)); };
  auto bex = base.expected;
  e.expected = [bex, U](Property prop, const Vec& z) { return bex(prop, U.transpose() * z); };
  e.closed_L = [U](const Vec& z, const Vec& v) { return Vec(2.0 * (U.transpose() * z).cwiseProduct(U.transpose() * v)); };
  e.closed_Q = [U](const Vec& z, const Vec& v) { return hadamard_closed_q(U.transpose() * z, U.transpose() * v); };
  return e;
}

}  // namespace

std::vector<std::string> catalog_ids() {
  return {"hadamard", "hadprod",      "ball", "annulus",  "burer_monteiro", "psd_lowrank", "lr",
          "desing_chart", "svd", "msvd", "cp_rank1", "nodal_cubic",    "disk_quartic", "eigen_simplex"};
}

EntryParams default_params(const std::string& id) {
  EntryParams p;
  if (id == "hadamard" || id == "eigen_simplex") p.n = 3;
  else if (id == "hadprod") p.n = 3, p.m = 2;
  else if (id == "ball") p.n = 2;
  else if (id == "annulus") p.n = 2, p.r1 = 1.0, p.r2 = 2.0;
  else if (id == "burer_monteiro") p.n = 4, p.r = 2, p.constraints = 2;
  else if (id == "psd_lowrank") p.n = 4, p.r = 2;
  else if (id == "lr") p.m = 3, p.n = 3, p.r = 2;
  else if (id == "desing_chart") p.m = 3, p.n = 4, p.r = 2;
  else if (id == "svd" || id == "msvd") p.m = 4, p.n = 3, p.r = 2;
  else if (id == "cp_rank1") p.dims = {2, 2, 2};
  return p;
}

CatalogEntry build(const std::string& id, const EntryParams& given) {
  EntryParams p = default_params(id);
  if (given.n) p.n = given.n;
  if (given.m) p.m = given.m;
  if (given.r) p.r = given.r;
  p.r1 = given.r1;
  p.r2 = given.r2;
  if (!given.dims.empty()) p.dims = given.dims;
  if (!given.perm.empty()) p.perm = given.perm;
  if (given.U.size()) p.U = given.U;
  if (!given.A.empty()) p.A = given.A, p.b = given.b;
  p.constraints = given.constraints;
  p.seed = given.seed;
  if (id == "hadamard") return make_hadamard(p);
  if (id == "hadprod") return make_hadprod(p);
  if (id == "ball") return make_ball(p);
  if (id == "annulus") return make_annulus(p);
  if (id == "burer_monteiro") return make_burer_monteiro(p);
  if (id == "psd_lowrank") return make_psd_lowrank(p);
  if (id == "lr") return make_lr(p);
  if (id == "desing_chart") return make_desing(p);
  if (id == "svd") return make_svd(p);
  if (id == "msvd") return make_msvd(p);
  if (id == "cp_rank1") return make_cp_rank1(p);
  if (id == "nodal_cubic") return make_nodal(p);
  if (id == "disk_quartic") return make_disk_quartic(p);
  if (id == "eigen_simplex") return make_eigen_simplex(p);
  throw Error(Errc::InvalidInput, "unknown catalog id: " + id);
}

Lift sphere_inclusion(Index n) {
  Lift l;
  l.manifold = Manifold::sphere(n - 1);
  l.phi = SmoothMap::identity(n);
  l.name = "sphere_inclusion";
  return l;
}

}  // namespace lifts
