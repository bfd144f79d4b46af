#include "liftcalc/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lifts {

const char* errc_name(Errc c) {
  switch (c) {
    case Errc::InvalidInput: return "InvalidInput";
    case Errc::ConstantRankViolation: return "ConstantRankViolation";
    case Errc::RetractionFailure: return "RetractionFailure";
    case Errc::NotCoexact: return "NotCoexact";
    case Errc::NotSubmersion: return "NotSubmersion";
    case Errc::NoDegeneracy: return "NoDegeneracy";
    case Errc::NoPathology: return "NoPathology";
    case Errc::SamplerExhausted: return "SamplerExhausted";
    case Errc::WitnessSearchFailed: return "WitnessSearchFailed";
    case Errc::InvalidWitness: return "InvalidWitness";
    case Errc::NotConverged: return "NotConverged";
    case Errc::NoData: return "NoData";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

double TolerancePolicy::rank_threshold(double smax, Index rows, Index cols) const {
  return std::max(zero_tol, rank_tol_factor * smax * static_cast<double>(std::max<Index>({rows, cols, 1})));
}

void require_finite(const Mat& A, const char* where) {
  if (!A.allFinite()) throw Error(Errc::InvalidInput, std::string(where) + ": non-finite entries");
}

Svd svd(const Mat& A) {
  require_finite(A, "svd");
  Svd out;
  const Index k = std::min(A.rows(), A.cols());
  if (k == 0) {
    out.U = Mat(A.rows(), 0);
    out.V = Mat(A.cols(), 0);
    out.s = Vec(0);
    return out;
  }
  Eigen::JacobiSVD<Mat> sv(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  out.U = sv.matrixU();
  out.s = sv.singularValues();
  out.V = sv.matrixV();
  return out;
}

namespace {

Index rank_from(const Vec& s, Index rows, Index cols, const TolerancePolicy& tol) {
  if (s.size() == 0) return 0;
  const double smax = s(0);
  if (smax <= 0.0) return 0;
  const double thr = tol.rank_threshold(smax, rows, cols);
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > thr) ++r;
  return r;
}

}  // namespace

Index numerical_rank(const Mat& A, const TolerancePolicy& tol) {
  if (A.size() == 0) return 0;
  Svd d = svd(A);
  return rank_from(d.s, A.rows(), A.cols(), tol);
}

Mat range_basis(const Mat& A, const TolerancePolicy& tol) {
  if (A.size() == 0) return Mat(A.rows(), 0);
  Svd d = svd(A);
  Index r = rank_from(d.s, A.rows(), A.cols(), tol);
  return d.U.leftCols(r);
}

Mat kernel_basis(const Mat& A, const TolerancePolicy& tol) {
  require_finite(A, "kernel_basis");
  const Index n = A.cols();
  if (n == 0) return Mat(0, 0);
  if (A.rows() == 0) return Mat::Identity(n, n);
  Eigen::JacobiSVD<Mat> sv(A, Eigen::ComputeFullV);
  Index r = rank_from(sv.singularValues(), A.rows(), A.cols(), tol);
  return sv.matrixV().rightCols(n - r);
}

Mat pinv(const Mat& A, const TolerancePolicy& tol) {
  if (A.size() == 0) return Mat::Zero(A.cols(), A.rows());
  Svd d = svd(A);
  Index r = rank_from(d.s, A.rows(), A.cols(), tol);
  Mat out = Mat::Zero(A.cols(), A.rows());
  for (Index i = 0; i < r; ++i) out += d.V.col(i) * (1.0 / d.s(i)) * d.U.col(i).transpose();
  return out;
}

SymEig sym_eig(const Mat& S) {
  require_finite(S, "sym_eig");
  if (S.rows() != S.cols()) throw Error(Errc::InvalidInput, "sym_eig: matrix not square");
  SymEig out;
  if (S.rows() == 0) {
    out.values = Vec(0);
    out.vectors = Mat(0, 0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Mat> es(sym(S));
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  return out;
}

Vec min_norm_solve(const Mat& A, const Vec& b, const TolerancePolicy& tol) {
  if (A.rows() != b.size()) throw Error(Errc::InvalidInput, "min_norm_solve: dimension mismatch");
  require_finite(b, "min_norm_solve");
  return pinv(A, tol) * b;
}

Mat complement_basis(const Mat& B, Index n, const TolerancePolicy& tol) {
  if (B.cols() == 0) return Mat::Identity(n, n);
  return kernel_basis(B.transpose(), tol);
}

Mat projector(const Mat& basis, Index n) {
  if (basis.cols() == 0) return Mat::Zero(n, n);
  return basis * basis.transpose();
}

double subspace_distance(const Mat& B1, const Mat& B2, Index n) {
  Mat D = projector(B1, n) - projector(B2, n);
  if (n == 0) return 0.0;
  return svd(D).s(0);
}

Mat intersect_basis(const Mat& B1, const Mat& B2, Index n, const TolerancePolicy& tol) {
  if (B1.cols() == 0 || B2.cols() == 0) return Mat(n, 0);
  // x = B1 a = B2 b  <=>  [B1, -B2] (a;b) = 0
  Mat M(n, B1.cols() + B2.cols());
  M << B1, -B2;
  Mat K = kernel_basis(M, tol);
  if (K.cols() == 0) return Mat(n, 0);
  Mat X = B1 * K.topRows(B1.cols());
  return range_basis(X, tol);
}

Vec nnls(const Mat& A, const Vec& b, int max_iter) {
  const Index n = A.cols();
  Vec x = Vec::Zero(n);
  if (n == 0) return x;
  if (max_iter <= 0) max_iter = static_cast<int>(30 * n + 100);
  const double eps = std::numeric_limits<double>::epsilon();
  const double tol = 10.0 * eps * std::max(1.0, A.norm()) * static_cast<double>(std::max(A.rows(), n));
  std::vector<bool> passive(n, false);
  Vec w = A.transpose() * (b - A * x);

  auto solve_passive = [&](Vec& z) {
    std::vector<Index> idx;
    for (Index j = 0; j < n; ++j)
      if (passive[j]) idx.push_back(j);
    Mat Ap(A.rows(), static_cast<Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) Ap.col(static_cast<Index>(k)) = A.col(idx[k]);
    Vec zp = Ap.completeOrthogonalDecomposition().solve(b);
    z = Vec::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) z(idx[k]) = zp(static_cast<Index>(k));
  };

  for (int it = 0; it < max_iter; ++it) {
    Index jmax = -1;
    double wmax = tol;
    for (Index j = 0; j < n; ++j)
      if (!passive[j] && w(j) > wmax) {
        wmax = w(j);
        jmax = j;
      }
    if (jmax < 0) break;
    passive[jmax] = true;
    Vec z;
    for (int inner = 0; inner < max_iter; ++inner) {
      solve_passive(z);
      bool feasible = true;
      for (Index j = 0; j < n; ++j)
        if (passive[j] && z(j) <= tol) feasible = false;
      if (feasible) break;
      double alpha = 1.0;
      for (Index j = 0; j < n; ++j)
        if (passive[j] && z(j) <= tol) {
          double denom = x(j) - z(j);
          if (denom > 0) alpha = std::min(alpha, x(j) / denom);
        }
      x += alpha * (z - x);
      for (Index j = 0; j < n; ++j)
        if (passive[j] && x(j) <= tol) {
          passive[j] = false;
          x(j) = 0.0;
        }
    }
    x = z;
    for (Index j = 0; j < n; ++j)
      if (!passive[j]) x(j) = 0.0;
    w = A.transpose() * (b - A * x);
  }
  return x.cwiseMax(0.0);
}

double min_eig(const Mat& S) {
  if (S.rows() == 0) return std::numeric_limits<double>::infinity();
  return sym_eig(S).values(0);
}

double max_eig(const Mat& S) {
  if (S.rows() == 0) return -std::numeric_limits<double>::infinity();
  SymEig e = sym_eig(S);
  return e.values(e.values.size() - 1);
}

Mat sym(const Mat& A) { return 0.5 * (A + A.transpose()); }

double loglog_slope(const std::vector<double>& t, const std::vector<double>& r) {
  const std::size_t n = std::min(t.size(), r.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double lx = std::log10(t[i]);
    double ly = std::log10(std::max(r[i], 1e-300));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  double dn = static_cast<double>(n);
  return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 on a counter derived from (seed, stream)
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Mat gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat A(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) A(i, j) = nd(rng);
  return A;
}

Vec gaussian_vec(Index n, Rng& rng) { return gaussian(n, 1, rng).col(0); }

double uniform(double a, double b, Rng& rng) {
  std::uniform_real_distribution<double> ud(a, b);
  return ud(rng);
}

Mat random_orthonormal(Index n, Index k, Rng& rng) {
  Mat G = gaussian(n, k, rng);
  Eigen::HouseholderQR<Mat> qr(G);
  Mat Q = qr.householderQ() * Mat::Identity(n, k);
  Mat R = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  for (Index j = 0; j < k; ++j)
    if (R(j, j) < 0) Q.col(j) *= -1.0;
  return Q;
}

Vec vec(const Mat& A) { return Eigen::Map<const Vec>(A.data(), A.size()); }

Mat unvec(const Vec& v, Index rows, Index cols) {
  if (v.size() != rows * cols) throw Error(Errc::InvalidInput, "unvec: size mismatch");
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

}  // namespace lifts
