#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace lifts {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

enum class Errc {
  InvalidInput,
  ConstantRankViolation,
  RetractionFailure,
  NotCoexact,
  NotSubmersion,
  NoDegeneracy,
  NoPathology,
  SamplerExhausted,
  WitnessSearchFailed,
  InvalidWitness,
  NotConverged,
  NoData,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what);
  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// Thresholds shared by every rank / sign decision.
struct TolerancePolicy {
  double rank_tol_factor = 1e-10;
  double psd_tol = 1e-9;
  double zero_tol = 1e-11;

  /// Singular values above this count toward the numerical rank (never below zero_tol).
  double rank_threshold(double smax, Index rows, Index cols) const;
};

struct Svd {
  Mat U;  // rows x k
  Vec s;  // descending, k = min(rows, cols)
  Mat V;  // cols x k
};

struct SymEig {
  Vec values;  // ascending
  Mat vectors;
};

void require_finite(const Mat& A, const char* where);

Svd svd(const Mat& A);
Index numerical_rank(const Mat& A, const TolerancePolicy& tol = {});
Mat range_basis(const Mat& A, const TolerancePolicy& tol = {});
Mat kernel_basis(const Mat& A, const TolerancePolicy& tol = {});
Mat pinv(const Mat& A, const TolerancePolicy& tol = {});
SymEig sym_eig(const Mat& S);
Vec min_norm_solve(const Mat& A, const Vec& b, const TolerancePolicy& tol = {});

/// Orthonormal basis of the orthogonal complement of span(B) in R^n.
Mat complement_basis(const Mat& B, Index n, const TolerancePolicy& tol = {});
Mat projector(const Mat& basis, Index n);
/// Spectral norm of the difference of orthogonal projectors.
double subspace_distance(const Mat& B1, const Mat& B2, Index n);
/// Orthonormal basis of span(B1) ∩ span(B2).
Mat intersect_basis(const Mat& B1, const Mat& B2, Index n, const TolerancePolicy& tol = {});

/// Nonnegative least squares min ||A x - b||, x >= 0 (Lawson-Hanson).
Vec nnls(const Mat& A, const Vec& b, int max_iter = 0);

double min_eig(const Mat& S);
double max_eig(const Mat& S);
Mat sym(const Mat& A);

/// log-log least-squares slope of residuals against steps.
double loglog_slope(const std::vector<double>& t, const std::vector<double>& r);

// Randomness. Every consumer takes an explicit seed.
using Rng = std::mt19937_64;
std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream);
Mat gaussian(Index rows, Index cols, Rng& rng);
Vec gaussian_vec(Index n, Rng& rng);
double uniform(double a, double b, Rng& rng);
/// Haar-ish orthonormal n x k matrix.
Mat random_orthonormal(Index n, Index k, Rng& rng);

// Matrix <-> flat vector (column-major) views.
Vec vec(const Mat& A);
Mat unvec(const Vec& v, Index rows, Index cols);

}  // namespace lifts
