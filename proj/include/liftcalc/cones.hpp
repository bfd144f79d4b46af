#pragma once

#include "liftcalc/manifold.hpp"

#include <memory>
#include <optional>

namespace lifts {

enum class SetKind {
  Simplex,
  StochasticMatrices,
  Ball,
  Annulus,
  BoundedRank,
  PsdBoundedRank,
  SmoothSdpSlice,
  NodalCubic,
  Disk,
  Orthant,
  Product,
  Preimage,
  Rank1Tensors,
};

const char* set_kind_name(SetKind k);

/// Downstairs set X. Matrices are stored column-major.
struct SetDesc {
  SetKind kind = SetKind::Simplex;
  Index n = 0, m = 0, r = 0;
  double r1 = 0, r2 = 0;
  std::vector<Mat> A;  // slice constraints <A_i, X> = b_i
  Vec b;
  std::vector<Index> dims;         // tensor dimensions
  std::vector<SetDesc> factors;    // product
  std::shared_ptr<SmoothMap> F;    // preimage map
  std::shared_ptr<SetDesc> inner;  // preimage target

  static SetDesc simplex(Index n);
  static SetDesc stochastic(Index n, Index m);
  static SetDesc ball(Index n);
  static SetDesc disk(Index n);
  static SetDesc annulus(Index n, double r1, double r2);
  static SetDesc bounded_rank(Index m, Index n, Index r);
  static SetDesc psd_bounded_rank(Index n, Index r);
  static SetDesc smooth_sdp_slice(std::vector<Mat> A, Vec b, Index n, Index r);
  static SetDesc nodal_cubic();
  static SetDesc orthant(Index n);
  static SetDesc product(std::vector<SetDesc> factors);
  static SetDesc preimage(SmoothMap F, SetDesc inner);
  static SetDesc rank1_tensors(std::vector<Index> dims);

  Index ambient_dim() const;
};

/// Defining-relation residual of x (0 on the set).
double set_residual(const SetDesc& set, const Vec& x);
/// A feasible point within `radius` of `center` (center must be feasible).
Vec sample_near(const SetDesc& set, const Vec& center, double radius, Rng& rng);
/// Euclidean projection onto the probability simplex.
Vec project_simplex(const Vec& v);

enum class ConeKind { Subspace, BoundedRank, PsdRank, Polyhedral, Product, IntersectSlice, LineUnion, Rank1, Preimage };

const char* cone_kind_name(ConeKind k);

struct TangentCone {
  ConeKind kind = ConeKind::Subspace;
  Index dim = 0;  // ambient dimension
  Mat basis;      // Subspace basis; LineUnion directions
  // BoundedRank (m x n) and PsdRank (n x n): U/V hold col/row spaces, *_perp complements.
  Index m = 0, n = 0, s = 0, r = 0;
  Mat U, V, Uperp, Vperp;
  // Polyhedral {E v = 0, G v >= 0}; IntersectSlice / Preimage matrix in A.
  Mat E, G, A;
  std::vector<TangentCone> parts;
  std::vector<Index> offsets;
  std::shared_ptr<TangentCone> base;
  std::vector<Index> dims;
  double rank_gap = 0;  // smallest kept / largest dropped singular value, for audit
};

struct MemberResult {
  bool inside = false;
  double violation = 0;
};

TangentCone cone_at(const SetDesc& set, const Vec& x, const TolerancePolicy& tol = {});
MemberResult member(const TangentCone& cone, const Vec& v, double tol = 1e-10);
/// inf <w, v> over v in the cone with ||v|| <= 1; >= -tol iff w is in the dual cone.
double stationarity_gap(const TangentCone& cone, const Vec& w);
/// Euclidean projection onto the dual cone.
Vec project_dual(const TangentCone& cone, const Vec& z);
std::vector<Vec> sample_directions(const TangentCone& cone, int k, std::uint64_t seed);
std::vector<Vec> empirical_tangents(const SetDesc& set, const Vec& x, int k, std::uint64_t seed);
/// Basis when the cone is a linear subspace.
std::optional<Mat> as_subspace(const TangentCone& cone);

/// Best rank-1 approximation of a tensor (first index fastest): returns lambda * a1 (x) ... (x) ad.
struct Rank1Fit {
  double lambda = 0;
  std::vector<Vec> factors;
  Vec tensor;
};
Rank1Fit best_rank1(const Vec& t, const std::vector<Index>& dims, int restarts = 4, std::uint64_t seed = 0);
Vec outer(const std::vector<Vec>& factors);

}  // namespace lifts
