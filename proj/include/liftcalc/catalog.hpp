#pragma once

#include "liftcalc/cones.hpp"
#include "liftcalc/lift.hpp"

#include <map>
#include <optional>

namespace lifts {

enum class Property { LocalToLocal, OneToOne, TwoToOne };
enum class Expectation { Holds, Fails, Unspecified };

const char* property_name(Property p);
const char* expectation_name(Expectation e);

struct EntryParams {
  Index n = 0, m = 0, r = 0;
  double r1 = 1.0, r2 = 2.0;
  std::vector<Index> dims;
  std::vector<Index> perm;  // column permutation for desing_chart: Pi(i, perm[i]) = 1
  Mat U;                    // eigen_simplex rotation
  std::vector<Mat> A;       // burer_monteiro constraints
  Vec b;
  Index constraints = 2;
  std::uint64_t seed = 1;
};

/// One member of a family v_i with L(v_i) -> 0 and Q(v_i) == q_limit (modulo im L).
struct DegenerateDirection {
  Vec v;
  Vec q_limit;
};

struct FiberDistance {
  double sampled_min = 0;              // best distance over sampled fiber points
  std::optional<double> lower_bound;   // certified lower bound when available
  int samples = 0;
};

struct CatalogEntry {
  std::string id;
  EntryParams params;
  Lift lift;
  SetDesc set;
  std::vector<std::string> regimes;

  std::function<Vec(const std::string&, Rng&)> sample_point;
  std::function<Expectation(Property, const Vec&)> expected;

  /// Closed-form L and Q, as maps (y, ydot) -> ambient vector.
  std::function<Vec(const Vec&, const Vec&)> closed_L;
  std::function<Vec(const Vec&, const Vec&)> closed_Q;

  std::function<std::vector<DegenerateDirection>(const Vec&, double)> degenerate;
  /// Generators g with B_y = cone(g) + im L, where the proofs compute B_y exactly.
  std::function<std::optional<std::vector<Vec>>(const Vec&)> b_exact;
  std::function<Vec(const Vec&, int)> pathological;
  std::function<FiberDistance(const Vec&, const Vec&, int, Rng&)> fiber_distance;
  std::function<std::vector<Vec>(const Vec&)> witness_candidates;
  /// Closed-form membership of d in A_y: true/false, or nullopt when not applicable.
  std::function<std::optional<bool>(const Vec&, const Vec&)> a_decompose;

  Expectation expect(Property p, const Vec& y) const {
    return expected ? expected(p, y) : Expectation::Unspecified;
  }
};

std::vector<std::string> catalog_ids();
CatalogEntry build(const std::string& id, const EntryParams& params = {});
/// Default parameters used by build() when fields are left at zero.
EntryParams default_params(const std::string& id);

/// The inclusion S^{n-1} -> R^n as a lift onto the unit sphere (identity on coordinates).
Lift sphere_inclusion(Index n);

}  // namespace lifts
