#pragma once

#include "liftcalc/catalog.hpp"
#include "liftcalc/optimize.hpp"

#include <json.hpp>

#include <map>

namespace lifts {

using Json = nlohmann::ordered_json;

enum class Verdict { Holds, Fails, Inconclusive };
enum class Tri { True, False, Inconclusive };

const char* verdict_name(Verdict v);
const char* tri_name(Tri t);
/// Holds/Fails agree with the expectation; Unspecified accepts anything.
bool matches(Expectation e, Verdict v);

struct VerdictEvidence {
  Verdict verdict = Verdict::Inconclusive;
  Json evidence = Json::object();
};

struct WitnessCost {
  enum class Kind { Linear, Quadratic };
  Kind kind = Kind::Linear;
  Vec w;
  double alpha = 0;
  Vec center;
  double grad_norm_upstairs = 0;
  double hess_min_eig_upstairs = 0;  // Quadratic only
  double downstream_gap = 0;
  Vec witness_direction;

  Cost cost() const;
  /// The verification fields satisfy the witness invariants.
  bool valid() const;
  Json to_json() const;
};

struct ChainReport {
  VerdictEvidence a_sufficient;
  VerdictEvidence b_dual;
  VerdictEvidence w_condition;
  VerdictEvidence necessary;
};

struct PropertyReport {
  std::string digest;
  Vec y;
  std::map<Property, VerdictEvidence> verdicts;
  ChainReport chain;
  std::optional<WitnessCost> linear_witness;
  std::optional<WitnessCost> quadratic_witness;
  bool monotone = true;

  Json to_json() const;
};

struct CheckOptions {
  std::uint64_t seed = 0;
  int a_directions = 300;
  int w_random = 200;
  int necessary_samples = 300;
  int witness_candidates = 200;
  int fiber_samples = 500;
  TolerancePolicy tol;
};

/// Hex digest of the coordinates of y.
std::string point_digest(const Vec& y);

VerdictEvidence check_one_implies_one(const Lift& lift, const Vec& y, const TangentCone& cone,
                                      const CheckOptions& opt = {});
/// w orthogonal to im L with stationarity gap <= -1e-4; throws WitnessSearchFailed.
WitnessCost witness_linear_cost(const Lift& lift, const Vec& y, const TangentCone& cone, std::uint64_t seed = 0,
                                int candidates = 200);

/// Whether d = Q(v) + L u for some v in ker L. The entry supplies closed-form decompositions when available.
Tri a_set_contains(const Lift& lift, const Vec& y, const Vec& d, const CatalogEntry* entry = nullptr,
                   std::uint64_t seed = 0);

/// w orthogonal to im L is in W: Phi_1 PSD and im Phi_2 inside im Phi_1 ([ker L | ker L perp] blocks).
bool w_set_member(const Lift& lift, const Vec& y, const Vec& w, const TolerancePolicy& tol = {});

ChainReport check_chain(const Lift& lift, const Vec& y, const TangentCone& cone, const CatalogEntry* entry = nullptr,
                        const CheckOptions& opt = {});

/// f(x) = <w, x> + alpha/2 ||x - phi(y)||^2 with y 2-critical and phi(y) nonstationary; throws InvalidWitness.
WitnessCost witness_quadratic_cost(const Lift& lift, const Vec& y, const Vec& w, const TangentCone& cone);

VerdictEvidence local_to_local_verdict(const CatalogEntry* entry, const Vec& y, const CheckOptions& opt = {});

/// Every property and the chain at a catalog point, with witnesses for failures.
PropertyReport check_point(const CatalogEntry& entry, const Vec& y, const CheckOptions& opt = {});

/// A=Holds => B=Holds => W=Holds => necessary=Holds, and 1=>1 Holds => W Holds; Fails never follows Holds.
bool chain_monotone(const PropertyReport& rep);

Json to_json(const Vec& v);
Vec vec_from_json(const Json& j);

}  // namespace lifts
