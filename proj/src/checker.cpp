#include "liftcalc/checker.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>

namespace lifts {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Holds: return "Holds";
    case Verdict::Fails: return "Fails";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

const char* tri_name(Tri t) {
  switch (t) {
    case Tri::True: return "true";
    case Tri::False: return "false";
    case Tri::Inconclusive: return "inconclusive";
  }
  return "?";
}

bool matches(Expectation e, Verdict v) {
  switch (e) {
    case Expectation::Holds: return v == Verdict::Holds;
    case Expectation::Fails: return v == Verdict::Fails;
    case Expectation::Unspecified: return true;
  }
  return false;
}

Json to_json(const Vec& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vec vec_from_json(const Json& j) {
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

std::string point_digest(const Vec& y) {
  std::uint64_t h = 1469598103934665603ULL;
  for (Index i = 0; i < y.size(); ++i) {
    double c = y(i) == 0.0 ? 0.0 : y(i);
    unsigned char b[sizeof(double)];
    std::memcpy(b, &c, sizeof(double));
    for (unsigned char x : b) {
      h ^= x;
      h *= 1099511628211ULL;
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Cost WitnessCost::cost() const {
  if (kind == Kind::Linear) return Cost::linear(w);
  return Cost::quadratic_shift(w, alpha, center);
}

bool WitnessCost::valid() const {
  if (!(grad_norm_upstairs <= 1e-9) || !(downstream_gap <= -1e-4)) return false;
  return kind == Kind::Linear || hess_min_eig_upstairs >= -1e-8;
}

Json WitnessCost::to_json() const {
  Json j;
  j["kind"] = kind == Kind::Linear ? "Linear" : "Quadratic";
  j["w"] = lifts::to_json(w);
  if (kind == Kind::Quadratic) {
    j["alpha"] = alpha;
    j["center"] = lifts::to_json(center);
  }
  j["grad_norm_upstairs"] = grad_norm_upstairs;
  if (kind == Kind::Quadratic) j["hess_min_eig_upstairs"] = hess_min_eig_upstairs;
  j["downstream_gap"] = downstream_gap;
  j["witness_direction"] = lifts::to_json(witness_direction);
  j["valid"] = valid();
  return j;
}

namespace {

Mat perp_projector(const LQData& d) {
  const Index n = d.x.size();
  return Mat::Identity(n, n) - d.im_L * d.im_L.transpose();
}

TangentCone polyhedral_cone(const Mat& G) {
  TangentCone c;
  c.kind = ConeKind::Polyhedral;
  c.dim = G.cols();
  c.E = Mat(0, G.cols());
  c.G = G;
  return c;
}

/// The cone generated by the rows of G is all of R^k, i.e. {c : G c >= 0} = {0}.
bool positively_spanning(const Mat& G) {
  const Index k = G.cols();
  if (k == 0) return true;
  if (G.rows() == 0 || numerical_rank(G) < k) return false;
  Mat At = G.transpose();
  for (Index i = 0; i < k; ++i)
    for (double sg : {1.0, -1.0}) {
      Vec e = sg * Vec::Unit(k, i);
      Vec mu = nnls(At, e);
      if ((At * mu - e).norm() > 1e-8) return false;
    }
  return true;
}

std::vector<Vec> safe_samples(const TangentCone& cone, int k, std::uint64_t seed) {
  try {
    return sample_directions(cone, k, seed);
  } catch (const Error& e) {
    if (e.code() == Errc::SamplerExhausted) return {};
    throw;
  }
}

/// Witness direction: the sampled cone direction minimizing <w, d>.
Vec worst_direction(const TangentCone& cone, const Vec& w, std::uint64_t seed) {
  Vec best;
  double bv = std::numeric_limits<double>::infinity();
  for (const Vec& s : safe_samples(cone, 200, seed)) {
    double v = w.dot(s);
    if (v < bv) {
      bv = v;
      best = s;
    }
  }
  if (auto sub = as_subspace(cone)) {
    Vec p = *sub * (sub->transpose() * w);
    if (p.norm() > 1e-12 && -p.norm() < bv) best = -p / p.norm();
  }
  return best.size() ? best : Vec(Vec::Zero(w.size()));
}

// ------------------------------------------------------------ A_y membership

struct AData {
  LQData d;
  Mat Pperp;
  Index k = 0;
  std::vector<Vec> B;  // k*k projected polarizations, B[i*k+j]
  Mat S;               // basis of their span
  double bscale = 0;
};

AData prepare_a(const Lift& lift, const Vec& y) {
  AData a;
  a.d = lq(lift, y);
  a.Pperp = perp_projector(a.d);
  const Mat& K = a.d.ker_L;
  a.k = K.cols();
  const Index n = a.d.x.size();
  a.B.assign(static_cast<std::size_t>(a.k * a.k), Vec::Zero(n));
  std::vector<Vec> qk;
  for (Index i = 0; i < a.k; ++i) qk.push_back(qmap_coords(lift, a.d, K.col(i)));
  Mat cols(n, a.k * (a.k + 1) / 2);
  Index c = 0;
  for (Index i = 0; i < a.k; ++i)
    for (Index j = i; j < a.k; ++j) {
      Vec b = i == j ? qk[static_cast<std::size_t>(i)]
                     : Vec(0.5 * (qmap_coords(lift, a.d, K.col(i) + K.col(j)) - qk[static_cast<std::size_t>(i)] -
                                  qk[static_cast<std::size_t>(j)]));
      b = a.Pperp * b;
      a.B[static_cast<std::size_t>(i * a.k + j)] = b;
      a.B[static_cast<std::size_t>(j * a.k + i)] = b;
      cols.col(c++) = b;
      a.bscale = std::max(a.bscale, b.norm());
    }
  a.S = a.bscale > 1e-14 ? range_basis(cols) : Mat(n, 0);
  return a;
}

/// Levenberg-Marquardt on sum_ij al_i al_j B_ij = r.
bool solve_quadratic_system(const AData& a, const Vec& r, double tol, Rng& rng) {
  const Index k = a.k, n = r.size();
  auto residual = [&](const Vec& al) {
    Vec F = -r;
    for (Index i = 0; i < k; ++i)
      for (Index j = 0; j < k; ++j) F += al(i) * al(j) * a.B[static_cast<std::size_t>(i * k + j)];
    return F;
  };
  const double s0 = std::sqrt(r.norm() / std::max(a.bscale, 1e-300) / static_cast<double>(k));
  for (int restart = 0; restart < 20; ++restart) {
    Vec al = s0 * gaussian_vec(k, rng);
    Vec F = residual(al);
    double fn = F.norm(), lam = 1e-3;
    for (int it = 0; it < 200 && fn > tol; ++it) {
      Mat J = Mat::Zero(n, k);
      for (Index l = 0; l < k; ++l)
        for (Index j = 0; j < k; ++j) J.col(l) += 2.0 * al(j) * a.B[static_cast<std::size_t>(l * k + j)];
      Mat JtJ = J.transpose() * J;
      Vec g = J.transpose() * F;
      bool moved = false;
      for (int tries = 0; tries < 12; ++tries) {
        Mat A = JtJ;
        A.diagonal().array() += lam * (JtJ.diagonal().array().maxCoeff() + 1e-12);
        Vec step = A.ldlt().solve(-g);
        Vec trial = al + step;
        Vec Ft = residual(trial);
        if (Ft.norm() < fn) {
          al = trial;
          F = Ft;
          fn = Ft.norm();
          lam = std::max(lam / 3.0, 1e-12);
          moved = true;
          break;
        }
        lam *= 4.0;
      }
      if (!moved) break;
    }
    if (fn <= tol) return true;
  }
  return false;
}

Tri a_contains(const AData& a, const Lift&, const Vec& y, const Vec& dvec, const CatalogEntry* entry, Rng& rng,
               bool allow_search) {
  const double scale = std::max(1.0, dvec.norm());
  Vec r0 = a.Pperp * dvec;
  if (r0.norm() <= 1e-9 * scale) return Tri::True;
  if (a.k == 0) return Tri::False;
  Vec out = r0 - a.S * (a.S.transpose() * r0);
  if (out.norm() > 1e-7 * scale) return Tri::False;
  if (entry && entry->a_decompose) {
    if (auto res = entry->a_decompose(y, dvec)) return *res ? Tri::True : Tri::False;
  }
  if (!allow_search) return Tri::Inconclusive;
  return solve_quadratic_system(a, r0, 1e-9 * scale, rng) ? Tri::True : Tri::Inconclusive;
}

// ------------------------------------------------------------ W_y membership

struct WData {
  LQData d;
  Mat C;                  // orthonormal basis of (im L)^perp
  std::vector<Mat> Phi;   // qform of each column of C, tangent coordinates
};

WData prepare_w(const Lift& lift, const Vec& y, const TolerancePolicy& tol) {
  WData wd;
  wd.d = lq(lift, y, tol);
  wd.C = complement_basis(wd.d.im_L, wd.d.x.size());
  for (Index k = 0; k < wd.C.cols(); ++k) wd.Phi.push_back(sym(second_form(lift, wd.d, wd.C.col(k))));
  return wd;
}

Mat phi_of(const WData& wd, const Vec& c) {
  const Index m = wd.d.T.cols();
  Mat P = Mat::Zero(m, m);
  for (Index k = 0; k < c.size(); ++k) P += c(k) * wd.Phi[static_cast<std::size_t>(k)];
  return P;
}

/// Pseudo-inverse of a symmetric matrix keeping eigenvalues above thr.
Mat sym_pinv(const Mat& S, double thr) {
  SymEig ev = sym_eig(S);
  Mat P = Mat::Zero(S.rows(), S.cols());
  for (Index i = 0; i < ev.values.size(); ++i)
    if (ev.values(i) > thr) P += ev.vectors.col(i) * ev.vectors.col(i).transpose() / ev.values(i);
  return P;
}

bool member_blocks(const Mat& Phi, const LQData& d, const TolerancePolicy& tol) {
  const Mat& K = d.ker_L;
  if (K.cols() == 0) return true;
  SymEig ev = sym_eig(Mat(K.transpose() * Phi * K));
  if (ev.values(0) < -tol.psd_tol) return false;
  if (d.ker_perp.cols() == 0) return true;
  // range of Phi_1 from eigenvalues above an absolute threshold, so rounding noise has no range
  const double thr = std::max(tol.psd_tol, 1e-9 * std::max(1.0, Phi.norm()));
  Mat P2 = K.transpose() * Phi * d.ker_perp;
  Mat R = P2;
  for (Index i = 0; i < ev.values.size(); ++i)
    if (ev.values(i) > thr) R -= ev.vectors.col(i) * (ev.vectors.col(i).transpose() * P2);
  return R.norm() <= 1e-7;
}

// ------------------------------------------------------------ chain links

VerdictEvidence a_sufficient(const Lift& lift, const Vec& y, const std::vector<Vec>& dirs, bool exhausted,
                             const CatalogEntry* entry, const CheckOptions& opt, std::vector<Tri>& tri) {
  VerdictEvidence ve;
  AData a = prepare_a(lift, y);
  ve.evidence["ker_L_dim"] = a.k;
  tri.assign(dirs.size(), Tri::Inconclusive);
  if (exhausted) {
    ve.evidence["error"] = "cone sampler exhausted";
    return ve;
  }
  Rng rng(split_seed(opt.seed, 12));
  int n_true = 0, n_false = 0, n_inc = 0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    Tri t = a_contains(a, lift, y, dirs[i], entry, rng, n_inc < 10);
    tri[i] = t;
    if (t == Tri::True) ++n_true;
    if (t == Tri::Inconclusive) ++n_inc;
    if (t == Tri::False) {
      ++n_false;
      ve.evidence["direction_outside_A"] = to_json(dirs[i]);
      break;
    }
  }
  ve.evidence["sampled"] = n_true + n_false + n_inc;
  ve.evidence["in_A"] = n_true;
  ve.evidence["not_in_A"] = n_false;
  ve.evidence["undecided"] = n_inc;
  if (n_false) ve.verdict = Verdict::Fails;
  else if (n_inc == 0) ve.verdict = Verdict::Holds;
  return ve;
}

/// Sampled members of {c : G c >= 0}; the whole space when G has no rows.
std::vector<Vec> polyhedral_members(const Mat& G, Index k, int count, std::uint64_t seed) {
  std::vector<Vec> out;
  if (G.rows() == 0) {
    Rng rng(seed);
    for (Index i = 0; i < k; ++i) {
      out.push_back(Vec::Unit(k, i));
      out.push_back(-Vec::Unit(k, i));
    }
    for (int s = 0; s < count; ++s) {
      Vec c = gaussian_vec(k, rng);
      if (c.norm() > 1e-12) out.push_back(c / c.norm());
    }
    return out;
  }
  return safe_samples(polyhedral_cone(G), count, seed);
}

VerdictEvidence b_dual(const Lift& lift, const Vec& y, const TangentCone& cone, const CatalogEntry* entry,
                       const VerdictEvidence& a, const CheckOptions& opt) {
  VerdictEvidence ve;
  const bool via_a = a.verdict == Verdict::Holds;
  if (via_a && !(entry && entry->degenerate)) {
    ve.verdict = Verdict::Holds;
    ve.evidence["source"] = "A_sufficient";
    return ve;
  }
  auto finish = [&](VerdictEvidence& out) {
    if (via_a) {
      out.verdict = Verdict::Holds;
      out.evidence["source"] = "A_sufficient";
    }
    return out;
  };
  LQData d = lq(lift, y, opt.tol);
  Mat Pperp = perp_projector(d);
  Mat C = complement_basis(d.im_L, d.x.size());
  auto dual_over = [&](const Mat& G, bool exact, VerdictEvidence& out) {
    if (positively_spanning(G)) {
      out.verdict = Verdict::Holds;
      out.evidence["b_dual_trivial"] = true;
      return;
    }
    out.evidence["b_dual_trivial"] = false;
    double worst = std::numeric_limits<double>::infinity();
    Vec worst_w;
    auto members = polyhedral_members(G, C.cols(), 200, split_seed(opt.seed, 21));
    for (const Vec& c : members) {
      Vec w = C * c;
      double gap = stationarity_gap(cone, w);
      if (gap < worst) {
        worst = gap;
        worst_w = w;
      }
    }
    out.evidence["sampled_members"] = members.size();
    out.evidence["min_gap"] = members.empty() ? 0.0 : worst;
    if (members.empty() || worst >= -1e-6) {
      out.verdict = Verdict::Holds;
    } else if (exact && worst <= -1e-4) {
      out.verdict = Verdict::Fails;
      out.evidence["w"] = to_json(worst_w);
    }
  };
  if (entry && entry->degenerate) {
    try {
      const double steps[] = {8.0, 16.0, 32.0, 64.0};
      std::vector<std::vector<DegenerateDirection>> fam;
      for (double i : steps) fam.push_back(entry->degenerate(y, i));
      const Mat J = lift.phi.jacobian(y);
      std::vector<Vec> gens;
      double worst_q = 0, worst_ratio = 0;
      for (std::size_t j = 0; j < fam[0].size(); ++j) {
        bool ok = true;
        std::vector<double> lnorm;
        for (std::size_t s = 0; s < fam.size(); ++s) {
          const auto& dd = fam[s][j];
          Vec q = qmap(lift, y, dd.v);
          double err = (Pperp * (q - dd.q_limit)).norm();
          worst_q = std::max(worst_q, err);
          if (err > 1e-9 * std::max(1.0, dd.q_limit.norm())) ok = false;
          lnorm.push_back((J * dd.v).norm());
        }
        if (lnorm[0] > 1e-14) {
          for (std::size_t s = 0; s + 1 < lnorm.size(); ++s) {
            double ratio = lnorm[s] / lnorm[s + 1];
            worst_ratio = std::max(worst_ratio, std::abs(ratio / 2.0 - 1.0));
            if (std::abs(ratio / 2.0 - 1.0) > 0.1) ok = false;
          }
        }
        if (ok) gens.push_back(Pperp * fam[0][j].q_limit);
      }
      ve.evidence["degenerate_directions"] = fam[0].size();
      ve.evidence["certified"] = gens.size();
      ve.evidence["max_q_limit_error"] = worst_q;
      ve.evidence["max_ratio_deviation"] = worst_ratio;
      Mat G(static_cast<Index>(gens.size()), C.cols());
      for (std::size_t j = 0; j < gens.size(); ++j) G.row(static_cast<Index>(j)) = (C.transpose() * gens[j]).transpose();
      if (!gens.empty()) dual_over(G, false, ve);
      return finish(ve);
    } catch (const Error& e) {
      if (e.code() != Errc::NoDegeneracy) throw;
      ve.evidence["degenerate"] = e.what();
      if (via_a) return finish(ve);
    }
  }
  if (entry && entry->b_exact) {
    if (auto g = entry->b_exact(y)) {
      Mat G(static_cast<Index>(g->size()), C.cols());
      for (std::size_t j = 0; j < g->size(); ++j) G.row(static_cast<Index>(j)) = (C.transpose() * (*g)[j]).transpose();
      ve.evidence["exact_generators"] = g->size();
      dual_over(G, true, ve);
      return ve;
    }
  }
  ve.evidence["reason"] = "no certificate for B_y";
  return ve;
}

struct WOutcome {
  VerdictEvidence ve;
  Vec w;  // failing member, if any
};

WOutcome w_condition(const WData& wd, const Vec& y, const TangentCone& cone, const CatalogEntry* entry,
                     const std::vector<Vec>& extra, const CheckOptions& opt) {
  WOutcome out;
  const Index kc = wd.C.cols();
  out.ve.evidence["coexact_dim"] = kc;
  if (kc == 0) {
    out.ve.verdict = Verdict::Holds;
    return out;
  }
  std::vector<Vec> cands;
  for (Index i = 0; i < kc; ++i) {
    cands.push_back(Vec::Unit(kc, i));
    cands.push_back(-Vec::Unit(kc, i));
  }
  Rng rng(split_seed(opt.seed, 31));
  // Z = {c : Phi_1(c) = 0, Phi_2(c) = 0} lies in W
  const Mat& K = wd.d.ker_L;
  const Mat& Kp = wd.d.ker_perp;
  if (K.cols() > 0) {
    const Index r1 = K.cols() * K.cols(), r2 = K.cols() * Kp.cols();
    Mat M(r1 + r2, kc);
    for (Index k = 0; k < kc; ++k) {
      const Mat& P = wd.Phi[static_cast<std::size_t>(k)];
      Mat P1 = K.transpose() * P * K;
      M.col(k).head(r1) = Eigen::Map<const Vec>(P1.data(), r1);
      if (r2) {
        Mat P2 = K.transpose() * P * Kp;
        M.col(k).tail(r2) = Eigen::Map<const Vec>(P2.data(), r2);
      }
    }
    Mat Z = kernel_basis(M);
    out.ve.evidence["z_dim"] = Z.cols();
    for (Index i = 0; i < Z.cols(); ++i) {
      cands.push_back(Z.col(i));
      cands.push_back(-Z.col(i));
    }
    for (int s = 0; s < 50 && Z.cols(); ++s) cands.push_back(Z * gaussian_vec(Z.cols(), rng));
  }
  for (int s = 0; s < opt.w_random; ++s) cands.push_back(gaussian_vec(kc, rng));
  for (const Vec& w : extra) cands.push_back(wd.C.transpose() * w);
  if (entry && entry->witness_candidates)
    for (const Vec& w : entry->witness_candidates(y)) cands.push_back(wd.C.transpose() * w);
  int members = 0;
  double worst = std::numeric_limits<double>::infinity();
  Vec worst_w;
  for (Vec c : cands) {
    double nc = c.norm();
    if (nc < 1e-12) continue;
    c /= nc;
    if (!member_blocks(phi_of(wd, c), wd.d, opt.tol)) continue;
    ++members;
    Vec w = wd.C * c;
    double gap = stationarity_gap(cone, w);
    if (gap < worst) {
      worst = gap;
      worst_w = w;
    }
  }
  out.ve.evidence["candidates"] = cands.size();
  out.ve.evidence["members"] = members;
  out.ve.evidence["min_gap"] = members ? worst : 0.0;
  if (members == 0 || worst >= -1e-6) {
    out.ve.verdict = Verdict::Holds;
  } else if (worst <= -1e-4) {
    out.ve.verdict = Verdict::Fails;
    out.ve.evidence["w"] = to_json(worst_w);
    out.w = worst_w;
  }
  return out;
}

struct NOutcome {
  VerdictEvidence ve;
  std::vector<Vec> members;  // sampled members of N, ambient
};

NOutcome necessary(const WData& wd, const TangentCone& cone, const CatalogEntry* entry, const std::vector<Vec>& dirs,
                   const std::vector<Tri>& in_a, const CheckOptions& opt) {
  NOutcome out;
  const Index kc = wd.C.cols(), m = wd.d.T.cols();
  out.ve.evidence["coexact_dim"] = kc;
  if (kc == 0) {
    out.ve.verdict = Verdict::Holds;
    return out;
  }
  double qmax = 0;
  for (const Mat& P : wd.Phi) qmax = std::max(qmax, P.norm());
  if (entry && wd.d.L.norm() <= 1e-12 && qmax <= 1e-12) {
    // L = Q = 0: any nonzero tangent of X escapes the dual
    auto tang = empirical_tangents(entry->set, wd.d.x, 200, split_seed(opt.seed, 41));
    int nonzero = 0;
    for (const Vec& t : tang) nonzero += t.norm() > 0.5 ? 1 : 0;
    out.ve.evidence["L_norm"] = wd.d.L.norm();
    out.ve.evidence["Q_norm"] = qmax;
    out.ve.evidence["empirical_tangents"] = tang.size();
    out.ve.evidence["nonzero_tangents"] = nonzero;
  }
  // N = {c : <c, C^T Q(v)> >= 0 for all v}; N inside the dual of T iff each C^T d lies in the
  // closed cone generated by the C^T Q(v). Columns are sampled, then generated from separating c.
  Rng rng(split_seed(opt.seed, 42));
  auto column = [&](const Vec& v) {
    Vec g(kc);
    for (Index k = 0; k < kc; ++k) g(k) = v.dot(wd.Phi[static_cast<std::size_t>(k)] * v);
    return g;
  };
  std::vector<Vec> cols;
  for (int s = 0; s < opt.necessary_samples && m > 0; ++s) {
    Vec v = gaussian_vec(m, rng);
    Vec g = column(v / v.norm());
    if (g.norm() >= 1e-12) cols.push_back(g);
  }
  auto as_matrix = [&] {
    Mat Q(kc, static_cast<Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) Q.col(static_cast<Index>(j)) = cols[j];
    return Q;
  };
  Mat Qm = as_matrix();
  int certified = 0, undecided = 0, generated = 0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const Vec& dv = dirs[i];
    Vec t = wd.C.transpose() * dv;
    // directions in A project onto a single Q value
    if (t.norm() <= 1e-10 || in_a[i] == Tri::True) {
      ++certified;
      continue;
    }
    bool done = false;
    if (undecided >= 10) {
      ++undecided;
      continue;
    }
    for (int round = 0; round < 30 && !done; ++round) {
      Vec res = t;
      if (Qm.cols() > 0) res = Qm * nnls(Qm, t) - t;
      if (res.norm() <= 1e-8 * t.norm()) {
        ++certified;
        done = true;
        break;
      }
      // res separates: <res, q_j> >= 0 on the columns and <res, t> < 0
      Vec c = res / res.norm();
      SymEig ev = sym_eig(phi_of(wd, c));
      if (m == 0 || ev.values(0) >= -1e-9) {
        Vec w = wd.C * c;
        out.members.push_back(w);
        double gap = stationarity_gap(cone, w);
        if (gap <= -1e-6) {
          out.ve.verdict = Verdict::Fails;
          out.ve.evidence["w"] = to_json(w);
          out.ve.evidence["gap"] = gap;
          out.ve.evidence["direction"] = to_json(dv);
          out.ve.evidence["certified_directions"] = certified;
          out.ve.evidence["columns"] = Qm.cols();
          return out;
        }
        ++undecided;
        done = true;
        break;
      }
      cols.push_back(column(ev.vectors.col(0)));
      Qm = as_matrix();
      ++generated;
    }
    if (!done) ++undecided;
  }
  if (dirs.empty()) out.ve.evidence["trivial"] = "cone has no nonzero samples";
  out.ve.evidence["sampled_directions"] = dirs.size();
  out.ve.evidence["certified_directions"] = certified;
  out.ve.evidence["undecided"] = undecided;
  out.ve.evidence["generated_columns"] = generated;
  if (undecided == 0) out.ve.verdict = Verdict::Holds;
  return out;
}

}  // namespace

VerdictEvidence check_one_implies_one(const Lift& lift, const Vec& y, const TangentCone& cone, const CheckOptions& opt) {
  VerdictEvidence ve;
  LQData d = lq(lift, y, opt.tol);
  const Index n = d.x.size();
  ve.evidence["rank_L"] = d.im_L.cols();
  ve.evidence["cone"] = cone_kind_name(cone.kind);
  if (auto sub = as_subspace(cone)) {
    double dist = subspace_distance(d.im_L, *sub, n);
    ve.evidence["cone_dim"] = sub->cols();
    ve.evidence["projector_distance"] = dist;
    ve.verdict = dist <= 1e-7 ? Verdict::Holds : Verdict::Fails;
    return ve;
  }
  ve.verdict = Verdict::Fails;
  Mat Pperp = perp_projector(d);
  double best = -1;
  Vec bd;
  for (const Vec& s : safe_samples(cone, 200, split_seed(opt.seed, 1))) {
    double r = (Pperp * s).norm();
    if (r > best) {
      best = r;
      bd = s;
    }
  }
  if (bd.size()) {
    ve.evidence["direction_outside_im_L"] = to_json(bd);
    ve.evidence["residual"] = best;
  }
  return ve;
}

WitnessCost witness_linear_cost(const Lift& lift, const Vec& y, const TangentCone& cone, std::uint64_t seed,
                                int candidates) {
  LQData d = lq(lift, y);
  Mat Pperp = perp_projector(d);
  Mat C = complement_basis(d.im_L, d.x.size());
  std::vector<Vec> cands;
  for (const Vec& s : safe_samples(cone, candidates, split_seed(seed, 2))) cands.push_back(-(Pperp * s));
  for (Index i = 0; i < C.cols(); ++i) {
    cands.push_back(C.col(i));
    cands.push_back(-C.col(i));
  }
  double best = std::numeric_limits<double>::infinity();
  Vec bw;
  for (const Vec& w0 : cands) {
    double nw = w0.norm();
    if (nw < 1e-12) continue;
    Vec w = w0 / nw;
    double gap = stationarity_gap(cone, w);
    if (gap < best) {
      best = gap;
      bw = w;
    }
  }
  if (!(best <= -1e-4))
    throw Error(Errc::WitnessSearchFailed, "no w orthogonal to im L outside the dual cone among " +
                                               std::to_string(cands.size()) + " candidates");
  WitnessCost wc;
  wc.kind = WitnessCost::Kind::Linear;
  wc.w = bw;
  wc.center = d.x;
  wc.grad_norm_upstairs = grad_g(lift, d, wc.cost()).norm();
  wc.downstream_gap = best;
  wc.witness_direction = worst_direction(cone, bw, split_seed(seed, 3));
  return wc;
}

Tri a_set_contains(const Lift& lift, const Vec& y, const Vec& d, const CatalogEntry* entry, std::uint64_t seed) {
  AData a = prepare_a(lift, y);
  Rng rng(seed);
  return a_contains(a, lift, y, d, entry, rng, true);
}

bool w_set_member(const Lift& lift, const Vec& y, const Vec& w, const TolerancePolicy& tol) {
  LQData d = lq(lift, y, tol);
  return member_blocks(qform_matrix(lift, d, w), d, tol);
}

ChainReport check_chain(const Lift& lift, const Vec& y, const TangentCone& cone, const CatalogEntry* entry,
                        const CheckOptions& opt) {
  ChainReport ch;
  std::vector<Vec> dirs;
  bool exhausted = false;
  try {
    dirs = sample_directions(cone, opt.a_directions, split_seed(opt.seed, 11));
  } catch (const Error& e) {
    if (e.code() != Errc::SamplerExhausted) throw;
    exhausted = true;
  }
  std::vector<Tri> in_a;
  ch.a_sufficient = a_sufficient(lift, y, dirs, exhausted, entry, opt, in_a);
  ch.b_dual = b_dual(lift, y, cone, entry, ch.a_sufficient, opt);
  WData wd = prepare_w(lift, y, opt.tol);
  NOutcome n = necessary(wd, cone, entry, dirs, in_a, opt);
  ch.necessary = n.ve;
  ch.w_condition = w_condition(wd, y, cone, entry, n.members, opt).ve;
  return ch;
}

WitnessCost witness_quadratic_cost(const Lift& lift, const Vec& y, const Vec& w, const TangentCone& cone) {
  LQData d = lq(lift, y);
  const double scale = std::max(1.0, w.norm());
  if ((d.im_L.transpose() * w).norm() > 1e-8 * scale)
    throw Error(Errc::InvalidWitness, "w is not orthogonal to im L");
  Mat Phi = sym(second_form(lift, d, w));
  TolerancePolicy tol;
  if (!member_blocks(Phi, d, tol)) throw Error(Errc::InvalidWitness, "w is not in W_y");
  const double gap = stationarity_gap(cone, w);
  if (!(gap <= -1e-4)) throw Error(Errc::InvalidWitness, "w is in the dual cone (gap " + std::to_string(gap) + ")");
  const Mat& K = d.ker_L;
  const Mat& Kp = d.ker_perp;
  double alpha = 1.0;
  if (Kp.cols() > 0) {
    Mat P3 = Kp.transpose() * Phi * Kp;
    Mat S = -P3;
    if (K.cols() > 0) {
      Mat P1 = K.transpose() * Phi * K;
      Mat P2 = K.transpose() * Phi * Kp;
      S += P2.transpose() * sym_pinv(P1, std::max(tol.psd_tol, 1e-9 * std::max(1.0, Phi.norm()))) * P2;
    }
    Mat LK = d.L * Kp;
    Mat Psi = LK.transpose() * LK;
    alpha = std::max(0.0, max_eig(sym(S)) / min_eig(Psi)) + 1.0;
  }
  WitnessCost wc;
  wc.kind = WitnessCost::Kind::Quadratic;
  wc.w = w;
  wc.alpha = alpha;
  wc.center = d.x;
  Cost f = wc.cost();
  wc.grad_norm_upstairs = grad_g(lift, d, f).norm();
  Mat H = hess_g(lift, d, f);
  wc.hess_min_eig_upstairs = H.size() ? min_eig(H) : 0.0;
  wc.downstream_gap = stationarity_gap(cone, f.gradient(d.x));
  wc.witness_direction = worst_direction(cone, w, 5);
  return wc;
}

VerdictEvidence local_to_local_verdict(const CatalogEntry* entry, const Vec& y, const CheckOptions& opt) {
  VerdictEvidence ve;
  if (!entry) {
    ve.evidence["reason"] = "openness is only classified for catalog lifts";
    return ve;
  }
  Expectation e = entry->expect(Property::LocalToLocal, y);
  ve.evidence["classification"] = expectation_name(e);
  if (e == Expectation::Unspecified) return ve;
  ve.verdict = e == Expectation::Holds ? Verdict::Holds : Verdict::Fails;
  if (e != Expectation::Fails) return ve;
  if (!entry->pathological || !entry->fiber_distance) {
    ve.evidence["sequence"] = "none";
    return ve;
  }
  try {
    const Vec x = value(entry->lift, y);
    Rng rng(split_seed(opt.seed, 51));
    Json seq = Json::array();
    double margin = std::numeric_limits<double>::infinity();
    for (int i : {4, 8, 16, 32, 64}) {
      Vec xi = entry->pathological(y, i);
      FiberDistance fd = entry->fiber_distance(y, xi, opt.fiber_samples, rng);
      Json row;
      row["i"] = i;
      row["x_distance"] = (xi - x).norm();
      row["fiber_distance"] = fd.sampled_min;
      if (fd.lower_bound) row["fiber_lower_bound"] = *fd.lower_bound;
      row["samples"] = fd.samples;
      seq.push_back(row);
      margin = std::min(margin, fd.sampled_min);
    }
    ve.evidence["sequence"] = seq;
    ve.evidence["margin"] = margin;
  } catch (const Error& err) {
    if (err.code() != Errc::NoPathology) throw;
    ve.evidence["sequence"] = err.what();
  }
  return ve;
}

bool chain_monotone(const PropertyReport& rep) {
  auto not_after = [](const VerdictEvidence& a, const VerdictEvidence& b) {
    return !(a.verdict == Verdict::Holds && b.verdict == Verdict::Fails);
  };
  const auto& c = rep.chain;
  bool ok = not_after(c.a_sufficient, c.b_dual) && not_after(c.b_dual, c.w_condition) &&
            not_after(c.w_condition, c.necessary) && not_after(c.a_sufficient, c.w_condition) &&
            not_after(c.a_sufficient, c.necessary) && not_after(c.b_dual, c.necessary);
  auto it = rep.verdicts.find(Property::OneToOne);
  if (it != rep.verdicts.end()) ok = ok && not_after(it->second, c.w_condition);
  return ok;
}

PropertyReport check_point(const CatalogEntry& entry, const Vec& y, const CheckOptions& opt) {
  PropertyReport rep;
  rep.y = y;
  rep.digest = point_digest(y);
  const Vec x = value(entry.lift, y);
  TangentCone cone = cone_at(entry.set, x, opt.tol);

  VerdictEvidence one = check_one_implies_one(entry.lift, y, cone, opt);
  if (one.verdict == Verdict::Fails) {
    try {
      rep.linear_witness = witness_linear_cost(entry.lift, y, cone, split_seed(opt.seed, 61), opt.witness_candidates);
      one.evidence["witness"] = "linear";
    } catch (const Error& e) {
      if (e.code() != Errc::WitnessSearchFailed) throw;
      one.evidence["witness_error"] = e.what();
    }
  }
  rep.verdicts[Property::OneToOne] = one;

  rep.chain = check_chain(entry.lift, y, cone, &entry, opt);
  VerdictEvidence two = rep.chain.w_condition;
  if (two.verdict == Verdict::Fails) {
    try {
      rep.quadratic_witness = witness_quadratic_cost(entry.lift, y, vec_from_json(two.evidence["w"]), cone);
      two.evidence["witness"] = "quadratic";
    } catch (const Error& e) {
      if (e.code() != Errc::InvalidWitness) throw;
      two.evidence["witness_error"] = e.what();
    }
  }
  rep.verdicts[Property::TwoToOne] = two;
  rep.verdicts[Property::LocalToLocal] = local_to_local_verdict(&entry, y, opt);
  rep.monotone = chain_monotone(rep);
  return rep;
}

Json PropertyReport::to_json() const {
  Json j;
  j["digest"] = digest;
  j["y"] = lifts::to_json(y);
  Json v = Json::object();
  for (const auto& [p, ve] : verdicts) v[property_name(p)] = {{"verdict", verdict_name(ve.verdict)}, {"evidence", ve.evidence}};
  j["verdicts"] = v;
  auto link = [](const VerdictEvidence& ve) { return Json{{"verdict", verdict_name(ve.verdict)}, {"evidence", ve.evidence}}; };
  j["chain"] = {{"A_sufficient", link(chain.a_sufficient)},
                {"B_dual_sufficient", link(chain.b_dual)},
                {"W_condition", link(chain.w_condition)},
                {"necessary_condition", link(chain.necessary)}};
  Json w = Json::object();
  if (linear_witness) w["linear"] = linear_witness->to_json();
  if (quadratic_witness) w["quadratic"] = quadratic_witness->to_json();
  j["witnesses"] = w;
  j["monotone"] = monotone;
  return j;
}

}  // namespace lifts
