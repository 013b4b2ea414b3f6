// Acceptance run: one PASS/FAIL line per criterion, tolerances fixed below.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "paraprod/classic.hpp"
#include "paraprod/errors.hpp"
#include "paraprod/paraproduct.hpp"
#include "paraprod/sweep.hpp"
#include "paraprod/telescope.hpp"
#include "paraprod/tiles.hpp"
#include "pipeline.hpp"

using namespace pp;

namespace {

constexpr double kOracleTol = 1e-9;
constexpr double kOracleSeconds = 60.0;
constexpr double kIdentityTol = 1e-8;
constexpr double kDroppedTol = 1e-10;
constexpr int kMinCertified = 20;
constexpr double kVanishTol = 1e-12;
constexpr double kLacunarityMax = 0.5;
constexpr double kPlancherelTol = 1e-10;
constexpr double kShadowC = 4.0;
constexpr double kEnvelopeFactor = 10.0;
constexpr double kEpsilonM = 0.25;

int failed = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("[%s] %2d %-28s %s\n", ok ? "PASS" : "FAIL", id, name, detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failed;
}

std::string fmt(const char* f, double a = 0, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// smallest grid in [lo, hi] with a nonempty lambda_sec4 range
int grid_for(const ParamSet& ps, int lo, int hi) {
  for (int K = lo; K <= hi; ++K) {
    try {
      admissible_j_range(ps, Grid(K), Context::lambda_sec4);
      return K;
    } catch (const EmptyRange&) {
    }
  }
  return -1;
}

void oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  const Grid g(10);
  Rng rng(101);
  double worst = 0.0;
  for (int t = 0; t < 25; ++t) {
    ParamSet ps;
    ps.L1 = int(rng.range(1, 2));
    ps.L2 = int(rng.range(1, 2));
    ps.M1 = int(rng.range(-2, 2));
    ps.M2 = int(rng.range(-2, 2));
    ps.n1 = int(rng.range(-4, 4));
    ps.n2 = int(rng.range(-4, 4));
    ps.m = int(rng.range(0, 3));
    const bool type1 = t % 2 == 0;
    const Signal f1 = oracle::random_signal(g, 1000 + t), f2 = oracle::random_signal(g, 2000 + t);
    const Signal fast = type1 ? paraproduct_type1(f1, f2, ps) : paraproduct_type2(f1, f2, ps);
    const JRange js = admissible_j_range(ps, g, type1 ? Context::pi_type1 : Context::pi_type2);
    const CVec slow = oracle::paraproduct(g, f1.samples(), f2.samples(), ps, type1, js);
    worst = std::max(worst, oracle::rel_err(fast.samples(), slow));
  }
  const double secs = seconds_since(t0);
  report(1, "oracle equivalence", worst <= kOracleTol && secs < kOracleSeconds,
         fmt("max rel err %.3g (tol %.0e), %.1f s (limit %.0f s)", worst, kOracleTol, secs, kOracleSeconds));
}

void telescoping_identity() {
  const Grid g(12);
  double worst = 0.0;
  int checked = 0;
  bool counts_ok = true;
  int t = 0;
  for (int L1 = 1; L1 <= 2; ++L1)
    for (int L2 = 1; L2 <= 2; ++L2) {
      std::size_t count = 0;
      std::vector<Decomposition> ds;
      for (int M1 = -2; M1 <= 2; ++M1)
        for (int M2 = -2; M2 <= 2; ++M2) {
          ParamSet ps;
          ps.L1 = L1;
          ps.L2 = L2;
          ps.M1 = M1;
          ps.M2 = M2;
          ps.n1 = (M1 + M2 + 5) % 3 - 1;
          ds.push_back(telescope_decompose(ps, g));
          if (count == 0) count = ds.back().forms.size();
          counts_ok = counts_ok && ds.back().forms.size() == count;
        }
      // 50 random triples per (L1, L2), spread over the offsets
      for (int k = 0; k < 50; ++k, ++t) {
        const Decomposition& d = ds[static_cast<std::size_t>(k) % ds.size()];
        const IdentityReport r = verify_identity(d, oracle::random_signal(g, 3 * t + 1),
                                                 oracle::random_signal(g, 3 * t + 2), oracle::random_signal(g, 3 * t + 3));
        worst = std::max(worst, r.residual);
        ++checked;
      }
    }
  report(2, "telescoping identity", worst <= kIdentityTol && counts_ok,
         fmt("%g triples, max residual %.3g (tol %.0e), form count constant: ", checked, worst, kIdentityTol) +
             (counts_ok ? "yes" : "no"));
}

void dropped_term() {
  int certified = 0, bad = 0;
  double worst = 0.0;
  int seed = 0;
  for (int L2 = 1; L2 <= 2; ++L2)
    for (int M2 = -2; M2 <= 2; ++M2) {
      ParamSet ps;
      ps.L2 = L2;
      ps.M2 = M2;
      ps.n1 = M2;
      const Grid g(11);
      for (const auto& c : dropped_term_certificates(ps, g)) {
        if (!c.certified) continue;
        ++certified;
        ++seed;
        const auto [v, scale] = dropped_term_value(ps, oracle::random_signal(g, 7 * seed),
                                                   oracle::random_signal(g, 7 * seed + 1),
                                                   oracle::random_signal(g, 7 * seed + 2), c.j);
        const double rel = scale > 0 ? v / scale : v;
        worst = std::max(worst, rel);
        if (rel > kDroppedTol) ++bad;
      }
    }
  report(3, "dropped term vanishes", bad == 0 && certified >= kMinCertified,
         fmt("%g certified cases (need %g), max |term|/scale %.3g (tol %.0e)", certified, kMinCertified, worst,
             kDroppedTol));
}

void admissibility_suite() {
  int forms = 0, failures = 0, grids_used = 0;
  double vanish = 0.0, lac = 0.0;
  std::string first;
  for (int L1 = 1; L1 <= 3; ++L1)
    for (int L2 = 1; L2 <= 3; ++L2)
      for (int M1 = -2; M1 <= 2; ++M1)
        for (int M2 = -2; M2 <= 2; ++M2) {
          ParamSet ps;
          ps.L1 = L1;
          ps.L2 = L2;
          ps.M1 = M1;
          ps.M2 = M2;
          ps.n1 = 1;
          ps.n2 = -1;
          const int K = grid_for(ps, 10, 24);
          if (K < 0) {
            ++failures;
            continue;
          }
          grids_used = std::max(grids_used, K);
          const Decomposition d = telescope_decompose(ps, Grid(K));
          for (const auto& f : d.forms) {
            ++forms;
            const AdmissibilityReport r = check_admissible(f, kVanishTol, false);
            vanish = std::max(vanish, r.max_vanish);
            lac = std::max(lac, r.max_lacunarity);
            if (!r.ok || r.max_lacunarity > kLacunarityMax) {
              ++failures;
              if (first.empty())
                first = to_string(f.label) + (r.failures.empty() ? std::string() : ": " + r.failures.front());
            }
          }
        }
  report(4, "admissibility suite", failures == 0,
         fmt("%g forms, %g failures, max |symbol(0)| %.2g, max lacunarity %.3g", forms, failures, vanish, lac) +
             fmt(", largest grid K=%g", grids_used) + (first.empty() ? "" : " first: " + first));
}

void plancherel() {
  const Grid g(12);
  const auto syms = partition_of_unity_symbols(g);
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Signal f = oracle::random_signal(g, 500 + t);
    const double a = lp_norm(square_function(f, syms), 2.0), b = lp_norm(f, 2.0);
    worst = std::max(worst, std::abs(a - b) / b);
  }
  report(5, "square-function Plancherel", worst <= kPlancherelTol,
         fmt("max rel diff %.3g (tol %.0e)", worst, kPlancherelTol));
}

void maximal_oracle() {
  int mismatches = 0;
  for (int t = 0; t < 10; ++t) {
    const auto a = oracle::random_quantized(std::size_t{1} << 8, 900 + t);
    const RVec fast = maximal(a);
    const auto slow = oracle::maximal(a);
    for (std::size_t i = 0; i < a.size(); ++i) mismatches += fast[i] != slow[i];
  }
  report(6, "maximal-function oracle", mismatches == 0, fmt("10 inputs at K=8, %g mismatching samples", mismatches));
}

struct TileTrial {
  TileFrame frame;
  TileSet S;
  Signal f;
  int ell;
};

TileTrial tile_trial(int i) {
  const TileFrame frame = TileFrame::make(ParamSet{}, Grid(10), Context::lambda_sec4, 1, 0);
  TileTrial t{frame, random_convex_tileset(frame, 8, 4000 + i), {}, 1 + i % 3};
  t.f = trial_inputs(frame.grid, InputModel::random_bandlimited, 77, i).first;
  return t;
}

void organization() {
  int organized = 0, halving = 0, disjoint = 0, maximal_fn = 0;
  double worst_ratio = 0.0, worst_mf = INFINITY;
  for (int i = 0; i < 100; ++i) {
    const TileTrial t = tile_trial(i);
    TileAnalysis A(t.frame, t.f, t.ell);
    const auto [S1, S2] = partition_S1_S2(t.S);
    for (const TileSet* part : {&S1, &S2}) {
      if (part->empty()) continue;
      const OrganizeResult r = organize(A, *part);
      ++organized;
      if (r.size_star_S > 0) worst_ratio = std::max(worst_ratio, r.size_star_S2 / r.size_star_S);
      halving += !r.halving_ok;
      disjoint += !r.tops_disjoint;
      maximal_fn += !r.maximal_function_ok;
      if (!r.S1.trees.empty()) worst_mf = std::min(worst_mf, r.maximal_function_ratio);
    }
  }
  report(7, "organization post-conditions", halving + disjoint + maximal_fn == 0,
         fmt("%g organized sets; violations: halving %g, tops %g, ", organized, halving, disjoint) +
             fmt("maximal-function containment %g (min M_p(Mf)/(size*/2) = %.3g); max size*(S2)/size*(S) %.3g",
                 maximal_fn, worst_mf, worst_ratio));
}

void shadow_witnesses() {
  int trees = 0, overlaps = 0, over = 0;
  double worst = 0.0;
  for (int i = 0; trees < 100; ++i) {
    const TileTrial t = tile_trial(i);
    for (const auto& T : maximal_trees(t.S).trees) {
      if (trees == 100) break;
      ++trees;
      const ShadowReport r = shadow_report(t.frame, T);
      overlaps += !r.witnesses_disjoint;
      worst = std::max(worst, r.C);
      over += r.C > kShadowC;
    }
  }
  report(8, "shadow witnesses", overlaps == 0 && worst <= kShadowC,
         fmt("%g trees, %g overlapping witness sets, max C %.4g (bound %.0f)", trees, overlaps, worst, kShadowC) +
             fmt(", %g trees above the bound", over));
}

void convexity_closure() {
  int violations = 0, checks = 0;
  for (int i = 0; i < 100; ++i) {
    const TileTrial t = tile_trial(i);
    auto check = [&](const TileSet& S) {
      ++checks;
      violations += !(oracle::convex(S) && is_convex(S));
    };
    check(t.S);
    const auto [S1, S2] = partition_S1_S2(t.S);
    check(S1);
    check(S2);
    for (const TileSet* part : {&S1, &S2}) {
      TileSet rest = *part;
      while (!rest.empty()) {
        const Tree T = maximal_tree(rest, rest.tiles.front());
        rest = without(rest, T.members);
        check(rest);
      }
    }
  }
  report(9, "convexity closure", violations == 0, fmt("%g checks, %g violations", checks, violations));
}

SweepReport sweep(std::vector<Axis> axes, ParamSet base, OperatorKind op) {
  ExperimentPlan plan;
  plan.base = base;
  plan.grid = Grid(12);
  plan.axes = std::move(axes);
  plan.exponents = Exponents{4.0, 4.0, 2.0};
  plan.trials = 40;
  plan.seed = 2024;
  plan.op = op;
  return uniformity_sweep(plan);
}

void uniformity() {
  // (a) 16 offsets
  const SweepReport a = sweep({{"M1", {-1, 0, 1, 2}}, {"M2", {-1, 0, 1, 2}}}, ParamSet{}, OperatorKind::type1);
  double lo = INFINITY, hi = 0.0;
  bool a_ok = true;
  for (const auto& r : a.rows) {
    if (r.status != "ok") a_ok = false;
    lo = std::min(lo, r.est.max_ratio);
    hi = std::max(hi, r.est.max_ratio);
  }
  const double spread = hi / lo;
  a_ok = a_ok && spread <= kEnvelopeFactor;

  // (b) modulation n1, normalized by (1+|n1|)^10, against n1 = 0
  const SweepReport b = sweep({{"n1", {0, 1, -1, 2, -2, 4, -4, 8, -8}}}, ParamSet{}, OperatorKind::type1);
  const double b0 = b.rows.front().est.max_ratio;
  double b_worst = 0.0;
  bool b_ok = true;
  for (const auto& r : b.rows) {
    if (r.status != "ok") b_ok = false;
    b_worst = std::max(b_worst, r.norm_n / b0);
  }
  b_ok = b_ok && b_worst <= kEnvelopeFactor;

  // (c) power modulation m with the second family dominant at every scale
  ParamSet base;
  base.M2 = 5;
  const SweepReport c = sweep({{"m", {0, 1, 2, 3, 4, 5}}}, base, OperatorKind::type2);
  const double c0 = c.rows.front().est.max_ratio;
  double c_worst = 0.0;
  bool c_ok = true;
  for (const auto& r : c.rows) {
    if (r.status != "ok" || !r.cond_2large1) c_ok = false;
    const long m = r.point.at("m");
    c_worst = std::max(c_worst, r.est.max_ratio / std::exp2(kEpsilonM * static_cast<double>(m)) / c0);
  }
  c_ok = c_ok && c_worst <= kEnvelopeFactor;

  report(10, "uniformity envelopes", a_ok && b_ok && c_ok,
         fmt("(a) max/min %.3g, (b) max normalized/n1=0 %.3g, (c) max normalized/m=0 %.3g", spread, b_worst, c_worst) +
             fmt(" (factor %.0f)", kEnvelopeFactor));
}

void determinism() {
  int compared = 0, differ = 0;
  for (const char* cmd : {"eval", "telescope", "tiles", "sweep"})
    for (const char* format : {"json", "csv"}) {
      RunConfig c;
      c.command = cmd;
      c.format = format;
      c.grid = Grid(std::string(cmd) == "telescope" ? 11 : 9);
      c.seed = 31;
      c.trials = 4;
      c.tile_seeds = 10;
      c.Gamma = 1;
      c.axes = {{"M1", {-1, 0, 1}}, {"n1", {0, 2}}};
      RunConfig d = c;
      d.jobs = 3;
      const RunResult x = run_command(c), y = run_command(c), z = run_command(d);
      for (const auto& [name, body] : x.artifacts) {
        ++compared;
        differ += !(y.artifacts.count(name) && y.artifacts.at(name) == body);
        differ += !(z.artifacts.count(name) && z.artifacts.at(name) == body);
      }
    }
  report(11, "determinism", differ == 0 && compared > 0,
         fmt("%g artifacts compared over 3 runs each, %g differences", compared, differ));
}

}  // namespace

int main() {
  const std::vector<std::function<void()>> criteria = {
      oracle_equivalence, telescoping_identity, dropped_term, admissibility_suite, plancherel, maximal_oracle,
      organization,       shadow_witnesses,     convexity_closure, uniformity, determinism};
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    try {
      criteria[i]();
    } catch (const std::exception& e) {
      report(static_cast<int>(i + 1), "(exception)", false, e.what());
    }
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
