#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "paraprod/errors.hpp"
#include "paraprod/paraproduct.hpp"
#include "paraprod/tiles.hpp"

using namespace pp;

namespace {

TileFrame frame4(int Gamma = 1, int log_size = 10) {
  return TileFrame::make(ParamSet{}, Grid(log_size), Context::lambda_sec4, Gamma, 0);
}

// a chain top -> child -> grandchild along the left edge
std::vector<Tile> chain(const TileFrame& f, std::size_t depth) {
  const auto sc = f.scales();
  std::vector<Tile> out;
  for (std::size_t i = 0; i < depth && i < sc.size(); ++i) out.push_back({sc[i], 0});
  return out;
}

}  // namespace

TEST_CASE("frame geometry") {
  const TileFrame f = frame4();
  const auto sc = f.scales();
  REQUIRE(sc.size() >= 3);
  for (std::size_t i = 1; i < sc.size(); ++i) CHECK(f.k(sc[i]) >= f.k(sc[i - 1]));
  for (int j : sc) {
    const auto [lo, hi] = f.interval({j, f.positions(j) - 1});
    CHECK(hi <= f.grid.period + 1e-12);
    CHECK(hi - lo == doctest::Approx(std::ldexp(1.0, -f.k(j))));
  }
  const Tile fine{sc.back(), f.positions(sc.back()) - 1};
  for (int j : sc) {
    const Tile a = f.ancestor(fine, j);
    CHECK(f.inside(fine, a));
    CHECK(f.valid(a));
  }
  const TileFrame g = frame4(3);
  for (int j : g.scales()) CHECK(j % 3 == 0);
}

TEST_CASE("convexity predicate matches the definition") {
  const TileFrame f = frame4();
  Rng rng(11);
  const auto sc = f.scales();
  int convex_seen = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<Tile> ts;
    const int n = 1 + static_cast<int>(rng.range(0, 5));
    for (int i = 0; i < n; ++i) {
      const int j = sc[static_cast<std::size_t>(rng.range(0, std::min<long>(4, sc.size() - 1)))];
      ts.push_back({j, rng.range(0, std::min(3L, f.positions(j) - 1))});
    }
    const TileSet S = make_tileset(f, ts);
    CHECK(is_convex(S) == oracle::convex(S));
    convex_seen += is_convex(S);
    const TileSet C = convex_closure(S);
    CHECK(oracle::convex(C));
    for (const auto& s : S.tiles) CHECK(C.contains(s));
  }
  CHECK(convex_seen > 0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) CHECK(oracle::convex(random_convex_tileset(f, 6, seed)));
}

TEST_CASE("branch partition") {
  ParamSet same;
  const TileFrame f = TileFrame::make(same, Grid(10), Context::lambda_sec4, 1, 0);
  std::vector<Tile> ts;
  for (int j : f.scales()) ts.push_back({j, 0});
  {
    const auto [S1, S2] = partition_S1_S2(make_tileset(f, ts));
    CHECK(S1.empty());
    CHECK(S2.size() == ts.size());
  }
  ParamSet apart;
  apart.M2 = -8;
  const TileFrame g = TileFrame::make(apart, Grid(10), Context::lambda_sec4, 1, 0);
  std::vector<Tile> us;
  for (int j : g.scales()) us.push_back({j, 0});
  const auto [S1, S2] = partition_S1_S2(make_tileset(g, us));
  CHECK(S2.empty());
  CHECK(S1.size() == us.size());
}

TEST_CASE("restriction to an exceptional set") {
  const TileFrame f = frame4();
  const auto sc = f.scales();
  std::vector<Tile> ts;
  for (long n = 0; n < std::min(8L, f.positions(sc[1])); ++n) ts.push_back({sc[1], n});
  const TileSet S = make_tileset(f, ts);
  const MeasurableSet empty(f.grid);
  CHECK(restrict_to_omega(S, empty).size() == S.size());
  MeasurableSet all(f.grid);
  std::fill(all.mask.begin(), all.mask.end(), 1);
  CHECK(restrict_to_omega(S, all).empty());
  MeasurableSet first(f.grid);
  const auto [b, e] = f.sample_range(ts[0]);
  for (std::size_t i = b; i < e; ++i) first.mask[i] = 1;
  const TileSet R = restrict_to_omega(S, first);
  CHECK(R.size() == S.size() - 1);
  CHECK_FALSE(R.contains(ts[0]));
}

TEST_CASE("maximal trees") {
  const TileFrame f = frame4();
  const auto sc = f.scales();
  {
    const Forest F = maximal_trees(make_tileset(f, {{sc[2], 1}}));
    REQUIRE(F.trees.size() == 1);
    CHECK(F.trees[0].members.size() == 1);
    CHECK(F.count_value == doctest::Approx(f.length({sc[2], 1})));
  }
  {
    const auto c = chain(f, 4);
    const Forest F = maximal_trees(make_tileset(f, c));
    REQUIRE(F.trees.size() == 1);
    CHECK(F.trees[0].top == c.front());
  }
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const TileSet S = random_convex_tileset(f, 8, seed);
    const Forest F = maximal_trees(S);
    std::vector<Tile> all;
    for (const auto& T : F.trees) {
      for (const auto& s : T.members) {
        all.push_back(s);
        CHECK(f.inside(s, T.top));
      }
    }
    std::sort(all.begin(), all.end());
    CHECK(all == S.tiles);  // a partition of S
    CHECK(forest_count(f, F) == doctest::Approx(F.count_value));
    // no top lies inside another tree's top
    for (std::size_t a = 0; a < F.trees.size(); ++a)
      for (std::size_t b = 0; b < F.trees.size(); ++b)
        if (a != b) CHECK_FALSE(f.inside(F.trees[a].top, F.trees[b].top));
  }
}

TEST_CASE("shadows and witnesses") {
  const TileFrame f = frame4();
  const auto sc = f.scales();
  const int j0 = sc[0];
  int j1 = sc[0];
  for (int j : sc)
    if (f.k(j) >= f.k(j0) + 2) {
      j1 = j;
      break;
    }
  REQUIRE(j1 != j0);
  Tree T{{j0, 0}, {{j0, 0}, {j1, 0}, {j1, 1}}};
  std::sort(T.members.begin(), T.members.end());
  CHECK(shadow_boundary_count(f, T, j0) == 2);
  CHECK(shadow_boundary_count(f, T, j1) == 2);  // adjacent tiles merge
  Tree U{{j0, 0}, {{j0, 0}, {j1, 0}, {j1, 2}}};
  std::sort(U.members.begin(), U.members.end());
  CHECK(shadow_boundary_count(f, U, j1) == 4);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const Forest F = maximal_trees(random_convex_tileset(f, 8, seed));
    for (const auto& tr : F.trees) {
      const ShadowReport r = shadow_report(f, tr);
      CHECK(r.witnesses_disjoint);
      CHECK(r.nested);
      CHECK(r.C <= 8.0 + 1e-12);
    }
  }
}

TEST_CASE("zeta index") {
  const ParamSet ps;
  CHECK(zeta(ps, 10, 2, 0) == 6);
  CHECK(zeta(ps, 10, 2, 3) == 9);
  CHECK(zeta(ps, 10, 2, -3) == 3);
  CHECK_THROWS_AS(zeta(ps, 10, 6 * ps.L_big + 1, 0), InvalidArgument);
  CHECK_THROWS_AS(zeta(ps, 10, 0, 10 * ps.L_big + 1), InvalidArgument);
}

TEST_CASE("seminorm and size are homogeneous") {
  const TileFrame f = frame4(1, 9);
  const Signal x = oracle::random_signal(f.grid, 3);
  const Signal y = scale(x, cplx(0.0, -2.5));
  TileAnalysis A(f, x, 1), B(f, y, 1), Z(f, Signal::zeros(f.grid), 1);
  const auto c = chain(f, 3);
  for (const auto& s : c) {
    const double a = A.seminorm(s).total, b = B.seminorm(s).total;
    CHECK(b == doctest::Approx(2.5 * a).epsilon(1e-9));
    CHECK(Z.seminorm(s).total == 0.0);
  }
  const TileSet S = make_tileset(f, c);
  const Forest F = maximal_trees(S);
  REQUIRE(F.trees.size() == 1);
  const Branch br = A.branch_of(F.trees[0]);
  CHECK(B.size_of_tree(F.trees[0], br) == doctest::Approx(2.5 * A.size_of_tree(F.trees[0], br)).epsilon(1e-9));
  CHECK(Z.size_of_tree(F.trees[0], br) == 0.0);
  const Tree empty{c.front(), {}};
  const Signal d = Z.delta_star(empty, br);
  CHECK(lp_norm(d, inf_p) == 0.0);
}

TEST_CASE("organize with a zero input") {
  const TileFrame f = frame4(1, 9);
  TileAnalysis Z(f, Signal::zeros(f.grid), 1);
  const auto [S1, S2] = partition_S1_S2(random_convex_tileset(f, 6, 2));
  const TileSet& S = S1.empty() ? S2 : S1;
  const OrganizeResult r = organize(Z, S);
  CHECK(r.S1.trees.empty());
  CHECK(r.S2.size() == S.size());
  CHECK(r.halving_ok);
  CHECK(r.size_star_S == 0.0);
}

TEST_CASE("organize halves the size") {
  const TileFrame f = frame4(1, 9);
  const Signal x = oracle::random_signal(f.grid, 8);
  const auto [S1, S2] = partition_S1_S2(random_convex_tileset(f, 6, 4));
  for (const TileSet* S : {&S1, &S2}) {
    if (S->empty()) continue;
    TileAnalysis A(f, x, 1);
    const OrganizeResult r = organize(A, *S);
    CHECK(r.halving_ok);
    CHECK(r.tops_disjoint);
    CHECK(r.size_star_S2 <= r.size_star_S / 2.0 + 1e-12);
  }
}

TEST_CASE("restricted form on the full lattice") {
  const TileFrame f = frame4(1, 9);
  const Grid& g = f.grid;
  CHECK(lambda_S(oracle::random_signal(g, 1), oracle::random_signal(g, 2), oracle::random_signal(g, 3),
                 TileSet(f, {}))
            .value == cplx{});
  std::vector<Tile> all;
  for (int j : f.scales())
    for (long n = 0; n < f.positions(j); ++n) all.push_back({j, n});
  const TileSet S = make_tileset(f, all);
  const Signal a = oracle::random_signal(g, 4), b = oracle::random_signal(g, 5), c = oracle::random_signal(g, 6);
  const LambdaSResult r = lambda_S(a, b, c, S);
  CHECK(r.partition_defect < 1e-8);
  const ParamSet& ps = f.params;
  const cplx ref = trilinear_pair(
      a, b, c,
      standard_form(ps, g, f.js, Modulation::integer(ps.n1), Modulation::integer(ps.n2), Context::lambda_sec4));
  CHECK(std::abs(r.value - ref) <= 1e-8 * std::max(1.0, std::abs(ref)));
}
