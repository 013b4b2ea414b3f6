#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "paraprod/classic.hpp"
#include "paraprod/grid.hpp"
#include "paraprod/windows.hpp"

namespace pp {

struct Tile {
  int j = 0;
  long n = 0;
  auto operator<=>(const Tile&) const = default;
};

// Shared context of a tile family: parameters, grid, residue class and the
// scale map j -> k_j = min_ell k_{j ell}.
struct TileFrame {
  ParamSet params;
  Grid grid;
  Context ctx = Context::lambda_sec4;  // lambda_sec4 or lambda_sec5
  int Gamma = 16;
  int gamma = 0;
  JRange js;                 // admissible scales
  std::vector<int> k_table;  // k_j for j in js

  static TileFrame make(const ParamSet& ps, const Grid& g, Context ctx, int Gamma, int gamma);

  bool has_scale(int j) const;  // j in js and j = gamma mod Gamma
  int k(int j) const;
  long positions(int j) const;  // number of n with I_{(j,n)} inside [0, period)
  bool valid(const Tile& s) const;
  std::pair<double, double> interval(const Tile& s) const;
  double length(const Tile& s) const;
  // I_a subset of I_b
  bool inside(const Tile& a, const Tile& b) const;
  // the tile at scale j whose interval contains I_s (requires k_j <= k_s)
  Tile ancestor(const Tile& s, int j) const;
  // scales of the frame with k_j in [k_hi_scale .. ] between two tiles, ordered
  std::vector<int> scales() const;
  // half-open sample range of I_s
  std::pair<std::size_t, std::size_t> sample_range(const Tile& s) const;
};

struct TileSet {
  TileFrame frame;
  std::vector<Tile> tiles;  // sorted, unique

  TileSet() = default;
  TileSet(TileFrame f, std::vector<Tile> t);
  bool contains(const Tile& s) const;
  std::size_t size() const { return tiles.size(); }
  bool empty() const { return tiles.empty(); }
};

TileSet make_tileset(const TileFrame& f, std::vector<Tile> tiles);

struct Tree {
  Tile top;
  std::vector<Tile> members;  // sorted, includes the top
};

struct Forest {
  std::vector<Tree> trees;
  double count_value = 0.0;  // sum of |I_T|
};

// ---- combinatorics -------------------------------------------------------------

bool is_convex(const TileSet& S);
// smallest convex superset inside the frame
TileSet convex_closure(const TileSet& S);
// random convex set: random seeds then convex closure
TileSet random_convex_tileset(const TileFrame& f, std::size_t seeds, std::uint64_t seed);

// S^(1) and S^(2) by window-width ratio; a separate ratio rule on lambda_sec5 frames
bool in_first_branch(const TileFrame& f, int j);
std::pair<TileSet, TileSet> partition_S1_S2(const TileSet& S);
TileSet restrict_to_omega(const TileSet& S, const MeasurableSet& omega);

// all tiles of S inside I_top
Tree maximal_tree(const TileSet& S, const Tile& top);
// repeatedly takes the longest remaining interval, ties by (j, n)
Forest maximal_trees(const TileSet& S);
double forest_count(const TileFrame& f, const Forest& F);
TileSet without(const TileSet& S, const std::vector<Tile>& drop);

// merged runs of the j-th shadow
std::vector<std::pair<double, double>> shadow(const TileFrame& f, const Tree& T, int j);
int shadow_boundary_count(const TileFrame& f, const Tree& T, int j);

struct ShadowReport {
  bool witnesses_disjoint = true;
  std::size_t witness_count = 0;
  double weighted_boundary = 0.0;  // sum_j 2^{-k_j} Card(boundary of Sh_j)
  double C = 0.0;                  // weighted_boundary / |I_T|
  bool nested = true;              // Sh_{j'} inside Sh_j for j < j'
};
ShadowReport shadow_report(const TileFrame& f, const Tree& T);

// ---- analytic quantities -----------------------------------------------------------

enum class Weight { one_double_star, psi_star_m };
enum class Branch { caseA, caseB, p2_variant, m_variant };
std::string to_string(Branch b);

struct SeminormValue {
  double value_term = 0.0;
  double derivative_term = 0.0;
  double total = 0.0;
};

// Per-frame cache of band projections, derivatives and tile weights for one input.
class TileAnalysis {
 public:
  TileAnalysis(const TileFrame& frame, const Signal& f, int ell, KernelExponents ex = {},
               const MeasurableSet* omega = nullptr);

  const TileFrame& frame() const { return frame_; }
  int ell() const { return ell_; }
  const Signal& input() const { return f_; }

  // f_{ell,j,n_ell} on lambda_sec4 frames, f_{ell,j,0} on lambda_sec5 frames
  const Signal& band(int j);
  const Signal& band_unmodulated(int j);
  const Signal& derivative(int j);

  // sparse 1**_{j,n} (or the tilde variant): first sample and values, periodic
  struct Sparse {
    std::size_t start = 0;
    RVec values;
  };
  const Sparse& double_star(const Tile& s);

  SeminormValue seminorm(const Tile& s, Weight w = Weight::one_double_star);
  double zeta_seminorm(const Tile& s);
  std::size_t zeta_skipped() const { return zeta_skipped_; }

  Signal delta_star(const Tree& T, Branch b);
  double size_of_tree(const Tree& T, Branch b);
  Branch branch_of(const Tree& T) const;
  // psi*_j o Tr~^{-1}_{ell,j,m}; psi* of the empty set when no omega was given
  const Signal& psi_star_translated(int j);

 private:
  const Signal& projection(int j, bool modulated);

  TileFrame frame_;
  Signal f_;
  int ell_;
  KernelExponents ex_;
  const MeasurableSet* omega_;
  Spectrum F_;
  std::map<std::pair<int, bool>, Signal> bands_;
  std::map<int, Signal> derivs_;
  std::map<int, Signal> zeta_bands_, zeta_derivs_;
  std::map<Tile, Sparse> stars_;
  std::map<int, Signal> psi_star_;
  std::map<Tile, double> zeta_cache_;
  std::size_t zeta_skipped_ = 0;
};

int zeta(const ParamSet& ps, int j, int M, int K);

struct SizeStar {
  double value = 0.0;
  Tile top{};
  std::size_t candidates = 0;  // trees evaluated by the surrogate
};

// sup over the surrogate family: per candidate top, the maximal tree plus greedy
// ancestor-closed prefixes ordered by per-tile contribution
SizeStar size_star(TileAnalysis& A, const TileSet& P);

struct OrganizeResult {
  Forest S1;
  TileSet S2;
  double size_star_S = 0.0;
  double size_star_S2 = 0.0;
  bool halving_ok = true;
  bool tops_disjoint = true;
  bool maximal_function_ok = true;  // union of I_T inside {M_p(M f) >= size*/2}
  double maximal_function_ratio = 0.0;  // min over the union of M_p(M f) / (size*/2), 0 when S1 is empty
  double count_constant = 0.0;      // count(S1) size*^p / |F| with |F| = ||f||_p^p
  std::size_t iterations = 0;
};

OrganizeResult organize(TileAnalysis& A, const TileSet& S);

// ---- restricted forms --------------------------------------------------------------

struct LambdaSResult {
  cplx value;
  double partition_defect = 0.0;  // max over scales of |sum_n 1*_{j,n} - 1| on full-lattice scales
};

LambdaSResult lambda_S(const Signal& f1, const Signal& f2, const Signal& f3, const TileSet& S);
// lambda_sec5 forms; truncated when omega is given
LambdaSResult lambda_S_m(const Signal& f1, const Signal& f2, const Signal& f3, const TileSet& S,
                         const MeasurableSet* omega);

// ---- serialization -------------------------------------------------------------------

nlohmann::json tileset_to_json(const TileSet& S);
nlohmann::json forest_to_json(const TileFrame& f, const Forest& F);
// rectangles: time interval x frequency window, one row per tile and ell
std::string tiles_plot_csv(const TileSet& S);

}  // namespace pp
