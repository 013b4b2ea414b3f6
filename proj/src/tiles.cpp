#include "paraprod/tiles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "paraprod/io.hpp"
#include "paraprod/paraproduct.hpp"
#include "paraprod/rng.hpp"
#include "paraprod/telescope.hpp"

namespace pp {

// ---- frame -----------------------------------------------------------------------

TileFrame TileFrame::make(const ParamSet& ps, const Grid& g, Context ctx, int Gamma, int gamma) {
  if (ctx != Context::lambda_sec4 && ctx != Context::lambda_sec5)
    throw InvalidArgument("tile frames use the lambda_sec4 or lambda_sec5 context");
  if (Gamma < 1) throw InvalidArgument("Gamma must be positive");
  ps.validate();
  TileFrame f;
  f.params = ps;
  f.grid = g;
  f.ctx = ctx;
  f.Gamma = Gamma;
  f.gamma = ((gamma % Gamma) + Gamma) % Gamma;
  f.js = admissible_j_range(ps, g, ctx);
  for (int j = f.js.lo; j <= f.js.hi; ++j) f.k_table.push_back(scale_indices(ps, j, ctx).k);
  if (f.scales().empty()) throw EmptyRange("no admissible scale in the residue class");
  return f;
}

bool TileFrame::has_scale(int j) const {
  if (!js.contains(j)) return false;
  return ((j - gamma) % Gamma + Gamma) % Gamma == 0;
}

int TileFrame::k(int j) const {
  if (!js.contains(j)) throw InvalidArgument("scale outside the frame");
  return k_table[static_cast<std::size_t>(j - js.lo)];
}

long TileFrame::positions(int j) const {
  return static_cast<long>(std::floor(std::ldexp(grid.period, k(j)) + 1e-9));
}

bool TileFrame::valid(const Tile& s) const {
  return has_scale(s.j) && s.n >= 0 && s.n < positions(s.j);
}

std::pair<double, double> TileFrame::interval(const Tile& s) const {
  const double len = std::ldexp(1.0, -k(s.j));
  return {len * static_cast<double>(s.n), len * static_cast<double>(s.n + 1)};
}

double TileFrame::length(const Tile& s) const { return std::ldexp(1.0, -k(s.j)); }

bool TileFrame::inside(const Tile& a, const Tile& b) const {
  const int ka = k(a.j), kb = k(b.j);
  if (ka < kb) return false;
  if (ka == kb) return a == b;
  return (a.n >> (ka - kb)) == b.n;
}

Tile TileFrame::ancestor(const Tile& s, int j) const {
  const int ks = k(s.j), kj = k(j);
  if (kj > ks) throw InvalidArgument("ancestor scale is finer than the tile");
  return Tile{j, s.n >> (ks - kj)};
}

std::vector<int> TileFrame::scales() const {
  std::vector<int> out;
  for (int j = js.lo; j <= js.hi; ++j)
    if (has_scale(j)) out.push_back(j);
  return out;
}

std::pair<std::size_t, std::size_t> TileFrame::sample_range(const Tile& s) const {
  const auto [lo, hi] = interval(s);
  const double h = grid.spacing();
  return {static_cast<std::size_t>(std::ceil(lo / h - 1e-9)), static_cast<std::size_t>(std::ceil(hi / h - 1e-9))};
}

TileSet::TileSet(TileFrame f, std::vector<Tile> t) : frame(std::move(f)), tiles(std::move(t)) {
  std::sort(tiles.begin(), tiles.end());
  tiles.erase(std::unique(tiles.begin(), tiles.end()), tiles.end());
  for (const auto& s : tiles)
    if (!frame.valid(s)) throw InvalidArgument("tile outside the frame");
}

bool TileSet::contains(const Tile& s) const { return std::binary_search(tiles.begin(), tiles.end(), s); }

TileSet make_tileset(const TileFrame& f, std::vector<Tile> tiles) { return TileSet(f, std::move(tiles)); }

// ---- combinatorics ---------------------------------------------------------------

namespace {

// coarsest ancestor of s that lies in S (s itself if none)
int topmost_scale(const TileSet& S, const Tile& s, const std::vector<int>& scales) {
  for (int j : scales) {
    if (j >= s.j) break;
    if (S.contains(S.frame.ancestor(s, j))) return j;
  }
  return s.j;
}

}  // namespace

bool is_convex(const TileSet& S) {
  const auto scales = S.frame.scales();
  for (const auto& s : S.tiles) {
    const int top = topmost_scale(S, s, scales);
    for (int j : scales) {
      if (j <= top) continue;
      if (j >= s.j) break;
      if (!S.contains(S.frame.ancestor(s, j))) return false;
    }
  }
  return true;
}

TileSet convex_closure(const TileSet& S) {
  const auto scales = S.frame.scales();
  std::vector<Tile> out = S.tiles;
  for (const auto& s : S.tiles) {
    const int top = topmost_scale(S, s, scales);
    for (int j : scales)
      if (j > top && j < s.j) out.push_back(S.frame.ancestor(s, j));
  }
  return TileSet(S.frame, std::move(out));
}

TileSet random_convex_tileset(const TileFrame& f, std::size_t seeds, std::uint64_t seed) {
  const auto scales = f.scales();
  Rng rng(seed);
  std::vector<Tile> picked;
  for (std::size_t i = 0; i < seeds; ++i) {
    if (picked.empty() || rng.below(2) == 0) {
      const int j = scales[rng.below(scales.size())];
      picked.push_back({j, static_cast<long>(rng.below(static_cast<std::uint64_t>(f.positions(j))))});
      continue;
    }
    // a descendant of an earlier seed, so that chains appear
    const Tile base = picked[rng.below(picked.size())];
    std::vector<int> finer;
    for (int j : scales)
      if (j > base.j) finer.push_back(j);
    if (finer.empty()) {
      picked.push_back(base);
      continue;
    }
    const int j = finer[rng.below(finer.size())];
    const int dk = f.k(j) - f.k(base.j);
    const long first = base.n << dk;
    const long width = 1L << dk;
    picked.push_back({j, first + static_cast<long>(rng.below(static_cast<std::uint64_t>(width)))});
  }
  return convex_closure(TileSet(f, std::move(picked)));
}

bool in_first_branch(const TileFrame& f, int j) {
  const double w1 = window_of(f.params, 1, j, f.ctx).length();
  const double w2 = window_of(f.params, 2, j, f.ctx).length();
  if (f.ctx == Context::lambda_sec5) return w2 <= w1 / 10.0 || w1 <= w2 / 10.0;
  return w2 <= w1 / 6.0;
}

std::pair<TileSet, TileSet> partition_S1_S2(const TileSet& S) {
  std::vector<Tile> a, b;
  for (const auto& s : S.tiles) (in_first_branch(S.frame, s.j) ? a : b).push_back(s);
  return {TileSet(S.frame, std::move(a)), TileSet(S.frame, std::move(b))};
}

TileSet restrict_to_omega(const TileSet& S, const MeasurableSet& omega) {
  if (omega.grid != S.frame.grid) throw InvalidArgument("omega lives on a different grid");
  std::vector<std::size_t> pre(omega.mask.size() + 1, 0);
  for (std::size_t i = 0; i < omega.mask.size(); ++i) pre[i + 1] = pre[i] + (omega.mask[i] ? 1 : 0);
  std::vector<Tile> keep;
  for (const auto& s : S.tiles) {
    auto [b, e] = S.frame.sample_range(s);
    e = std::min(e, omega.mask.size());
    if (e <= b || pre[e] - pre[b] < e - b) keep.push_back(s);
  }
  return TileSet(S.frame, std::move(keep));
}

Tree maximal_tree(const TileSet& S, const Tile& top) {
  Tree T{top, {}};
  for (const auto& s : S.tiles)
    if (S.frame.inside(s, top)) T.members.push_back(s);
  if (!S.contains(top)) T.members.push_back(top);
  std::sort(T.members.begin(), T.members.end());
  return T;
}

TileSet without(const TileSet& S, const std::vector<Tile>& drop) {
  std::vector<Tile> d = drop;
  std::sort(d.begin(), d.end());
  std::vector<Tile> keep;
  std::set_difference(S.tiles.begin(), S.tiles.end(), d.begin(), d.end(), std::back_inserter(keep));
  TileSet out;
  out.frame = S.frame;
  out.tiles = std::move(keep);
  return out;
}

Forest maximal_trees(const TileSet& S) {
  Forest F;
  TileSet rest = S;
  // sorted by (j, n): smaller j means smaller k, i.e. the longest interval first
  while (!rest.empty()) {
    Tree T = maximal_tree(rest, rest.tiles.front());
    rest = without(rest, T.members);
    F.count_value += S.frame.length(T.top);
    F.trees.push_back(std::move(T));
  }
  return F;
}

double forest_count(const TileFrame& f, const Forest& F) {
  double c = 0.0;
  for (const auto& T : F.trees) c += f.length(T.top);
  return c;
}

std::vector<std::pair<double, double>> shadow(const TileFrame& f, const Tree& T, int j) {
  std::vector<long> ns;
  for (const auto& s : T.members)
    if (s.j == j) ns.push_back(s.n);
  std::sort(ns.begin(), ns.end());
  std::vector<std::pair<double, double>> runs;
  const double len = std::ldexp(1.0, -f.k(j));
  for (std::size_t i = 0; i < ns.size();) {
    std::size_t e = i + 1;
    while (e < ns.size() && ns[e] == ns[e - 1] + 1) ++e;
    runs.push_back({len * static_cast<double>(ns[i]), len * static_cast<double>(ns[e - 1] + 1)});
    i = e;
  }
  return runs;
}

int shadow_boundary_count(const TileFrame& f, const Tree& T, int j) {
  return 2 * static_cast<int>(shadow(f, T, j).size());
}

ShadowReport shadow_report(const TileFrame& f, const Tree& T) {
  ShadowReport r;
  std::set<int> scl;
  for (const auto& s : T.members) scl.insert(s.j);
  std::vector<std::pair<double, double>> witnesses;
  for (int j : scl) {
    const auto runs = shadow(f, T, j);
    const double len = std::ldexp(1.0, -f.k(j));
    r.weighted_boundary += len * 2.0 * static_cast<double>(runs.size());
    for (const auto& run : runs) witnesses.push_back({run.first - len, run.first - len / 2});
  }
  std::sort(witnesses.begin(), witnesses.end());
  for (std::size_t i = 1; i < witnesses.size(); ++i)
    if (witnesses[i].first < witnesses[i - 1].second) r.witnesses_disjoint = false;
  r.witness_count = witnesses.size();
  r.C = r.weighted_boundary / f.length(T.top);
  for (const auto& s : T.members)
    for (int j : scl) {
      if (j >= s.j) break;
      if (!std::binary_search(T.members.begin(), T.members.end(), f.ancestor(s, j))) r.nested = false;
    }
  return r;
}

// ---- analysis ----------------------------------------------------------------------

std::string to_string(Branch b) {
  switch (b) {
    case Branch::caseA: return "caseA";
    case Branch::caseB: return "caseB";
    case Branch::p2_variant: return "p2_variant";
    case Branch::m_variant: return "m_variant";
  }
  return "?";
}

namespace {

Signal apply_spec(const Spectrum& F, const CVec& symbol) {
  Spectrum G{F.grid, CVec(F.coeffs.size())};
  for (std::size_t b = 0; b < symbol.size(); ++b)
    if (symbol[b] != cplx{}) G.coeffs[b] = F.coeffs[b] * symbol[b];
  return dft_inverse(G);
}

Signal spectral_derivative(const Signal& f) {
  Spectrum F = dft_forward(f);
  const Grid& g = f.grid();
  for (std::size_t b = 0; b < F.coeffs.size(); ++b)
    F.coeffs[b] *= cplx(0.0, 2.0 * std::numbers::pi * g.freq(b));
  return dft_inverse(F);
}

int k_of_ell(const ScaleIndices& si, int ell) { return ell == 1 ? si.k1 : ell == 2 ? si.k2 : si.k3; }

}  // namespace

TileAnalysis::TileAnalysis(const TileFrame& frame, const Signal& f, int ell, KernelExponents ex,
                           const MeasurableSet* omega)
    : frame_(frame), f_(f), ell_(ell), ex_(ex), omega_(omega) {
  if (ell < 1 || ell > 3) throw InvalidArgument("ell must be 1, 2 or 3");
  if (f.grid() != frame.grid) throw InvalidArgument("signal and frame grids differ");
  if (omega && omega->grid != frame.grid) throw InvalidArgument("omega lives on a different grid");
  F_ = dft_forward(f);
}

const Signal& TileAnalysis::projection(int j, bool modulated) {
  const auto key = std::make_pair(j, modulated);
  auto it = bands_.find(key);
  if (it != bands_.end()) return it->second;
  const ParamSet& ps = frame_.params;
  Modulation mod = Modulation::none();
  if (modulated && frame_.ctx == Context::lambda_sec4)
    mod = Modulation::integer(ell_ == 1 ? ps.n1 : ell_ == 2 ? ps.n2 : 0);
  const auto sym = symbol_of(ps, ell_, j, mod, frame_.grid, frame_.ctx);
  return bands_.emplace(key, apply_spec(F_, sym.values)).first->second;
}

const Signal& TileAnalysis::band(int j) { return projection(j, true); }
const Signal& TileAnalysis::band_unmodulated(int j) { return projection(j, false); }

const Signal& TileAnalysis::derivative(int j) {
  auto it = derivs_.find(j);
  if (it != derivs_.end()) return it->second;
  return derivs_.emplace(j, spectral_derivative(band(j))).first->second;
}

const TileAnalysis::Sparse& TileAnalysis::double_star(const Tile& s) {
  auto it = stars_.find(s);
  if (it != stars_.end()) return it->second;
  const Grid& g = frame_.grid;
  const Signal full = smoothed_indicator(g, frame_.k(s.j), s.n, IndicatorVariant::double_star, ex_);
  const std::size_t n = g.size();
  // the kernel table is exactly zero past its cutoff; keep the complement of the
  // longest periodic zero run
  std::size_t best_len = 0, best_end = 0, run = 0;
  for (std::size_t t = 0; t < 2 * n; ++t) {
    if (full[t % n].real() == 0.0) {
      ++run;
      if (run > best_len && run <= n) {
        best_len = run;
        best_end = (t + 1) % n;
      }
    } else {
      run = 0;
    }
  }
  Sparse sp;
  sp.start = best_len == 0 ? 0 : best_end;
  const std::size_t len = n - best_len;
  sp.values.resize(len);
  for (std::size_t t = 0; t < len; ++t) sp.values[t] = full[(sp.start + t) % n].real();
  return stars_.emplace(s, std::move(sp)).first->second;
}

const Signal& TileAnalysis::psi_star_translated(int j) {
  auto it = psi_star_.find(j);
  if (it != psi_star_.end()) return it->second;
  const ParamSet& ps = frame_.params;
  const MeasurableSet empty(frame_.grid);
  const OmegaJ oj = omega_j_and_psi(omega_ ? *omega_ : empty, ps, j, ps.epsilon, ps.m);
  // psi* o Tr~^{-1}: g(x) = psi*(x - a)
  const double a = translation_amount(ps, ell_, j, TranslateVariant::Tr_tilde);
  return psi_star_.emplace(j, translate_exact(oj.psi_star, -a)).first->second;
}

SeminormValue TileAnalysis::seminorm(const Tile& s, Weight w) {
  const ParamSet& ps = frame_.params;
  const Grid& g = frame_.grid;
  const std::size_t n = g.size();
  const double p = (frame_.ctx == Context::lambda_sec5 && w == Weight::one_double_star) ? 2.0 : ps.p;
  const Sparse& st = double_star(s);
  const Signal& b = band(s.j);
  const Signal& db = derivative(s.j);
  const Signal* psi = w == Weight::psi_star_m ? &psi_star_translated(s.j) : nullptr;
  const double dscale = std::ldexp(1.0, -k_of_ell(scale_indices(ps, s.j, frame_.ctx), ell_));
  double a0 = 0.0, a1 = 0.0;
  for (std::size_t t = 0; t < st.values.size(); ++t) {
    const std::size_t i = (st.start + t) % n;
    double wt = st.values[t];
    if (psi) wt *= (*psi)[i].real();
    a0 += std::pow(std::abs(wt * b[i]), p);
    a1 += std::pow(std::abs(wt * dscale * db[i]), p);
  }
  const double norm = std::pow(frame_.length(s), -1.0 / p);
  SeminormValue v;
  v.value_term = norm * std::pow(a0 * g.spacing(), 1.0 / p);
  v.derivative_term = norm * std::pow(a1 * g.spacing(), 1.0 / p);
  v.total = v.value_term + v.derivative_term;
  return v;
}

int zeta(const ParamSet& ps, int j, int M, int K) {
  if (M < 0 || M > 6 * ps.L_big) throw InvalidArgument("zeta: M out of range");
  if (K < -10 * ps.L_big || K > 10 * ps.L_big) throw InvalidArgument("zeta: K out of range");
  return static_cast<int>(floor_div(ps.L1 * j + ps.M1 - ps.M2 - 6, ps.L2) +
                          floor_div(ps.L1, ps.L2) * M + K);
}

double TileAnalysis::zeta_seminorm(const Tile& s) {
  if (ell_ == 1) return seminorm(s).total;
  auto it = zeta_cache_.find(s);
  if (it != zeta_cache_.end()) return it->second;
  const ParamSet& ps = frame_.params;
  const Grid& g = frame_.grid;
  const std::size_t n = g.size();
  const double p = ps.p;
  std::set<int> zs;
  for (int M = 0; M <= 6 * ps.L_big; ++M)
    for (int K = -10 * ps.L_big; K <= 10 * ps.L_big; ++K) zs.insert(zeta(ps, s.j, M, K));
  const Sparse& st = double_star(s);
  const double len = frame_.length(s);
  const double norm = std::pow(len, -1.0 / p);
  double sup = 0.0;
  for (int z : zs) {
    auto bt = zeta_bands_.find(z);
    if (bt == zeta_bands_.end()) {
      Signal band_z;
      try {
        const SymbolRecipe r = recipe_of(ps, ell_, z, Modulation::none(), frame_.ctx);
        if (!(r.scale > 0.0) || !std::isfinite(r.scale)) throw NyquistOverflow("degenerate scale");
        band_z = apply_spec(F_, realize(r, g).values);
      } catch (const NyquistOverflow&) {
        ++zeta_skipped_;
        continue;
      }
      zeta_derivs_.emplace(z, spectral_derivative(band_z));
      bt = zeta_bands_.emplace(z, std::move(band_z)).first;
    }
    const Signal& bz = bt->second;
    const Signal& dz = zeta_derivs_.at(z);
    double a0 = 0.0, a1 = 0.0;
    for (std::size_t t = 0; t < st.values.size(); ++t) {
      const std::size_t i = (st.start + t) % n;
      a0 += std::pow(std::abs(st.values[t] * bz[i]), p);
      a1 += std::pow(std::abs(st.values[t] * len * dz[i]), p);
    }
    const double v = norm * (std::pow(a0 * g.spacing(), 1.0 / p) + std::pow(a1 * g.spacing(), 1.0 / p));
    sup = std::max(sup, v);
  }
  const double total = seminorm(s).total + sup;
  zeta_cache_.emplace(s, total);
  return total;
}

Branch TileAnalysis::branch_of(const Tree& T) const {
  if (frame_.ctx == Context::lambda_sec5) return (omega_ && ell_ != 3) ? Branch::m_variant : Branch::p2_variant;
  bool any_a = false, any_b = false;
  for (const auto& s : T.members) (in_first_branch(frame_, s.j) ? any_a : any_b) = true;
  if (any_a && any_b) throw BranchMismatch("tree mixes the two window-ratio branches");
  return any_b ? Branch::caseB : Branch::caseA;
}

// ---- incremental tree sizes ----------------------------------------------------------

namespace {

// Delta*(x) = sum_c sqrt(Q_c(x)), Q_c = sum over tree tiles of nonnegative contributions.
struct SizeModel {
  TileAnalysis& A;
  Branch branch;
  int components = 1;
  bool top_only = false;
  bool lag = false;  // component 0 depends on whether j - L is a scale of the tree
  double q = 2.0;    // exponent of the Delta* norm
  std::map<Tile, Signal> ones;

  SizeModel(TileAnalysis& a, Branch b, bool second_branch_sec5) : A(a), branch(b) {
    const int ell = A.ell();
    const double p = A.frame().params.p;
    switch (b) {
      case Branch::caseA:
        q = p;
        top_only = ell == 2;
        break;
      case Branch::caseB:
        q = p;
        lag = ell != 1;
        components = ell == 2 ? 2 : 1;
        break;
      case Branch::p2_variant:
        q = 2.0;
        if (ell == 3 && second_branch_sec5) components = 0;
        break;
      case Branch::m_variant:
        q = p;
        break;
    }
  }

  const Signal& one_star(const Tile& s) {
    auto it = ones.find(s);
    if (it != ones.end()) return it->second;
    const TileFrame& f = A.frame();
    return ones.emplace(s, smoothed_indicator(f.grid, f.k(s.j), s.n, IndicatorVariant::star)).first->second;
  }

  // squared contribution of s to component c (version v of the lag component),
  // as (first sample, values) over a periodic window
  void contribution(const Tile& s, int c, bool v, std::size_t& start, RVec& out) {
    const std::size_t n = A.frame().grid.size();
    if (branch == Branch::p2_variant || branch == Branch::m_variant) {
      const Signal& w = one_star(s);
      const Signal& b = A.band(s.j);
      const Signal* psi = nullptr;
      if (branch == Branch::m_variant) psi = &A.psi_star_translated(s.j);
      start = 0;
      out.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        double wt = w[i].real();
        if (psi) wt *= (*psi)[i].real();
        out[i] = std::norm(wt * b[i]);
      }
      return;
    }
    const auto& st = A.double_star(s);
    start = st.start;
    out.resize(st.values.size());
    const int L = A.frame().params.L_big;
    for (std::size_t t = 0; t < st.values.size(); ++t) {
      const std::size_t i = (st.start + t) % n;
      cplx val;
      if (branch == Branch::caseB && A.ell() != 1) {
        if (c == 0) {
          val = A.band_unmodulated(s.j)[i];
          if (v) val -= A.band_unmodulated(s.j - L)[i];
        } else {
          val = A.band(s.j)[i] - A.band_unmodulated(s.j)[i];
        }
      } else {
        val = A.band(s.j)[i];
      }
      out[t] = std::norm(st.values[t] * val);
    }
  }
};

class Accumulator {
 public:
  Accumulator(SizeModel& m, std::size_t n) : m_(m), n_(n), Q_(static_cast<std::size_t>(m.components), RVec(n, 0.0)),
                                               term_(n, 0.0) {}

  void add(const Tile& s) {
    members_.insert(s);
    const int L = m_.A.frame().params.L_big;
    if (m_.lag) {
      const bool new_level = ++levels_[s.j] == 1;
      if (new_level) {
        // tiles at j + L now see their lagged partner
        for (const auto& t : members_)
          if (t.j == s.j + L) {
            apply(t, 0, false, -1.0);
            apply(t, 0, true, 1.0);
          }
      }
    }
    const bool v = m_.lag && levels_.count(s.j - L) && levels_[s.j - L] > 0;
    for (int c = 0; c < m_.components; ++c) apply(s, c, c == 0 && v, 1.0);
  }

  // sum_x h Delta*(x)^q
  double integral() const { return acc_ * m_.A.frame().grid.spacing(); }

 private:
  void apply(const Tile& s, int c, bool v, double sign) {
    std::size_t start = 0;
    m_.contribution(s, c, v, start, buf_);
    for (std::size_t t = 0; t < buf_.size(); ++t) {
      const std::size_t i = (start + t) % n_;
      Q_[static_cast<std::size_t>(c)][i] += sign * buf_[t];
      double d = 0.0;
      for (const auto& Qc : Q_) d += std::sqrt(std::max(Qc[i], 0.0));
      const double nt = std::pow(d, m_.q);
      acc_ += nt - term_[i];
      term_[i] = nt;
    }
  }

  SizeModel& m_;
  std::size_t n_;
  std::vector<RVec> Q_;
  RVec term_;
  double acc_ = 0.0;
  std::set<Tile> members_;
  std::map<int, int> levels_;
  RVec buf_;
};

double seminorm_part(TileAnalysis& A, const Tile& top, Branch b) {
  switch (b) {
    case Branch::caseA: return A.seminorm(top).total;
    case Branch::caseB: return A.ell() == 1 ? A.seminorm(top).total : A.zeta_seminorm(top);
    case Branch::p2_variant: return A.seminorm(top, Weight::one_double_star).total;
    case Branch::m_variant: return A.seminorm(top, Weight::psi_star_m).total;
  }
  return 0.0;
}

double combine(const SizeModel& m, const Accumulator& acc, double top_len, double semi) {
  const double delta = std::pow(std::max(acc.integral(), 0.0), 1.0 / m.q);
  return std::pow(top_len, -1.0 / m.q) * delta + semi;
}

}  // namespace

Signal TileAnalysis::delta_star(const Tree& T, Branch b) {
  SizeModel m(*this, b, !in_first_branch(frame_, T.top.j));
  const std::size_t n = frame_.grid.size();
  std::vector<RVec> Q(static_cast<std::size_t>(m.components), RVec(n, 0.0));
  std::set<int> scl;
  for (const auto& s : T.members) scl.insert(s.j);
  const int L = frame_.params.L_big;
  RVec buf;
  for (const auto& s : T.members) {
    if (m.top_only && s != T.top) continue;
    const bool v = m.lag && scl.count(s.j - L);
    for (int c = 0; c < m.components; ++c) {
      std::size_t start = 0;
      m.contribution(s, c, c == 0 && v, start, buf);
      for (std::size_t t = 0; t < buf.size(); ++t) Q[static_cast<std::size_t>(c)][(start + t) % n] += buf[t];
    }
  }
  RVec d(n, 0.0);
  for (const auto& Qc : Q)
    for (std::size_t i = 0; i < n; ++i) d[i] += std::sqrt(std::max(Qc[i], 0.0));
  return Signal::from_real(frame_.grid, d);
}

double TileAnalysis::size_of_tree(const Tree& T, Branch b) {
  SizeModel m(*this, b, !in_first_branch(frame_, T.top.j));
  Accumulator acc(m, frame_.grid.size());
  for (const auto& s : T.members)
    if (!m.top_only || s == T.top) acc.add(s);
  return combine(m, acc, frame_.length(T.top), seminorm_part(*this, T.top, b));
}

namespace {

struct TopEval {
  double value = 0.0;
  std::size_t candidates = 0;
};

TopEval best_for_top(TileAnalysis& A, const TileSet& P, const Tile& top) {
  const TileFrame& f = A.frame();
  const Tree M = maximal_tree(P, top);
  const Branch b = A.branch_of(M);
  SizeModel m(A, b, !in_first_branch(f, top.j));
  const double semi = seminorm_part(A, top, b);
  const double len = f.length(top);
  Accumulator acc(m, f.grid.size());
  acc.add(top);
  TopEval ev;
  ev.value = combine(m, acc, len, semi);
  ev.candidates = 1;
  if (m.top_only || m.components == 0) return ev;

  // greedy order by the mass of each tile's own contribution
  std::vector<std::pair<double, Tile>> order;
  RVec buf;
  for (const auto& s : M.members) {
    if (s == top) continue;
    double mass = 0.0;
    for (int c = 0; c < m.components; ++c) {
      std::size_t start = 0;
      m.contribution(s, c, false, start, buf);
      for (double x : buf) mass += x;
    }
    order.push_back({mass, s});
  }
  std::sort(order.begin(), order.end(), [](const auto& a, const auto& b2) {
    if (a.first != b2.first) return a.first > b2.first;
    return a.second < b2.second;
  });
  const auto scales = f.scales();
  std::set<Tile> added{top};
  for (const auto& [mass, s] : order) {
    if (added.count(s)) continue;
    for (int j : scales) {
      if (j <= top.j) continue;
      if (j >= s.j) break;
      const Tile a = f.ancestor(s, j);
      if (!added.count(a) && std::binary_search(M.members.begin(), M.members.end(), a)) {
        acc.add(a);
        added.insert(a);
      }
    }
    acc.add(s);
    added.insert(s);
    ev.value = std::max(ev.value, combine(m, acc, len, semi));
    ++ev.candidates;
  }
  return ev;
}

}  // namespace

SizeStar size_star(TileAnalysis& A, const TileSet& P) {
  SizeStar out;
  for (const auto& t : P.tiles) {
    const TopEval ev = best_for_top(A, P, t);
    out.candidates += ev.candidates;
    if (ev.value > out.value) {
      out.value = ev.value;
      out.top = t;
    }
  }
  return out;
}

OrganizeResult organize(TileAnalysis& A, const TileSet& S) {
  const TileFrame& f = A.frame();
  OrganizeResult r;
  r.S2.frame = S.frame;
  if (S.empty()) return r;
  if (f.ctx == Context::lambda_sec4) {
    const bool first = in_first_branch(f, S.tiles.front().j);
    for (const auto& s : S.tiles)
      if (in_first_branch(f, s.j) != first) throw BranchMismatch("organize needs a set inside one branch");
  }
  std::map<Tile, double> best;
  for (const auto& t : S.tiles) best[t] = best_for_top(A, S, t).value;
  for (const auto& [t, v] : best) r.size_star_S = std::max(r.size_star_S, v);
  const double tau = r.size_star_S / 2.0;

  TileSet stock = S;
  for (;;) {
    const Tile* pick = nullptr;
    for (const auto& t : stock.tiles)
      if (best.at(t) > tau) {
        pick = &t;
        break;
      }
    if (!pick) break;
    const Tile top = *pick;
    Tree T = maximal_tree(stock, top);
    stock = without(stock, T.members);
    for (const auto& s : T.members) best.erase(s);
    // only tops containing I_top see their maximal tree change
    for (const auto& t : stock.tiles)
      if (f.inside(top, t)) best[t] = best_for_top(A, stock, t).value;
    r.S1.count_value += f.length(T.top);
    r.S1.trees.push_back(std::move(T));
    ++r.iterations;
  }
  r.S2 = stock;
  r.size_star_S2 = size_star(A, stock).value;
  r.halving_ok = r.size_star_S2 <= tau;

  for (std::size_t a = 0; a < r.S1.trees.size(); ++a)
    for (std::size_t b = a + 1; b < r.S1.trees.size(); ++b) {
      const auto [lo1, hi1] = f.interval(r.S1.trees[a].top);
      const auto [lo2, hi2] = f.interval(r.S1.trees[b].top);
      if (lo1 < hi2 && lo2 < hi1) r.tops_disjoint = false;
    }

  const double p = f.params.p;
  const RVec Mpf = maximal_p(maximal(abs_values(A.input())), p);
  const double level = r.size_star_S / 2.0;
  r.maximal_function_ratio = std::numeric_limits<double>::infinity();
  for (const auto& T : r.S1.trees) {
    auto [b, e] = f.sample_range(T.top);
    e = std::min(e, Mpf.size());
    for (std::size_t i = b; i < e; ++i) {
      if (Mpf[i] < level * (1.0 - 1e-12)) r.maximal_function_ok = false;
      r.maximal_function_ratio = std::min(r.maximal_function_ratio, Mpf[i] / level);
    }
  }
  if (r.S1.trees.empty()) r.maximal_function_ratio = 0.0;
  const double fp = std::pow(lp_norm(A.input(), p), p);
  r.count_constant = fp > 0.0 ? r.S1.count_value * std::pow(r.size_star_S, p) / fp : 0.0;
  return r;
}

// ---- restricted forms ----------------------------------------------------------------

namespace {

std::map<int, std::vector<long>> by_scale(const TileSet& S) {
  std::map<int, std::vector<long>> m;
  for (const auto& s : S.tiles) m[s.j].push_back(s.n);
  return m;
}

// sum_n 1*_{j,n} = (indicator of the union) mollified at scale k_j
RVec scale_weight(const TileFrame& f, int j, const std::vector<long>& ns) {
  const double len = std::ldexp(1.0, -f.k(j));
  std::vector<std::pair<double, double>> iv;
  for (long n : ns) iv.push_back({len * static_cast<double>(n), len * static_cast<double>(n + 1)});
  const Signal w = shadow_indicator(f.grid, iv, f.k(j));
  RVec out(w.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w[i].real();
  return out;
}

double defect_if_full(const TileFrame& f, int j, const std::vector<long>& ns, const RVec& w) {
  if (static_cast<long>(ns.size()) != f.positions(j)) return 0.0;
  if (std::abs(static_cast<double>(f.positions(j)) * f.length({j, 0}) - f.grid.period) > 1e-12) return 0.0;
  double d = 0.0;
  for (double x : w) d = std::max(d, std::abs(x - 1.0));
  return d;
}

}  // namespace

LambdaSResult lambda_S(const Signal& f1, const Signal& f2, const Signal& f3, const TileSet& S) {
  const TileFrame& f = S.frame;
  if (f.ctx != Context::lambda_sec4) throw InvalidArgument("lambda_S needs a lambda_sec4 frame");
  const ParamSet& ps = f.params;
  TrilinearFormSpec spec{f.grid, {}};
  LambdaSResult r;
  for (const auto& [j, ns] : by_scale(S)) {
    TrilinearTerm t;
    t.j = j;
    t.s1 = symbol_of(ps, 1, j, Modulation::integer(ps.n1), f.grid, f.ctx).values;
    t.s2 = symbol_of(ps, 2, j, Modulation::integer(ps.n2), f.grid, f.ctx).values;
    t.s3 = symbol_of(ps, 3, j, Modulation::none(), f.grid, f.ctx).values;
    t.weight = scale_weight(f, j, ns);
    r.partition_defect = std::max(r.partition_defect, defect_if_full(f, j, ns, t.weight));
    spec.terms.push_back(std::move(t));
  }
  r.value = trilinear_pair(f1, f2, f3, spec);
  return r;
}

LambdaSResult lambda_S_m(const Signal& f1, const Signal& f2, const Signal& f3, const TileSet& S,
                         const MeasurableSet* omega) {
  const TileFrame& f = S.frame;
  if (f.ctx != Context::lambda_sec5) throw InvalidArgument("lambda_S_m needs a lambda_sec5 frame");
  if (f1.grid() != f.grid || f2.grid() != f.grid || f3.grid() != f.grid)
    throw InvalidArgument("signals and frame grids differ");
  const ParamSet& ps = f.params;
  const Spectrum F[3] = {dft_forward(f1), dft_forward(f2), dft_forward(f3)};
  LambdaSResult r;
  cplx total{};
  for (const auto& [j, ns] : by_scale(S)) {
    const RVec w = scale_weight(f, j, ns);
    r.partition_defect = std::max(r.partition_defect, defect_if_full(f, j, ns, w));
    Signal G[3];
    for (int ell = 1; ell <= 3; ++ell) {
      const Signal b = apply_spec(F[ell - 1], symbol_of(ps, ell, j, Modulation::none(), f.grid, f.ctx).values);
      CVec wb(b.size());
      for (std::size_t i = 0; i < wb.size(); ++i) wb[i] = w[i] * b[i];
      const auto v = omega ? TranslateVariant::Tr_tilde : TranslateVariant::Tr;
      G[ell - 1] = translate_exact(Signal(f.grid, std::move(wb)), translation_amount(ps, ell, j, v));
    }
    RVec psi(f.grid.size(), 1.0);
    if (omega) {
      const OmegaJ oj = omega_j_and_psi(*omega, ps, j, ps.epsilon, ps.m);
      for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = oj.psi[i].real();
    }
    for (std::size_t i = 0; i < psi.size(); ++i) {
      const double p3 = psi[i] * psi[i] * psi[i];
      total += p3 * G[0][i] * G[1][i] * G[2][i];
    }
  }
  r.value = total * f.grid.spacing();
  return r;
}

// ---- serialization ---------------------------------------------------------------------

namespace {
nlohmann::json tile_json(const Tile& s) { return {{"j", s.j}, {"n", s.n}}; }
}  // namespace

nlohmann::json tileset_to_json(const TileSet& S) {
  nlohmann::json tiles = nlohmann::json::array();
  for (const auto& s : S.tiles) tiles.push_back(tile_json(s));
  return {{"Gamma", S.frame.Gamma},
          {"gamma", S.frame.gamma},
          {"context", to_string(S.frame.ctx)},
          {"tiles", tiles}};
}

nlohmann::json forest_to_json(const TileFrame& f, const Forest& F) {
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& T : F.trees) {
    nlohmann::json members = nlohmann::json::array();
    for (const auto& s : T.members) members.push_back(tile_json(s));
    const auto [lo, hi] = f.interval(T.top);
    trees.push_back({{"top", tile_json(T.top)}, {"interval", {lo, hi}}, {"members", members}});
  }
  return {{"trees", trees}, {"count", F.count_value}};
}

std::string tiles_plot_csv(const TileSet& S) {
  std::ostringstream os;
  os << "j,n,ell,t_lo,t_hi,xi_lo,xi_hi,kind\n";
  for (const auto& s : S.tiles) {
    const auto [lo, hi] = S.frame.interval(s);
    for (int ell = 1; ell <= 3; ++ell) {
      const Window w = window_of(S.frame.params, ell, s.j, S.frame.ctx);
      os << s.j << ',' << s.n << ',' << ell << ',' << fmt_num(lo) << ',' << fmt_num(hi) << ',' << fmt_num(w.lo)
         << ',' << fmt_num(w.hi) << ',' << to_string(w.kind) << '\n';
    }
  }
  return os.str();
}

}  // namespace pp
