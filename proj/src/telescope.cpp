#include "paraprod/telescope.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace pp {

long floor_div(long num, long den) {
  long q = num / den;
  if ((num % den != 0) && ((num < 0) != (den < 0))) --q;
  return q;
}

int m_of_j(const ParamSet& ps, int j) {
  return static_cast<int>(floor_div(ps.exponent(2, j) - ps.exponent(1, j) + 6, ps.L2));
}

int m_prime_of_j(const ParamSet& ps, int j) {
  return static_cast<int>(floor_div(ps.exponent(2, j) - ps.exponent(1, j) + 6, ps.L1));
}

cplx SymbolSum::eval(double xi) const {
  cplx v{};
  for (const auto& [c, r] : parts)
    if (r.window.contains(xi)) v += c * r.eval(xi);
  return v;
}

CVec SymbolSum::realize(const Grid& g) const {
  CVec out(g.size());
  for (const auto& [c, r] : parts) {
    if (r.window.max_abs() > g.nyquist() * (1.0 + 1e-15))
      throw NyquistOverflow("telescope symbol at j=" + std::to_string(r.window.j) + " exceeds Nyquist");
    for (std::size_t b = 0; b < g.size(); ++b) {
      const double xi = g.freq(b);
      if (r.window.contains(xi)) out[b] += c * r.eval(xi);
    }
  }
  return out;
}

std::string to_string(FormLabel l) {
  switch (l) {
    case FormLabel::Lambda1: return "Lambda1";
    case FormLabel::Lambda2: return "Lambda2";
    case FormLabel::Lambda3: return "Lambda3";
    case FormLabel::Lambda11: return "Lambda11";
    case FormLabel::Lambda12: return "Lambda12";
    case FormLabel::replacement_term: return "replacement_term";
    case FormLabel::small_omega2_case: return "small_omega2_case";
  }
  return "?";
}

int AdmissibleForm::bad_index() const {
  for (int l = 0; l < 3; ++l)
    if (!good[l]) return l + 1;
  return 0;
}

TrilinearFormSpec AdmissibleForm::spec(const Grid& g) const {
  TrilinearFormSpec s{g, {}};
  for (const auto& t : terms) {
    TrilinearTerm tt;
    tt.j = t.j;
    tt.s1 = t.symbols[0].realize(g);
    tt.s2 = t.symbols[1].realize(g);
    tt.s3 = t.symbols[2].realize(g);
    s.terms.push_back(std::move(tt));
  }
  return s;
}

nlohmann::json AdmissibleForm::to_json() const {
  nlohmann::json gi = nlohmann::json::array();
  for (int l = 0; l < 3; ++l)
    if (good[l]) gi.push_back(l + 1);
  nlohmann::json ts = nlohmann::json::array();
  for (const auto& t : terms) {
    nlohmann::json tj{{"j", t.j},
                      {"windows", {t.container[0].to_json(), t.container[1].to_json(), t.container[2].to_json()}}};
    if (t.has_block) tj["block"] = {{"k_lo", t.block.k_lo}, {"k_hi", t.block.k_hi}, {"m_prime", t.block.m_prime}};
    ts.push_back(std::move(tj));
  }
  return {{"label", to_string(label)}, {"good_indices", gi}, {"terms", ts}};
}

std::size_t Decomposition::nonempty_count() const {
  return static_cast<std::size_t>(
      std::count_if(forms.begin(), forms.end(), [](const AdmissibleForm& f) { return !f.terms.empty(); }));
}

namespace {

nlohmann::json range_json(JRange r) {
  if (r.empty()) return nullptr;
  return {{"lo", r.lo}, {"hi", r.hi}};
}

}  // namespace

nlohmann::json Decomposition::to_json() const {
  nlohmann::json fs = nlohmann::json::array();
  for (const auto& f : forms) fs.push_back(f.to_json());
  return {{"params", params.to_json()},
          {"log_size", grid.log_size},
          {"period", grid.period},
          {"J", range_json(J)},
          {"J_small", range_json(J_small)},
          {"J_tele", range_json(J_tele)},
          {"form_count", forms.size()},
          {"nonempty_form_count", nonempty_count()},
          {"forms", fs}};
}

// ---- symbol families -----------------------------------------------------------------

namespace {

Window interval(WindowKind kind, double lo, double hi, int j, int ell) {
  Window w;
  w.kind = kind;
  w.lo = lo;
  w.hi = hi;
  w.j = j;
  w.ell = ell;
  return w;
}

SymbolRecipe phi1(const ParamSet& ps, int j) {
  return recipe_of(ps, 1, j, Modulation::integer(ps.n1), Context::pi_type1);
}

SymbolRecipe phi2_mod(const ParamSet& ps, int j) {
  return recipe_of(ps, 2, j, Modulation::integer(ps.n2), Context::pi_type1);
}

// bump on [-1,1], flat on [-3/4,3/4], at scale b_{2,j}
SymbolRecipe phi2_flat(const ParamSet& ps, int a) {
  const double B = ps.base(2, a);
  SymbolRecipe r;
  r.window = interval(WindowKind::symmetric, -B, B, a, 2);
  r.bump = Bump{-1.0, 1.0, -0.75, 0.75};
  r.scale = B;
  return r;
}

// bump on [-18,18], flat on [-17,17], at scale b_{2,j}
SymbolRecipe phi3_wide(const ParamSet& ps, int a) {
  const double B = ps.base(2, a);
  SymbolRecipe r;
  r.window = interval(WindowKind::symmetric, -18.0 * B, 18.0 * B, a, 3);
  r.bump = Bump{-18.0, 18.0, -17.0, 17.0};
  r.scale = B;
  return r;
}

// neighborhood of -(w1 + w2): the negated sum dilated by 5/4 about its centre
SymbolRecipe phi3_near_sum(const ParamSet& ps, int j) {
  const double A = ps.base(1, j), B = ps.base(2, j);
  const double lo = A / 2.0 - B, hi = 2.0 * A + B;
  const double c = -(lo + hi) / 2.0, h = (hi - lo) / 2.0;
  SymbolRecipe r;
  r.window = interval(WindowKind::negative_band, c - 1.25 * h, c + 1.25 * h, j, 3);
  r.bump = Bump{(c - 1.25 * h) / A, (c + 1.25 * h) / A, -hi / A, -lo / A};
  r.scale = A;
  return r;
}

SymbolSum single(const SymbolRecipe& r) { return SymbolSum{{{1.0, r}}}; }
SymbolSum diff(const SymbolRecipe& a, const SymbolRecipe& b) { return SymbolSum{{{1.0, a}, {-1.0, b}}}; }

SymbolSum block(const ParamSet& ps, int a, int k_lo, int k_hi) {
  SymbolSum s;
  for (int k = k_lo; k <= k_hi; ++k) s.parts.emplace_back(1.0, phi1(ps, a + k));
  return s;
}

bool small_branch(const ParamSet& ps, int j) {
  // b_{2,j} < b_{1,j}/16 with b_{1,j} = 2^{L1 j + M1 + 1}, b_{2,j} = 2^{L2 j + M2}
  return ps.exponent(2, j) < ps.exponent(1, j) - 3;
}

}  // namespace

Decomposition telescope_decompose(const ParamSet& ps, const Grid& g) {
  Decomposition d;
  d.params = ps;
  d.grid = g;
  d.J = admissible_j_range(ps, g, Context::lambda_sec4);
  for (int j = d.J.lo; j <= d.J.hi; ++j) {
    JRange& r = small_branch(ps, j) ? d.J_small : d.J_tele;
    if (r.empty()) r = JRange{j, j};
    else r.hi = j;
  }

  AdmissibleForm small{FormLabel::small_omega2_case, {true, false, true}, {}};
  for (int j = d.J_small.lo; j <= d.J_small.hi; ++j) {
    const double A = ps.base(1, j);
    FormTerm t;
    t.j = j;
    t.symbols = {single(phi1(ps, j)), single(phi2_mod(ps, j)), single(phi3_near_sum(ps, j))};
    t.container = {window_of(ps, 1, j, Context::pi_type1),
                   interval(WindowKind::symmetric, -A / 4.0, A / 4.0, j, 2), phi3_near_sum(ps, j).window};
    small.terms.push_back(std::move(t));
  }

  AdmissibleForm repl{FormLabel::replacement_term, {true, true, false}, {}};
  for (int j = d.J_tele.lo; j <= d.J_tele.hi; ++j) {
    FormTerm t;
    t.j = j;
    t.symbols = {single(phi1(ps, j)), diff(phi2_mod(ps, j), phi2_flat(ps, j)), single(phi3_wide(ps, j))};
    t.container = {window_of(ps, 1, j, Context::pi_type1), phi2_flat(ps, j).window, phi3_wide(ps, j).window};
    repl.terms.push_back(std::move(t));
  }

  AdmissibleForm l11{FormLabel::Lambda11, {false, true, true}, {}};
  AdmissibleForm l12{FormLabel::Lambda12, {true, false, true}, {}};
  AdmissibleForm l2{FormLabel::Lambda2, {false, true, true}, {}};
  AdmissibleForm l3{FormLabel::Lambda3, {true, true, false}, {}};

  if (!d.J_tele.empty()) {
    int a_lo = d.J_tele.lo;
    for (int j = d.J_tele.lo; j <= d.J_tele.hi; ++j) a_lo = std::min(a_lo, j - m_of_j(ps, j));
    const int q = static_cast<int>(floor_div(ps.L2, ps.L1));
    for (int a = a_lo; a <= d.J_tele.hi; ++a) {
      const int mp = m_prime_of_j(ps, a);
      // k <= m(a+k) is equivalent to k <= m'(a); clip to scales a+k inside the telescoped range
      const int k_lo = std::max(0, d.J_tele.lo - a);
      const int k_hi = std::min(mp, d.J_tele.hi - a);
      if (k_lo > k_hi) continue;
      const double B = ps.base(2, a);
      const std::array<Window, 3> cont = {
          interval(WindowKind::upper_dyadic, 0.0, std::ldexp(1.0, ps.exponent(2, a) + 7), a, 1),
          interval(WindowKind::symmetric, -B, B, a, 2),
          interval(WindowKind::symmetric, -18.0 * B, 18.0 * B, a, 3)};
      const SymbolSum full = block(ps, a, k_lo, k_hi);
      const SymbolSum d2 = diff(phi2_flat(ps, a), phi2_flat(ps, a - 1));
      const SymbolSum d3 = diff(phi3_wide(ps, a), phi3_wide(ps, a - 1));

      auto push = [&](AdmissibleForm& f, SymbolSum s1, SymbolSum s2, SymbolSum s3, int lo) {
        FormTerm t;
        t.j = a;
        t.symbols = {std::move(s1), std::move(s2), std::move(s3)};
        t.container = cont;
        t.has_block = true;
        t.block = BlockRange{lo, k_hi, mp};
        f.terms.push_back(std::move(t));
      };

      push(l11, full, d2, d3, k_lo);
      push(l2, full, d2, diff(phi3_wide(ps, a - 1), phi3_wide(ps, a - 8)), k_lo);
      // the low part of the block pairs to zero in these two forms
      const int c12 = std::max(k_lo, mp - 10 - q);
      if (c12 <= k_hi) push(l12, block(ps, a, c12, k_hi), single(phi2_flat(ps, a - 1)), d3, c12);
      const int c3 = std::max(k_lo, mp - 100 - q);
      if (c3 <= k_hi) push(l3, block(ps, a, c3, k_hi), d2, single(phi3_wide(ps, a - 8)), c3);
    }
  }

  for (AdmissibleForm* f : {&small, &repl, &l11, &l12, &l2, &l3}) f->modulation = {ps.n1, ps.n2, 0};
  d.forms = {std::move(small), std::move(repl), std::move(l11), std::move(l12), std::move(l2), std::move(l3)};
  return d;
}

// ---- admissibility ------------------------------------------------------------------------

nlohmann::json AdmissibilityReport::to_json() const {
  return {{"ok", ok},
          {"failures", failures},
          {"max_vanish", max_vanish},
          {"max_lacunarity", max_lacunarity},
          {"max_distance_ratio", max_distance_ratio},
          {"cond1_C", cond1_C},
          {"cond3_C", cond3_C},
          {"envelope_C", envelope_C}};
}

namespace {

// sup over u, alpha <= 2, N <= 4 of |D^alpha eta(u)| (1+|u|)^N / (1+|n|)^alpha,
// eta(u) = S(|w| u), by central differences
double envelope_constant(const SymbolSum& s, const Window& w, double n) {
  const double len = w.length();
  if (!(len > 0.0)) return 0.0;
  const double u0 = w.lo / len - 0.05, u1 = w.hi / len + 0.05;
  const int samples = 256;
  const double h = 1e-3;
  double best = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double u = u0 + (u1 - u0) * i / samples;
    const cplx fm = s.eval(len * (u - h)), f0 = s.eval(len * u), fp = s.eval(len * (u + h));
    const double d[3] = {std::abs(f0), std::abs(fp - fm) / (2 * h), std::abs(fp - 2.0 * f0 + fm) / (h * h)};
    for (int alpha = 0; alpha <= 2; ++alpha)
      for (int N = 0; N <= 4; ++N)
        best = std::max(best, d[alpha] * std::pow(1.0 + std::abs(u), N) / std::pow(1.0 + std::abs(n), alpha));
  }
  return best;
}

bool window_inside(const Window& inner, const Window& outer) {
  const double slack = 1e-12 * std::max(1.0, outer.max_abs());
  if (inner.kind == WindowKind::annulus) return outer.contains(inner.hi) && outer.contains(-inner.hi);
  return inner.lo >= outer.lo - slack && inner.hi <= outer.hi + slack;
}

}  // namespace

AdmissibilityReport check_admissible(const AdmissibleForm& form, double tol, bool strict) {
  AdmissibilityReport rep;
  auto fail = [&](const std::string& what) {
    rep.ok = false;
    if (std::find(rep.failures.begin(), rep.failures.end(), what) == rep.failures.end()) rep.failures.push_back(what);
  };
  const int ngood = static_cast<int>(std::count(form.good.begin(), form.good.end(), true));
  if (ngood < 2) fail("fewer than two good indices");
  const int bad = form.bad_index();
  rep.cond1_C = std::numeric_limits<double>::infinity();
  for (std::size_t ti = 0; ti < form.terms.size(); ++ti) {
    const FormTerm& t = form.terms[ti];
    std::array<double, 3> len{};
    for (int l = 0; l < 3; ++l) {
      const Window& w = t.container[l];
      len[l] = w.length();
      if (!(len[l] > 0.0)) {
        fail("empty container window");
        continue;
      }
      const double ratio = w.dist_to_origin() / len[l];
      rep.max_distance_ratio = std::max(rep.max_distance_ratio, ratio);
      if (ratio > 3.0 + 1e-12) fail("distance from origin exceeds 3|w| (ell=" + std::to_string(l + 1) + ")");
      for (const auto& part : t.symbols[l].parts)
        if (!window_inside(part.second.window, w)) fail("symbol support leaves its container (ell=" + std::to_string(l + 1) + ")");
      if (form.good[l]) {
        const double v = std::abs(t.symbols[l].eval(0.0));
        rep.max_vanish = std::max(rep.max_vanish, v);
        if (v > tol) fail("good index does not vanish at the origin (ell=" + std::to_string(l + 1) + ")");
      }
    }
    rep.cond1_C = std::min(rep.cond1_C, len[2] / std::max(len[0], len[1]));
    if (ti + 1 < form.terms.size() && form.terms[ti + 1].j == t.j + 1) {
      for (int l = 0; l < 3; ++l) {
        const double r = len[l] / form.terms[ti + 1].container[l].length();
        rep.max_lacunarity = std::max(rep.max_lacunarity, r);
        if (r > 0.5 + 1e-12) fail("lacunarity ratio above 1/2 (ell=" + std::to_string(l + 1) + ")");
      }
    }
    if (bad == 2 || bad == 3) {
      const double mn = std::min({len[0], len[1], len[2]});
      double c = std::numeric_limits<double>::infinity();
      for (int l = 0; l < 3; ++l)
        if (l + 1 != bad) c = std::min(c, len[l] / mn);
      rep.cond3_C = std::max(rep.cond3_C, c);
    }
    if (bad == 1) {
      if (!t.has_block) fail("bad index 1 without a block sum");
      else if (t.block.k_lo < 0 || t.block.k_lo > t.block.k_hi || t.block.k_hi > t.block.m_prime ||
               static_cast<int>(t.symbols[0].parts.size()) != t.block.k_hi - t.block.k_lo + 1)
        fail("block sum is not a contiguous run inside [0, m'(j)]");
    }
  }
  if (form.terms.empty()) rep.cond1_C = 0.0;
  else if (!(rep.cond1_C > 0.0) || !std::isfinite(rep.cond1_C)) fail("|w3| not comparable to max(|w1|, |w2|)");
  if ((bad == 2 || bad == 3) && !std::isfinite(rep.cond3_C)) fail("condition (3) constant is unbounded");

  // derivative envelope, reported only
  for (const auto& t : form.terms)
    for (int l = 0; l < 3; ++l)
      if (form.good[l]) rep.envelope_C = std::max(rep.envelope_C, envelope_constant(t.symbols[l], t.container[l], static_cast<double>(form.modulation[l])));

  if (strict && !rep.ok) {
    std::string msg = to_string(form.label) + " is not admissible:";
    for (const auto& f : rep.failures) msg += " [" + f + "]";
    throw AdmissibilityViolation(msg);
  }
  return rep;
}

// ---- identity & certificates ------------------------------------------------------------

IdentityReport verify_identity(const Decomposition& d, const Signal& f1, const Signal& f2, const Signal& f3) {
  IdentityReport r;
  r.lhs = integrate(mul(paraproduct_type1(f1, f2, d.params, d.J), f3));
  const Signal g1 = f1.with_spectrum(), g2 = f2.with_spectrum(), g3 = f3.with_spectrum();
  for (const auto& f : d.forms) {
    const cplx v = f.terms.empty() ? cplx{} : trilinear_pair(g1, g2, g3, f.spec(d.grid));
    r.per_form.push_back(v);
    r.rhs += v;
  }
  r.residual = std::abs(r.lhs - r.rhs) / std::max(1.0, std::abs(r.lhs));
  return r;
}

std::vector<DroppedTermCase> dropped_term_certificates(const ParamSet& ps, const Grid& g) {
  const Decomposition d = telescope_decompose(ps, g);
  std::vector<DroppedTermCase> out;
  const double inf = std::numeric_limits<double>::infinity();
  const double Q = static_cast<double>(g.size()) / g.period;
  for (int j = d.J_tele.lo; j <= d.J_tele.hi; ++j) {
    DroppedTermCase c;
    c.j = j;
    c.j_low = j - m_of_j(ps, j) - 1;
    const double A = ps.base(1, j), B = ps.base(2, c.j_low);
    c.lo = std::nextafter(std::nextafter(A / 2.0 - B, -inf), -inf);
    c.hi = std::nextafter(std::nextafter(2.0 * A + B, inf), inf);
    c.s3 = std::nextafter(18.0 * B, inf);
    c.certified = true;
    for (double shift : {-Q, 0.0, Q}) {
      const double lo = std::nextafter(c.lo + shift, -inf), hi = std::nextafter(c.hi + shift, inf);
      if (!(hi < -c.s3 || lo > c.s3)) c.certified = false;
    }
    out.push_back(c);
  }
  return out;
}

std::pair<double, double> dropped_term_value(const ParamSet& ps, const Signal& f1, const Signal& f2,
                                             const Signal& f3, int j) {
  const Grid& g = f1.grid();
  const int jl = j - m_of_j(ps, j) - 1;
  TrilinearFormSpec s{g, {}};
  TrilinearTerm t;
  t.j = j;
  t.s1 = single(phi1(ps, j)).realize(g);
  t.s2 = single(phi2_flat(ps, jl)).realize(g);
  t.s3 = single(phi3_wide(ps, jl)).realize(g);
  s.terms.push_back(std::move(t));
  const double v = std::abs(trilinear_pair(f1, f2, f3, s));
  const double scale = lp_norm(f1, inf_p) * lp_norm(f2, 2.0) * lp_norm(f3, 2.0);
  return {v, scale};
}

SupportFactReport check_support_facts(const Decomposition& d) {
  SupportFactReport rep;
  const ParamSet& ps = d.params;
  const Grid& g = d.grid;
  const int q = static_cast<int>(floor_div(ps.L2, ps.L1));
  for (const auto& f : d.forms) {
    if (f.label != FormLabel::Lambda11) continue;  // one entry per telescoped scale
    for (const auto& t : f.terms) {
      const int a = t.j, mp = t.block.m_prime;
      const double Bm = ps.base(2, a - 1);
      const std::pair<int, double> cuts[2] = {{mp - 10 - q, Bm / 4.0}, {mp - 100 - q, std::ldexp(Bm, -80)}};
      for (const auto& [cut, bound] : cuts) {
        const int hi = std::min(t.block.k_hi, cut - 1);
        if (t.block.k_lo > hi) continue;
        const CVec v = block(ps, a, t.block.k_lo, hi).realize(g);
        ++rep.checked;
        for (std::size_t b = 0; b < v.size(); ++b) {
          if (v[b] == cplx{}) continue;
          const double xi = g.freq(b);
          if (xi < 0.0 || xi > bound) {
            ++rep.violations;
            break;
          }
        }
      }
    }
  }
  return rep;
}

}  // namespace pp
