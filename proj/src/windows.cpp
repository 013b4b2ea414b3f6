#include "paraprod/windows.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace pp {

Context context_from_string(const std::string& s) {
  if (s == "pi_type1") return Context::pi_type1;
  if (s == "pi_type2") return Context::pi_type2;
  if (s == "lambda_sec4") return Context::lambda_sec4;
  if (s == "lambda_sec5") return Context::lambda_sec5;
  throw InvalidArgument("unknown context '" + s + "'");
}

std::string to_string(Context c) {
  switch (c) {
    case Context::pi_type1: return "pi_type1";
    case Context::pi_type2: return "pi_type2";
    case Context::lambda_sec4: return "lambda_sec4";
    case Context::lambda_sec5: return "lambda_sec5";
  }
  return "?";
}

std::string to_string(WindowKind k) {
  switch (k) {
    case WindowKind::upper_dyadic: return "upper_dyadic";
    case WindowKind::symmetric: return "symmetric";
    case WindowKind::annulus: return "annulus";
    case WindowKind::negative_band: return "negative_band";
  }
  return "?";
}

void ParamSet::validate() const {
  if (L1 < 1 || L2 < 1) throw InvalidArgument("L1 and L2 must be >= 1");
  if (m < 0) throw InvalidArgument("m must be >= 0");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be > 0");
  if (!(p > 1.0 && p < 2.0)) throw InvalidArgument("p must lie in (1, 2)");
  if (L_big < 4) throw InvalidArgument("L_big must be >= 4");
  if (std::abs(M1) > 256 || std::abs(M2) > 256) throw InvalidArgument("|M1|, |M2| must be <= 256");
  if (L1 > 64 || L2 > 64) throw InvalidArgument("L1, L2 must be <= 64");
  if (m > 60) throw InvalidArgument("m must be <= 60");
}

nlohmann::json ParamSet::to_json() const {
  return nlohmann::json{{"L1", L1}, {"L2", L2}, {"M1", M1},           {"M2", M2}, {"n1", n1},
                        {"n2", n2}, {"m", m},   {"epsilon", epsilon}, {"p", p},   {"L_big", L_big}};
}

ParamSet ParamSet::from_json(const nlohmann::json& j) {
  ParamSet ps;
  try {
    ps.L1 = j.value("L1", ps.L1);
    ps.L2 = j.value("L2", ps.L2);
    ps.M1 = j.value("M1", ps.M1);
    ps.M2 = j.value("M2", ps.M2);
    ps.n1 = j.value("n1", ps.n1);
    ps.n2 = j.value("n2", ps.n2);
    ps.m = j.value("m", ps.m);
    ps.epsilon = j.value("epsilon", ps.epsilon);
    ps.p = j.value("p", ps.p);
    ps.L_big = j.value("L_big", ps.L_big);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed ParamSet JSON: ") + e.what());
  }
  ps.validate();
  return ps;
}

double ParamSet::base(int ell, int j) const { return std::ldexp(1.0, exponent(ell, j)); }

// ---- Window ---------------------------------------------------------------

double Window::length() const { return kind == WindowKind::annulus ? 2.0 * (hi - lo) : hi - lo; }

double Window::max_abs() const {
  return kind == WindowKind::annulus ? hi : std::max(std::abs(lo), std::abs(hi));
}

double Window::dist_to_origin() const {
  if (kind == WindowKind::annulus) return lo;
  if (lo <= 0.0 && hi >= 0.0) return 0.0;
  return std::min(std::abs(lo), std::abs(hi));
}

bool Window::contains(double xi) const {
  if (kind == WindowKind::annulus) return std::abs(xi) >= lo && std::abs(xi) <= hi;
  return xi >= lo && xi <= hi;
}

nlohmann::json Window::to_json() const {
  return nlohmann::json{{"kind", to_string(kind)}, {"lo", lo}, {"hi", hi}, {"j", j}, {"ell", ell}};
}

// ---- Bump -----------------------------------------------------------------

double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double g0 = std::exp(-1.0 / t);
  const double g1 = std::exp(-1.0 / (1.0 - t));
  return g0 / (g0 + g1);
}

double Bump::operator()(double t) const {
  if (t <= a || t >= b) return 0.0;
  if (t >= c && t <= d) return 1.0;
  if (t < c) return smoothstep((t - a) / (c - a));
  return smoothstep((b - t) / (b - d));
}

Bump make_bump(BumpKind kind) {
  switch (kind) {
    case BumpKind::upper: return Bump{0.5, 2.0, 1.0, 1.0};
    case BumpKind::wide: return Bump{-1.0, 1.0, 0.0, 0.0};
  }
  return {};
}

Bump make_bump(double a, double b, double c, double d) {
  if (!(a < c && c <= d && d < b)) throw InvalidArgument("bump requires a < c <= d < b");
  return Bump{a, b, c, d};
}

double Modulation::factor() const {
  return kind == Kind::integer ? static_cast<double>(n) : std::ldexp(1.0, m);
}

cplx SymbolRecipe::eval(double xi) const {
  const double t = (radial ? std::abs(xi) : xi) / scale;
  const double eta = bump(t);
  if (eta == 0.0) return {};
  if (phase == 0.0) return {eta, 0.0};
  // reduce the phase argument mod 1 before multiplying by 2 pi
  double arg = phase * (xi / scale);
  arg -= std::floor(arg);
  return std::polar(eta, 2.0 * std::numbers::pi * arg);
}

MultiplierSymbol realize(const SymbolRecipe& r, const Grid& g) {
  if (r.window.max_abs() > g.nyquist() * (1.0 + 1e-15))
    throw NyquistOverflow("window (ell=" + std::to_string(r.window.ell) + ", j=" + std::to_string(r.window.j) +
                          ") reaches |xi| = " + std::to_string(r.window.max_abs()) + " beyond Nyquist " +
                          std::to_string(g.nyquist()));
  MultiplierSymbol s{r.window, CVec(g.size())};
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double xi = g.freq(k);
    if (!r.window.contains(xi)) continue;
    s.values[k] = r.eval(xi);
  }
  return s;
}

// ---- windows per context ---------------------------------------------------

namespace {

bool sec5_like(Context ctx) { return ctx == Context::pi_type2 || ctx == Context::lambda_sec5; }

Window third_window_sec4(const ParamSet& ps, int j, Bump* bump, double* scale) {
  const double A = ps.base(1, j), B = ps.base(2, j);
  Window w;
  w.j = j;
  w.ell = 3;
  if (B < A / 8.0) {
    w.kind = WindowKind::negative_band;
    w.lo = -19.0 * A / 8.0;
    w.hi = -A / 8.0;
    if (bump) *bump = Bump{-19.0 / 8.0, -1.0 / 8.0, -9.0 / 4.0, -1.0 / 4.0};
    if (scale) *scale = A;
  } else {
    w.kind = WindowKind::symmetric;
    w.lo = -18.0 * B;
    w.hi = 18.0 * B;
    if (bump) *bump = Bump{-18.0, 18.0, -17.0, 17.0};
    if (scale) *scale = B;
  }
  return w;
}

Window third_window_sec5(const ParamSet& ps, int j, Bump* bump, double* scale, bool* radial) {
  const double A = ps.base(1, j), B = ps.base(2, j);
  Window w;
  w.j = j;
  w.ell = 3;
  if (B < A / 8.0 || A < B / 8.0) {
    const double big = std::max(A, B);
    w.kind = WindowKind::annulus;
    w.lo = big / 8.0;
    w.hi = 19.0 * big / 8.0;
    if (bump) *bump = Bump{1.0 / 8.0, 19.0 / 8.0, 1.0 / 4.0, 9.0 / 4.0};
    if (scale) *scale = big;
    if (radial) *radial = true;
  } else {
    const double big = std::max(A, B);
    w.kind = WindowKind::symmetric;
    w.lo = -18.0 * big;
    w.hi = 18.0 * big;
    if (bump) *bump = Bump{-18.0, 18.0, -17.0, 17.0};
    if (scale) *scale = big;
    if (radial) *radial = false;
  }
  return w;
}

}  // namespace

Window window_of(const ParamSet& ps, int ell, int j, Context ctx) {
  if (ell < 1 || ell > 3) throw InvalidArgument("ell must be 1, 2 or 3");
  if (ell == 3) {
    if (sec5_like(ctx)) return third_window_sec5(ps, j, nullptr, nullptr, nullptr);
    return third_window_sec4(ps, j, nullptr, nullptr);
  }
  const double b = ps.base(ell, j);
  Window w;
  w.j = j;
  w.ell = ell;
  if (sec5_like(ctx)) {
    w.kind = WindowKind::annulus;
    w.lo = b / 2.0;
    w.hi = 2.0 * b;
  } else if (ell == 1) {
    w.kind = WindowKind::upper_dyadic;
    w.lo = b / 2.0;
    w.hi = 2.0 * b;
  } else {
    w.kind = WindowKind::symmetric;
    w.lo = -b;
    w.hi = b;
  }
  return w;
}

SymbolRecipe recipe_of(const ParamSet& ps, int ell, int j, Modulation mod, Context ctx) {
  SymbolRecipe r;
  if (ell == 3) {
    if (sec5_like(ctx)) r.window = third_window_sec5(ps, j, &r.bump, &r.scale, &r.radial);
    else r.window = third_window_sec4(ps, j, &r.bump, &r.scale);
    r.phase = 0.0;  // n3 = 0
    return r;
  }
  r.window = window_of(ps, ell, j, ctx);
  r.scale = ps.base(ell, j);
  // annulus containers still carry the upper profile on the positive half
  r.bump = (sec5_like(ctx) || ell == 1) ? make_bump(BumpKind::upper) : make_bump(BumpKind::wide);
  r.phase = mod.factor();
  return r;
}

MultiplierSymbol symbol_of(const ParamSet& ps, int ell, int j, Modulation mod, const Grid& g, Context ctx) {
  return realize(recipe_of(ps, ell, j, mod, ctx), g);
}

MultiplierSymbol symbol_of(const ParamSet& ps, int ell, int j, Modulation mod, const Grid& g) {
  const Context ctx = mod.kind == Modulation::Kind::power_2m ? Context::pi_type2 : Context::pi_type1;
  return symbol_of(ps, ell, j, mod, g, ctx == Context::pi_type1 && ell == 3 ? Context::lambda_sec4 : ctx);
}

int k_index(double len) {
  if (!(len > 0.0)) throw InvalidArgument("window length must be positive");
  return static_cast<int>(std::floor(std::log2(len) + 0.5));
}

ScaleIndices scale_indices(const ParamSet& ps, int j, Context ctx) {
  const Context c = sec5_like(ctx) ? Context::lambda_sec5 : Context::lambda_sec4;
  ScaleIndices s;
  s.k1 = k_index(window_of(ps, 1, j, c).length());
  s.k2 = k_index(window_of(ps, 2, j, c).length());
  s.k3 = k_index(window_of(ps, 3, j, c).length());
  s.k = std::min({s.k1, s.k2, s.k3});
  return s;
}

bool j_admissible(const ParamSet& ps, const Grid& g, Context ctx, int j) {
  if (std::abs(ps.exponent(1, j)) > 900 || std::abs(ps.exponent(2, j)) > 900) return false;
  const int last = (ctx == Context::pi_type1 || ctx == Context::pi_type2) ? 2 : 3;
  for (int ell = 1; ell <= last; ++ell)
    if (window_of(ps, ell, j, ctx).max_abs() > g.nyquist() * (1.0 + 1e-15)) return false;
  const int k = scale_indices(ps, j, ctx).k;
  const double len = std::ldexp(1.0, -k);
  return len >= g.spacing() * (1.0 - 1e-12) && len <= g.period * (1.0 + 1e-12);
}

JRange admissible_j_range(const ParamSet& ps, const Grid& g, Context ctx) {
  ps.validate();
  JRange best, cur;
  bool in_run = false;
  for (int j = -160; j <= 160; ++j) {
    if (j_admissible(ps, g, ctx, j)) {
      if (!in_run) {
        cur.lo = j;
        in_run = true;
      }
      cur.hi = j;
      if (cur.size() > best.size()) best = cur;
    } else {
      in_run = false;
    }
  }
  if (best.empty())
    throw EmptyRange("no admissible scale j for context " + to_string(ctx) + " on a grid with K=" +
                     std::to_string(g.log_size));
  return best;
}

}  // namespace pp
