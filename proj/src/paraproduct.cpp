#include "paraprod/paraproduct.hpp"

#include <cmath>
#include <numbers>

namespace pp {

namespace {

Spectrum spectrum_of(const Signal& f) {
  if (const CVec* c = f.cached_spectrum()) return Spectrum{f.grid(), *c};
  return dft_forward(f);
}

Signal apply_to_spectrum(const Spectrum& F, const CVec& symbol) {
  Spectrum G{F.grid, CVec(F.coeffs.size())};
  for (std::size_t b = 0; b < symbol.size(); ++b)
    if (symbol[b] != cplx{}) G.coeffs[b] = F.coeffs[b] * symbol[b];
  return dft_inverse(G);
}

void check_same_grid(const Signal& a, const Signal& b) {
  if (a.grid() != b.grid()) throw InvalidArgument("signals live on different grids");
}

}  // namespace

Signal apply_symbol(const Signal& f, const CVec& symbol) {
  if (symbol.size() != f.size()) throw InvalidArgument("symbol length does not match the signal");
  return apply_to_spectrum(spectrum_of(f), symbol);
}

Signal band_project(const Signal& f, const ParamSet& ps, int ell, int j, Modulation mod, Context ctx) {
  return apply_symbol(f, symbol_of(ps, ell, j, mod, f.grid(), ctx).values);
}

Signal band_project(const Signal& f, const ParamSet& ps, int ell, int j, Modulation mod) {
  return apply_symbol(f, symbol_of(ps, ell, j, mod, f.grid()).values);
}

Signal paraproduct(const Signal& f1, const Signal& f2, const ParamSet& ps, JRange js, Modulation mod1,
                   Modulation mod2, Context ctx) {
  check_same_grid(f1, f2);
  const Grid& g = f1.grid();
  const Spectrum F1 = spectrum_of(f1), F2 = spectrum_of(f2);
  CVec acc(g.size());
  for (int j = js.lo; j <= js.hi; ++j) {
    const Signal a = apply_to_spectrum(F1, symbol_of(ps, 1, j, mod1, g, ctx).values);
    const Signal b = apply_to_spectrum(F2, symbol_of(ps, 2, j, mod2, g, ctx).values);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += a[i] * b[i];
  }
  return Signal(g, std::move(acc));
}

Signal paraproduct_type1(const Signal& f1, const Signal& f2, const ParamSet& ps, std::optional<JRange> js) {
  const JRange r = js ? *js : admissible_j_range(ps, f1.grid(), Context::pi_type1);
  return paraproduct(f1, f2, ps, r, Modulation::integer(ps.n1), Modulation::integer(ps.n2), Context::pi_type1);
}

Signal paraproduct_type2(const Signal& f1, const Signal& f2, const ParamSet& ps, std::optional<JRange> js) {
  const JRange r = js ? *js : admissible_j_range(ps, f1.grid(), Context::pi_type2);
  return paraproduct(f1, f2, ps, r, Modulation::power(ps.m), Modulation::power(ps.m), Context::pi_type2);
}

bool condition_2large1(const ParamSet& ps, JRange js) {
  for (int j = js.lo; j <= js.hi; ++j)
    if (ps.exponent(2, j) < ps.exponent(1, j) + ps.m) return false;
  return true;
}

// ---- trilinear ----------------------------------------------------------------

cplx trilinear_pair(const Signal& f1, const Signal& f2, const Signal& f3, const TrilinearFormSpec& spec) {
  check_same_grid(f1, f2);
  check_same_grid(f1, f3);
  if (f1.grid() != spec.grid) throw InvalidArgument("form grid differs from the signals");
  const Spectrum F1 = spectrum_of(f1), F2 = spectrum_of(f2), F3 = spectrum_of(f3);
  cplx total{};
  for (const auto& t : spec.terms) {
    const Signal a = apply_to_spectrum(F1, t.s1);
    const Signal b = apply_to_spectrum(F2, t.s2);
    const Signal c = apply_to_spectrum(F3, t.s3);
    cplx acc{};
    if (t.weight.empty()) {
      for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i] * c[i];
    } else {
      for (std::size_t i = 0; i < a.size(); ++i) acc += t.weight[i] * a[i] * b[i] * c[i];
    }
    total += acc;
  }
  return total * spec.grid.spacing();
}

TrilinearFormSpec standard_form(const ParamSet& ps, const Grid& g, JRange js, Modulation mod1, Modulation mod2,
                                Context ctx) {
  TrilinearFormSpec spec{g, {}};
  for (int j = js.lo; j <= js.hi; ++j) {
    TrilinearTerm t;
    t.j = j;
    t.s1 = symbol_of(ps, 1, j, mod1, g, ctx).values;
    t.s2 = symbol_of(ps, 2, j, mod2, g, ctx).values;
    t.s3 = symbol_of(ps, 3, j, Modulation::none(), g, ctx).values;
    spec.terms.push_back(std::move(t));
  }
  return spec;
}

// ---- translations ------------------------------------------------------------------

double translation_amount(const ParamSet& ps, int ell, int j, TranslateVariant v) {
  auto mj = [&](int l) { return l == 3 ? 0.0 : std::ldexp(1.0, ps.m - ps.exponent(l, j)); };
  if (v == TranslateVariant::Tr) return mj(ell);
  switch (ell) {
    case 1: return mj(1) - mj(2);
    case 2: return 0.0;
    default: return -mj(2);
  }
}

Translated shift_samples(const Signal& f, double a) {
  const Grid& g = f.grid();
  const double per = g.period;
  double r = std::fmod(a, per);
  if (r < 0) r += per;
  const double steps = r / g.spacing();
  long s = std::lround(steps);
  const long n = static_cast<long>(g.size());
  Translated out;
  out.residual = (steps - static_cast<double>(s)) * g.spacing();
  s %= n;
  out.shift_samples = s;
  CVec v(g.size());
  for (long i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>((i + s) % n)];
  out.value = Signal(g, std::move(v));
  return out;
}

Translated translate(const Signal& f, const ParamSet& ps, int ell, int j, TranslateVariant v) {
  return shift_samples(f, translation_amount(ps, ell, j, v));
}

Signal translate_exact(const Signal& f, double a) {
  const Grid& g = f.grid();
  Spectrum F = spectrum_of(f);
  double r = std::fmod(a, g.period);
  for (std::size_t b = 0; b < F.coeffs.size(); ++b) {
    double arg = static_cast<double>(g.signed_index(b)) * (r / g.period);
    arg -= std::floor(arg);
    F.coeffs[b] *= std::polar(1.0, 2.0 * std::numbers::pi * arg);
  }
  return dft_inverse(F);
}

// ---- truncated form -------------------------------------------------------------------

TruncatedResult truncated_trilinear(const Signal& f1, const Signal& f2, const Signal& f3, const ParamSet& ps,
                                    const MeasurableSet& omega) {
  check_same_grid(f1, f2);
  check_same_grid(f1, f3);
  const Grid& g = f1.grid();
  if (omega.grid != g) throw InvalidArgument("omega lives on a different grid");
  TruncatedResult res;
  res.js = admissible_j_range(ps, g, Context::lambda_sec5);
  const Spectrum F[3] = {spectrum_of(f1), spectrum_of(f2), spectrum_of(f3)};
  cplx trunc{}, full{};
  for (int j = res.js.lo; j <= res.js.hi; ++j) {
    Signal parts[3];
    for (int ell = 1; ell <= 3; ++ell) {
      const Signal b = apply_to_spectrum(
          F[ell - 1], symbol_of(ps, ell, j, Modulation::none(), g, Context::lambda_sec5).values);
      parts[ell - 1] = translate_exact(b, translation_amount(ps, ell, j, TranslateVariant::Tr_tilde));
    }
    const OmegaJ oj = omega_j_and_psi(omega, ps, j, ps.epsilon, ps.m);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const cplx prod = parts[0][i] * parts[1][i] * parts[2][i];
      const double psi = oj.psi[i].real();
      full += prod;
      trunc += psi * psi * psi * prod;
    }
  }
  res.truncated = trunc * g.spacing();
  res.untruncated = full * g.spacing();
  res.difference = res.truncated - res.untruncated;
  return res;
}

}  // namespace pp
