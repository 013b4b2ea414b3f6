#pragma once

#include <optional>
#include <vector>

#include "paraprod/classic.hpp"
#include "paraprod/grid.hpp"
#include "paraprod/windows.hpp"

namespace pp {

// spectrum of f times symbol, pointwise in FFT order
Signal apply_symbol(const Signal& f, const CVec& symbol);

// f_{ell,j,mod} = f * Phi_{ell,j,mod}
Signal band_project(const Signal& f, const ParamSet& ps, int ell, int j, Modulation mod, Context ctx);
Signal band_project(const Signal& f, const ParamSet& ps, int ell, int j, Modulation mod);

// sum over js of f1 * Phi_{1,j,mod1} times f2 * Phi_{2,j,mod2}
Signal paraproduct(const Signal& f1, const Signal& f2, const ParamSet& ps, JRange js, Modulation mod1,
                   Modulation mod2, Context ctx);

// integer-modulated family (n1, n2). Defaults to the admissible range of pi_type1.
Signal paraproduct_type1(const Signal& f1, const Signal& f2, const ParamSet& ps,
                         std::optional<JRange> js = std::nullopt);

// 2^m-modulated family on annulus windows. Defaults to the admissible range of pi_type2.
Signal paraproduct_type2(const Signal& f1, const Signal& f2, const ParamSet& ps,
                         std::optional<JRange> js = std::nullopt);

// 2^{L2 j + M2} >= 2^{L1 j + M1 + m} for every j in js
bool condition_2large1(const ParamSet& ps, JRange js);

// ---- trilinear forms ---------------------------------------------------------

// One j-term: three multiplier symbols and an optional spatial weight.
struct TrilinearTerm {
  int j = 0;
  CVec s1, s2, s3;
  RVec weight;  // empty means 1
};

struct TrilinearFormSpec {
  Grid grid;
  std::vector<TrilinearTerm> terms;
};

// h * sum_x sum_terms w(x) prod_ell (f_ell * s_ell)(x)
cplx trilinear_pair(const Signal& f1, const Signal& f2, const Signal& f3, const TrilinearFormSpec& spec);

// the j-indexed form with the given per-ell modulations and context
TrilinearFormSpec standard_form(const ParamSet& ps, const Grid& g, JRange js, Modulation mod1, Modulation mod2,
                                Context ctx);

// ---- translations ------------------------------------------------------------

enum class TranslateVariant { Tr, Tr_tilde };

// shift a with Tr(x) = x + a for the given variant
double translation_amount(const ParamSet& ps, int ell, int j, TranslateVariant v);

struct Translated {
  Signal value;
  long shift_samples = 0;  // g[i] = f[i + shift]
  double residual = 0.0;   // amount not realized, in length units
};

// nearest-sample circular shift: g(x) ~ f(Tr(x))
Translated translate(const Signal& f, const ParamSet& ps, int ell, int j, TranslateVariant v);
// g(x) = f(x + a) for any real a via a phase ramp; exact for the trigonometric interpolant
Signal translate_exact(const Signal& f, double a);
Translated shift_samples(const Signal& f, double a);

// ---- truncated form ----------------------------------------------------------

struct TruncatedResult {
  cplx truncated;
  cplx untruncated;
  cplx difference;  // truncated - untruncated
  JRange js;
};

// Lambda_{Omega,m}: sum over the lambda_sec5 range of psi_j^3 prod_ell f_{ell,j,0}(Tr~_{ell,j,m}(x))
TruncatedResult truncated_trilinear(const Signal& f1, const Signal& f2, const Signal& f3, const ParamSet& ps,
                                    const MeasurableSet& omega);

}  // namespace pp
