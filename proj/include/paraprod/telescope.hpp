#pragma once

#include <array>
#include <string>
#include <vector>

#include <json.hpp>

#include "paraprod/grid.hpp"
#include "paraprod/paraproduct.hpp"
#include "paraprod/windows.hpp"

namespace pp {

// [x] floor of the rational numerator/den
long floor_div(long num, long den);
int m_of_j(const ParamSet& ps, int j);
int m_prime_of_j(const ParamSet& ps, int j);

// A finite linear combination of symbol recipes, evaluable at any frequency.
struct SymbolSum {
  std::vector<std::pair<double, SymbolRecipe>> parts;
  cplx eval(double xi) const;
  CVec realize(const Grid& g) const;
  bool empty() const { return parts.empty(); }
};

enum class FormLabel { Lambda1, Lambda2, Lambda3, Lambda11, Lambda12, replacement_term, small_omega2_case };
std::string to_string(FormLabel l);

// k-range of the summed block for index 1: sum_{k=k_lo}^{k_hi} Phi_{1,j+k,n1}
struct BlockRange {
  int k_lo = 0, k_hi = -1;
  int m_prime = 0;
};

struct FormTerm {
  int j = 0;
  std::array<SymbolSum, 3> symbols;
  std::array<Window, 3> container;  // interval holding the support of each symbol
  bool has_block = false;
  BlockRange block;
};

struct AdmissibleForm {
  FormLabel label = FormLabel::Lambda1;
  std::array<bool, 3> good{};
  std::vector<FormTerm> terms;
  std::array<long, 3> modulation{};  // n_ell entering the derivative envelope

  int bad_index() const;  // 0 if none
  TrilinearFormSpec spec(const Grid& g) const;
  nlohmann::json to_json() const;
};

struct Decomposition {
  ParamSet params;
  Grid grid;
  JRange J;          // lambda_sec4 admissible range
  JRange J_small;    // scales with b_{2,j} < b_{1,j}/16
  JRange J_tele;     // remaining scales, telescoped
  std::vector<AdmissibleForm> forms;

  std::size_t nonempty_count() const;
  nlohmann::json to_json() const;
};

Decomposition telescope_decompose(const ParamSet& ps, const Grid& g);

struct AdmissibilityReport {
  bool ok = true;
  std::vector<std::string> failures;  // one entry per failed clause
  double max_vanish = 0.0;            // max |symbol(0)| over good indices
  double max_lacunarity = 0.0;        // max consecutive length ratio
  double max_distance_ratio = 0.0;    // max dist(origin, w)/|w|
  double cond1_C = 0.0;               // min |w3| / max(|w1|, |w2|)
  double cond3_C = 0.0;               // measured constant of condition (3), 0 if unused
  double envelope_C = 0.0;            // fitted C_N of the derivative envelope, report only
  nlohmann::json to_json() const;
};

// Throws AdmissibilityViolation when strict and a hard clause fails.
AdmissibilityReport check_admissible(const AdmissibleForm& form, double tol = 1e-12, bool strict = true);

struct IdentityReport {
  cplx lhs;  // int Pi_J(f1,f2) f3
  cplx rhs;  // sum over forms
  double residual = 0.0;  // |lhs - rhs| / max(1, |lhs|)
  std::vector<cplx> per_form;
};

IdentityReport verify_identity(const Decomposition& d, const Signal& f1, const Signal& f2, const Signal& f3);

// Interval-arithmetic certificate that the dropped telescoping term has
// disjoint Fourier supports, plus its measured value.
struct DroppedTermCase {
  int j = 0;
  int j_low = 0;          // j - m(j) - 1
  bool certified = false;
  double lo = 0, hi = 0;  // outward-rounded hull of supp f1 + supp f2
  double s3 = 0;          // half-width of supp f3
};

std::vector<DroppedTermCase> dropped_term_certificates(const ParamSet& ps, const Grid& g);
// |int f_{1,j,n1} f_{2,j'} f_{3,j'}| and the scale ||f1||_inf ||f2||_2 ||f3||_2
std::pair<double, double> dropped_term_value(const ParamSet& ps, const Signal& f1, const Signal& f2,
                                             const Signal& f3, int j);

// Coefficient-wise check of the support facts behind the truncated blocks:
// the discarded low part of each block lies in [0, b_{2,j-1}/4] (resp. /2^80 for the second).
struct SupportFactReport {
  int checked = 0;
  int violations = 0;
};
SupportFactReport check_support_facts(const Decomposition& d);

}  // namespace pp
