#pragma once

#include <array>
#include <string>

#include <json.hpp>

#include "paraprod/grid.hpp"

namespace pp {

// Which third-window rule / symbol family applies.
//   pi_type1, lambda_sec4 : upper window for ell=1, symmetric window for ell=2
//   pi_type2, lambda_sec5 : annulus containers with the upper profile for ell=1,2
enum class Context { pi_type1, pi_type2, lambda_sec4, lambda_sec5 };

Context context_from_string(const std::string& s);
std::string to_string(Context c);

struct ParamSet {
  int L1 = 1, L2 = 1;
  int M1 = 0, M2 = 0;
  int n1 = 0, n2 = 0;
  int m = 0;
  double epsilon = 0.25;
  double p = 1.5;
  int L_big = 8;

  void validate() const;
  nlohmann::json to_json() const;
  static ParamSet from_json(const nlohmann::json& j);

  int L(int ell) const { return ell == 1 ? L1 : L2; }
  int M(int ell) const { return ell == 1 ? M1 : M2; }
  // 2^{L_ell j + M_ell}
  double base(int ell, int j) const;
  int exponent(int ell, int j) const { return L(ell) * j + M(ell); }
};

enum class WindowKind { upper_dyadic, symmetric, annulus, negative_band };
std::string to_string(WindowKind k);

// For annulus windows lo/hi are the inner/outer radii.
struct Window {
  WindowKind kind = WindowKind::symmetric;
  double lo = 0.0, hi = 0.0;
  int j = 0;
  int ell = 1;

  double length() const;  // Lebesgue measure
  double max_abs() const;
  double dist_to_origin() const;
  bool contains(double xi) const;
  nlohmann::json to_json() const;
};

// Smooth profile: 0 outside (a,b), 1 on [c,d], exp(-1/t) smoothstep edges.
struct Bump {
  double a = -1, b = 1, c = 0, d = 0;
  double operator()(double t) const;
};

enum class BumpKind { upper, wide };
Bump make_bump(BumpKind kind);
Bump make_bump(double a, double b, double c, double d);

// Smoothstep from 0 (t<=0) to 1 (t>=1), flat to infinite order at both ends.
double smoothstep(double t);

struct Modulation {
  enum class Kind { integer, power_2m };
  Kind kind = Kind::integer;
  long n = 0;
  int m = 0;

  static Modulation integer(long n) { return {Kind::integer, n, 0}; }
  static Modulation power(int m) { return {Kind::power_2m, 0, m}; }
  static Modulation none() { return integer(0); }
  // factor multiplying xi/scale in the phase e^{2 pi i factor xi/scale}
  double factor() const;
};

// values(xi) = e^{2 pi i phase xi/scale} * bump(xi/scale), or bump(|xi|/scale) if radial
struct SymbolRecipe {
  Window window;
  Bump bump;
  double scale = 1.0;
  double phase = 0.0;
  bool radial = false;

  cplx eval(double xi) const;
};

struct MultiplierSymbol {
  Window window;
  CVec values;  // FFT order, exact zeros outside the window
};

MultiplierSymbol realize(const SymbolRecipe& r, const Grid& g);

Window window_of(const ParamSet& ps, int ell, int j, Context ctx);
SymbolRecipe recipe_of(const ParamSet& ps, int ell, int j, Modulation mod, Context ctx);
MultiplierSymbol symbol_of(const ParamSet& ps, int ell, int j, Modulation mod, const Grid& g);
MultiplierSymbol symbol_of(const ParamSet& ps, int ell, int j, Modulation mod, const Grid& g,
                           Context ctx);

// round(log2 len), ties toward +inf
int k_index(double len);

struct ScaleIndices {
  int k1 = 0, k2 = 0, k3 = 0, k = 0;
};
// pi_type1 uses the lambda_sec4 third window, pi_type2 the lambda_sec5 one
ScaleIndices scale_indices(const ParamSet& ps, int j, Context ctx);

struct JRange {
  int lo = 0, hi = -1;
  bool empty() const { return hi < lo; }
  int size() const { return empty() ? 0 : hi - lo + 1; }
  bool contains(int j) const { return j >= lo && j <= hi; }
};

// Largest contiguous j-range whose windows fit the Nyquist band and whose
// scales 2^{-k_j} lie in [spacing, period]. Throws EmptyRange.
JRange admissible_j_range(const ParamSet& ps, const Grid& g, Context ctx);
bool j_admissible(const ParamSet& ps, const Grid& g, Context ctx, int j);

}  // namespace pp
