#pragma once

#include <utility>
#include <vector>

#include "paraprod/grid.hpp"
#include "paraprod/windows.hpp"

namespace pp {

// ---- mollifier ------------------------------------------------------------

// psi-hat(u): nonnegative-definite profile supported in [-1/100, 1/100],
// psi-hat(0) = 1 (autocorrelation of a smooth bump, so psi >= 0).
double mollifier_hat(double u);
// psi_k-hat on the grid frequencies, FFT order
RVec mollifier_symbol(const Grid& g, int k);
// f convolved with psi_k
Signal mollify(const Signal& f, int k);

// ---- smoothed indicators ----------------------------------------------------

enum class IndicatorVariant { star, double_star, tilde_star };

struct KernelExponents {
  double e = 200.0;      // exponent of the rational kernel in 1**
  double E_big = 400.0;  // stand-in for the huge exponent of the tilde variant
};

// Interval [lo, hi) on the sample lattice, as half-open sample index range.
struct SampleRun {
  std::size_t begin = 0, end = 0;  // end may exceed N for wrapped runs
};

// 1_I sampled: x_i in [lo, hi)
Signal interval_indicator(const Grid& g, double lo, double hi);

// int over the union of runs of 2^k / (1 + 2^{2k}|x-y|^2)^e dy, periodic
// nearest-image distance; exact to quadrature accuracy.
RVec rational_kernel_integral(const Grid& g, int k, const std::vector<std::pair<double, double>>& intervals,
                              double exponent);

// 1*_{k,n} = 1_{I_{k,n}} (*) psi_k, 1**_{k,n} with exponent e, or the tilde variant with E_big
Signal smoothed_indicator(const Grid& g, int k, long n, IndicatorVariant v, KernelExponents ex = {});
// 1_{Sh} (*) psi_k for a union of intervals
Signal shadow_indicator(const Grid& g, const std::vector<std::pair<double, double>>& intervals, int k);

// ---- maximal functions ------------------------------------------------------

// max over all grid-aligned (periodic) intervals containing the sample of mean |f|
RVec maximal(const RVec& abs_f);
Signal maximal(const Signal& f);
// (M |f|^p)^{1/p}
RVec maximal_p(const RVec& abs_f, double p);
Signal maximal_p(const Signal& f, double p);

// ---- square functions --------------------------------------------------------

Signal square_function(const Signal& f, const std::vector<CVec>& symbols);
Signal square_function(const Signal& f, const ParamSet& ps, int ell, JRange js, Modulation mod,
                       Context ctx = Context::pi_type1);
// sqrt of a telescoping cumulative low-pass family: sum |s_j|^2 == 1 on every bin
std::vector<CVec> partition_of_unity_symbols(const Grid& g);

// ---- BMO ---------------------------------------------------------------------

// max over aligned dyadic blocks J of mean_J |f - mean_J f|
double dyadic_bmo(const Signal& f);

// ---- exceptional set ---------------------------------------------------------

struct ExceptionalSet {
  MeasurableSet omega;
  double C0 = 0.0;
  double measure = 0.0;
  double f3_measure = 0.0;
  double f3_outside = 0.0;  // |F3 \ Omega|
  bool half_kept = false;   // |F3 \ Omega| >= |F3|/2
};

ExceptionalSet exceptional_set(const MeasurableSet& F1, const MeasurableSet& F2, const MeasurableSet& F3,
                               double p, double C0);
// smallest power-of-two C0 >= 1 with |F3 \ Omega| >= |F3|/2 (doubling search)
ExceptionalSet exceptional_set_auto(const MeasurableSet& F1, const MeasurableSet& F2,
                                    const MeasurableSet& F3, double p);

// ---- truncation helpers ------------------------------------------------------

// periodic distance from each sample in omega to the nearest sample outside it
// (0 outside omega, +inf if omega is everything)
RVec distance_to_complement(const MeasurableSet& omega);

struct OmegaJ {
  MeasurableSet omega_j;
  Signal psi;       // 1_{(Omega_j)^c} (*) psi_{k_j}
  Signal psi_star;  // int_{(Omega_j)^c} 2^{k_j}/(1+2^{2k_j}|x-y|^2)^{200} dy
  double threshold = 0.0;
  int k = 0;
};

OmegaJ omega_j_and_psi(const MeasurableSet& omega, const ParamSet& ps, int j, double epsilon, int m,
                       Context ctx = Context::lambda_sec5);

// maximal runs of set samples, in the half-open index form
std::vector<SampleRun> runs_of(const MeasurableSet& F);

}  // namespace pp
