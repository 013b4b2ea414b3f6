#include "paraprod/classic.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <mutex>
#include <limits>
#include <memory>

namespace pp {

// ---- mollifier ------------------------------------------------------------

namespace {

constexpr int kAutocorrNodes = 2048;

double wide(double s) { return make_bump(BumpKind::wide)(s); }

double autocorr(double v) {
  // trapezoid rule; spectrally accurate for the smooth compactly supported integrand
  const double h = 2.0 / kAutocorrNodes;
  double acc = 0.0;
  for (int i = 1; i < kAutocorrNodes; ++i) {
    const double s = -1.0 + h * i;
    acc += wide(s) * wide(s + v);
  }
  return acc * h;
}

double autocorr0() {
  static const double v = autocorr(0.0);
  return v;
}

}  // namespace

double mollifier_hat(double u) {
  const double v = 200.0 * u;
  if (std::abs(v) >= 2.0) return 0.0;
  if (v == 0.0) return 1.0;
  return autocorr(v) / autocorr0();
}

RVec mollifier_symbol(const Grid& g, int k) {
  RVec s(g.size(), 0.0);
  const double scale = std::ldexp(1.0, k);
  for (std::size_t b = 0; b < g.size(); ++b) {
    const double u = g.freq(b) / scale;
    if (std::abs(u) < 0.01) s[b] = mollifier_hat(u);
  }
  return s;
}

Signal mollify(const Signal& f, int k) {
  Spectrum F = dft_forward(f);
  const RVec s = mollifier_symbol(f.grid(), k);
  for (std::size_t b = 0; b < s.size(); ++b) F.coeffs[b] *= s[b];
  return dft_inverse(F);
}

// ---- rational kernel ---------------------------------------------------------

namespace {

// H(u) = int_0^u (1+s^2)^{-e} ds, tabulated per exponent.
class KernelTable {
 public:
  explicit KernelTable(double e) : e_(e) {
    cutoff_ = std::sqrt(std::expm1(90.0 / e));  // integrand < e^{-90} beyond
    step_ = cutoff_ / kSegments;
    cum_.resize(kSegments + 1, 0.0);
    for (int i = 0; i < kSegments; ++i) cum_[i + 1] = cum_[i] + gauss(i * step_, (i + 1) * step_);
  }
  double H(double u) const {
    const double a = std::abs(u);
    double r;
    if (a >= cutoff_) {
      r = cum_.back();
    } else {
      const int i = static_cast<int>(a / step_);
      r = cum_[i] + gauss(i * step_, a);
    }
    return u < 0 ? -r : r;
  }

 private:
  static constexpr int kSegments = 2048;
  double f(double s) const { return std::exp(-e_ * std::log1p(s * s)); }
  double gauss(double lo, double hi) const {
    static const double x[5] = {0.0, 0.5384693101056831, -0.5384693101056831, 0.9061798459386640,
                                -0.9061798459386640};
    static const double w[5] = {0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                0.2369268850561891, 0.2369268850561891};
    const double c = 0.5 * (lo + hi), r = 0.5 * (hi - lo);
    double acc = 0.0;
    for (int t = 0; t < 5; ++t) acc += w[t] * f(c + r * x[t]);
    return acc * r;
  }
  double e_, cutoff_, step_;
  std::vector<double> cum_;
};

const KernelTable& kernel_table(double e) {
  static std::mutex mu;
  static std::map<double, std::unique_ptr<KernelTable>> tables;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = tables[e];
  if (!slot) slot = std::make_unique<KernelTable>(e);
  return *slot;
}

// signed periodic offset of x from c in [-P/2, P/2)
double wrap_offset(double x, double c, double P) {
  double d = std::fmod(x - c, P);
  if (d < -P / 2) d += P;
  if (d >= P / 2) d -= P;
  return d;
}

}  // namespace

RVec rational_kernel_integral(const Grid& g, int k, const std::vector<std::pair<double, double>>& intervals,
                              double exponent) {
  const KernelTable& T = kernel_table(exponent);
  const double s = std::ldexp(1.0, k);
  const double P = g.period;
  RVec out(g.size(), 0.0);
  for (const auto& [lo, hi] : intervals) {
    const double w = hi - lo;
    if (w <= 0) continue;
    if (w >= P * (1 - 1e-15)) {
      // whole circle: integral over one period centred at x
      const double v = 2.0 * T.H(s * P / 2);
      for (auto& o : out) o += v;
      continue;
    }
    const double c = 0.5 * (lo + hi);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double d = wrap_offset(g.x(i), c, P);
      // int_{c-w/2}^{c+w/2} 2^k K(2^k(x-y)) dy = H(2^k(d + w/2)) - H(2^k(d - w/2))
      out[i] += T.H(s * (d + w / 2)) - T.H(s * (d - w / 2));
    }
  }
  return out;
}

Signal interval_indicator(const Grid& g, double lo, double hi) {
  RVec v(g.size(), 0.0);
  const double h = g.spacing();
  for (std::size_t i = 0; i < g.size(); ++i) {
    // compare in sample units so dyadic endpoints land exactly
    const double x = static_cast<double>(i);
    double a = lo / h, b = hi / h;
    const double N = static_cast<double>(g.size());
    for (int shift = -1; shift <= 1; ++shift)
      if (x + shift * N >= a && x + shift * N < b) v[i] = 1.0;
  }
  return Signal::from_real(g, v);
}

Signal smoothed_indicator(const Grid& g, int k, long n, IndicatorVariant var, KernelExponents ex) {
  if (k < 0 || k > g.log_size + 8) throw ScaleOutOfRange("scale k out of range for this grid");
  const double len = std::ldexp(1.0, -k);
  const double lo = len * static_cast<double>(n), hi = lo + len;
  switch (var) {
    case IndicatorVariant::star: return mollify(interval_indicator(g, lo, hi), k);
    case IndicatorVariant::double_star:
      return Signal::from_real(g, rational_kernel_integral(g, k, {{lo, hi}}, ex.e));
    case IndicatorVariant::tilde_star:
      return Signal::from_real(g, rational_kernel_integral(g, k, {{lo, hi}}, ex.E_big));
  }
  return Signal::zeros(g);
}

Signal shadow_indicator(const Grid& g, const std::vector<std::pair<double, double>>& intervals, int k) {
  RVec v(g.size(), 0.0);
  for (const auto& [lo, hi] : intervals) {
    const Signal s = interval_indicator(g, lo, hi);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::max(v[i], s[i].real());
  }
  return mollify(Signal::from_real(g, v), k);
}

// ---- maximal -----------------------------------------------------------------

RVec maximal(const RVec& a) {
  const std::size_t n = a.size();
  std::vector<double> pre(2 * n + 1, 0.0);
  for (std::size_t i = 0; i < 2 * n; ++i) pre[i + 1] = pre[i] + a[i % n];
  RVec out(n, 0.0);
  RVec w(2 * n);
  std::deque<std::size_t> dq;
  for (std::size_t len = 1; len <= n; ++len) {
    // w[s] = mean over samples s..s+len-1 (mod n), for s in [0, 2n)
    for (std::size_t s = 0; s < 2 * n; ++s) {
      const std::size_t s0 = s % n;
      w[s] = (pre[s0 + len] - pre[s0]) / static_cast<double>(len);
    }
    // point i (taken as i + n) is covered by starts s in [i+n-len+1, i+n]
    dq.clear();
    for (std::size_t s = n - len + 1; s < 2 * n; ++s) {
      while (!dq.empty() && w[dq.back()] <= w[s]) dq.pop_back();
      dq.push_back(s);
      if (s < n) continue;
      while (dq.front() + len <= s) dq.pop_front();
      const std::size_t i = s - n;
      out[i] = std::max(out[i], w[dq.front()]);
    }
  }
  return out;
}

Signal maximal(const Signal& f) { return Signal::from_real(f.grid(), maximal(abs_values(f))); }

RVec maximal_p(const RVec& a, double p) {
  if (!(p >= 1.0)) throw InvalidArgument("maximal_p requires p >= 1");
  RVec q(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) q[i] = std::pow(std::abs(a[i]), p);
  RVec m = maximal(q);
  for (auto& v : m) v = std::pow(v, 1.0 / p);
  return m;
}

Signal maximal_p(const Signal& f, double p) { return Signal::from_real(f.grid(), maximal_p(abs_values(f), p)); }

// ---- square functions ----------------------------------------------------------

Signal square_function(const Signal& f, const std::vector<CVec>& symbols) {
  const Spectrum F = dft_forward(f);
  RVec acc(f.size(), 0.0);
  for (const auto& sym : symbols) {
    Spectrum G{F.grid, F.coeffs};
    for (std::size_t b = 0; b < sym.size(); ++b) G.coeffs[b] *= sym[b];
    const Signal g = dft_inverse(G);
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += std::norm(g[i]);
  }
  for (auto& v : acc) v = std::sqrt(v);
  return Signal::from_real(f.grid(), acc);
}

Signal square_function(const Signal& f, const ParamSet& ps, int ell, JRange js, Modulation mod, Context ctx) {
  std::vector<CVec> syms;
  for (int j = js.lo; j <= js.hi; ++j) syms.push_back(symbol_of(ps, ell, j, mod, f.grid(), ctx).values);
  return square_function(f, syms);
}

std::vector<CVec> partition_of_unity_symbols(const Grid& g) {
  const Bump rho{-2.0, 2.0, -1.0, 1.0};
  int J = 0;
  while (std::ldexp(1.0, J) < g.nyquist()) ++J;
  auto cumulative = [&](int j, double xi) { return rho(std::abs(xi) / std::ldexp(1.0, j)); };
  std::vector<CVec> out;
  for (int j = 0; j <= J; ++j) {
    CVec s(g.size());
    for (std::size_t b = 0; b < g.size(); ++b) {
      const double xi = g.freq(b);
      const double v = j == 0 ? cumulative(0, xi) : cumulative(j, xi) - cumulative(j - 1, xi);
      s[b] = std::sqrt(std::max(v, 0.0));
    }
    out.push_back(std::move(s));
  }
  return out;
}

// ---- BMO -------------------------------------------------------------------------

double dyadic_bmo(const Signal& f) {
  const std::size_t n = f.size();
  double best = 0.0;
  for (std::size_t len = 1; len <= n; len *= 2) {
    for (std::size_t s = 0; s < n; s += len) {
      cplx mean{};
      for (std::size_t t = 0; t < len; ++t) mean += f[s + t];
      mean /= static_cast<double>(len);
      double dev = 0.0;
      for (std::size_t t = 0; t < len; ++t) dev += std::abs(f[s + t] - mean);
      best = std::max(best, dev / static_cast<double>(len));
    }
  }
  return best;
}

// ---- exceptional set -----------------------------------------------------------------

namespace {

RVec indicator_values(const MeasurableSet& F) {
  RVec v(F.mask.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = F.mask[i] ? 1.0 : 0.0;
  return v;
}

}  // namespace

ExceptionalSet exceptional_set(const MeasurableSet& F1, const MeasurableSet& F2, const MeasurableSet& F3, double p,
                               double C0) {
  if (!(p > 1.0)) throw InvalidArgument("exceptional_set requires p > 1");
  if (!(C0 > 0.0)) throw InvalidArgument("C0 must be positive");
  if (F1.grid != F2.grid || F1.grid != F3.grid) throw InvalidArgument("sets live on different grids");
  ExceptionalSet out;
  out.omega = MeasurableSet(F1.grid);
  out.C0 = C0;
  for (const MeasurableSet* F : {&F1, &F2, &F3}) {
    const RVec mp = maximal_p(maximal(indicator_values(*F)), p);
    const double thr = C0 * std::pow(F->measure(), 1.0 / p);
    for (std::size_t i = 0; i < mp.size(); ++i)
      if (mp[i] > thr) out.omega.mask[i] = 1;
  }
  out.measure = out.omega.measure();
  out.f3_measure = F3.measure();
  out.f3_outside = F3.minus(out.omega).measure();
  out.half_kept = out.f3_outside >= out.f3_measure / 2.0;
  return out;
}

ExceptionalSet exceptional_set_auto(const MeasurableSet& F1, const MeasurableSet& F2, const MeasurableSet& F3,
                                    double p) {
  double C0 = 1.0;
  for (int it = 0; it < 64; ++it, C0 *= 2.0) {
    ExceptionalSet e = exceptional_set(F1, F2, F3, p, C0);
    if (e.half_kept) return e;
  }
  throw InvariantViolation("no power-of-two C0 below 2^64 keeps half of F3");
}

// ---- truncation ------------------------------------------------------------------------

RVec distance_to_complement(const MeasurableSet& omega) {
  const std::size_t n = omega.mask.size();
  const double h = omega.grid.spacing();
  RVec d(n, 0.0);
  if (omega.count() == n) {
    std::fill(d.begin(), d.end(), std::numeric_limits<double>::infinity());
    return d;
  }
  // forward and backward sweeps over the doubled circle, in samples
  std::vector<long> left(n), right(n);
  long last = -1;
  for (std::size_t t = 0; t < 2 * n; ++t) {
    const std::size_t i = t % n;
    if (!omega.mask[i]) last = static_cast<long>(t);
    if (t >= n) left[i] = static_cast<long>(t) - last;
  }
  long next = -1;
  for (long t = static_cast<long>(2 * n) - 1; t >= 0; --t) {
    const std::size_t i = static_cast<std::size_t>(t) % n;
    if (!omega.mask[i]) next = t;
    if (static_cast<std::size_t>(t) < n) right[i] = next - t;
  }
  for (std::size_t i = 0; i < n; ++i)
    d[i] = omega.mask[i] ? static_cast<double>(std::min(left[i], right[i])) * h : 0.0;
  return d;
}

std::vector<SampleRun> runs_of(const MeasurableSet& F) {
  const std::size_t n = F.mask.size();
  std::vector<SampleRun> runs;
  const std::size_t c = F.count();
  if (c == 0) return runs;
  if (c == n) return {SampleRun{0, n}};
  // start scanning just after a gap so runs are not split at index 0
  std::size_t start = 0;
  while (F.mask[start]) ++start;
  for (std::size_t t = 0; t < n; ++t) {
    const std::size_t i = (start + t) % n;
    if (!F.mask[i]) continue;
    const std::size_t prev = (i + n - 1) % n;
    if (!F.mask[prev]) runs.push_back(SampleRun{start + t, start + t + 1});
    else runs.back().end = start + t + 1;
  }
  for (auto& r : runs) {
    const std::size_t off = (r.begin / n) * n;
    r.begin -= off;
    r.end -= off;
  }
  std::sort(runs.begin(), runs.end(), [](const SampleRun& a, const SampleRun& b) { return a.begin < b.begin; });
  return runs;
}

OmegaJ omega_j_and_psi(const MeasurableSet& omega, const ParamSet& ps, int j, double epsilon, int m, Context ctx) {
  const Grid& g = omega.grid;
  OmegaJ out;
  out.k = scale_indices(ps, j, ctx).k;
  out.threshold = std::exp2(epsilon * epsilon * m) * std::ldexp(1.0, -out.k);
  const RVec d = distance_to_complement(omega);
  out.omega_j = MeasurableSet(g);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (omega.mask[i] && d[i] >= out.threshold * (1.0 - 1e-12)) out.omega_j.mask[i] = 1;
  const MeasurableSet comp = out.omega_j.complement();
  RVec ind(g.size());
  for (std::size_t i = 0; i < ind.size(); ++i) ind[i] = comp.mask[i] ? 1.0 : 0.0;
  out.psi = mollify(Signal::from_real(g, ind), out.k);
  std::vector<std::pair<double, double>> ivs;
  for (const auto& r : runs_of(comp))
    ivs.emplace_back(g.spacing() * static_cast<double>(r.begin), g.spacing() * static_cast<double>(r.end));
  out.psi_star = Signal::from_real(g, rational_kernel_integral(g, out.k, ivs, 200.0));
  return out;
}

}  // namespace pp
