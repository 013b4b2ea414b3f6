#include "paraprod/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "fft.hpp"
#include "paraprod/rng.hpp"

namespace pp {

Grid::Grid(int k, double per) : log_size(k), period(per) {
  if (k < 4 || k > 26) throw InvalidArgument("grid log_size must lie in [4, 26]");
  if (!(per > 0.0) || !std::isfinite(per)) throw InvalidArgument("grid period must be positive");
}

cplx Spectrum::at(long idx) const {
  const long n = static_cast<long>(grid.size());
  if (idx < -n / 2 || idx >= n / 2) return {};
  return coeffs[static_cast<std::size_t>(idx < 0 ? idx + n : idx)];
}

Signal::Signal(Grid g, CVec samples) : grid_(g) {
  if (samples.size() != g.size()) throw InvalidArgument("signal length does not match grid");
  samples_ = std::make_shared<const CVec>(std::move(samples));
}

Signal Signal::zeros(Grid g) { return Signal(g, CVec(g.size())); }

Signal Signal::from_real(Grid g, const RVec& v) {
  CVec c(v.begin(), v.end());
  return Signal(g, std::move(c));
}

Signal Signal::from_spectrum(const Spectrum& s) {
  Signal out = dft_inverse(s);
  out.spectrum_ = std::make_shared<const CVec>(s.coeffs);
  return out;
}

Signal Signal::with_spectrum() const {
  if (spectrum_) return *this;
  Signal out = *this;
  out.spectrum_ = std::make_shared<const CVec>(dft_forward(*this).coeffs);
  return out;
}

std::size_t MeasurableSet::count() const {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](auto b) { return b != 0; }));
}

MeasurableSet MeasurableSet::complement() const {
  MeasurableSet out(grid);
  for (std::size_t i = 0; i < mask.size(); ++i) out.mask[i] = mask[i] ? 0 : 1;
  return out;
}

MeasurableSet MeasurableSet::unite(const MeasurableSet& o) const {
  if (grid != o.grid) throw InvalidArgument("set grids differ");
  MeasurableSet out(grid);
  for (std::size_t i = 0; i < mask.size(); ++i) out.mask[i] = (mask[i] || o.mask[i]) ? 1 : 0;
  return out;
}

MeasurableSet MeasurableSet::minus(const MeasurableSet& o) const {
  if (grid != o.grid) throw InvalidArgument("set grids differ");
  MeasurableSet out(grid);
  for (std::size_t i = 0; i < mask.size(); ++i) out.mask[i] = (mask[i] && !o.mask[i]) ? 1 : 0;
  return out;
}

Spectrum dft_forward(const Signal& s) {
  if (const CVec* c = s.cached_spectrum()) return Spectrum{s.grid(), *c};
  Spectrum out{s.grid(), CVec(s.size())};
  detail::fft(s.samples().data(), out.coeffs.data(), s.size(), -1);
  return out;
}

Signal dft_inverse(const Spectrum& s) {
  const std::size_t n = s.coeffs.size();
  CVec out(n);
  detail::fft(s.coeffs.data(), out.data(), n, +1);
  const double inv = 1.0 / static_cast<double>(n);
  for (auto& v : out) v *= inv;
  return Signal(s.grid, std::move(out));
}

double lp_norm(const Grid& g, const RVec& v, double p) {
  if (!(p > 0.0)) throw InvalidArgument("lp_norm requires p > 0");
  if (std::isinf(p)) {
    double m = 0.0;
    for (double a : v) m = std::max(m, std::abs(a));
    return m;
  }
  double acc = 0.0;
  if (p == 2.0) {
    for (double a : v) acc += a * a;
  } else if (p == 1.0) {
    for (double a : v) acc += std::abs(a);
  } else {
    for (double a : v) acc += std::pow(std::abs(a), p);
  }
  acc *= g.spacing();
  if (p == 1.0) return acc;
  if (p == 2.0) return std::sqrt(acc);
  return std::pow(acc, 1.0 / p);
}

double lp_norm(const Signal& s, double p) { return lp_norm(s.grid(), abs_values(s), p); }

Signal sample_X_of(const MeasurableSet& F, std::uint64_t seed, SampleMode mode) {
  const std::size_t n = F.grid.size();
  CVec v(n);
  Rng rng(derive_seed(seed, 0x58u));
  for (std::size_t i = 0; i < n; ++i) {
    // draw for every sample so the phase at x does not depend on F
    const double theta = mode == SampleMode::random_phase ? 2.0 * std::numbers::pi * rng.uniform() : 0.0;
    if (!F.mask[i]) continue;
    v[i] = mode == SampleMode::random_phase ? std::polar(1.0, theta) : cplx(1.0, 0.0);
  }
  return Signal(F.grid, std::move(v));
}

MeasurableSet random_set(const Grid& g, double target_measure, std::uint64_t seed, SetShape shape) {
  if (!(target_measure >= 0.0) || target_measure > g.period * (1.0 + 1e-12))
    throw InvalidArgument("target measure must lie in [0, period]");
  const std::size_t n = g.size();
  std::size_t count = static_cast<std::size_t>(std::llround(target_measure / g.spacing()));
  count = std::min(count, n);
  MeasurableSet F(g);
  Rng rng(derive_seed(seed, 0x5e7u, static_cast<std::uint64_t>(shape)));
  switch (shape) {
    case SetShape::interval: {
      const std::size_t start = rng.below(n);
      for (std::size_t t = 0; t < count; ++t) F.mask[(start + t) % n] = 1;
      break;
    }
    case SetShape::dyadic_union: {
      // one aligned dyadic block per set bit of count, largest first
      for (int b = g.log_size; b >= 0; --b) {
        const std::size_t len = std::size_t{1} << b;
        if (!(count & len)) continue;
        std::vector<std::size_t> free_slots;
        for (std::size_t s = 0; s < n; s += len) {
          bool empty = true;
          for (std::size_t t = 0; t < len && empty; ++t) empty = !F.mask[s + t];
          if (empty) free_slots.push_back(s);
        }
        const std::size_t s = free_slots[rng.below(free_slots.size())];
        for (std::size_t t = 0; t < len; ++t) F.mask[s + t] = 1;
      }
      break;
    }
    case SetShape::bernoulli: {
      // exact-count uniform subset (partial Fisher-Yates)
      std::vector<std::size_t> idx(n);
      std::iota(idx.begin(), idx.end(), 0);
      for (std::size_t t = 0; t < count; ++t) {
        const std::size_t r = t + rng.below(n - t);
        std::swap(idx[t], idx[r]);
        F.mask[idx[t]] = 1;
      }
      break;
    }
  }
  return F;
}

SampleMode sample_mode_from_string(const std::string& s) {
  if (s == "indicator") return SampleMode::indicator;
  if (s == "random_phase") return SampleMode::random_phase;
  throw InvalidArgument("unknown sample mode '" + s + "'");
}

SetShape set_shape_from_string(const std::string& s) {
  if (s == "interval") return SetShape::interval;
  if (s == "dyadic_union") return SetShape::dyadic_union;
  if (s == "bernoulli") return SetShape::bernoulli;
  throw InvalidArgument("unknown set shape '" + s + "'");
}

std::string to_string(SetShape s) {
  switch (s) {
    case SetShape::interval: return "interval";
    case SetShape::dyadic_union: return "dyadic_union";
    case SetShape::bernoulli: return "bernoulli";
  }
  return "?";
}

namespace {
void same_grid(const Signal& a, const Signal& b) {
  if (a.grid() != b.grid()) throw InvalidArgument("signals live on different grids");
}
}  // namespace

Signal add(const Signal& a, const Signal& b) {
  same_grid(a, b);
  CVec v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] + b[i];
  return Signal(a.grid(), std::move(v));
}

Signal sub(const Signal& a, const Signal& b) {
  same_grid(a, b);
  CVec v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] - b[i];
  return Signal(a.grid(), std::move(v));
}

Signal mul(const Signal& a, const Signal& b) {
  same_grid(a, b);
  CVec v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * b[i];
  return Signal(a.grid(), std::move(v));
}

Signal scale(const Signal& a, cplx c) {
  CVec v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a[i] * c;
  return Signal(a.grid(), std::move(v));
}

RVec abs_values(const Signal& a) {
  RVec v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::abs(a[i]);
  return v;
}

cplx integrate(const Signal& a) {
  cplx acc{};
  for (const auto& v : a.samples()) acc += v;
  return acc * a.grid().spacing();
}

}  // namespace pp
