#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "paraprod/errors.hpp"

namespace pp {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;
using RVec = std::vector<double>;

// Periodic dyadic grid: N = 2^log_size samples on [0, period).
struct Grid {
  int log_size = 10;
  double period = 1.0;

  Grid() = default;
  Grid(int k, double per = 1.0);

  std::size_t size() const { return std::size_t{1} << log_size; }
  double spacing() const { return period / static_cast<double>(size()); }
  double x(std::size_t i) const { return spacing() * static_cast<double>(i); }

  // FFT-order bin -> signed integer index in [-N/2, N/2)
  long signed_index(std::size_t k) const {
    const long n = static_cast<long>(size());
    const long kk = static_cast<long>(k);
    return kk < n / 2 ? kk : kk - n;
  }
  // FFT-order bin -> frequency in cycles per unit length
  double freq(std::size_t k) const { return static_cast<double>(signed_index(k)) / period; }
  // largest representable |frequency|
  double nyquist() const { return static_cast<double>(size() / 2) / period; }

  bool operator==(const Grid& o) const { return log_size == o.log_size && period == o.period; }
  bool operator!=(const Grid& o) const { return !(*this == o); }
};

// Frequency coefficients in FFT order (bin k carries frequency grid.freq(k)).
struct Spectrum {
  Grid grid;
  CVec coeffs;

  cplx at(long signed_index) const;
};

class Signal {
 public:
  Signal() = default;
  Signal(Grid g, CVec samples);
  static Signal zeros(Grid g);
  static Signal from_real(Grid g, const RVec& v);
  // builds the time samples by inverse DFT and keeps the spectrum cached
  static Signal from_spectrum(const Spectrum& s);

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return samples_ ? samples_->size() : 0; }
  const CVec& samples() const { return *samples_; }
  const cplx& operator[](std::size_t i) const { return (*samples_)[i]; }
  bool has_spectrum() const { return static_cast<bool>(spectrum_); }
  const CVec* cached_spectrum() const { return spectrum_.get(); }

  Signal with_spectrum() const;

 private:
  Grid grid_;
  std::shared_ptr<const CVec> samples_;
  std::shared_ptr<const CVec> spectrum_;
};

struct MeasurableSet {
  Grid grid;
  std::vector<std::uint8_t> mask;

  MeasurableSet() = default;
  explicit MeasurableSet(Grid g) : grid(g), mask(g.size(), 0) {}

  std::size_t count() const;
  double measure() const { return static_cast<double>(count()) * grid.spacing(); }
  bool contains(std::size_t i) const { return mask[i] != 0; }
  MeasurableSet complement() const;
  MeasurableSet unite(const MeasurableSet& o) const;
  MeasurableSet minus(const MeasurableSet& o) const;
};

// ---- transforms -----------------------------------------------------------

// forward unscaled: S[k] = sum_i s[i] e^{-2 pi i k i / N}
Spectrum dft_forward(const Signal& s);
// inverse scaled by 1/N
Signal dft_inverse(const Spectrum& s);

// ---- norms ----------------------------------------------------------------

// (sum |s|^p * spacing)^{1/p}; p = +inf gives max|s|; p < 1 is the quasi-norm
double lp_norm(const Signal& s, double p);
double lp_norm(const Grid& g, const RVec& v, double p);
constexpr double inf_p = std::numeric_limits<double>::infinity();

// ---- sets and generated inputs --------------------------------------------

enum class SampleMode { indicator, random_phase };
enum class SetShape { interval, dyadic_union, bernoulli };

Signal sample_X_of(const MeasurableSet& F, std::uint64_t seed, SampleMode mode);
MeasurableSet random_set(const Grid& g, double target_measure, std::uint64_t seed,
                         SetShape shape);

SampleMode sample_mode_from_string(const std::string& s);
SetShape set_shape_from_string(const std::string& s);
std::string to_string(SetShape s);

// ---- pointwise helpers ----------------------------------------------------

Signal add(const Signal& a, const Signal& b);
Signal sub(const Signal& a, const Signal& b);
Signal mul(const Signal& a, const Signal& b);
Signal scale(const Signal& a, cplx c);
RVec abs_values(const Signal& a);
// h * sum_i prod of samples
cplx integrate(const Signal& a);

}  // namespace pp
