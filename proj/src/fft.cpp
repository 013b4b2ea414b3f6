#include "fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <utility>

namespace pp::detail {

namespace {

std::mutex plan_mutex;

struct PlanCache {
  std::map<std::pair<std::size_t, int>, fftw_plan> plans;
  ~PlanCache() {
    for (auto& kv : plans) fftw_destroy_plan(kv.second);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

fftw_plan get_plan(std::size_t n, int sign) {
  std::lock_guard<std::mutex> lock(plan_mutex);
  auto key = std::make_pair(n, sign);
  auto it = cache().plans.find(key);
  if (it != cache().plans.end()) return it->second;
  fftw_complex* a = fftw_alloc_complex(n);
  fftw_complex* b = fftw_alloc_complex(n);
  // FFTW_UNALIGNED lets the plan run on std::vector storage later.
  fftw_plan p = fftw_plan_dft_1d(static_cast<int>(n), a, b,
                                 sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(a);
  fftw_free(b);
  cache().plans.emplace(key, p);
  return p;
}

}  // namespace

void fft(const cplx* in, cplx* out, std::size_t n, int sign) {
  fftw_plan p = get_plan(n, sign);
  // new-array execute is thread safe; input is not modified for out-of-place c2c
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace pp::detail
