// Exercises the shared library through its C header only.
#include <cmath>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

#include "paraprod/paraprod.h"

static int failures = 0;

#define EXPECT(cond)                                              \
  do {                                                            \
    if (!(cond)) {                                                \
      std::printf("FAIL %s:%d %s\n", __FILE__, __LINE__, #cond); \
      ++failures;                                                 \
    }                                                             \
  } while (0)

int main() {
  EXPECT(std::strlen(pp_version()) > 0);

  const std::vector<double> zero(256, 0.0);
  pp_signal* a = nullptr;
  pp_signal* b = nullptr;
  EXPECT(pp_signal_create(8, 1.0, zero.data(), nullptr, &a) == PP_OK);
  EXPECT(pp_signal_create(8, 1.0, zero.data(), zero.data(), &b) == PP_OK);
  EXPECT(pp_signal_size(a) == 256);

  pp_params* ps = nullptr;
  EXPECT(pp_params_create(&ps) == PP_OK);
  EXPECT(pp_params_set_int(ps, "M1", 1) == PP_OK);
  EXPECT(pp_params_set_int(ps, "nope", 1) != PP_OK);
  EXPECT(std::strlen(pp_last_error()) > 0);

  pp_signal* out = nullptr;
  EXPECT(pp_paraproduct(ps, PP_TYPE1, a, b, &out) == PP_OK);
  double norm = -1;
  EXPECT(pp_signal_lp_norm(out, 2.0, &norm) == PP_OK);
  EXPECT(norm == 0.0);

  EXPECT(pp_signal_create(-1, 1.0, zero.data(), nullptr, &a) != PP_OK);

  int code = -1;
  char* results = nullptr;
  EXPECT(pp_run("{not json", nullptr, &code, &results) != PP_OK);
  EXPECT(pp_run(R"({"command":"eval","log_size":8,"input_model":"zero"})", nullptr, &code, &results) == PP_OK);
  EXPECT(code == 0);
  EXPECT(results != nullptr && std::strstr(results, "norm") != nullptr);
  pp_string_free(results);

  pp_signal_free(out);
  pp_signal_free(a);
  pp_signal_free(b);
  pp_params_free(ps);
  if (failures == 0) std::printf("capi: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
