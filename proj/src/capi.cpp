#include "paraprod/paraprod.h"

#include <cstring>
#include <new>
#include <string>

#include "paraprod/io.hpp"
#include "paraprod/paraproduct.hpp"
#include "pipeline.hpp"

struct pp_signal {
  pp::Signal value;
};

struct pp_params {
  pp::ParamSet value;
};

namespace {

thread_local std::string g_last_error;

pp_status fail(pp_status s, const std::string& msg) {
  g_last_error = msg;
  return s;
}

template <class F>
pp_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return PP_OK;
  } catch (const pp::Error& e) {
    return fail(static_cast<pp_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(PP_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PP_INTERNAL, e.what());
  }
}

}  // namespace

extern "C" {

const char* pp_version(void) { return "0.1.0"; }
const char* pp_last_error(void) { return g_last_error.c_str(); }

pp_status pp_signal_create(int log_size, double period, const double* re, const double* im, pp_signal** out) {
  if (!out || !re) return fail(PP_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    if (log_size < 4 || log_size > 26) throw pp::InvalidArgument("log_size must lie in [4, 26]");
    if (!(period > 0.0)) throw pp::InvalidArgument("period must be positive");
    const pp::Grid g(log_size, period);
    pp::CVec v(g.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = {re[i], im ? im[i] : 0.0};
    *out = new pp_signal{pp::Signal(g, std::move(v))};
  });
}

pp_status pp_signal_from_json(const char* json, pp_signal** out) {
  if (!out || !json) return fail(PP_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(json);
    } catch (const nlohmann::json::exception& e) {
      throw pp::ParseError(e.what());
    }
    *out = new pp_signal{pp::signal_from_json(j)};
  });
}

void pp_signal_free(pp_signal* s) { delete s; }

size_t pp_signal_size(const pp_signal* s) { return s ? s->value.size() : 0; }

pp_status pp_signal_read(const pp_signal* s, double* re, double* im) {
  if (!s || !re) return fail(PP_INVALID_ARGUMENT, "null argument");
  for (std::size_t i = 0; i < s->value.size(); ++i) {
    re[i] = s->value[i].real();
    if (im) im[i] = s->value[i].imag();
  }
  return PP_OK;
}

pp_status pp_signal_lp_norm(const pp_signal* s, double p, double* out) {
  if (!s || !out) return fail(PP_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = pp::lp_norm(s->value, p); });
}

pp_status pp_params_create(pp_params** out) {
  if (!out) return fail(PP_INVALID_ARGUMENT, "null argument");
  return guarded([&] { *out = new pp_params{}; });
}

void pp_params_free(pp_params* p) { delete p; }

pp_status pp_params_set_int(pp_params* p, const char* name, long value) {
  if (!p || !name) return fail(PP_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    pp::ParamSet ps = p->value;
    const std::string n = name;
    const int v = static_cast<int>(value);
    if (n == "L1") ps.L1 = v;
    else if (n == "L2") ps.L2 = v;
    else if (n == "M1") ps.M1 = v;
    else if (n == "M2") ps.M2 = v;
    else if (n == "n1") ps.n1 = v;
    else if (n == "n2") ps.n2 = v;
    else if (n == "m") ps.m = v;
    else if (n == "L_big") ps.L_big = v;
    else throw pp::InvalidArgument("unknown integer parameter: " + n);
    ps.validate();
    p->value = ps;
  });
}

pp_status pp_params_set_real(pp_params* p, const char* name, double value) {
  if (!p || !name) return fail(PP_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    pp::ParamSet ps = p->value;
    const std::string n = name;
    if (n == "epsilon") ps.epsilon = value;
    else if (n == "p") ps.p = value;
    else throw pp::InvalidArgument("unknown real parameter: " + n);
    ps.validate();
    p->value = ps;
  });
}

pp_status pp_paraproduct(const pp_params* p, pp_operator op, const pp_signal* f1, const pp_signal* f2,
                         pp_signal** out) {
  if (!p || !f1 || !f2 || !out) return fail(PP_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    if (op != PP_TYPE1 && op != PP_TYPE2) throw pp::InvalidArgument("unknown operator");
    pp::Signal r = op == PP_TYPE1 ? pp::paraproduct_type1(f1->value, f2->value, p->value)
                                  : pp::paraproduct_type2(f1->value, f2->value, p->value);
    *out = new pp_signal{std::move(r)};
  });
}

pp_status pp_run(const char* config_json, const char* out_dir, int* exit_code, char** results) {
  if (!config_json || !exit_code) return fail(PP_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(config_json);
    } catch (const nlohmann::json::exception& e) {
      throw pp::ParseError(e.what());
    }
    const pp::RunResult r = pp::run_command(pp::RunConfig::from_json(j));
    if (out_dir) pp::write_artifacts(out_dir, r);
    *exit_code = r.exit_code;
    if (r.exit_code != 0) g_last_error = r.message;
    if (results) {
      const std::string& body = r.artifacts.at(r.results_name);
      char* buf = new char[body.size() + 1];
      std::memcpy(buf, body.c_str(), body.size() + 1);
      *results = buf;
    }
  });
}

void pp_string_free(char* s) { delete[] s; }

}  // extern "C"
