/* C interface to the paraproduct library. All objects are opaque handles;
 * every call returns a pp_status and, on failure, sets a thread-local message
 * readable through pp_last_error(). */
#ifndef PARAPROD_H
#define PARAPROD_H

#include <stddef.h>
#include <stdint.h>

#if defined(PP_BUILDING_LIBRARY)
#define PP_API __attribute__((visibility("default")))
#else
#define PP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pp_status {
  PP_OK = 0,
  PP_INVALID_ARGUMENT = 1,
  PP_NYQUIST_OVERFLOW = 2,
  PP_EMPTY_RANGE = 3,
  PP_ALL_TRIALS_DEGENERATE = 4,
  PP_ADMISSIBILITY_VIOLATION = 5,
  PP_INVARIANT_VIOLATION = 6,
  PP_PARSE_ERROR = 7,
  PP_SCALE_OUT_OF_RANGE = 8,
  PP_BRANCH_MISMATCH = 9,
  PP_IO_ERROR = 10,
  PP_INTERNAL = 99
} pp_status;

typedef enum pp_operator { PP_TYPE1 = 1, PP_TYPE2 = 2 } pp_operator;

typedef struct pp_signal pp_signal;
typedef struct pp_params pp_params;

PP_API const char* pp_version(void);
/* message of the last failed call on this thread, "" if none */
PP_API const char* pp_last_error(void);

/* ---- signals: N = 2^log_size complex samples on [0, period) ---- */
PP_API pp_status pp_signal_create(int log_size, double period, const double* re, const double* im,
                                  pp_signal** out);
PP_API pp_status pp_signal_from_json(const char* json, pp_signal** out);
PP_API void pp_signal_free(pp_signal* s);
PP_API size_t pp_signal_size(const pp_signal* s);
PP_API pp_status pp_signal_read(const pp_signal* s, double* re, double* im);
PP_API pp_status pp_signal_lp_norm(const pp_signal* s, double p, double* out);

/* ---- parameters: names L1 L2 M1 M2 n1 n2 m L_big (integers), epsilon p (reals) ---- */
PP_API pp_status pp_params_create(pp_params** out);
PP_API void pp_params_free(pp_params* p);
PP_API pp_status pp_params_set_int(pp_params* p, const char* name, long value);
PP_API pp_status pp_params_set_real(pp_params* p, const char* name, double value);

/* Pi(f1, f2) over the default admissible range of the operator */
PP_API pp_status pp_paraproduct(const pp_params* p, pp_operator op, const pp_signal* f1, const pp_signal* f2,
                                pp_signal** out);

/* ---- batch runs ----
 * config_json describes one command (eval, telescope, tiles, sweep). When out_dir
 * is non-NULL every artifact is written there. *results (free with pp_string_free)
 * receives the main results artifact. *exit_code is 0 on success and 3 when a
 * numerical invariant failed; configuration problems are reported as a status. */
PP_API pp_status pp_run(const char* config_json, const char* out_dir, int* exit_code, char** results);
PP_API void pp_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
