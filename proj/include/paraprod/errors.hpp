#pragma once

#include <stdexcept>
#include <string>

namespace pp {

enum class ErrorCode : int {
  ok = 0,
  invalid_argument = 1,
  nyquist_overflow = 2,
  empty_range = 3,
  all_trials_degenerate = 4,
  admissibility_violation = 5,
  invariant_violation = 6,
  parse_error = 7,
  scale_out_of_range = 8,
  branch_mismatch = 9,
  io_error = 10,
  internal = 99,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define PP_DEFINE_ERROR(Name, Code)                                          \
  class Name : public Error {                                                \
   public:                                                                   \
    explicit Name(const std::string& what) : Error(ErrorCode::Code, what) {} \
  };

PP_DEFINE_ERROR(InvalidArgument, invalid_argument)
PP_DEFINE_ERROR(NyquistOverflow, nyquist_overflow)
PP_DEFINE_ERROR(EmptyRange, empty_range)
PP_DEFINE_ERROR(AllTrialsDegenerate, all_trials_degenerate)
PP_DEFINE_ERROR(AdmissibilityViolation, admissibility_violation)
PP_DEFINE_ERROR(InvariantViolation, invariant_violation)
PP_DEFINE_ERROR(ParseError, parse_error)
PP_DEFINE_ERROR(ScaleOutOfRange, scale_out_of_range)
PP_DEFINE_ERROR(BranchMismatch, branch_mismatch)

#undef PP_DEFINE_ERROR

}  // namespace pp
