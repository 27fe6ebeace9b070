#pragma once
#include <stdexcept>
#include <string>

namespace convint {

enum class ErrorKind {
  invalid_input,
  precondition,
  usage,
  gamma_constraint,
  degenerate_input,
  degenerate_pair,
  checksum,
  construction_failed,
  frequency_too_low,
  resolution_too_coarse,
  vacuum,
  step_size,
  rejected_extract,
  verification,
};

const char* kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg, std::string stage = {})
      : std::runtime_error(msg), kind_(kind), stage_(std::move(stage)) {}
  ErrorKind kind() const { return kind_; }
  const std::string& stage() const { return stage_; }
  Error with_stage(const std::string& s) const { return Error(kind_, what(), s); }
  // 2 precondition, 3 construction, 4 verification
  int exit_code() const;

 private:
  ErrorKind kind_;
  std::string stage_;
};

inline const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::invalid_input: return "invalid-input";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::usage: return "usage";
    case ErrorKind::gamma_constraint: return "gamma-constraint";
    case ErrorKind::degenerate_input: return "degenerate-input";
    case ErrorKind::degenerate_pair: return "degenerate-pair";
    case ErrorKind::checksum: return "checksum";
    case ErrorKind::construction_failed: return "construction-failed";
    case ErrorKind::frequency_too_low: return "frequency-too-low";
    case ErrorKind::resolution_too_coarse: return "resolution-too-coarse";
    case ErrorKind::vacuum: return "vacuum";
    case ErrorKind::step_size: return "step-size";
    case ErrorKind::rejected_extract: return "rejected-extract";
    case ErrorKind::verification: return "verification";
  }
  return "unknown";
}

inline int Error::exit_code() const {
  switch (kind_) {
    case ErrorKind::construction_failed:
    case ErrorKind::frequency_too_low:
    case ErrorKind::resolution_too_coarse:
    case ErrorKind::vacuum:
    case ErrorKind::step_size:
    case ErrorKind::rejected_extract:
      return 3;
    case ErrorKind::verification:
      return 4;
    default:
      return 2;
  }
}

[[noreturn]] inline void fail(ErrorKind k, const std::string& msg) { throw Error(k, msg); }

}  // namespace convint
