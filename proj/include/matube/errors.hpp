#pragma once

#include <stdexcept>
#include <string>

namespace matube {

// Every failure mode the library reports. Callers that need to branch on the
// kind of failure catch matube::Error and switch on code().
enum class ErrorCode {
  ZeroVector,
  NonpositiveScale,
  BranchCutProximity,
  SingularTensor,
  DegenerateContact,
  StepUnderflow,
  TubeExceeded,
  NewtonDiverged,
  OnSingularSet,
  FrameMismatch,
  DegenerateFrame,
  OutOfChart,
  TangentToM,
  TubeConstructionFailed,
  SpecInvalid,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::NonpositiveScale: return "NonpositiveScale";
    case ErrorCode::BranchCutProximity: return "BranchCutProximity";
    case ErrorCode::SingularTensor: return "SingularTensor";
    case ErrorCode::DegenerateContact: return "DegenerateContact";
    case ErrorCode::StepUnderflow: return "StepUnderflow";
    case ErrorCode::TubeExceeded: return "TubeExceeded";
    case ErrorCode::NewtonDiverged: return "NewtonDiverged";
    case ErrorCode::OnSingularSet: return "OnSingularSet";
    case ErrorCode::FrameMismatch: return "FrameMismatch";
    case ErrorCode::DegenerateFrame: return "DegenerateFrame";
    case ErrorCode::OutOfChart: return "OutOfChart";
    case ErrorCode::TangentToM: return "TangentToM";
    case ErrorCode::TubeConstructionFailed: return "TubeConstructionFailed";
    case ErrorCode::SpecInvalid: return "SpecInvalid";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace matube
