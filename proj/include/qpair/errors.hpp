#pragma once

#include <stdexcept>
#include <string>

namespace qpair {

// Error codes shared with the C API (qpair.h mirrors these values).
enum class Err : int {
  Ok = 0,
  InvalidArgument = 1,
  InvalidParams = 2,
  Parse = 3,
  Schema = 4,
  Io = 5,
  UnknownSet = 6,
  MissingSetting = 7,
  ZeroTrace = 8,
  ZeroTotal = 9,
  ZeroSingles = 10,
  NonpositiveLength = 11,
  DegenerateCurve = 12,
  InsufficientData = 13,
  FitDiverged = 14,
  SingularSystem = 15,
  NumericalFailure = 16,
  NotConverged = 17,
  Infeasible = 18,
};

const char* err_name(Err e);

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& msg)
      : std::runtime_error(std::string(err_name(code)) + ": " + msg), code_(code) {}

  Err code() const { return code_; }

 private:
  Err code_;
};

[[noreturn]] inline void raise(Err code, const std::string& msg) { throw Error(code, msg); }

inline const char* err_name(Err e) {
  switch (e) {
    case Err::Ok: return "Ok";
    case Err::InvalidArgument: return "InvalidArgument";
    case Err::InvalidParams: return "InvalidParams";
    case Err::Parse: return "ParseError";
    case Err::Schema: return "SchemaMismatch";
    case Err::Io: return "IoError";
    case Err::UnknownSet: return "UnknownSet";
    case Err::MissingSetting: return "MissingSetting";
    case Err::ZeroTrace: return "ZeroTrace";
    case Err::ZeroTotal: return "ZeroTotal";
    case Err::ZeroSingles: return "ZeroSingles";
    case Err::NonpositiveLength: return "NonpositiveLength";
    case Err::DegenerateCurve: return "DegenerateCurve";
    case Err::InsufficientData: return "InsufficientData";
    case Err::FitDiverged: return "FitDiverged";
    case Err::SingularSystem: return "SingularSystem";
    case Err::NumericalFailure: return "NumericalFailure";
    case Err::NotConverged: return "NotConverged";
    case Err::Infeasible: return "Infeasible";
  }
  return "UnknownError";
}

}  // namespace qpair
