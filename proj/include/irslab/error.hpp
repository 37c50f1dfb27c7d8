#pragma once

#include <stdexcept>
#include <string>

namespace irslab {

// Every recoverable failure in the library throws Error with one of these
// codes. Tests match on the code, messages are for humans.
enum class Errc {
  UnknownGenerator,
  FamilyMismatch,
  BallTooLarge,
  GroupTooLarge,
  NotAHomomorphism,
  UnsupportedSource,
  IncompleteTable,
  InvalidSubgroup,
  ClosureExceedsBound,
  IndexOverflow,
  NotNormal,
  Undecided,
  Unsupported,
  InvalidMeasure,
  NotInvariantMeasure,
  ActionNotWellDefined,
  NoConvergence,
  InvalidGraph,
  GraphTooSmall,
  DepthOutOfRange,
  NotACosetUnion,
  EmptySet,
  RepNotInSubgroup,
  MalformedCertificate,
  DimensionMismatch,
  FieldMismatch,
  LeavesUnitBall,
  NotOrthogonal,
  EmptyMeasure,
  NotContained,
  AtomNotContained,
  ConfigInvalid,
  IoError,
  ParseError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool ok, Errc code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

}  // namespace irslab
