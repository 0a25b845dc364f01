#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace finslervol {

enum class ErrorCode {
  SyntaxError,
  UnknownIdentifier,
  ArityError,
  UnboundVariable,
  NonFiniteResult,
  InadmissibleInput,
  DegenerateMetric,
  NotLorentzian,
  NotTimelike,
  NotPositiveDefinite,
  NoTimelikeSeed,
  NoConvergence,
  UnsupportedDimension,
  SingularNodes,
  DetNotProlongable,
  ConsistencyCheck,
  UnknownMetric,
  SpecFormat,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// 1-based position in the parsed source.
struct SourcePos {
  int line = 1;
  int column = 1;
};

/// Parse failure: SyntaxError, UnknownIdentifier or ArityError with a location.
class ParseError : public Error {
 public:
  ParseError(ErrorCode code, SourcePos pos, const std::string& detail,
             std::vector<std::string> expected = {});

  SourcePos position() const noexcept { return pos_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

 private:
  SourcePos pos_;
  std::vector<std::string> expected_;
};

}  // namespace finslervol
