#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace alab {

enum class ErrorKind {
  InvalidArgument,
  InvalidChart,
  PointOutsideChart,
  EvaluationPole,
  ChartMismatch,
  DegreeMismatch,
  ExpressionTooLarge,
  AlgebroidMismatch,
  PoissonConditionFailed,
  ActionNotHomomorphism,
  RankMismatch,
  TransversalityFailed,
  BasePointMismatch,
  SurjectivityFailed,
  NotCertifiedStrong,
  UniquenessFailure,
  IntersectionNontrivial,
  ProjectionIllDefined,
  InitialFiberMismatch,
  StepCollapse,
  NoConnectingPath,
  ParseError,
  UnresolvedLabel,
  SchemaViolation,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers (and the
/// CLI report writer) can branch on it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& message);

  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& message);

}  // namespace alab
