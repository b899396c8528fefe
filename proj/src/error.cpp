#include "alab/error.hpp"

namespace alab {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::InvalidChart: return "InvalidChart";
    case ErrorKind::PointOutsideChart: return "PointOutsideChart";
    case ErrorKind::EvaluationPole: return "EvaluationPole";
    case ErrorKind::ChartMismatch: return "ChartMismatch";
    case ErrorKind::DegreeMismatch: return "DegreeMismatch";
    case ErrorKind::ExpressionTooLarge: return "ExpressionTooLarge";
    case ErrorKind::AlgebroidMismatch: return "AlgebroidMismatch";
    case ErrorKind::PoissonConditionFailed: return "PoissonConditionFailed";
    case ErrorKind::ActionNotHomomorphism: return "ActionNotHomomorphism";
    case ErrorKind::RankMismatch: return "RankMismatch";
    case ErrorKind::TransversalityFailed: return "TransversalityFailed";
    case ErrorKind::BasePointMismatch: return "BasePointMismatch";
    case ErrorKind::SurjectivityFailed: return "SurjectivityFailed";
    case ErrorKind::NotCertifiedStrong: return "NotCertifiedStrong";
    case ErrorKind::UniquenessFailure: return "UniquenessFailure";
    case ErrorKind::IntersectionNontrivial: return "IntersectionNontrivial";
    case ErrorKind::ProjectionIllDefined: return "ProjectionIllDefined";
    case ErrorKind::InitialFiberMismatch: return "InitialFiberMismatch";
    case ErrorKind::StepCollapse: return "StepCollapse";
    case ErrorKind::NoConnectingPath: return "NoConnectingPath";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::UnresolvedLabel: return "UnresolvedLabel";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

ParseError::ParseError(std::size_t position, const std::string& message)
    : Error(ErrorKind::ParseError, "at position " + std::to_string(position) + ": " + message),
      position_(position) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace alab
