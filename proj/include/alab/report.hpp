#pragma once

#include <cstdint>
#include <json.hpp>
#include <map>
#include <string>
#include <vector>

#include "alab/chart.hpp"

namespace alab {

enum class Status { Pass, Fail, Inconclusive, Error };

std::string_view to_string(Status s);
Status status_from_string(std::string_view s);

struct CheckOptions {
  double tolerance = 1e-8;
  int samples = 64;
  std::uint64_t seed = 0;
};

struct CheckReport {
  std::string id;
  std::string kind;
  Status status = Status::Pass;
  double residual = 0.0;
  double tolerance = 0.0;
  Point worst_point;
  double ms = 0.0;
  /// Named sub-residuals, e.g. "anchor" and "jacobi".
  std::map<std::string, double> components;
  /// Structural flags and other non-numeric findings.
  std::map<std::string, std::string> notes;
  std::string message;

  bool passed() const { return status == Status::Pass; }
  double component(const std::string& name) const;
};

/// Keeps the running maximum of residuals, overall and per component, and
/// the sample point where the overall maximum occurred.
class ResidualTracker {
 public:
  void add(const std::string& component, double residual, const Point& where);
  /// Declares a component so it is reported even if it never saw a sample.
  void declare(const std::string& component);
  double max() const { return max_; }
  /// Fills residual, worst point and components; sets Pass iff residual < tol
  /// (a non-finite residual fails).
  void finish(CheckReport& report, double tolerance) const;

 private:
  double max_ = 0.0;
  bool nonfinite_ = false;
  Point worst_;
  std::map<std::string, double> components_;
};

nlohmann::json to_json(const CheckReport& r);
CheckReport report_from_json(const nlohmann::json& j);
std::string to_text(const CheckReport& r);

}  // namespace alab
