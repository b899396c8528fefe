#include "alab/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "alab/error.hpp"

namespace alab {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Inconclusive: return "inconclusive";
    case Status::Error: return "error";
  }
  return "error";
}

Status status_from_string(std::string_view s) {
  if (s == "pass") return Status::Pass;
  if (s == "fail") return Status::Fail;
  if (s == "inconclusive") return Status::Inconclusive;
  if (s == "error") return Status::Error;
  fail(ErrorKind::SchemaViolation, "unknown status '" + std::string(s) + "'");
}

double CheckReport::component(const std::string& name) const {
  auto it = components.find(name);
  if (it == components.end()) fail(ErrorKind::InvalidArgument, "report has no component '" + name + "'");
  return it->second;
}

void ResidualTracker::declare(const std::string& component) { components_.try_emplace(component, 0.0); }

void ResidualTracker::add(const std::string& component, double residual, const Point& where) {
  auto& slot = components_[component];
  if (!std::isfinite(residual)) {
    nonfinite_ = true;
    slot = residual;
    if (worst_.empty()) worst_ = where;
    return;
  }
  slot = std::max(slot, residual);
  if (residual > max_ || worst_.empty()) {
    max_ = std::max(max_, residual);
    worst_ = where;
  }
}

void ResidualTracker::finish(CheckReport& report, double tolerance) const {
  report.tolerance = tolerance;
  report.residual = nonfinite_ ? std::numeric_limits<double>::infinity() : max_;
  report.worst_point = worst_;
  for (const auto& [k, v] : components_) report.components[k] = v;
  report.status = (!nonfinite_ && max_ < tolerance) ? Status::Pass : Status::Fail;
}

namespace {

nlohmann::json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

double number_from(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

}  // namespace

nlohmann::json to_json(const CheckReport& r) {
  nlohmann::json j;
  j["id"] = r.id;
  j["kind"] = r.kind;
  j["status"] = std::string(to_string(r.status));
  j["residual"] = number(r.residual);
  j["tolerance"] = number(r.tolerance);
  j["worst_point"] = nlohmann::json::array();
  for (double v : r.worst_point) j["worst_point"].push_back(number(v));
  j["ms"] = number(r.ms);
  j["components"] = nlohmann::json::object();
  for (const auto& [k, v] : r.components) j["components"][k] = number(v);
  j["notes"] = nlohmann::json::object();
  for (const auto& [k, v] : r.notes) j["notes"][k] = v;
  if (!r.message.empty()) j["message"] = r.message;
  return j;
}

CheckReport report_from_json(const nlohmann::json& j) {
  try {
    CheckReport r;
    r.id = j.at("id").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.status = status_from_string(j.at("status").get<std::string>());
    r.residual = number_from(j.at("residual"));
    r.tolerance = number_from(j.value("tolerance", nlohmann::json(0.0)));
    for (const auto& v : j.at("worst_point")) r.worst_point.push_back(number_from(v));
    r.ms = number_from(j.at("ms"));
    if (j.contains("components")) {
      for (const auto& [k, v] : j["components"].items()) r.components[k] = number_from(v);
    }
    if (j.contains("notes")) {
      for (const auto& [k, v] : j["notes"].items()) r.notes[k] = v.get<std::string>();
    }
    r.message = j.value("message", "");
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::SchemaViolation, std::string("malformed report: ") + e.what());
  }
}

std::string to_text(const CheckReport& r) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3e", r.residual);
  std::string s = std::string(to_string(r.status)) + "  " + r.id + " [" + r.kind + "] residual " + buf;
  std::snprintf(buf, sizeof(buf), "%.1e", r.tolerance);
  s += std::string(" (tol ") + buf + ")";
  if (!r.worst_point.empty()) {
    s += " worst at (";
    for (std::size_t i = 0; i < r.worst_point.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%s%.4g", i ? ", " : "", r.worst_point[i]);
      s += buf;
    }
    s += ")";
  }
  s += '\n';
  for (const auto& [k, v] : r.components) {
    std::snprintf(buf, sizeof(buf), "%.3e", v);
    s += "    " + k + ": " + buf + '\n';
  }
  for (const auto& [k, v] : r.notes) s += "    " + k + " = " + v + '\n';
  if (!r.message.empty()) s += "    " + r.message + '\n';
  return s;
}

}  // namespace alab
