#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fraclat {

/// Outcome of one identity or inequality check.
///
/// `passed` is derived: it holds exactly when max_abs_error <= tolerance, unless
/// the check was marked inconclusive (never counted as a pass).
struct VerificationReport {
  struct PointError {
    std::string label;
    double observed = 0.0;
    double expected = 0.0;
    double error = 0.0;
  };

  std::string check_name;
  std::map<std::string, double> parameters;
  std::map<std::string, double> observations;
  double max_abs_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
  bool inconclusive = false;
  std::string note;
  std::optional<std::vector<PointError>> details;

  VerificationReport() = default;
  VerificationReport(std::string name, double tol) : check_name(std::move(name)), tolerance(tol) {}

  /// Fold one observed error into the running maximum.
  void record(double abs_error);
  void add_detail(std::string label, double observed, double expected);
  /// Recompute `passed` from the stored error and tolerance.
  VerificationReport& finalize();
};

void to_json(nlohmann::json& j, const VerificationReport& r);

}  // namespace fraclat
