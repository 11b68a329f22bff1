#include "fraclat/report.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fraclat {

void VerificationReport::record(double abs_error) {
  if (std::isnan(abs_error)) abs_error = std::numeric_limits<double>::infinity();
  max_abs_error = std::max(max_abs_error, abs_error);
}

void VerificationReport::add_detail(std::string label, double observed, double expected) {
  if (!details) details.emplace();
  details->push_back({std::move(label), observed, expected, std::fabs(observed - expected)});
}

VerificationReport& VerificationReport::finalize() {
  passed = !inconclusive && max_abs_error <= tolerance;
  return *this;
}

void to_json(nlohmann::json& j, const VerificationReport& r) {
  j = nlohmann::json{{"check_name", r.check_name},
                     {"parameters", r.parameters},
                     {"observations", r.observations},
                     {"max_abs_error", r.max_abs_error},
                     {"tolerance", r.tolerance},
                     {"passed", r.passed},
                     {"inconclusive", r.inconclusive}};
  if (!r.note.empty()) j["note"] = r.note;
  if (r.details) {
    auto arr = nlohmann::json::array();
    for (const auto& d : *r.details)
      arr.push_back({{"label", d.label}, {"observed", d.observed}, {"expected", d.expected}, {"error", d.error}});
    j["details"] = std::move(arr);
  }
}

}  // namespace fraclat
