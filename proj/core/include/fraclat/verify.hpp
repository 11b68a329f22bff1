#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fraclat/lattice.hpp"
#include "fraclat/report.hpp"

namespace fraclat {

struct RunConfig {
  double s = 0.5;
  double q = 1.5;
  Window window{-20, 20};
  double t_tolerance = 1e-9;
  std::size_t mc_paths = 100000;
  std::uint64_t seed = 1;
  std::string output_format = "json";
  std::vector<std::string> checks;  // suite names

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
/// Missing keys keep their current values.
void from_json(const nlohmann::json& j, RunConfig& c);

/// kernel, semigroup, gradients, squarefn, counterexample, jumpsim, schrodinger.
const std::vector<std::string>& available_suites();

/// Runs the selected suites and returns their reports sorted by check name.
/// Throws std::invalid_argument for an empty selection or an unknown suite.
std::vector<VerificationReport> run_verify(const RunConfig& config);

/// Random function on `w` with values uniform in [lo, hi], deterministic in `seed`.
LatticeFunction random_function(const Window& w, double lo, double hi, std::uint64_t seed);

}  // namespace fraclat
