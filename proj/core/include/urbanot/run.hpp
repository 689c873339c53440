#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "urbanot/measures.hpp"

namespace urbanot {

enum class Mode { PlanRn, PlanBounded, MuSubproblem, EnergyCurve, Validate };

std::string to_string(Mode mode);
/// Throws ConfigError for unknown names.
Mode parse_mode(const std::string& name);

struct FamilySpec {
  std::string kind;  // "quadratic" or "power" for f, "power" for g
  double coefficient = 1.0;  // a for f, b for g
  double exponent = 2.0;     // q for f, r for g
};

struct RunTolerances {
  double weights = 1e-7;
  double bounded_relative = 1e-8;
  double compare_objective = 1e-2;
  double compare_density_l1 = 0.1;
  double solver_precision = 1e-6;
  std::int64_t transport_denominator = 1'000'000'000;
};

struct RunConfig {
  Mode mode = Mode::PlanRn;
  FamilySpec f{"quadratic", 1.0, 2.0};
  FamilySpec g{"power", 1.0, 0.5};
  double p = 2.0;
  int n = 1;
  std::optional<std::vector<double>> domain_lo;
  std::optional<std::vector<double>> domain_hi;
  int grid = 64;
  int k_max = 6;
  std::uint64_t seed = 1;
  std::string out = "out";
  std::vector<Atom> atoms;
  std::vector<Point> sites;
  int mass_denominator = 20;
  int rounds = 20;
  int energy_samples = 400;
  std::string layout = "line";
  bool write_plan = false;
  RunTolerances tolerances;
};

/// Parses a JSON configuration. Throws ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

struct Overrides {
  std::optional<double> p;
  std::optional<int> grid;
  std::optional<int> k_max;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
};

void apply_overrides(RunConfig& config, const Overrides& overrides);

/// Checks mode-specific requirements and guard limits. Throws ConfigError.
void validate_config(const RunConfig& config);

/// Canonical JSON form of the effective configuration.
std::string canonical_config(const RunConfig& config);
/// 64-bit FNV-1a of the canonical configuration, as 16 hex digits.
std::string config_hash(const RunConfig& config);

/// Executes the configured mode, writing artifacts under config.out.
/// Returns the process exit status: 0 success, 1 configuration or input
/// error, 2 solver non-convergence.
int run(const RunConfig& config, std::ostream& log);

}  // namespace urbanot
