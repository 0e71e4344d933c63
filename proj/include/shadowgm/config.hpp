#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "shadowgm/bounds.hpp"
#include "shadowgm/ensemble.hpp"
#include "shadowgm/model.hpp"
#include "shadowgm/solver.hpp"

namespace shadowgm {

struct TailConfig {
  std::vector<double> t_values{1.0, 2.0};
  std::vector<double> A_values{1.5, 2.0, 3.0};
  std::size_t paths = 100000;
  double dt = 1e-3;
  bool operator==(const TailConfig&) const = default;
};

/// Everything a campaign needs. Serialized as a JSON tree with sections
/// parameters, solver, ensemble, bounds, tail, sweep plus seed and output_dir.
struct RunConfig {
  Parameters params;
  SolverControls solver;
  bool beta_auto = true;  // β from select_beta_k inside the blowup regime
  EnsembleOptions ensemble;
  ExponentConvention convention = ExponentConvention::stated;
  TailConfig tail;
  std::vector<double> gammas{1e2, 1e3, 1e4};
  std::size_t sweep_paths = 20;
  std::uint64_t seed = 1;
  std::string output_dir = "out";

  /// Solver controls with β resolved.
  SolverControls controls() const;
};

bool operator==(const RunConfig& a, const RunConfig& b);

nlohmann::ordered_json to_json(const RunConfig& cfg);
/// Missing keys keep their defaults; unknown keys throw ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Applies `dotted.key=value`; the value is parsed as JSON, else taken as a string.
void apply_override(nlohmann::json& tree, const std::string& assignment);

/// The configuration without output_dir, ensemble.threads and ensemble.shuffle,
/// which never change results. This is what output files embed.
nlohmann::ordered_json canonical_json(const RunConfig& cfg);

/// FNV-1a over the dump of canonical_json.
std::string config_hash(const RunConfig& cfg);

}  // namespace shadowgm
