#include "shadowgm/config.hpp"

#include <set>

#include "shadowgm/io.hpp"

namespace shadowgm {

using nlohmann::json;
using nlohmann::ordered_json;

SolverControls RunConfig::controls() const { return resolve_beta(params, solver, beta_auto); }

namespace {

void reject_unknown(const json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw ConfigError("unknown key '" + where + "." + key + "'");
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + where + "." + key + "': " + e.what());
  }
}

ordered_json switches_json(const SolverSwitches& s) {
  return {{"diffusion", s.diffusion},
          {"reaction", s.reaction},
          {"coupling", s.coupling},
          {"freeze_xi", s.freeze_xi}};
}

}  // namespace

bool operator==(const RunConfig& a, const RunConfig& b) {
  return to_json(a) == to_json(b);
}

ordered_json to_json(const RunConfig& cfg) {
  const auto& p = cfg.params;
  const auto& s = cfg.solver;
  const auto& e = cfg.ensemble;
  ordered_json j;
  j["parameters"] = {{"p", p.p},         {"q", p.q},         {"r", p.r},
                     {"s", p.s},         {"n", p.n},         {"delta", p.delta},
                     {"gamma", p.gamma}, {"xi0", p.xi0},     {"lambda", p.lambda}};
  ordered_json solver = {{"cells", s.cells},
                         {"horizon", s.horizon},
                         {"dt_max", s.dt_max},
                         {"dt_min", s.dt_min},
                         {"v_blow", s.v_blow},
                         {"safety", s.safety},
                         {"growth_cap", s.growth_cap},
                         {"xi_hat_growth_cap", s.xi_hat_growth_cap}};
  if (cfg.beta_auto)
    solver["beta"] = "auto";
  else
    solver["beta"] = s.beta;
  solver["path_dt"] = s.path_dt;
  solver["snapshot_every"] = s.snapshot_every;
  solver["snapshot_times"] = s.snapshot_times;
  solver["snapshot_until_t_lambda"] = s.snapshot_until_t_lambda;
  solver["max_snapshots"] = s.max_snapshots;
  solver["switches"] = switches_json(s.switches);
  j["solver"] = solver;
  j["ensemble"] = {{"paths", e.paths},
                   {"base_seed", e.base_seed},
                   {"threads", e.threads},
                   {"shuffle", e.shuffle},
                   {"window", e.check.window},
                   {"allowance", e.check.allowance}};
  j["bounds"] = {{"convention", to_string(cfg.convention)}};
  j["tail"] = {{"t_values", cfg.tail.t_values},
               {"A_values", cfg.tail.A_values},
               {"paths", cfg.tail.paths},
               {"dt", cfg.tail.dt}};
  j["sweep"] = {{"gammas", cfg.gammas}, {"paths", cfg.sweep_paths}};
  j["seed"] = cfg.seed;
  j["output_dir"] = cfg.output_dir;
  return j;
}

RunConfig config_from_json(const json& j) {
  RunConfig cfg;
  reject_unknown(j, "config",
                 {"parameters", "solver", "ensemble", "bounds", "tail", "sweep", "seed",
                  "output_dir"});
  if (j.contains("parameters")) {
    const auto& o = j.at("parameters");
    const std::string w = "parameters";
    reject_unknown(o, w, {"p", "q", "r", "s", "n", "delta", "gamma", "xi0", "lambda"});
    auto& p = cfg.params;
    read(o, "p", p.p, w);
    read(o, "q", p.q, w);
    read(o, "r", p.r, w);
    read(o, "s", p.s, w);
    read(o, "n", p.n, w);
    read(o, "delta", p.delta, w);
    read(o, "gamma", p.gamma, w);
    read(o, "xi0", p.xi0, w);
    read(o, "lambda", p.lambda, w);
  }
  if (j.contains("solver")) {
    const auto& o = j.at("solver");
    const std::string w = "solver";
    reject_unknown(o, w,
                   {"cells", "horizon", "dt_max", "dt_min", "v_blow", "safety", "growth_cap",
                    "xi_hat_growth_cap", "beta", "path_dt", "snapshot_every", "snapshot_times",
                    "snapshot_until_t_lambda", "max_snapshots", "switches"});
    auto& s = cfg.solver;
    read(o, "cells", s.cells, w);
    read(o, "horizon", s.horizon, w);
    read(o, "dt_max", s.dt_max, w);
    read(o, "dt_min", s.dt_min, w);
    read(o, "v_blow", s.v_blow, w);
    read(o, "safety", s.safety, w);
    read(o, "growth_cap", s.growth_cap, w);
    read(o, "xi_hat_growth_cap", s.xi_hat_growth_cap, w);
    if (o.contains("beta")) {
      const auto& b = o.at("beta");
      if (b.is_string() && b.get<std::string>() == "auto") {
        cfg.beta_auto = true;
      } else if (b.is_number()) {
        cfg.beta_auto = false;
        s.beta = b.get<double>();
      } else {
        throw ConfigError("solver.beta must be a number or \"auto\"");
      }
    }
    read(o, "path_dt", s.path_dt, w);
    read(o, "snapshot_every", s.snapshot_every, w);
    read(o, "snapshot_times", s.snapshot_times, w);
    read(o, "snapshot_until_t_lambda", s.snapshot_until_t_lambda, w);
    read(o, "max_snapshots", s.max_snapshots, w);
    if (o.contains("switches")) {
      const auto& sw = o.at("switches");
      const std::string ws = "solver.switches";
      reject_unknown(sw, ws, {"diffusion", "reaction", "coupling", "freeze_xi"});
      read(sw, "diffusion", s.switches.diffusion, ws);
      read(sw, "reaction", s.switches.reaction, ws);
      read(sw, "coupling", s.switches.coupling, ws);
      read(sw, "freeze_xi", s.switches.freeze_xi, ws);
    }
  }
  if (j.contains("ensemble")) {
    const auto& o = j.at("ensemble");
    const std::string w = "ensemble";
    reject_unknown(o, w, {"paths", "base_seed", "threads", "shuffle", "window", "allowance"});
    auto& e = cfg.ensemble;
    read(o, "paths", e.paths, w);
    read(o, "base_seed", e.base_seed, w);
    read(o, "threads", e.threads, w);
    read(o, "shuffle", e.shuffle, w);
    read(o, "window", e.check.window, w);
    read(o, "allowance", e.check.allowance, w);
  }
  if (j.contains("bounds")) {
    const auto& o = j.at("bounds");
    reject_unknown(o, "bounds", {"convention"});
    std::string conv = to_string(cfg.convention);
    read(o, "convention", conv, "bounds");
    cfg.convention = parse_exponent_convention(conv);
  }
  if (j.contains("tail")) {
    const auto& o = j.at("tail");
    const std::string w = "tail";
    reject_unknown(o, w, {"t_values", "A_values", "paths", "dt"});
    read(o, "t_values", cfg.tail.t_values, w);
    read(o, "A_values", cfg.tail.A_values, w);
    read(o, "paths", cfg.tail.paths, w);
    read(o, "dt", cfg.tail.dt, w);
  }
  if (j.contains("sweep")) {
    const auto& o = j.at("sweep");
    reject_unknown(o, "sweep", {"gammas", "paths"});
    read(o, "gammas", cfg.gammas, "sweep");
    read(o, "paths", cfg.sweep_paths, "sweep");
  }
  read(j, "seed", cfg.seed, "config");
  read(j, "output_dir", cfg.output_dir, "config");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  const std::string text = io::read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("cannot parse " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void apply_override(json& tree, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override '" + assignment + "' is not of the form key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  json* node = &tree;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (part.empty()) throw ConfigError("empty component in override key '" + key + "'");
    if (!node->is_object()) *node = json::object();
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

ordered_json canonical_json(const RunConfig& cfg) {
  ordered_json j = to_json(cfg);
  j.erase("output_dir");
  j["ensemble"].erase("threads");
  j["ensemble"].erase("shuffle");
  return j;
}

std::string config_hash(const RunConfig& cfg) {
  return io::hex64(io::fnv1a64(canonical_json(cfg).dump()));
}

}  // namespace shadowgm
