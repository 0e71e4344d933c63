#include "shadowgm/commands.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "shadowgm/io.hpp"

namespace shadowgm {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

int exit_code_for(const Error& e) {
  if (dynamic_cast<const NumericalBreakdown*>(&e)) return kExitBreakdown;
  return kExitUsage;
}

std::string error_json(const std::string& kind, const std::string& message) {
  return ordered_json{{"error", kind}, {"message", message}}.dump();
}

namespace {

/// JSON has no inf or nan; such values are written as strings.
ordered_json num(double x) {
  if (std::isfinite(x)) return x;
  return io::fmt(x);
}

ordered_json opt(const std::optional<double>& x) { return x ? num(*x) : ordered_json(nullptr); }

std::string csv_preamble(const RunConfig& cfg) {
  return "# config_hash=" + config_hash(cfg) + "\n# config=" + canonical_json(cfg).dump() + "\n";
}

ordered_json document(const RunConfig& cfg) {
  ordered_json doc;
  doc["config_hash"] = config_hash(cfg);
  doc["config"] = canonical_json(cfg);
  return doc;
}

fs::path emit(CommandResult& res, const fs::path& path, const std::string& text) {
  io::write_atomic(path, text);
  res.files.push_back(path);
  return path;
}

fs::path emit_json(CommandResult& res, const fs::path& path, const ordered_json& doc) {
  return emit(res, path, doc.dump(2) + "\n");
}

ordered_json params_json(const Parameters& p) {
  return {{"p", p.p},         {"q", p.q},         {"r", p.r},           {"s", p.s},
          {"n", p.n},         {"delta", p.delta}, {"gamma", p.gamma},   {"xi0", p.xi0},
          {"lambda", p.lambda}, {"alpha", p.alpha}, {"blowup_regime", p.blowup_regime}};
}

ordered_json verdict_json(const PathVerdict& v) {
  return {{"theta", num(v.theta)},
          {"Bstar_theta", num(v.Bstar_theta)},
          {"path_dt", num(v.path_dt)},
          {"K_theta", num(v.K_theta)},
          {"gamma_margin", num(v.gamma_margin)},
          {"applicable", v.applicable},
          {"bound", num(v.bound)},
          {"cap", num(v.cap)},
          {"blew_up", v.blew_up},
          {"T_b_lo", num(v.T_b_lo)},
          {"T_b_hi", num(v.T_b_hi)},
          {"final_time", num(v.final_time)},
          {"t_lambda", opt(v.t_lambda)},
          {"case_i", v.case_i},
          {"verdict", to_string(v.verdict)}};
}

ordered_json profile_json(const ProfileDiagnostics& d) {
  return {{"lower_bound", num(d.lower_bound)},
          {"monotone", num(d.monotone)},
          {"mean_bound", num(d.mean_bound)}};
}

ordered_json report_json(const BlowupReport& r) {
  return {{"blew_up", r.blew_up},
          {"t_lo", num(r.t_lo)},
          {"t_hi", num(r.t_hi)},
          {"trigger", to_string(r.trigger)},
          {"final_time", num(r.final_time)},
          {"t_lambda", opt(r.t_lambda)},
          {"Bstar_t_lambda", num(r.Bstar_t_lambda)},
          {"t_hat_lambda", opt(r.t_hat_lambda)},
          {"final_Bstar", num(r.final_Bstar)},
          {"path_dt", num(r.path_dt)},
          {"worst_profile", profile_json(r.worst_profile)},
          {"worst_xi_hat_decrease", num(r.worst_xi_hat_decrease)},
          {"worst_xi_hat_identity", num(r.worst_xi_hat_identity)},
          {"worst_K_identity", num(r.worst_K_identity)},
          {"accepted_steps", r.accepted_steps},
          {"rejected_steps", r.rejected_steps}};
}

ordered_json controls_json(const SolverControls& c) {
  return {{"cells", c.cells},
          {"horizon", num(c.horizon)},
          {"dt_max", num(c.dt_max)},
          {"dt_min", num(c.dt_min)},
          {"v_blow", num(c.v_blow)},
          {"safety", num(c.safety)},
          {"growth_cap", num(c.growth_cap)},
          {"xi_hat_growth_cap", num(c.xi_hat_growth_cap)},
          {"beta", num(c.beta)},
          {"path_dt", num(c.path_dt)}};
}

ordered_json inputs_json(const BoundInputs& in) {
  return {{"h0", num(in.h0)},
          {"beta", num(in.beta)},
          {"k", num(in.k)},
          {"ell", num(in.ell)},
          {"t_lambda", num(in.t_lambda)},
          {"Bstar_t_lambda", num(in.Bstar_t_lambda)},
          {"C0", num(in.C0)},
          {"C0_source", in.C0_source},
          {"C1", num(in.C1)},
          {"C1_source", in.C1_source},
          {"convention", to_string(in.convention)}};
}

ordered_json eps_json(const EpsStar& e) {
  return {{"value", num(e.value)},
          {"active_term", e.active_term},
          {"terms", {num(e.terms[0]), num(e.terms[1]), num(e.terms[2])}}};
}

ordered_json t_hat_json(const THatBound& b) {
  return {{"value", num(b.value)},
          {"R_used", num(b.R_used)},
          {"positive", b.positive},
          {"numerator", num(b.numerator)},
          {"L", num(b.L)}};
}

ordered_json stopping_time_json(const StoppingTimeDiagnostics& d) {
  ordered_json j{{"reached_t_lambda", d.reached_t_lambda}};
  if (!d.reached_t_lambda || !d.inputs.params.blowup_regime) return j;
  j["inputs"] = inputs_json(d.inputs);
  j["h_star"] = {{"value", num(d.h_star.value)}, {"cap", num(d.h_star.cap)}};
  j["eps_star"] = eps_json(d.eps);
  j["t_hat_lambda"] = opt(d.t_hat_lambda);
  j["t_hat_lower_bound"] = t_hat_json(d.t_hat_bound);
  j["t_hat_bound_holds"] = d.t_hat_bound_holds;
  j["C0_clipped"] = d.C0.clipped;
  j["h_at_t_lambda"] = num(d.h_at_t_lambda);
  j["h_star_margin"] = num(d.h_star_margin);
  j["envelope_worst_ratio"] = num(d.envelope_worst_ratio);
  j["envelope_points"] = d.envelope_points;
  return j;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,xi,xi_hat,B,Bstar,v0,vmax,mean_vr,mean_vbeta,K,dt\n";
  for (const auto& s : traj.samples) {
    for (double x : {s.t, s.xi, s.xi_hat, s.B, s.Bstar, s.v0, s.vmax, s.mean_vr, s.mean_vbeta, s.K})
      out << io::fmt(x) << ',';
    out << io::fmt(s.dt) << '\n';
  }
}

void write_snapshot_csv(std::ostream& out, const Trajectory& traj) {
  out << "t,z,v\n";
  for (const auto& snap : traj.snapshots)
    for (Eigen::Index i = 0; i < snap.v.size(); ++i)
      out << io::fmt(snap.t) << ',' << io::fmt(traj.z(i)) << ',' << io::fmt(snap.v(i)) << '\n';
}

std::string path_stem(std::uint64_t seed) { return "seed_" + std::to_string(seed); }

}  // namespace

CommandResult cmd_validate(const RunConfig& cfg) {
  CommandResult res;
  const Parameters prm = validate(cfg.params);
  ordered_json j = params_json(prm);
  j["admissibility_ratio"] = (prm.p - 1.0) / prm.r;
  j["admissibility_ceiling"] = prm.q / (prm.s + 1.0);
  j["critical_ratio"] = 2.0 / (prm.n + 2.0);
  res.summary = j.dump(2);
  return res;
}

CommandResult cmd_simulate(const RunConfig& cfg, const fs::path& out) {
  CommandResult res;
  const Parameters prm = validate(cfg.params);
  const SolverControls controls = cfg.controls();
  PathOutcome po = run_path(prm, controls, cfg.seed, cfg.ensemble.check);
  const std::string stem = path_stem(cfg.seed);
  const std::string pre = csv_preamble(cfg);

  std::ostringstream traj;
  traj << pre;
  write_trajectory_csv(traj, po.run.trajectory);
  emit(res, out / (stem + "_trajectory.csv"), traj.str());

  std::ostringstream snaps;
  snaps << pre;
  write_snapshot_csv(snaps, po.run.trajectory);
  emit(res, out / (stem + "_snapshots.csv"), snaps.str());

  std::ostringstream path;
  path << pre;
  write_path_csv(path, *po.path);
  emit(res, out / (stem + "_path.csv"), path.str());

  ordered_json doc = document(cfg);
  doc["seed"] = cfg.seed;
  doc["parameters"] = params_json(prm);
  doc["controls"] = controls_json(controls);
  doc["report"] = report_json(po.run.report);
  doc["bound_check"] = verdict_json(po.record.check);
  if (po.record.error.empty()) {
    const auto c0 = estimate_C0(po.run.trajectory, prm.n);
    doc["C0_estimate"] = {{"value", num(c0.value)},
                          {"clipped", c0.clipped},
                          {"snapshots_used", c0.snapshots_used}};
    doc["C1_estimate"] = num(estimate_C1(po.run.trajectory));
    doc["snapshots_truncated"] = po.run.trajectory.snapshots_truncated;
    try {
      doc["stopping_times"] = stopping_time_json(stopping_time_diagnostics(po.run, cfg.convention));
    } catch (const DomainError& e) {
      doc["stopping_times"] = {{"skipped", e.what()}};
    }
  } else {
    doc["error"] = po.record.error;
  }
  emit_json(res, out / (stem + "_report.json"), doc);

  const auto& r = po.run.report;
  std::ostringstream s;
  s << "seed " << cfg.seed << ": " << (r.blew_up ? "blew up in [" : "no blowup, final t = ");
  if (r.blew_up)
    s << io::fmt(r.t_lo) << ", " << io::fmt(r.t_hi) << "] (" << to_string(r.trigger) << ")";
  else
    s << io::fmt(r.final_time);
  s << "; bound check " << to_string(po.record.check.verdict);
  res.summary = s.str();
  if (!po.record.error.empty())
    res.exit_code = kExitBreakdown;
  else if (po.record.check.verdict == Verdict::violated)
    res.exit_code = kExitViolated;
  return res;
}

CommandResult cmd_ensemble(const RunConfig& cfg, const fs::path& out) {
  CommandResult res;
  const Parameters prm = validate(cfg.params);
  const EnsembleStats stats = run_ensemble(prm, cfg.controls(), cfg.ensemble);

  std::ostringstream csv;
  csv << csv_preamble(cfg);
  csv << "index,seed,gamma,blew_up,T_b_lo,T_b_hi,final_time,t_lambda,theta,Bstar_theta,path_dt,"
         "K_theta,gamma_margin,applicable,bound,cap,verdict,case_i,final_Bstar,worst_profile,"
         "worst_xi_hat_decrease,accepted_steps,rejected_steps,reached_t_lambda,t_hat_lambda,"
         "t_hat_bound,h_star_margin,envelope_ratio,C0,error\n";
  for (const auto& r : stats.rows) {
    const auto& c = r.check;
    csv << r.index << ',' << r.seed << ',' << io::fmt(r.gamma) << ',' << int(c.blew_up) << ','
        << io::fmt(c.T_b_lo) << ',' << io::fmt(c.T_b_hi) << ',' << io::fmt(c.final_time) << ','
        << (c.t_lambda ? io::fmt(*c.t_lambda) : "inf") << ',' << io::fmt(c.theta) << ','
        << io::fmt(c.Bstar_theta) << ',' << io::fmt(c.path_dt) << ',' << io::fmt(c.K_theta)
        << ',' << io::fmt(c.gamma_margin) << ',' << int(c.applicable) << ','
        << io::fmt(c.bound) << ',' << io::fmt(c.cap) << ',' << to_string(c.verdict) << ','
        << int(c.case_i) << ',' << io::fmt(r.final_Bstar) << ',' << io::fmt(r.worst_profile)
        << ',' << io::fmt(r.worst_xi_hat_decrease) << ',' << r.accepted_steps << ','
        << r.rejected_steps << ',' << int(r.reached_t_lambda) << ','
        << (r.t_hat_lambda ? io::fmt(*r.t_hat_lambda) : "inf") << ','
        << io::fmt(r.t_hat_bound) << ',' << io::fmt(r.h_star_margin) << ','
        << io::fmt(r.envelope_ratio) << ',' << io::fmt(r.C0) << ",\"" << r.error << "\"\n";
  }
  emit(res, out / "ensemble.csv", csv.str());

  const auto& a = stats.aggregates;
  ordered_json doc = document(cfg);
  doc["parameters"] = params_json(prm);
  doc["aggregates"] = {{"paths", a.paths},
                       {"blew_up", a.blew_up},
                       {"applicable", a.applicable},
                       {"satisfied", a.satisfied},
                       {"violated", a.violated},
                       {"inconclusive", a.inconclusive},
                       {"breakdowns", a.breakdowns},
                       {"fraction_blew_up", num(a.fraction_blew_up)},
                       {"fraction_satisfied", num(a.fraction_satisfied)},
                       {"median_T_b", num(a.median_T_b)},
                       {"median_bound", num(a.median_bound)}};
  doc["probability_bound"] = {{"theta0", num(a.probability.theta0)},
                              {"A0", num(a.probability.A0)},
                              {"bound", num(a.probability.bound)},
                              {"vacuous", a.probability.vacuous},
                              {"cap", num(a.probability.cap)},
                              {"within_cap", a.probability.within_cap},
                              {"fraction", num(a.probability.fraction)},
                              {"sigma", num(a.probability.sigma)},
                              {"holds", a.probability.holds}};
  emit_json(res, out / "summary.json", doc);

  std::ostringstream s;
  s << a.paths << " paths: " << a.blew_up << " blew up, " << a.applicable << " applicable, "
    << a.satisfied << " satisfied, " << a.violated << " violated, " << a.inconclusive
    << " inconclusive, " << a.breakdowns << " breakdowns";
  res.summary = s.str();
  if (a.violated > 0) res.exit_code = kExitViolated;
  return res;
}

CommandResult cmd_bounds(const RunConfig& cfg, const std::optional<fs::path>& inputs,
                         const fs::path& out) {
  CommandResult res;
  const Parameters prm = validate(cfg.params);
  json in = json::object();
  if (inputs) {
    try {
      in = json::parse(io::read_file(*inputs));
    } catch (const json::parse_error& e) {
      throw ConfigError("cannot parse " + inputs->string() + ": " + e.what());
    }
    if (!in.is_object()) throw ConfigError("bounds inputs must be a JSON object");
    for (const auto& [key, value] : in.items()) {
      static const std::set<std::string> known{"theta", "Bstar_theta", "theta0", "t_lambda",
                                               "Bstar_t_lambda", "h0", "C0", "C1",
                                               "beta", "k", "ell"};
      if (!known.count(key)) throw ConfigError("unknown bounds input '" + key + "'");
      if (!value.is_number()) throw ConfigError("bounds input '" + key + "' must be a number");
    }
  }
  auto get = [&](const char* key, double fallback) {
    return in.contains(key) ? in.at(key).get<double>() : fallback;
  };
  auto source = [&](const char* key, const char* fallback) {
    return std::string(in.contains(key) ? "input" : fallback);
  };

  ordered_json doc = document(cfg);
  doc["parameters"] = params_json(prm);

  const double theta = get("theta", cfg.ensemble.check.window);
  const double Bstar = get("Bstar_theta", 0.0);
  const double K = K_theta(prm.p, prm.q, prm.lambda, prm.xi0, theta, Bstar);
  const auto cond = gamma_condition(prm.gamma, K, prm.p, prm.n);
  const auto thm = blowup_bound_thm31(prm.gamma, K, prm.p, prm.delta, prm.alpha, prm.n);
  doc["blowup_time"] = {{"theta", num(theta)},
                        {"Bstar_theta", num(Bstar)},
                        {"K_theta", num(K)},
                        {"gamma_margin", num(cond.margin)},
                        {"gamma_condition", cond.holds},
                        {"bound", num(thm.value)},
                        {"cap", num(thm.cap)},
                        {"applicable", thm.applicable},
                        {"tau_0", num(tau_profile(0.0, prm.gamma, K, prm.p, prm.alpha, prm.delta))},
                        {"tau_delta",
                         num(tau_profile(prm.delta, prm.gamma, K, prm.p, prm.alpha, prm.delta))}};

  const double theta0 = get("theta0", cfg.ensemble.check.window);
  const auto pb = probability_bound_cor32(theta0, prm.gamma, prm.lambda, prm.xi0, prm.p, prm.q, prm.n);
  doc["probability_bound"] = {{"theta0", num(theta0)},
                              {"A0", num(pb.A0)},
                              {"bound", num(pb.bound)},
                              {"tail", num(pb.tail)},
                              {"vacuous", pb.vacuous}};

  std::ostringstream s;
  s << "K_theta " << io::fmt(K) << ", bound " << io::fmt(thm.value) << ", cap "
    << io::fmt(thm.cap) << (thm.applicable ? "" : " (gamma condition fails)");

  if (!prm.blowup_regime && !in.contains("beta")) {
    doc["stopping_time"] = {{"skipped", "parameters are outside the blowup regime"}};
  } else {
    BoundInputs s4;
    s4.params = prm;
    s4.convention = cfg.convention;
    if (prm.blowup_regime) {
      const BetaK bk = select_beta_k(prm);
      s4.beta = bk.beta;
      s4.k = bk.k;
    }
    s4.beta = get("beta", s4.beta);
    s4.k = get("k", s4.k);
    s4.ell = get("ell", s4.k / s4.beta);
    s4.t_lambda = get("t_lambda", 0.1);
    s4.Bstar_t_lambda = get("Bstar_t_lambda", 0.2);

    const auto grid = make_radial_grid<double>(cfg.solver.cells, prm.n);
    const ArrayX<double> v0 = initial_profile(prm, grid);
    s4.h0 = get("h0", mean_power(v0, s4.beta, grid));
    // Slope of γφ at z = 1/2 at t = 0, the only time a profile is known without a run.
    const double c0_initial = -std::pow(0.5, prm.n - 1) *
                              prm.gamma * phi_jet(0.5, prm.delta, prm.alpha).slope;
    s4.C0 = get("C0", c0_initial);
    s4.C0_source = source("C0", "initial-profile");
    // Largest slope of γφ, attained at z = δ.
    const double c1_initial = prm.gamma * prm.alpha * std::pow(prm.delta, -prm.alpha - 1.0);
    s4.C1 = get("C1", c1_initial);
    s4.C1_source = source("C1", "initial-profile");

    const auto hs = h_star_lambda(s4);
    const auto eps = eps_star(s4);
    const auto th = t_hat_lower_bound(s4);
    ordered_json j;
    j["inputs"] = inputs_json(s4);
    j["h_star"] = {{"value", num(hs.value)}, {"cap", num(hs.cap)}};
    j["eps_star"] = eps_json(eps);
    j["L_at_R_used"] = th.positive ? num(L_lemma45(s4, th.R_used, hs.value)) : ordered_json(nullptr);
    j["t_hat_lower_bound"] = t_hat_json(th);
    if (prm.blowup_regime) {
      const BetaK bk = select_beta_k(prm);
      j["selection"] = {{"beta", num(bk.beta)},
                        {"k", num(bk.k)},
                        {"margin_dimension", num(bk.margin_dimension)},
                        {"margin_reaction", num(bk.margin_reaction)},
                        {"margin_k_lower", num(bk.margin_k_lower)},
                        {"margin_k_upper", num(bk.margin_k_upper)}};
    }
    doc["stopping_time"] = j;
    s << "; h*_lambda " << io::fmt(hs.value) << ", t_hat lower bound " << io::fmt(th.value);
  }
  emit_json(res, out / "bounds.json", doc);
  res.summary = s.str();
  return res;
}

CommandResult cmd_verify_profile(const RunConfig& cfg, const fs::path& out) {
  CommandResult res;
  const Parameters prm = validate(cfg.params);
  const auto grid = make_radial_grid<double>(10000, prm.n);
  const auto rep = verify_phi_inequality(prm, grid);
  const bool margins_ok = rep.min_margin >= -1e-10 && rep.margin_left_of_delta >= -1e-10 &&
                          rep.margin_right_of_delta >= -1e-10 &&
                          std::isfinite(rep.margin_left_of_delta) &&
                          std::isfinite(rep.margin_right_of_delta);
  const bool c1_ok = rep.value_mismatch <= 1e-12 && rep.slope_mismatch <= 1e-12;

  ordered_json doc = document(cfg);
  doc["parameters"] = params_json(prm);
  doc["nodes_checked"] = rep.nodes_checked;
  doc["min_margin"] = num(rep.min_margin);
  doc["min_relative_margin"] = num(rep.min_relative_margin);
  doc["argmin_z"] = num(rep.argmin_z);
  doc["margin_left_of_delta"] = num(rep.margin_left_of_delta);
  doc["margin_right_of_delta"] = num(rep.margin_right_of_delta);
  doc["value_mismatch"] = num(rep.value_mismatch);
  doc["slope_mismatch"] = num(rep.slope_mismatch);
  doc["pass"] = margins_ok && c1_ok;
  emit_json(res, out / "profile.json", doc);

  res.summary = std::string(margins_ok && c1_ok ? "profile inequality holds" : "profile check FAILED") +
                ": min margin " + io::fmt(rep.min_margin) + ", C1 mismatch " +
                io::fmt(std::max(rep.value_mismatch, rep.slope_mismatch));
  if (!(margins_ok && c1_ok)) res.exit_code = kExitViolated;
  return res;
}

CommandResult cmd_tail_check(const RunConfig& cfg, const fs::path& out) {
  CommandResult res;
  const auto rows = tail_check(cfg.tail.t_values, cfg.tail.A_values, cfg.tail.paths,
                               cfg.ensemble.base_seed, cfg.tail.dt, cfg.ensemble.threads,
                               cfg.ensemble.shuffle);
  std::ostringstream csv;
  csv << csv_preamble(cfg);
  csv << "t,A,paths,exceed,frequency,ci_lo,ci_hi,bound,pass,resolved\n";
  bool all = true;
  for (const auto& r : rows) {
    csv << io::fmt(r.t) << ',' << io::fmt(r.A) << ',' << r.paths << ',' << r.exceed << ','
        << io::fmt(r.frequency) << ',' << io::fmt(r.ci_lo) << ',' << io::fmt(r.ci_hi) << ','
        << io::fmt(r.bound) << ',' << int(r.pass) << ',' << int(r.resolved) << '\n';
    all = all && r.pass;
  }
  emit(res, out / "tail.csv", csv.str());
  res.summary = std::to_string(rows.size()) + " (t, A) cells, " + (all ? "all pass" : "FAILURES");
  if (!all) res.exit_code = kExitViolated;
  return res;
}

CommandResult cmd_sweep_gamma(const RunConfig& cfg, const fs::path& out) {
  CommandResult res;
  EnsembleOptions opts = cfg.ensemble;
  opts.paths = cfg.sweep_paths;
  const auto sweep = gamma_sweep(cfg.params, cfg.controls(), cfg.gammas, opts);
  std::ostringstream csv;
  csv << csv_preamble(cfg);
  csv << "gamma,median_T_b,median_bound,fixed_K_bound,blew_up,paths\n";
  for (const auto& r : sweep.rows)
    csv << io::fmt(r.gamma) << ',' << io::fmt(r.median_T_b) << ',' << io::fmt(r.median_bound)
        << ',' << io::fmt(r.fixed_K_bound) << ',' << r.blew_up << ',' << r.paths << '\n';
  emit(res, out / "sweep.csv", csv.str());

  ordered_json doc = document(cfg);
  doc["fixed_K"] = num(sweep.fixed_K);
  doc["T_b_non_increasing"] = sweep.T_b_non_increasing;
  doc["bound_non_increasing"] = sweep.bound_non_increasing;
  doc["top_decade_slope"] = num(sweep.top_decade_slope);
  doc["slope_ok"] = sweep.slope_ok;
  emit_json(res, out / "sweep.json", doc);

  const bool ok = sweep.T_b_non_increasing && sweep.bound_non_increasing && sweep.slope_ok;
  res.summary = std::to_string(sweep.rows.size()) + " gammas, slope " +
                io::fmt(sweep.top_decade_slope) + (ok ? ", monotone" : ", CHECK FAILED");
  if (!ok) res.exit_code = kExitViolated;
  return res;
}

CommandResult cmd_verify(const fs::path& dir) {
  CommandResult res;
  if (!fs::is_directory(dir)) throw ConfigError(dir.string() + " is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".csv" || ext == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::size_t good = 0;
  std::ostringstream s;
  for (const auto& f : files) {
    std::string embedded_hash;
    json embedded;
    const std::string text = io::read_file(f);
    try {
      if (f.extension() == ".csv") {
        std::istringstream lines(text);
        std::string l1, l2;
        std::getline(lines, l1);
        std::getline(lines, l2);
        const std::string h = "# config_hash=", c = "# config=";
        if (l1.rfind(h, 0) == 0 && l2.rfind(c, 0) == 0) {
          embedded_hash = l1.substr(h.size());
          embedded = json::parse(l2.substr(c.size()));
        }
      } else {
        const json doc = json::parse(text);
        if (doc.contains("config_hash") && doc.contains("config")) {
          embedded_hash = doc.at("config_hash").get<std::string>();
          embedded = doc.at("config");
        }
      }
    } catch (const json::exception&) {
      embedded_hash.clear();
    }
    bool ok = false;
    if (!embedded_hash.empty()) {
      try {
        ok = config_hash(config_from_json(embedded)) == embedded_hash;
      } catch (const Error&) {
        ok = false;
      }
    }
    if (ok)
      ++good;
    else
      s << "mismatch: " << f.string() << '\n';
  }
  s << good << " of " << files.size() << " files carry a matching config hash";
  res.summary = s.str();
  if (files.empty() || good != files.size()) res.exit_code = kExitViolated;
  return res;
}

}  // namespace shadowgm
