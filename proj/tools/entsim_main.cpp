// entsim — command-line front end for the entanglement-generation library.
//
// Subcommands: analytic, sweep, unravel, mc, purify, region, benchmark,
// check.  Closed-form results and engine statistics go to stdout as JSON;
// sweep and region always produce a CSV file (plus a .manifest.json
// sidecar), placed in --out or $ENTSIM_OUT_DIR.
//
// Exit codes: 0 success, 1 usage error, 2 computation/suite failure,
// 3 I/O error.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "entsim/entsim.hpp"

namespace {

// Scheme parameters shared by analytic/unravel/mc: one flag per symbol,
// missing-vs-conflicting combinations are rejected at resolve time.
struct SchemeInput {
  std::string scheme;
  std::optional<double> p1, tcw, eta, eps2, pcav, big_t, p2;
  std::string subset = "half";
};

void add_scheme_flags(CLI::App* cmd, SchemeInput& in) {
  cmd->add_option("scheme", in.scheme, "scheme id: 1cw | 1pls | 2ph")
      ->required();
  cmd->add_option("--eta", in.eta, "detection efficiency")->required();
  cmd->add_option("--p1", in.p1, "emission probability (1cw)");
  cmd->add_option("--tcw", in.tcw, "window in units of 1/Gamma_eg (1cw)");
  cmd->add_option("--eps2", in.eps2, "Raman transfer probability (1pls)");
  cmd->add_option("--pcav", in.pcav, "cavity emission probability (1pls)");
  cmd->add_option("--T", in.big_t, "window in base-rate units (1pls, 2ph)");
  cmd->add_option("--p2", in.p2, "two-photon emission probability (2ph)");
  cmd->add_option("--subset", in.subset,
                  "2ph success subset: half (all Bell patterns) or quarter "
                  "(|Psi+> only)")
      ->check(CLI::IsMember({"half", "quarter"}));
}

entsim::BellSubset subset_from(const std::string& name) {
  return name == "quarter" ? entsim::BellSubset::quarter
                           : entsim::BellSubset::half;
}

struct Resolved {
  entsim::Scheme scheme;
  entsim::BellSubset subset;
  entsim::EfficiencyTriple triple{0, 0, 0};
  nlohmann::json params;
  std::optional<entsim::ProtocolModel> model;
};

void require_exactly_one(bool a, bool b, const char* message) {
  if (a == b) throw std::invalid_argument(message);
}

Resolved resolve_scheme(const SchemeInput& in, bool with_model) {
  Resolved r;
  r.scheme = entsim::scheme_from_id(in.scheme);
  r.subset = subset_from(in.subset);
  if (!in.eta) throw std::invalid_argument("--eta is required");
  switch (r.scheme) {
    case entsim::Scheme::one_cw: {
      require_exactly_one(in.p1.has_value(), in.tcw.has_value(),
                          "1cw needs exactly one of --p1 / --tcw");
      entsim::SchemeParams1cw params;
      if (in.p1) {
        params = entsim::SchemeParams1cw::from_p1(*in.p1, *in.eta);
      } else {
        params.t_cw = *in.tcw;
        params.eta = *in.eta;
      }
      r.triple = entsim::eval_1cw(params);
      r.params = {{"eta", params.eta}, {"p1", params.emission_probability()}};
      if (params.emission_probability() < 1.0)
        r.params["tcw"] = params.scaled_window();
      if (with_model) r.model = entsim::build_model(params);
      break;
    }
    case entsim::Scheme::one_pls: {
      if (!in.eps2) throw std::invalid_argument("1pls needs --eps2");
      require_exactly_one(in.pcav.has_value(), in.big_t.has_value(),
                          "1pls needs exactly one of --pcav / --T");
      entsim::SchemeParams1pls params;
      if (in.pcav) {
        params = entsim::SchemeParams1pls::from_pcav(*in.eps2, *in.eta,
                                                     *in.pcav);
      } else {
        params.eps2 = *in.eps2;
        params.t = *in.big_t;
        params.eta = *in.eta;
      }
      r.triple = entsim::eval_1pls(params);
      r.params = {{"eta", params.eta},
                  {"eps2", params.eps2},
                  {"pcav", params.p_cav()},
                  {"T", params.kappa * params.t}};
      if (with_model) r.model = entsim::build_model(params);
      break;
    }
    case entsim::Scheme::two_ph: {
      require_exactly_one(in.p2.has_value(), in.big_t.has_value(),
                          "2ph needs exactly one of --p2 / --T");
      entsim::SchemeParams2ph params;
      if (in.p2) {
        params = entsim::SchemeParams2ph::from_p2(*in.p2, *in.eta, r.subset);
      } else {
        params.t = *in.big_t;
        params.eta = *in.eta;
        params.subset = r.subset;
      }
      r.triple = entsim::eval_2ph(params);
      r.params = {{"eta", params.eta},
                  {"p2", params.p2()},
                  {"T", params.gamma * params.t},
                  {"subset", in.subset}};
      if (with_model) r.model = entsim::build_model(params);
      break;
    }
  }
  return r;
}

// Prints JSON to stdout; when out_path is set, also writes the same bytes
// to disk with a manifest sidecar.
void emit_json(const nlohmann::json& j, const std::string& out_path,
               entsim::RunManifest manifest) {
  const std::string payload = j.dump(2) + "\n";
  std::cout << payload;
  if (!out_path.empty())
    entsim::write_output_with_manifest(out_path, payload, std::move(manifest));
}

int run_analytic(const SchemeInput& in, const std::string& out_path) {
  const Resolved r = resolve_scheme(in, false);
  nlohmann::json j = entsim::to_json(r.triple);
  j["scheme"] = in.scheme;
  j["parameters"] = r.params;
  emit_json(j, out_path,
            entsim::RunManifest{"analytic", in.scheme, r.params, {}, {}});
  return 0;
}

int run_unravel(const SchemeInput& in, const std::string& out_path) {
  const Resolved r = resolve_scheme(in, true);
  const auto bundle =
      entsim::build_bundle(r.model->channels, r.model->ports);
  const auto probs = entsim::scenario_probabilities(bundle, r.model->rho0,
                                                    r.model->window);
  const auto [p_engine, f_engine] =
      entsim::engine_efficiency(*r.model, r.scheme, r.subset);

  nlohmann::json j;
  j["scheme"] = in.scheme;
  j["parameters"] = r.params;
  j["P0"] = probs[0];
  j["P1"] = probs[1];
  j["P2"] = probs[2];
  j["completeness_deviation"] = std::abs(probs[0] + probs[1] + probs[2] - 1.0);
  j["engine"] = {{"P_suc", p_engine}, {"F", f_engine}};
  j["analytic"] = entsim::to_json(r.triple);
  j["deviation"] = {{"P_suc", std::abs(p_engine - r.triple.P_suc)},
                    {"F", std::abs(f_engine - r.triple.F)}};
  emit_json(j, out_path,
            entsim::RunManifest{"unravel", in.scheme, r.params, {}, {}});
  return 0;
}

int run_mc(const SchemeInput& in, std::size_t n_traj, std::uint64_t seed,
           const std::string& out_path) {
  const Resolved r = resolve_scheme(in, true);
  const auto bundle =
      entsim::build_bundle(r.model->channels, r.model->ports);
  const auto mc = entsim::monte_carlo(bundle, r.model->rho0, r.model->window,
                                      n_traj, seed);
  const auto probs = entsim::scenario_probabilities(bundle, r.model->rho0,
                                                    r.model->window);

  nlohmann::json j;
  j["scheme"] = in.scheme;
  j["parameters"] = r.params;
  j["n_traj"] = mc.n_traj;
  j["seed"] = seed;
  j["frequency"] = {{"P0", mc.scenario[0]},
                    {"P1", mc.scenario[1]},
                    {"P2", mc.scenario[2]},
                    {"extra", mc.p_extra}};
  j["reference"] = {{"P0", probs[0]}, {"P1", probs[1]}, {"P2", probs[2]}};
  nlohmann::json dev;
  for (int k = 0; k < 3; ++k) {
    const double sigma =
        std::sqrt(probs[k] * (1.0 - probs[k]) / static_cast<double>(mc.n_traj));
    const char* key = k == 0 ? "P0" : (k == 1 ? "P1" : "P2");
    dev[key] = {{"sigma", sigma},
                {"z", sigma > 0.0
                          ? (mc.scenario[k] - probs[k]) / sigma
                          : 0.0}};
  }
  j["binomial"] = dev;
  nlohmann::json ports;
  for (std::size_t p = 0; p < bundle.ports.size(); ++p)
    ports[bundle.ports[p].label()] = {{"clicks", mc.port_clicks[p]},
                                      {"one_click_traj", mc.one_click_traj[p]}};
  j["ports"] = ports;
  emit_json(j, out_path,
            entsim::RunManifest{"mc", in.scheme, r.params, seed, {}});
  return 0;
}

int run_purify(double p1, double eta, int steps_j, bool engine_source,
               const std::string& out_path) {
  const entsim::PairSource source = engine_source
                                        ? entsim::pair_source_1cw_engine(p1, eta)
                                        : entsim::pair_source_1cw(p1, eta);
  const entsim::HilbertSpace pair = entsim::two_qubit_space();

  nlohmann::json j;
  const nlohmann::json params = {
      {"p1", p1}, {"eta", eta}, {"steps_J", steps_j},
      {"engine_source", engine_source}};
  j["scheme"] = "1cw";
  j["parameters"] = params;
  j["source"] = {{"P_suc", source.p_suc},
                 {"F", entsim::fidelity(entsim::bell_psi_plus(pair),
                                        source.rho_m)}};
  nlohmann::json levels = nlohmann::json::array();
  for (int jj = 0; jj <= steps_j; ++jj) {
    const auto plan = entsim::run_plan(source, jj);
    levels.push_back({{"J", plan.J},
                      {"n_pairs", plan.n_pairs},
                      {"step_success", plan.step_success},
                      {"p_pur", plan.p_pur},
                      {"P_pur", plan.P_pur},
                      {"F_pur", plan.F_pur}});
  }
  j["levels"] = levels;
  emit_json(j, out_path, entsim::RunManifest{"purify", "1cw", params, {}, {}});
  return 0;
}

int run_sweep_cmd(const std::string& scheme, const std::string& param,
                  double from, double to, int steps, const SchemeInput& fixed,
                  bool with_engine, const std::string& out_path) {
  entsim::SweepSpec spec;
  spec.scheme = scheme;
  spec.param = param;
  spec.from = from;
  spec.to = to;
  spec.steps = steps;
  spec.subset = subset_from(fixed.subset);
  spec.with_engine = with_engine;
  auto put = [&spec](const char* key, const std::optional<double>& v) {
    if (v) spec.fixed[key] = *v;
  };
  put("p1", fixed.p1);
  put("tcw", fixed.tcw);
  put("eta", fixed.eta);
  put("eps2", fixed.eps2);
  put("pcav", fixed.pcav);
  put("T", fixed.big_t);
  put("p2", fixed.p2);

  const auto rows = entsim::run_sweep(spec);
  const std::string csv = entsim::sweep_csv(spec, rows);
  const std::string path = entsim::resolve_output_path(
      out_path, "sweep_" + scheme + "_" + param + ".csv");

  nlohmann::json params = {{"param", param},
                           {"from", from},
                           {"to", to},
                           {"steps", steps},
                           {"engine", with_engine},
                           {"subset", fixed.subset}};
  for (const auto& [key, value] : spec.fixed) params[key] = value;
  entsim::write_output_with_manifest(
      path, csv, entsim::RunManifest{"sweep", scheme, params, {}, {}});
  std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
  return 0;
}

int run_region(double f_th, double p1_min, double p1_max, double eta_min,
               double eta_max, int resolution, const std::vector<int>& j_list,
               const std::string& out_path) {
  entsim::RegionSpec spec;
  spec.p1_min = p1_min;
  spec.p1_max = p1_max;
  spec.eta_min = eta_min;
  spec.eta_max = eta_max;
  spec.resolution = resolution;
  spec.f_th = f_th;
  spec.j_list = j_list;

  const auto rows = entsim::region_map(spec);
  const std::string csv = entsim::region_csv(spec, rows);
  const std::string path = entsim::resolve_output_path(out_path, "region_map.csv");

  const nlohmann::json params = {{"fth", f_th},
                                 {"p1_min", p1_min},
                                 {"p1_max", p1_max},
                                 {"eta_min", eta_min},
                                 {"eta_max", eta_max},
                                 {"resolution", resolution},
                                 {"steps_J", j_list}};
  entsim::write_output_with_manifest(
      path, csv, entsim::RunManifest{"region", "1cw", params, {}, {}});
  std::cout << "wrote " << path << " (" << rows.size() << " rows)\n";
  return 0;
}

int run_benchmark_cmd(const std::string& name, const std::string& out_path) {
  nlohmann::json j;
  if (name.empty()) {
    j = nlohmann::json::array();
    for (const std::string& preset : entsim::benchmark_names())
      j.push_back(entsim::to_json(entsim::run_benchmark(preset)));
  } else {
    j = entsim::to_json(entsim::run_benchmark(name));
  }
  const nlohmann::json params = {{"preset", name.empty() ? "all" : name}};
  emit_json(j, out_path, entsim::RunManifest{"benchmark", "", params, {}, {}});
  return 0;
}

int run_check(const std::string& suite) {
  const entsim::SuiteReport report = entsim::run_check_suite(suite);
  std::cout << report.str();
  return report.passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"entsim — remote-entanglement generation efficiency toolkit"};
  app.require_subcommand(1);

  std::string out_path;

  SchemeInput analytic_in;
  auto* analytic = app.add_subcommand(
      "analytic", "closed-form P_suc / F / F_avg for one scheme");
  add_scheme_flags(analytic, analytic_in);
  analytic->add_option("--out", out_path, "also write JSON to this file");

  SchemeInput unravel_in;
  auto* unravel = app.add_subcommand(
      "unravel", "deterministic click statistics from the unraveling engine");
  add_scheme_flags(unravel, unravel_in);
  unravel->add_option("--out", out_path, "also write JSON to this file");

  SchemeInput mc_in;
  std::size_t mc_ntraj = 100000;
  std::uint64_t mc_seed = 1;
  auto* mc = app.add_subcommand(
      "mc", "Monte Carlo trajectory sampling of the click statistics");
  add_scheme_flags(mc, mc_in);
  mc->add_option("--ntraj", mc_ntraj, "number of trajectories");
  mc->add_option("--seed", mc_seed, "master RNG seed");
  mc->add_option("--out", out_path, "also write JSON to this file");

  std::string sweep_scheme, sweep_param;
  double sweep_from = 0.0, sweep_to = 0.0;
  int sweep_steps = 0;
  bool sweep_engine = false;
  SchemeInput sweep_fixed;
  auto* sweep =
      app.add_subcommand("sweep", "CSV sweep of one scheme parameter");
  sweep->add_option("scheme", sweep_scheme, "scheme id: 1cw | 1pls | 2ph")
      ->required();
  sweep->add_option("--param", sweep_param, "swept parameter name")->required();
  sweep->add_option("--from", sweep_from, "range start")->required();
  sweep->add_option("--to", sweep_to, "range end")->required();
  sweep->add_option("--steps", sweep_steps, "grid points (endpoints included)")
      ->required();
  sweep->add_option("--p1", sweep_fixed.p1, "fixed p1 (1cw)");
  sweep->add_option("--tcw", sweep_fixed.tcw, "fixed window (1cw)");
  sweep->add_option("--eta", sweep_fixed.eta, "fixed detection efficiency");
  sweep->add_option("--eps2", sweep_fixed.eps2, "fixed eps^2 (1pls)");
  sweep->add_option("--pcav", sweep_fixed.pcav, "fixed p_cav (1pls)");
  sweep->add_option("--T", sweep_fixed.big_t, "fixed window (1pls, 2ph)");
  sweep->add_option("--p2", sweep_fixed.p2, "fixed p2 (2ph)");
  sweep->add_option("--subset", sweep_fixed.subset,
                    "2ph success subset: half | quarter")
      ->check(CLI::IsMember({"half", "quarter"}));
  sweep->add_flag("--engine", sweep_engine,
                  "add engine-validated P_suc / F columns");
  sweep->add_option("--out", out_path, "output CSV path");

  double pur_p1 = 0.0, pur_eta = 0.0;
  int pur_steps_j = 1;
  bool pur_engine = false;
  auto* purify = app.add_subcommand(
      "purify", "nested purification of the cw source state");
  purify->add_option("--p1", pur_p1, "emission probability")->required();
  purify->add_option("--eta", pur_eta, "detection efficiency")->required();
  purify->add_option("--steps-J", pur_steps_j,
                     "purification depth (2^J source pairs)");
  purify->add_flag("--engine", pur_engine,
                   "derive the source state from the unraveling engine");
  purify->add_option("--out", out_path, "also write JSON to this file");

  double reg_fth = 0.99;
  double reg_p1_min = 0.0, reg_p1_max = 1.0;
  double reg_eta_min = 0.0, reg_eta_max = 1.0;
  int reg_res = 101;
  std::vector<int> reg_j;
  auto* region = app.add_subcommand(
      "region", "classify the (p1, eta) plane against F/P thresholds");
  region->add_option("--fth", reg_fth, "threshold fidelity");
  region->add_option("--p1-min", reg_p1_min, "p1 lower bound");
  region->add_option("--p1-max", reg_p1_max, "p1 upper bound");
  region->add_option("--eta-min", reg_eta_min, "eta lower bound");
  region->add_option("--eta-max", reg_eta_max, "eta upper bound");
  region->add_option("--res", reg_res, "grid points per axis");
  region->add_option("--steps-J", reg_j,
                     "purification depths to overlay (repeatable)");
  region->add_option("--out", out_path, "output CSV path");

  std::string bench_name;
  auto* benchmark = app.add_subcommand(
      "benchmark", "published-experiment presets (all when no name given)");
  benchmark->add_option("preset", bench_name,
                        "ca40-freespace | ca40-cavity | yb171-twophoton");
  benchmark->add_option("--out", out_path, "also write JSON to this file");

  std::string check_suite;
  auto* check = app.add_subcommand("check", "self-check suites");
  check->add_option("suite", check_suite,
                    "appendix-a | engine-vs-analytic | purify-oracle")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (analytic->parsed()) return run_analytic(analytic_in, out_path);
    if (unravel->parsed()) return run_unravel(unravel_in, out_path);
    if (mc->parsed()) return run_mc(mc_in, mc_ntraj, mc_seed, out_path);
    if (sweep->parsed())
      return run_sweep_cmd(sweep_scheme, sweep_param, sweep_from, sweep_to,
                           sweep_steps, sweep_fixed, sweep_engine, out_path);
    if (purify->parsed())
      return run_purify(pur_p1, pur_eta, pur_steps_j, pur_engine, out_path);
    if (region->parsed())
      return run_region(reg_fth, reg_p1_min, reg_p1_max, reg_eta_min,
                        reg_eta_max, reg_res, reg_j, out_path);
    if (benchmark->parsed()) return run_benchmark_cmd(bench_name, out_path);
    if (check->parsed()) return run_check(check_suite);
  } catch (const std::ios_base::failure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
