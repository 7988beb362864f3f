#pragma once

// Comparison and reporting layer on top of the protocol models: parameter
// sweeps, (p1, eta) region classification, benchmark presets for published
// experiments, self-check suites, and the CSV/JSON output plumbing shared
// with the command-line tool.  Everything computational returns plain data
// so the test suite can drive the same code paths as the CLI.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "entsim/purification.hpp"

namespace entsim {

// --- closed-form parameter-region boundaries ------------------------------

// Largest emission probability for which the one-photon conditional
// fidelity stays above f_th:  p1 < (1 - f_th) / (1 - eta f_th).
inline double region_threshold_1cw(double f_th, double eta) {
  if (f_th <= 0.0 || f_th >= 1.0)
    throw std::invalid_argument("region_threshold_1cw: F_th outside (0,1)");
  if (eta < 0.0 || eta > 1.0)
    throw std::invalid_argument("region_threshold_1cw: eta outside [0,1]");
  return (1.0 - f_th) / (1.0 - eta * f_th);
}

// p1 interval on which the one-photon success probability beats the
// two-photon scheme at p2 = 1, i.e. p - eta p^2 > eta/4.  The boundary
// roots of eta p^2 - p + eta/4 = 0 are reported clipped to [0,1]; at
// eta = 1 the discriminant vanishes and no p1 satisfies the strict
// inequality.
struct DominanceInterval {
  double eta;
  bool empty;
  double lo;
  double hi;

  // Membership is decided by the defining inequality itself, so boundary
  // ties are excluded regardless of clipping.
  bool contains(double p1) const {
    return p1 - eta * p1 * p1 > 0.25 * eta;
  }
};

inline DominanceInterval region_success_dominance(double eta) {
  if (!(eta > 0.0) || eta > 1.0)
    throw std::invalid_argument("region_success_dominance: eta outside (0,1]");
  if (eta == 1.0) return DominanceInterval{eta, true, 0.0, 0.0};
  const double root = std::sqrt(1.0 - eta * eta);
  const double lo = eta / (2.0 * (1.0 + root));  // stable form of (1-root)/(2 eta)
  const double hi = (1.0 + root) / (2.0 * eta);
  return DominanceInterval{eta, false, lo, std::min(hi, 1.0)};
}

// --- two-photon engine helpers --------------------------------------------

// Sum of the coincidence probabilities counted as success for the given
// subset: all four Bell-projecting patterns, or only the two projecting
// onto |Psi+>.
inline double bell_subset_probability(const SuperoperatorBundle& bundle,
                                      const DensityOperator& rho0, double t,
                                      BellSubset subset) {
  double total = 0.0;
  for (const BellPattern& pattern : bell_patterns()) {
    if (subset == BellSubset::quarter && pattern.target_sign != +1) continue;
    const std::size_t a = find_port(bundle, pattern.ports[0]);
    const std::size_t b = find_port(bundle, pattern.ports[1]);
    total += conditional_state_two_clicks(bundle, rho0, a, b, t).first;
  }
  return total;
}

// --- parameter sweeps ------------------------------------------------------

struct SweepRow {
  double value;  // swept-parameter value
  EfficiencyTriple analytic;
  std::optional<double> engine_p;  // engine success probability
  std::optional<double> engine_f;  // engine conditional fidelity
};

struct SweepSpec {
  std::string scheme;  // "1cw" | "1pls" | "2ph"
  std::string param;   // swept parameter name
  double from = 0.0;
  double to = 0.0;
  int steps = 0;
  std::map<std::string, double> fixed;   // remaining scheme parameters
  BellSubset subset = BellSubset::half;  // 2ph only
  bool with_engine = false;

  void validate() const {
    const Scheme s = scheme_from_id(scheme);
    if (steps < 2) throw std::invalid_argument("SweepSpec: steps < 2");
    if (!(from < to)) throw std::invalid_argument("SweepSpec: range not ordered");

    std::set<std::string> names;
    switch (s) {
      case Scheme::one_cw: names = {"p1", "tcw", "eta"}; break;
      case Scheme::one_pls: names = {"eps2", "pcav", "T", "eta"}; break;
      case Scheme::two_ph: names = {"p2", "T", "eta"}; break;
    }
    if (!names.count(param))
      throw std::invalid_argument("SweepSpec: parameter '" + param +
                                  "' not valid for scheme " + scheme);
    for (const auto& [key, value] : fixed) {
      (void)value;
      if (!names.count(key))
        throw std::invalid_argument("SweepSpec: fixed parameter '" + key +
                                    "' not valid for scheme " + scheme);
      if (key == param)
        throw std::invalid_argument("SweepSpec: '" + key +
                                    "' both swept and fixed");
    }
    auto given = [&](const std::string& key) {
      return param == key || fixed.count(key) != 0;
    };
    if (!given("eta")) throw std::invalid_argument("SweepSpec: eta missing");
    auto exactly_one = [&](const std::string& a, const std::string& b) {
      if (given(a) == given(b))
        throw std::invalid_argument("SweepSpec: need exactly one of '" + a +
                                    "' and '" + b + "'");
    };
    if (s == Scheme::one_cw) exactly_one("p1", "tcw");
    if (s == Scheme::one_pls) {
      if (!given("eps2")) throw std::invalid_argument("SweepSpec: eps2 missing");
      exactly_one("pcav", "T");
    }
    if (s == Scheme::two_ph) exactly_one("p2", "T");
  }
};

// Engine-side (P_suc, F) for a protocol model, mirroring the closed forms:
// one-photon schemes succeed on exactly one click (fidelity read at D+),
// the two-photon scheme on the subset's coincidence patterns.
inline std::pair<double, double> engine_efficiency(const ProtocolModel& model,
                                                   Scheme scheme,
                                                   BellSubset subset) {
  auto bundle = build_bundle(model.channels, model.ports);
  if (scheme == Scheme::two_ph) {
    const double p = bell_subset_probability(bundle, model.rho0, model.window,
                                             subset);
    const std::size_t a = find_port(bundle, "D+e");
    const std::size_t b = find_port(bundle, "D+g");
    const auto click = conditional_state_two_clicks(bundle, model.rho0, a, b,
                                                    model.window);
    return {p, fidelity(model.psi_plus, click.second)};
  }
  const auto probs = scenario_probabilities(bundle, model.rho0, model.window);
  const auto click = conditional_state_one_click(
      bundle, model.rho0, find_port(bundle, "D+"), model.window);
  return {probs[1], fidelity(model.psi_plus, click.second)};
}

inline std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  const Scheme scheme = scheme_from_id(spec.scheme);

  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(spec.steps));
  for (int i = 0; i < spec.steps; ++i) {
    const double value =
        spec.from + (spec.to - spec.from) * i / (spec.steps - 1);
    auto val = [&](const std::string& key) -> std::optional<double> {
      if (spec.param == key) return value;
      auto it = spec.fixed.find(key);
      if (it != spec.fixed.end()) return it->second;
      return std::nullopt;
    };

    SweepRow row{value, EfficiencyTriple{0, 0, 0}, std::nullopt, std::nullopt};
    switch (scheme) {
      case Scheme::one_cw: {
        SchemeParams1cw params;
        if (auto p1 = val("p1")) {
          params = SchemeParams1cw::from_p1(*p1, *val("eta"));
        } else {
          params.t_cw = *val("tcw");
          params.eta = *val("eta");
        }
        row.analytic = eval_1cw(params);
        if (spec.with_engine) {
          auto [p, f] = engine_efficiency(build_model(params), scheme,
                                           spec.subset);
          row.engine_p = p;
          row.engine_f = f;
        }
        break;
      }
      case Scheme::one_pls: {
        SchemeParams1pls params;
        if (auto pcav = val("pcav")) {
          params = SchemeParams1pls::from_pcav(*val("eps2"), *val("eta"), *pcav);
        } else {
          params.eps2 = *val("eps2");
          params.t = *val("T");
          params.eta = *val("eta");
        }
        row.analytic = eval_1pls(params);
        if (spec.with_engine) {
          auto [p, f] = engine_efficiency(build_model(params), scheme,
                                           spec.subset);
          row.engine_p = p;
          row.engine_f = f;
        }
        break;
      }
      case Scheme::two_ph: {
        SchemeParams2ph params;
        params.subset = spec.subset;
        if (auto p2 = val("p2")) {
          params = SchemeParams2ph::from_p2(*p2, *val("eta"), spec.subset);
        } else {
          params.t = *val("T");
          params.eta = *val("eta");
        }
        row.analytic = eval_2ph(params);
        if (spec.with_engine) {
          auto [p, f] = engine_efficiency(build_model(params), scheme,
                                           spec.subset);
          row.engine_p = p;
          row.engine_f = f;
        }
        break;
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

// --- region classification -------------------------------------------------

struct RegionSpec {
  double p1_min = 0.0, p1_max = 1.0;
  double eta_min = 0.0, eta_max = 1.0;
  int resolution = 0;  // grid points per axis
  double f_th = 0.99;
  std::vector<int> j_list;  // purification depths to overlay

  void validate() const {
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!in_unit(p1_min) || !in_unit(p1_max) || !in_unit(eta_min) ||
        !in_unit(eta_max))
      throw std::invalid_argument("RegionSpec: bounds outside [0,1]");
    if (!(p1_min < p1_max) || !(eta_min < eta_max))
      throw std::invalid_argument("RegionSpec: bounds not ordered");
    if (resolution < 2) throw std::invalid_argument("RegionSpec: resolution < 2");
    if (f_th <= 0.0 || f_th >= 1.0)
      throw std::invalid_argument("RegionSpec: F_th outside (0,1)");
    for (int j : j_list)
      if (j < 0) throw std::invalid_argument("RegionSpec: negative J");
  }
};

struct RegionRow {
  double p1;
  double eta;
  double f_value;  // unpurified conditional fidelity
  double p_value;  // unpurified success probability
  bool f_ok;       // F > F_th
  bool p_ok;       // P_suc > eta^2/2 (two-photon baseline at p2 = 1)
  std::vector<PurifiedLevel> purified;  // one entry per requested J
};

inline std::vector<double> linspace(double from, double to, int n) {
  if (n < 2) throw std::invalid_argument("linspace: need at least 2 points");
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    grid[static_cast<std::size_t>(i)] = from + (to - from) * i / (n - 1);
  return grid;
}

inline std::vector<RegionRow> region_map(const RegionSpec& spec) {
  spec.validate();
  const auto p1_grid = linspace(spec.p1_min, spec.p1_max, spec.resolution);
  const auto eta_grid = linspace(spec.eta_min, spec.eta_max, spec.resolution);

  std::vector<PurifiedRegionPoint> overlays;
  if (!spec.j_list.empty())
    overlays = purified_region(p1_grid, eta_grid, spec.f_th, spec.j_list);

  std::vector<RegionRow> rows;
  rows.reserve(p1_grid.size() * eta_grid.size());
  std::size_t index = 0;
  for (double p1 : p1_grid) {
    for (double eta : eta_grid) {
      const auto triple = eval_1cw(SchemeParams1cw::from_p1(p1, eta));
      RegionRow row{p1,
                    eta,
                    triple.F,
                    triple.P_suc,
                    triple.F > spec.f_th,
                    triple.P_suc > 0.5 * eta * eta,
                    {}};
      if (!overlays.empty()) row.purified = overlays[index].levels;
      rows.push_back(std::move(row));
      ++index;
    }
  }
  return rows;
}

// --- benchmark presets -----------------------------------------------------

struct BenchmarkResult {
  std::string name;
  std::string scheme;
  EfficiencyTriple triple;
  double repetition_rate;    // protocol attempts per second
  double events_per_second;  // repetition_rate * P_suc
  double seconds_per_event;
  std::optional<double> measured_f;      // externally measured fidelity
  std::optional<double> measured_f_avg;  // P_suc * measured fidelity
  nlohmann::json parameters;             // concrete inputs used
};

inline const std::vector<std::string>& benchmark_names() {
  static const std::vector<std::string> names{
      "ca40-freespace", "ca40-cavity", "yb171-twophoton"};
  return names;
}

inline BenchmarkResult run_benchmark(const std::string& name) {
  BenchmarkResult result;
  result.name = name;
  if (name == "ca40-freespace") {
    // Free-space Ca-40 ions, weak continuous Raman drive.
    const double p1 = 0.15, eta = 0.005;
    result.scheme = "1cw";
    result.triple = eval_1cw(SchemeParams1cw::from_p1(p1, eta));
    result.repetition_rate = 1.0e5;
    result.parameters = {{"p1", p1}, {"eta", eta}};
  } else if (name == "ca40-cavity") {
    // Ca-40 ions in cavities, pulsed partial Raman transfer.
    const double eps2 = 0.15, eta = 0.31, pcav = 0.10;
    result.scheme = "1pls";
    result.triple = eval_1pls(SchemeParams1pls::from_pcav(eps2, eta, pcav));
    result.repetition_rate = 3.3e4;
    result.parameters = {{"eps2", eps2}, {"eta", eta}, {"pcav", pcav}};
  } else if (name == "yb171-twophoton") {
    // Yb-171 ions, two-photon coincidence restricted to |Psi+> patterns.
    const double p2 = 2.0 / 3.0, eta = 6.7e-4;
    result.scheme = "2ph";
    result.triple =
        eval_2ph(SchemeParams2ph::from_p2(p2, eta, BellSubset::quarter));
    result.repetition_rate = 5.2e5;
    result.measured_f = 0.81;
    result.parameters = {{"p2", p2}, {"eta", eta}, {"subset", "quarter"}};
  } else {
    throw std::invalid_argument("unknown benchmark preset: " + name);
  }
  result.events_per_second = result.repetition_rate * result.triple.P_suc;
  result.seconds_per_event = 1.0 / result.events_per_second;
  if (result.measured_f)
    result.measured_f_avg = result.triple.P_suc * *result.measured_f;
  return result;
}

// --- self-check suites -----------------------------------------------------

struct SuiteReport {
  std::string suite;
  bool passed = false;
  double max_deviation = 0.0;
  double threshold = 0.0;
  std::vector<std::string> lines;  // per-check summaries

  std::string str() const {
    std::ostringstream out;
    for (const std::string& line : lines) out << "  " << line << "\n";
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "suite %s: %s (max deviation %.3e, threshold %.1e)",
                  suite.c_str(), passed ? "PASS" : "FAIL", max_deviation,
                  threshold);
    out << buf << "\n";
    return out.str();
  }
};

inline const std::vector<double>& check_grid_eta() {
  static const std::vector<double> grid{0.005, 0.1, 0.31, 0.5, 0.9};
  return grid;
}

inline const std::vector<double>& check_grid_window() {
  static const std::vector<double> grid{0.25, 0.5, 1.0, 1.5, 2.0};
  return grid;
}

// One grid point of the engine-vs-closed-form comparison.
struct EngineCheckRow {
  std::string scheme;
  double eta;
  double window;
  double dev_p;     // |P_suc(engine) - P_suc(closed form)|
  double dev_f;     // |F(engine) - F(closed form)|
  double dev_norm;  // |P0 + P1 + P2 - 1|
};

inline std::vector<EngineCheckRow> engine_check_rows() {
  std::vector<EngineCheckRow> rows;
  for (double eta : check_grid_eta()) {
    for (double window : check_grid_window()) {
      {
        SchemeParams1cw params;
        params.t_cw = window;
        params.eta = eta;
        const auto model = build_model(params);
        const auto bundle = build_bundle(model.channels, model.ports);
        const auto probs =
            scenario_probabilities(bundle, model.rho0, model.window);
        const auto triple = eval_1cw(params);
        const auto [p, f] =
            engine_efficiency(model, Scheme::one_cw, BellSubset::half);
        rows.push_back({"1cw", eta, window, std::abs(p - triple.P_suc),
                        std::abs(f - triple.F),
                        std::abs(probs[0] + probs[1] + probs[2] - 1.0)});
      }
      {
        SchemeParams1pls params;
        params.eps2 = 0.15;
        params.t = window;
        params.eta = eta;
        const auto model = build_model(params);
        const auto bundle = build_bundle(model.channels, model.ports);
        const auto probs =
            scenario_probabilities(bundle, model.rho0, model.window);
        const auto triple = eval_1pls(params);
        const auto [p, f] =
            engine_efficiency(model, Scheme::one_pls, BellSubset::half);
        rows.push_back({"1pls", eta, window, std::abs(p - triple.P_suc),
                        std::abs(f - triple.F),
                        std::abs(probs[0] + probs[1] + probs[2] - 1.0)});
      }
      {
        SchemeParams2ph params;
        params.t = window;
        params.eta = eta;
        params.subset = BellSubset::half;
        const auto model = build_model(params);
        const auto bundle = build_bundle(model.channels, model.ports);
        const auto probs =
            scenario_probabilities(bundle, model.rho0, model.window);
        const auto triple = eval_2ph(params);
        const double p =
            bell_subset_probability(bundle, model.rho0, model.window,
                                    BellSubset::half);
        // Every Bell-projecting pattern must give its target state exactly.
        double dev_f = 0.0;
        for (const BellPattern& pattern : bell_patterns()) {
          const auto click = conditional_state_two_clicks(
              bundle, model.rho0, find_port(bundle, pattern.ports[0]),
              find_port(bundle, pattern.ports[1]), model.window);
          const Vector& target =
              pattern.target_sign > 0 ? model.psi_plus : model.psi_minus;
          dev_f = std::max(dev_f, std::abs(fidelity(target, click.second) - 1.0));
        }
        rows.push_back({"2ph", eta, window, std::abs(p - triple.P_suc), dev_f,
                        std::abs(probs[0] + probs[1] + probs[2] - 1.0)});
      }
    }
  }
  return rows;
}

namespace detail {

inline std::string format_dev_line(const std::string& label, double dev_p,
                                   double dev_f, double dev_norm) {
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "%s: max |dP| = %.3e, max |dF| = %.3e, max |norm-1| = %.3e",
                label.c_str(), dev_p, dev_f, dev_norm);
  return buf;
}

}  // namespace detail

inline SuiteReport check_engine_vs_analytic() {
  SuiteReport report;
  report.suite = "engine-vs-analytic";
  report.threshold = tol::engine;
  std::map<std::string, std::array<double, 3>> per_scheme;
  for (const auto& row : engine_check_rows()) {
    auto& devs = per_scheme[row.scheme];
    devs[0] = std::max(devs[0], row.dev_p);
    devs[1] = std::max(devs[1], row.dev_f);
    devs[2] = std::max(devs[2], row.dev_norm);
  }
  for (const auto& [scheme, devs] : per_scheme) {
    report.lines.push_back(
        detail::format_dev_line(scheme, devs[0], devs[1], devs[2]));
    for (double d : devs) report.max_deviation = std::max(report.max_deviation, d);
  }
  report.passed = report.max_deviation <= report.threshold;
  return report;
}

inline SuiteReport check_appendix_a() {
  SuiteReport report;
  report.suite = "appendix-a";
  report.threshold = tol::structural;
  const std::vector<double> etas{0.1, 0.5, 0.9};
  for (const char* scheme : {"1cw", "1pls"}) {
    double worst = 0.0;
    for (double eta : etas) {
      ProtocolModel model = [&] {
        if (std::string(scheme) == "1cw") {
          SchemeParams1cw params;
          params.t_cw = 1.0;
          params.eta = eta;
          return build_model(params);
        }
        SchemeParams1pls params;
        params.eps2 = 0.15;
        params.t = 1.0;
        params.eta = eta;
        return build_model(params);
      }();
      const auto bundle = build_bundle(model.channels, model.ports);
      std::vector<double> tau_grid(20);
      for (int i = 0; i < 20; ++i)
        tau_grid[static_cast<std::size_t>(i)] = model.window * i / 19.0;
      for (const char* port : {"D+", "D-"}) {
        const double dev = tau_independence_check(
            bundle, model.rho0, find_port(bundle, port), model.window,
            tau_grid);
        worst = std::max(worst, dev);
      }
    }
    char buf[120];
    std::snprintf(buf, sizeof buf,
                  "%s: max click-time dependence = %.3e over eta in "
                  "{0.1, 0.5, 0.9}, 20 tau points",
                  scheme, worst);
    report.lines.push_back(buf);
    report.max_deviation = std::max(report.max_deviation, worst);
  }
  report.passed = report.max_deviation <= report.threshold;
  return report;
}

inline SuiteReport check_purify_oracle() {
  SuiteReport report;
  report.suite = "purify-oracle";
  report.threshold = tol::structural;

  const HilbertSpace pair = two_qubit_space();
  // Fixed point: a perfect |Phi+> pair survives with certainty, unchanged.
  {
    const DensityOperator phi =
        DensityOperator::from_ket(pair, bell_phi_plus(pair));
    const auto [n_prob, survivor] = oracle_step(phi);
    const auto coeffs = BellDiagonalState::from_density(survivor);
    double dev = std::abs(n_prob - 1.0);
    dev = std::max(dev, std::abs(coeffs.a - 1.0));
    dev = std::max(dev, std::abs(coeffs.b));
    dev = std::max(dev, std::abs(coeffs.c));
    dev = std::max(dev, std::abs(coeffs.d));
    char buf[96];
    std::snprintf(buf, sizeof buf, "fixed point |Phi+>: deviation = %.3e", dev);
    report.lines.push_back(buf);
    report.max_deviation = std::max(report.max_deviation, dev);
  }
  // 100 random Bell-diagonal states: the 16x16 simulation and the
  // coefficient recurrence must agree in both success probability and
  // surviving state, and the survivor must stay Bell-diagonal.
  {
    detail::SplitMix64 rng(0x5ee9a5c36e1f2b8dull);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      double x[4];
      double sum = 0.0;
      for (double& xi : x) {
        xi = -std::log(1.0 - rng.uniform());
        sum += xi;
      }
      const BellDiagonalState in{x[0] / sum, x[1] / sum, x[2] / sum,
                                 x[3] / sum};
      const auto [n_rec, next_rec] = recurrence_step(in);
      const auto [n_orc, survivor] = oracle_step(in.to_density());
      const auto next_orc = BellDiagonalState::from_density(survivor);
      double dev = std::abs(n_rec - n_orc);
      dev = std::max(dev, std::abs(next_rec.a - next_orc.a));
      dev = std::max(dev, std::abs(next_rec.b - next_orc.b));
      dev = std::max(dev, std::abs(next_rec.c - next_orc.c));
      dev = std::max(dev, std::abs(next_rec.d - next_orc.d));
      dev = std::max(dev, bell_diagonal_residual(survivor));
      worst = std::max(worst, dev);
    }
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "100 random Bell-diagonal states: max deviation = %.3e",
                  worst);
    report.lines.push_back(buf);
    report.max_deviation = std::max(report.max_deviation, worst);
  }
  report.passed = report.max_deviation <= report.threshold;
  return report;
}

inline SuiteReport run_check_suite(const std::string& suite_id) {
  if (suite_id == "appendix-a") return check_appendix_a();
  if (suite_id == "engine-vs-analytic") return check_engine_vs_analytic();
  if (suite_id == "purify-oracle") return check_purify_oracle();
  throw std::invalid_argument("unknown check suite: " + suite_id);
}

// --- output formatting and manifests ----------------------------------------

// All numeric CSV/JSON output uses %.15g so that re-reading reproduces the
// double exactly for every value we emit.
inline std::string format_g(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

inline std::string sweep_csv(const SweepSpec& spec,
                             const std::vector<SweepRow>& rows) {
  std::ostringstream out;
  out << spec.param << ",P_suc,F,F_avg";
  if (spec.with_engine) out << ",P_suc_engine,F_engine";
  out << "\n";
  for (const SweepRow& row : rows) {
    out << format_g(row.value) << ',' << format_g(row.analytic.P_suc) << ','
        << format_g(row.analytic.F) << ',' << format_g(row.analytic.F_avg);
    if (spec.with_engine)
      out << ',' << format_g(row.engine_p.value_or(0.0)) << ','
          << format_g(row.engine_f.value_or(0.0));
    out << "\n";
  }
  return out.str();
}

inline std::string region_csv(const RegionSpec& spec,
                              const std::vector<RegionRow>& rows) {
  std::ostringstream out;
  out << "p1,eta,F,P_suc,f_ok,p_ok";
  for (int j : spec.j_list)
    out << ",F_pur_J" << j << ",P_pur_J" << j << ",f_ok_J" << j << ",p_ok_J"
        << j;
  out << "\n";
  for (const RegionRow& row : rows) {
    out << format_g(row.p1) << ',' << format_g(row.eta) << ','
        << format_g(row.f_value) << ',' << format_g(row.p_value) << ','
        << (row.f_ok ? 1 : 0) << ',' << (row.p_ok ? 1 : 0);
    for (const PurifiedLevel& level : row.purified)
      out << ',' << format_g(level.F_pur) << ',' << format_g(level.P_pur)
          << ',' << (level.f_ok ? 1 : 0) << ',' << (level.p_ok ? 1 : 0);
    out << "\n";
  }
  return out.str();
}

inline nlohmann::json to_json(const EfficiencyTriple& triple) {
  return {{"P_suc", triple.P_suc}, {"F", triple.F}, {"F_avg", triple.F_avg}};
}

inline nlohmann::json to_json(const BenchmarkResult& result) {
  nlohmann::json j = to_json(result.triple);
  j["name"] = result.name;
  j["scheme"] = result.scheme;
  j["parameters"] = result.parameters;
  j["repetition_rate"] = result.repetition_rate;
  j["events_per_second"] = result.events_per_second;
  j["seconds_per_event"] = result.seconds_per_event;
  if (result.measured_f) {
    j["measured_F"] = *result.measured_f;
    j["measured_F_avg"] = *result.measured_f_avg;
  }
  return j;
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

inline std::string iso8601_utc_now() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Provenance sidecar written next to every output file.  The data rows are
// reproducible byte-for-byte from (command, parameters, seed); the manifest
// additionally records when the file was written and a digest of its bytes.
struct RunManifest {
  std::string command;                // CLI subcommand
  std::string scheme;                 // empty when not scheme-specific
  nlohmann::json parameters;          // resolved parameter set
  std::optional<std::uint64_t> seed;  // present for Monte Carlo runs
  std::string output_path;
};

inline nlohmann::json manifest_json(const RunManifest& manifest,
                                    std::string_view payload) {
  nlohmann::json j;
  j["tool"] = "entsim";
  j["version"] = kVersion;
  j["command"] = manifest.command;
  if (!manifest.scheme.empty()) j["scheme"] = manifest.scheme;
  j["parameters"] = manifest.parameters;
  if (manifest.seed) j["seed"] = *manifest.seed;
  j["written_utc"] = iso8601_utc_now();
  j["output"] = manifest.output_path;
  char digest[32];
  std::snprintf(digest, sizeof digest, "fnv1a64:%016llx",
                static_cast<unsigned long long>(fnv1a64(payload)));
  j["digest"] = digest;
  return j;
}

// Chooses where an output file goes: an explicit path wins, otherwise the
// ENTSIM_OUT_DIR environment variable prefixes the default name.
inline std::string resolve_output_path(const std::string& explicit_path,
                                       const std::string& default_name) {
  if (!explicit_path.empty()) return explicit_path;
  if (const char* dir = std::getenv("ENTSIM_OUT_DIR"); dir && *dir)
    return std::string(dir) + "/" + default_name;
  return default_name;
}

// Writes payload to path and the manifest to <path>.manifest.json.
inline void write_output_with_manifest(const std::string& path,
                                       std::string_view payload,
                                       RunManifest manifest) {
  manifest.output_path = path;
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::ios_base::failure("cannot open output file: " + path);
    out << payload;
    out.flush();
    if (!out) throw std::ios_base::failure("write failed: " + path);
  }
  const std::string manifest_path = path + ".manifest.json";
  std::ofstream out(manifest_path, std::ios::binary);
  if (!out)
    throw std::ios_base::failure("cannot open manifest: " + manifest_path);
  out << manifest_json(manifest, payload).dump(2) << "\n";
  out.flush();
  if (!out) throw std::ios_base::failure("write failed: " + manifest_path);
}

}  // namespace entsim
