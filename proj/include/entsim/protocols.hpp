#pragma once

// The three concrete entanglement-generation protocols:
//
//   1cw  — continuous weak driving of two atoms; each atom scatters at
//          most one Raman photon (emission probability p1) and the two
//          emission paths interfere on a beam splitter.  One click
//          heralds the atomic Bell state |Psi+> up to a two-photon
//          admixture.
//   1pls — pulsed cavity-assisted version: a partial Raman transfer with
//          probability eps^2 deposits a photon in each node's cavity,
//          which leaks out (rate kappa) toward the beam splitter.
//   2ph  — two-photon coincidence scheme: both atoms decay from an
//          excited state into two polarization channels; coincident
//          cross-polarized clicks project onto a Bell state exactly.
//
// Each scheme gets (a) closed-form efficiency expressions in terms of the
// effective one-photon probability, and (b) a full model (initial state,
// jump channels, detector ports) consumable by the unraveling engine.
// Windows and rates are dimensionless (units of the scheme's base rate)
// unless the caller supplies explicit rates.

#include <array>
#include <limits>
#include <optional>

#include "entsim/unraveling.hpp"

namespace entsim {

// Success probability / conditional fidelity / average fidelity of one
// protocol execution.
struct EfficiencyTriple {
  double P_suc;
  double F;
  double F_avg;
};

inline EfficiencyTriple make_triple(double p_suc, double f) {
  if (p_suc < -1e-15 || p_suc > 1.0 + 1e-12)
    throw std::invalid_argument("EfficiencyTriple: P_suc outside [0,1]");
  if (f < -1e-15 || f > 1.0 + 1e-12)
    throw std::invalid_argument("EfficiencyTriple: F outside [0,1]");
  return EfficiencyTriple{p_suc, f, p_suc * f};
}

// --- continuous-wave one-photon scheme -----------------------------------

struct SchemeParams1cw {
  double gamma_eg = 1.0;       // effective spontaneous-Raman rate
  double t_cw = 0.0;           // detection window
  double eta = 0.0;            // detection efficiency
  std::optional<double> p1;    // emission probability, overrides (gamma, t)

  void validate() const {
    if (!(gamma_eg > 0.0)) throw std::invalid_argument("1cw: gamma_eg <= 0");
    if (t_cw < 0.0) throw std::invalid_argument("1cw: negative window");
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("1cw: eta outside [0,1]");
    if (p1 && (*p1 < 0.0 || *p1 > 1.0))
      throw std::invalid_argument("1cw: p1 outside [0,1]");
  }

  // p1 = 1 - exp(-gamma_eg t_cw) unless given directly.
  double emission_probability() const {
    validate();
    return p1 ? *p1 : -std::expm1(-gamma_eg * t_cw);
  }

  // Window in units of 1/gamma_eg reproducing the effective p1.
  double scaled_window() const {
    if (p1) {
      if (*p1 >= 1.0) throw std::invalid_argument("1cw: window infinite at p1=1");
      return -std::log1p(-*p1);
    }
    return gamma_eg * t_cw;
  }

  static SchemeParams1cw from_p1(double p1, double eta) {
    SchemeParams1cw p;
    p.eta = eta;
    p.p1 = p1;
    p.validate();
    return p;
  }
};

inline EfficiencyTriple eval_1cw(const SchemeParams1cw& params) {
  const double p = params.emission_probability();
  const double eta = params.eta;
  const double p_suc = 2.0 * eta * p * (1.0 - eta * p);
  const double den = 1.0 - eta * p;
  const double f = den > 1e-15 ? (1.0 - p) / den : 1.0;
  return make_triple(p_suc, f);
}

// --- pulsed cavity-assisted one-photon scheme ----------------------------

struct SchemeParams1pls {
  double eps2 = 0.0;    // Raman-transfer probability |eps|^2
  double kappa = 1.0;   // cavity field decay rate (emission rate; R = kappa/2)
  double t = 0.0;       // detection window
  double eta = 0.0;

  void validate() const {
    if (eps2 < 0.0 || eps2 > 1.0) throw std::invalid_argument("1pls: eps2 outside [0,1]");
    if (!(kappa > 0.0)) throw std::invalid_argument("1pls: kappa <= 0");
    if (t < 0.0) throw std::invalid_argument("1pls: negative window");
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("1pls: eta outside [0,1]");
  }

  // p_cav = eps^2 (1 - exp(-kappa t)): probability that a photon was
  // deposited and has left its cavity within the window.
  double p_cav() const {
    validate();
    return eps2 * -std::expm1(-kappa * t);
  }

  // Named constructor fixing the window from a target p_cav.
  static SchemeParams1pls from_pcav(double eps2, double eta, double pcav,
                                    double kappa = 1.0) {
    if (pcav < 0.0 || pcav > eps2)
      throw std::invalid_argument("1pls: p_cav outside [0, eps2]");
    SchemeParams1pls p;
    p.eps2 = eps2;
    p.kappa = kappa;
    p.eta = eta;
    p.t = pcav < eps2 ? -std::log1p(-pcav / eps2) / kappa
                      : std::numeric_limits<double>::infinity();
    p.validate();
    return p;
  }
};

inline EfficiencyTriple eval_1pls(const SchemeParams1pls& params) {
  const double p = params.p_cav();
  const double eta = params.eta;
  const double p_suc = 2.0 * eta * p * (1.0 - eta * p);
  const double den = 1.0 - eta * p;
  const double f = den > 1e-15 ? (1.0 - params.eps2) / den : 1.0;
  return make_triple(p_suc, f);
}

// --- two-photon coincidence scheme ---------------------------------------

// Which coincidence patterns count as success: both Bell outcomes (half of
// the two-photon events) or a single Bell state (a quarter).
enum class BellSubset { half, quarter };

struct SchemeParams2ph {
  double gamma = 1.0;  // total decay rate; each polarization channel gamma/2
  double t = 0.0;      // detection window
  double eta = 0.0;
  BellSubset subset = BellSubset::half;

  void validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("2ph: gamma <= 0");
    if (t < 0.0) throw std::invalid_argument("2ph: negative window");
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("2ph: eta outside [0,1]");
  }

  // p2 = 1 - exp(-gamma t): probability that one atom has emitted.
  double p2() const {
    validate();
    return -std::expm1(-gamma * t);
  }

  static SchemeParams2ph from_p2(double p2, double eta, BellSubset subset) {
    if (p2 < 0.0 || p2 >= 1.0)
      throw std::invalid_argument("2ph: p2 outside [0,1)");
    SchemeParams2ph p;
    p.eta = eta;
    p.subset = subset;
    p.t = -std::log1p(-p2);
    p.validate();
    return p;
  }
};

inline EfficiencyTriple eval_2ph(const SchemeParams2ph& params) {
  const double p2 = params.p2();
  const double factor = params.subset == BellSubset::half ? 0.5 : 0.25;
  const double p_suc = factor * params.eta * params.eta * p2 * p2;
  return make_triple(p_suc, 1.0);  // coincidence projection is exact
}

// --- engine models --------------------------------------------------------

// Everything the unraveling engine needs to run one protocol.
struct ProtocolModel {
  HilbertSpace space;
  DensityOperator rho0;
  std::vector<JumpChannel> channels;
  std::vector<DetectorPort> ports;
  double window;     // detection window in the time units of the rates
  Vector psi_plus;   // target kets on the full space
  Vector psi_minus;
};

// 1cw: two effective two-level atoms (e = excited, g = ground), both
// initially excited; each decays once through its own channel.
inline ProtocolModel build_model(const SchemeParams1cw& params) {
  params.validate();
  const HilbertSpace space = two_qubit_space();
  const DensityOperator rho0 =
      DensityOperator::from_ket(space, basis_ket(space, {"e", "e"}));

  const HilbertSpace qubit({2}, {{"e", "g"}});
  const Operator sigma = ket_bra(qubit, {"g"}, {"e"});
  std::vector<JumpChannel> channels{
      {1, "", embed(sigma, space, 0), 1.0},
      {2, "", embed(sigma, space, 1), 1.0},
  };
  auto ports = beam_split_ports(channels, params.eta);

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Vector psi_plus = inv_sqrt2 * (basis_ket(space, {"e", "g"}) +
                                 basis_ket(space, {"g", "e"}));
  Vector psi_minus = inv_sqrt2 * (basis_ket(space, {"e", "g"}) -
                                  basis_ket(space, {"g", "e"}));
  return ProtocolModel{space,          rho0,
                       std::move(channels), std::move(ports),
                       params.scaled_window(), std::move(psi_plus),
                       std::move(psi_minus)};
}

// 1pls: atoms never decay; each node holds atom (x) cavity with the
// entangled preparation alpha|e,0> + eps|g,1>, and the cavity fields leak
// toward the detectors.  Factor order: atom1, atom2, cavity1, cavity2.
inline ProtocolModel build_model(const SchemeParams1pls& params) {
  params.validate();
  const HilbertSpace space({2, 2, 2, 2},
                           {{"e", "g"}, {"e", "g"}, {"0", "1"}, {"0", "1"}});
  const double eps = std::sqrt(params.eps2);
  const double alpha = std::sqrt(1.0 - params.eps2);
  Vector psi0 = alpha * alpha * basis_ket(space, {"e", "e", "0", "0"}) +
                alpha * eps * basis_ket(space, {"e", "g", "0", "1"}) +
                eps * alpha * basis_ket(space, {"g", "e", "1", "0"}) +
                eps * eps * basis_ket(space, {"g", "g", "1", "1"});
  const DensityOperator rho0 = DensityOperator::from_ket(space, psi0);

  const HilbertSpace mode({2}, {{"0", "1"}});
  const Operator annihilate = ket_bra(mode, {"0"}, {"1"});
  std::vector<JumpChannel> channels{
      {1, "", embed(annihilate, space, 2), 1.0},
      {2, "", embed(annihilate, space, 3), 1.0},
  };
  auto ports = beam_split_ports(channels, params.eta);

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Vector psi_plus = inv_sqrt2 * (basis_ket(space, {"e", "g", "0", "0"}) +
                                 basis_ket(space, {"g", "e", "0", "0"}));
  Vector psi_minus = inv_sqrt2 * (basis_ket(space, {"e", "g", "0", "0"}) -
                                  basis_ket(space, {"g", "e", "0", "0"}));
  return ProtocolModel{space,          rho0,
                       std::move(channels), std::move(ports),
                       params.kappa * params.t, std::move(psi_plus),
                       std::move(psi_minus)};
}

// 2ph: two three-level atoms start in the upper state |r> and decay into
// |e> or |g>, emitting distinguishable polarizations; each polarization
// pair interferes on its own beam splitter.
inline ProtocolModel build_model(const SchemeParams2ph& params) {
  params.validate();
  const HilbertSpace space({3, 3}, {{"e", "g", "r"}, {"e", "g", "r"}});
  const DensityOperator rho0 =
      DensityOperator::from_ket(space, basis_ket(space, {"r", "r"}));

  const HilbertSpace atom({3}, {{"e", "g", "r"}});
  std::vector<JumpChannel> channels;
  for (const std::string& pol : {"e", "g"}) {
    const Operator lower = ket_bra(atom, {pol}, {"r"});
    channels.push_back({1, pol, embed(lower, space, 0), 0.5});
    channels.push_back({2, pol, embed(lower, space, 1), 0.5});
  }
  auto ports = beam_split_ports(channels, params.eta);

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  Vector psi_plus = inv_sqrt2 * (basis_ket(space, {"e", "g"}) +
                                 basis_ket(space, {"g", "e"}));
  Vector psi_minus = inv_sqrt2 * (basis_ket(space, {"e", "g"}) -
                                  basis_ket(space, {"g", "e"}));
  return ProtocolModel{space,          rho0,
                       std::move(channels), std::move(ports),
                       params.gamma * params.t, std::move(psi_plus),
                       std::move(psi_minus)};
}

// One two-click coincidence pattern of the 2ph scheme: the pair of port
// labels and the Bell state (+1 -> |Psi+>, -1 -> |Psi->) it projects onto.
struct BellPattern {
  std::array<std::string, 2> ports;
  int target_sign;
};

// The four cross-polarized patterns that herald a Bell state.  Same-sign
// port pairs herald |Psi+>, opposite-sign pairs |Psi->.
inline const std::vector<BellPattern>& bell_patterns() {
  static const std::vector<BellPattern> patterns{
      {{"D+e", "D+g"}, +1},
      {{"D-e", "D-g"}, +1},
      {{"D+e", "D-g"}, -1},
      {{"D-e", "D+g"}, -1},
  };
  return patterns;
}

// --- scheme identifiers ---------------------------------------------------

enum class Scheme { one_cw, one_pls, two_ph };

inline Scheme scheme_from_id(const std::string& id) {
  if (id == "1cw") return Scheme::one_cw;
  if (id == "1pls") return Scheme::one_pls;
  if (id == "2ph") return Scheme::two_ph;
  throw std::invalid_argument("unknown scheme id: " + id);
}

inline const char* scheme_id(Scheme scheme) {
  switch (scheme) {
    case Scheme::one_cw: return "1cw";
    case Scheme::one_pls: return "1pls";
    case Scheme::two_ph: return "2ph";
  }
  throw std::logic_error("scheme_id: invalid enum value");
}

// --- experimental-rate helpers (weak-drive spontaneous Raman) ------------

struct RamanRateParams {
  double omega_er;  // drive Rabi frequency
  double gamma_r;   // total decay rate of the upper level
  double gamma_rg;  // partial rate into the useful ground state
  double gamma_rd;  // partial rate into the dark/loss state

  void validate() const {
    if (omega_er < 0.0 || gamma_r < 0.0 || gamma_rg < 0.0 || gamma_rd < 0.0)
      throw std::invalid_argument("RamanRateParams: negative rate");
    if (gamma_rg + gamma_rd > gamma_r * (1.0 + 1e-12))
      throw std::invalid_argument("RamanRateParams: partial rates exceed total");
  }
};

struct RamanRates {
  double gamma_eff;  // effective scattering rate gamma'
  double alpha_rg;   // branching ratio into the useful ground state
};

// gamma' = (Omega^2 / Gamma_r^2)(Gamma_rg + Gamma_rD),
// alpha_rg = Gamma_rg / (Gamma_rg + Gamma_rD).
inline RamanRates raman_rates(const RamanRateParams& params) {
  params.validate();
  const double branch_total = params.gamma_rg + params.gamma_rd;
  if (branch_total <= 0.0)
    throw std::invalid_argument("raman_rates: no decay channels");
  const double ratio = params.omega_er / params.gamma_r;
  return RamanRates{ratio * ratio * branch_total,
                    params.gamma_rg / branch_total};
}

// p1 = alpha_rg (1 - exp(-gamma' T)): emission probability including the
// branching loss into the dark state.
inline double p1_experimental(double gamma_eff, double alpha_rg, double t_cw) {
  if (gamma_eff < 0.0 || t_cw < 0.0)
    throw std::invalid_argument("p1_experimental: negative input");
  if (alpha_rg < 0.0 || alpha_rg > 1.0)
    throw std::invalid_argument("p1_experimental: alpha_rg outside [0,1]");
  return alpha_rg * -std::expm1(-gamma_eff * t_cw);
}

}  // namespace entsim
