#pragma once

// Photon-counting unraveling of the emission master equation
//
//   d rho/dt = (L + J) rho,
//   L rho = -sum_ch R_ch (A^dag A rho + rho A^dag A),   R_ch = rate_ch / 2
//   J rho = sum_ch rate_ch A rho A^dag,
//
// split by detection efficiency eta into a click part C = eta J and an
// unobserved part (1-eta) J.  Evolution conditioned on silent detectors is
// generated by K = L + (1-eta) J.  Detector ports d = (A1 +/- A2)/sqrt(2)
// resolve C into per-port click maps C_p = rate eta d rho d^dag.
//
// Detection-scenario probabilities and conditioned states are computed by
// augmenting K with click-counting sectors (block lower-bidiagonal
// generator; sector n = exactly n clicks so far), so the time-ordered
// integrals come out of a single exponential action.  An adaptive-Simpson
// quadrature route is provided as an independent cross-check, and a
// quantum-jump Monte Carlo sampler estimates the same statistics.

#include <array>
#include <cstdint>
#include <optional>
#include <utility>

#include "entsim/superoperator.hpp"

namespace entsim {

// One spontaneous-emission pathway of one emitter.
struct JumpChannel {
  int emitter;          // 1 or 2
  std::string channel;  // which-path label (polarization etc.); "" if single
  Operator op;          // lowering operator A
  double rate;          // photon emission rate (full rate, i.e. 2R)
};

// One detector behind the beam splitter.
struct DetectorPort {
  int sign;             // +1 or -1 (beam-splitter output arm)
  std::string channel;  // matches JumpChannel::channel
  Operator op;          // d = (A1 + sign*A2)/sqrt(2)
  double efficiency;    // eta in [0,1]

  std::string label() const {
    return std::string("D") + (sign > 0 ? "+" : "-") + channel;
  }
};

// Standard wiring: for every channel label, the two emitters' operators
// interfere on a 50:50 beam splitter giving ports d+- = (A1 +- A2)/sqrt(2).
inline std::vector<DetectorPort> beam_split_ports(
    const std::vector<JumpChannel>& channels, double eta) {
  std::vector<std::string> labels;
  for (const auto& ch : channels)
    if (std::find(labels.begin(), labels.end(), ch.channel) == labels.end())
      labels.push_back(ch.channel);
  std::vector<DetectorPort> ports;
  for (const auto& label : labels) {
    const Operator* a1 = nullptr;
    const Operator* a2 = nullptr;
    for (const auto& ch : channels) {
      if (ch.channel != label) continue;
      if (ch.emitter == 1) a1 = &ch.op;
      if (ch.emitter == 2) a2 = &ch.op;
    }
    if (!a1 || !a2)
      throw std::invalid_argument("beam_split_ports: need both emitters per channel");
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int sign : {+1, -1}) {
      Matrix d = inv_sqrt2 * (a1->mat + static_cast<double>(sign) * a2->mat);
      ports.push_back(DetectorPort{sign, label, Operator(a1->space, std::move(d)),
                                   eta});
    }
  }
  return ports;
}

// The maps of the unraveling, pre-assembled on one space.
struct SuperoperatorBundle {
  HilbertSpace space;
  double eta = 0.0;
  std::vector<JumpChannel> channels;
  std::vector<DetectorPort> ports;
  std::vector<double> port_rates;     // emission rate feeding each port
  Superoperator damping;              // L
  Superoperator jump;                 // J
  Superoperator click;                // C = eta J
  std::vector<Superoperator> port_click;  // C_p per port
  Superoperator no_click_gen;         // K = L + (1-eta) J
};

// Assembles and validates the bundle.  Throws on mismatched spaces,
// efficiency outside [0,1], non-uniform efficiency, non-positive rates,
// or wiring that breaks the beam-splitter identities
//   sum_p rate_p d^dag d = sum_ch rate_ch A^dag A   and   sum_p C_p = C.
inline SuperoperatorBundle build_bundle(std::vector<JumpChannel> channels,
                                        std::vector<DetectorPort> ports) {
  if (channels.empty()) throw std::invalid_argument("build_bundle: no channels");
  const HilbertSpace space = channels.front().op.space;
  const int d = space.dim();
  for (const auto& ch : channels) {
    if (ch.op.space != space)
      throw std::invalid_argument("build_bundle: channel space mismatch");
    if (!(ch.rate > 0.0))
      throw std::invalid_argument("build_bundle: channel rate must be > 0");
  }
  double eta = 0.0;
  for (std::size_t p = 0; p < ports.size(); ++p) {
    if (ports[p].op.space != space)
      throw std::invalid_argument("build_bundle: port space mismatch");
    if (ports[p].efficiency < 0.0 || ports[p].efficiency > 1.0)
      throw std::invalid_argument("build_bundle: efficiency outside [0,1]");
    if (p > 0 && ports[p].efficiency != ports.front().efficiency)
      throw std::invalid_argument("build_bundle: efficiency not uniform");
  }
  if (!ports.empty()) eta = ports.front().efficiency;

  const Matrix id = Matrix::Identity(d, d);
  Matrix g_sum = Matrix::Zero(d, d);        // sum_ch R_ch A^dag A
  Matrix jump_mat = Matrix::Zero(d * d, d * d);
  for (const auto& ch : channels) {
    const Matrix aa = ch.op.mat.adjoint() * ch.op.mat;
    g_sum += 0.5 * ch.rate * aa;
    jump_mat += ch.rate *
        Eigen::kroneckerProduct(ch.op.mat.conjugate().eval(), ch.op.mat);
  }
  Matrix damping_mat = -(Eigen::kroneckerProduct(id, g_sum).eval() +
                         Eigen::kroneckerProduct(g_sum.transpose().eval(), id));

  // Per-port click maps; the feeding rate is the (uniform) rate of the
  // channels carrying the port's label.
  std::vector<double> port_rates;
  std::vector<Superoperator> port_click;
  Matrix click_sum = Matrix::Zero(d * d, d * d);
  Matrix dd_sum = Matrix::Zero(d, d);
  for (const auto& port : ports) {
    double rate = -1.0;
    for (const auto& ch : channels) {
      if (ch.channel != port.channel) continue;
      if (rate < 0.0)
        rate = ch.rate;
      else if (std::abs(rate - ch.rate) > 1e-12 * rate)
        throw std::invalid_argument("build_bundle: unequal rates on one channel label");
    }
    if (rate < 0.0)
      throw std::invalid_argument("build_bundle: port label matches no channel");
    port_rates.push_back(rate);
    Matrix cp = rate * eta *
        Eigen::kroneckerProduct(port.op.mat.conjugate().eval(), port.op.mat);
    click_sum += cp;
    dd_sum += rate * (port.op.mat.adjoint() * port.op.mat);
    port_click.emplace_back(space, std::move(cp));
  }

  Matrix click_mat = eta * jump_mat;
  if (!ports.empty()) {
    Matrix aa_sum = 2.0 * g_sum;  // sum_ch rate_ch A^dag A
    if ((dd_sum - aa_sum).cwiseAbs().maxCoeff() > tol::exact)
      throw std::invalid_argument("build_bundle: ports do not resolve the channels "
                                  "(beam-splitter identity violated)");
    if ((click_sum - click_mat).cwiseAbs().maxCoeff() >
        tol::exact * std::max(1.0, eta))
      throw std::invalid_argument("build_bundle: port clicks do not sum to C");
  }

  Matrix no_click_mat = damping_mat + (1.0 - eta) * jump_mat;
  return SuperoperatorBundle{space,
                             eta,
                             std::move(channels),
                             std::move(ports),
                             std::move(port_rates),
                             Superoperator(space, std::move(damping_mat)),
                             Superoperator(space, std::move(jump_mat)),
                             Superoperator(space, std::move(click_mat)),
                             std::move(port_click),
                             Superoperator(space, std::move(no_click_mat))};
}

inline std::size_t find_port(const SuperoperatorBundle& bundle,
                             const std::string& label) {
  for (std::size_t p = 0; p < bundle.ports.size(); ++p)
    if (bundle.ports[p].label() == label) return p;
  throw std::invalid_argument("find_port: no port labelled '" + label + "'");
}

// U(tau) = exp(K tau), the evolution conditioned on silent detectors.
inline Superoperator no_click_propagator(const SuperoperatorBundle& bundle,
                                         double tau) {
  if (tau < 0.0)
    throw std::invalid_argument("no_click_propagator: negative time");
  return expm(bundle.no_click_gen, tau);
}

namespace detail {

inline double trace_of_vec(const Vector& v, int d) {
  Complex tr = 0.0;
  for (int i = 0; i < d; ++i) tr += v(static_cast<Eigen::Index>(i) * d + i);
  return tr.real();
}

// Runs the click-counting evolution with the given feed chain and returns
// the sector vectors at time t.
inline SectorVector counting_run(const SuperoperatorBundle& bundle,
                                 const DensityOperator& rho0, double t,
                                 std::vector<Matrix> feeds) {
  if (t < 0.0) throw std::invalid_argument("counting_run: negative time");
  if (!rho0.is_normalized())
    throw std::invalid_argument("counting_run: initial state must be normalized");
  if (rho0.space() != bundle.space)
    throw std::invalid_argument("counting_run: state/bundle space mismatch");
  CountingGenerator gen{bundle.no_click_gen.mat, std::move(feeds)};
  SectorVector v(static_cast<std::size_t>(gen.sectors()));
  const Eigen::Index d2 =
      static_cast<Eigen::Index>(bundle.space.dim()) * bundle.space.dim();
  v[0] = vec(rho0.matrix());
  for (std::size_t n = 1; n < v.size(); ++n) v[n] = Vector::Zero(d2);
  return counting_expm_apply(gen, t, std::move(v));
}

}  // namespace detail

// Probabilities of recording exactly 0, 1, or 2 clicks in [0, t],
// irrespective of which port fires.
inline std::array<double, 3> scenario_probabilities(
    const SuperoperatorBundle& bundle, const DensityOperator& rho0, double t) {
  const auto sectors =
      detail::counting_run(bundle, rho0, t, {bundle.click.mat, bundle.click.mat});
  const int d = bundle.space.dim();
  return {detail::trace_of_vec(sectors[0], d),
          detail::trace_of_vec(sectors[1], d),
          detail::trace_of_vec(sectors[2], d)};
}

// Quadrature cross-check of scenario_probabilities: evaluates the
// time-ordered integrals directly with adaptive Simpson.  Intended for
// small spaces; throws ConvergenceError if refinement stalls.
inline std::array<double, 3> scenario_probabilities_quadrature(
    const SuperoperatorBundle& bundle, const DensityOperator& rho0, double t,
    double rel_tol = tol::quadrature) {
  if (t < 0.0) throw std::invalid_argument("negative time");
  const Matrix& k_mat = bundle.no_click_gen.mat;
  const Matrix& c_mat = bundle.click.mat;
  const int d = bundle.space.dim();
  const Vector v0 = vec(rho0.matrix());

  const double p0 = detail::trace_of_vec(expm_apply(k_mat, t, v0), d);

  auto one_click_integrand = [&](double s) -> Matrix {
    Vector w = expm_apply(k_mat, s, v0);
    w = c_mat * w;
    w = expm_apply(k_mat, t - s, w);
    return unvec(w, d);
  };
  const double p1 =
      integrate_adaptive(one_click_integrand, 0.0, t, rel_tol).trace().real();

  auto two_click_integrand = [&](double s2) -> Matrix {
    auto inner = [&](double s1) -> Matrix {
      Vector w = expm_apply(k_mat, s1, v0);
      w = c_mat * w;
      w = expm_apply(k_mat, s2 - s1, w);
      return unvec(w, d);
    };
    Vector w = vec(integrate_adaptive(inner, 0.0, s2, rel_tol));
    w = c_mat * w;
    w = expm_apply(k_mat, t - s2, w);
    return unvec(w, d);
  };
  const double p2 =
      integrate_adaptive(two_click_integrand, 0.0, t, rel_tol).trace().real();

  return {p0, p1, p2};
}

// State conditioned on exactly one click, at the given port, in [0, t]:
// integral of U(t-s) C_p U(s) rho0 over s.  Returns (probability,
// normalized state); throws NullEventError below probability 1e-15.
inline std::pair<double, DensityOperator> conditional_state_one_click(
    const SuperoperatorBundle& bundle, const DensityOperator& rho0,
    std::size_t port, double t) {
  if (port >= bundle.ports.size())
    throw std::invalid_argument("conditional_state_one_click: no such port");
  const auto sectors =
      detail::counting_run(bundle, rho0, t, {bundle.port_click[port].mat});
  const int d = bundle.space.dim();
  const double prob = detail::trace_of_vec(sectors[1], d);
  if (prob < 1e-15)
    throw NullEventError("conditional_state_one_click: null event");
  return {prob, DensityOperator(bundle.space, unvec(sectors[1], d) / prob)};
}

// State conditioned on exactly two clicks at the given (unordered) ports;
// both time orderings are summed when the ports differ.
inline std::pair<double, DensityOperator> conditional_state_two_clicks(
    const SuperoperatorBundle& bundle, const DensityOperator& rho0,
    std::size_t port_a, std::size_t port_b, double t) {
  if (port_a >= bundle.ports.size() || port_b >= bundle.ports.size())
    throw std::invalid_argument("conditional_state_two_clicks: no such port");
  const Matrix& ca = bundle.port_click[port_a].mat;
  const Matrix& cb = bundle.port_click[port_b].mat;
  Vector sector2 = detail::counting_run(bundle, rho0, t, {ca, cb})[2];
  if (port_a != port_b)
    sector2 += detail::counting_run(bundle, rho0, t, {cb, ca})[2];
  const int d = bundle.space.dim();
  const double prob = detail::trace_of_vec(sector2, d);
  if (prob < 1e-15)
    throw NullEventError("conditional_state_two_clicks: null event");
  return {prob, DensityOperator(bundle.space, unvec(sector2, d) / prob)};
}

// Deviation of the normalized one-click state from click-at-the-end, i.e.
// max over the tau grid of || rhobar(t; click at tau) - rhobar(t; click at
// t) ||_maxabs.  Vanishes (to roundoff) whenever each emitter can emit at
// most once into the monitored channels; order-one values flag models
// that violate that assumption.
inline double tau_independence_check(const SuperoperatorBundle& bundle,
                                     const DensityOperator& rho0,
                                     std::size_t port, double t,
                                     const std::vector<double>& tau_grid) {
  if (port >= bundle.ports.size())
    throw std::invalid_argument("tau_independence_check: no such port");
  if (!rho0.is_normalized())
    throw std::invalid_argument("tau_independence_check: state not normalized");
  const Matrix& k_mat = bundle.no_click_gen.mat;
  const Matrix& cp = bundle.port_click[port].mat;
  const int d = bundle.space.dim();
  const Vector v0 = vec(rho0.matrix());

  Vector ref = cp * expm_apply(k_mat, t, v0);
  const double ref_tr = detail::trace_of_vec(ref, d);
  if (std::abs(ref_tr) < 1e-15)
    throw NullEventError("tau_independence_check: null reference event");
  ref /= ref_tr;

  double max_dev = 0.0;
  for (double tau : tau_grid) {
    if (tau < 0.0 || tau > t)
      throw std::invalid_argument("tau_independence_check: tau outside [0, t]");
    Vector w = expm_apply(k_mat, tau, v0);
    w = cp * w;
    w = expm_apply(k_mat, t - tau, w);
    const double tr = detail::trace_of_vec(w, d);
    if (std::abs(tr) < 1e-15)
      throw NullEventError("tau_independence_check: null event at tau");
    w /= tr;
    max_dev = std::max(max_dev, (w - ref).cwiseAbs().maxCoeff());
  }
  return max_dev;
}

// Detected-click record of one trajectory.
struct ClickRecord {
  double window = 0.0;
  std::vector<std::pair<double, std::size_t>> clicks;  // (time, port index)

  ClickRecord(double window_, std::vector<std::pair<double, std::size_t>> clicks_)
      : window(window_), clicks(std::move(clicks_)) {
    double prev = 0.0;
    bool first = true;
    for (const auto& [time, port] : clicks) {
      (void)port;
      if (time < 0.0 || time > window)
        throw std::invalid_argument("ClickRecord: click outside window");
      if (!first && time <= prev)
        throw std::invalid_argument("ClickRecord: times not strictly increasing");
      prev = time;
      first = false;
    }
  }
};

struct MonteCarloResult {
  std::size_t n_traj = 0;
  std::array<double, 3> scenario{};  // empirical frequencies of 0/1/2 clicks
  double p_extra = 0.0;              // frequency of 3 or more clicks
  std::vector<std::size_t> port_clicks;      // total clicks per port
  std::vector<std::size_t> one_click_traj;   // trajectories with a single
                                             // click, by port
  std::vector<std::optional<DensityOperator>> one_click_state;  // averaged
};

namespace detail {

// Small deterministic per-trajectory RNG; substream seeds are derived by
// hashing the master seed with the trajectory index so streams neither
// overlap nor depend on execution order.
struct SplitMix64 {
  std::uint64_t state;
  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  double uniform() {  // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }
};

inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
  SplitMix64 mix{master ^ (0xD1B54A32D192ED03ull * (index + 1))};
  mix.next();
  return mix.next();
}

}  // namespace detail

// Quantum-jump sampling of the click statistics: no-jump intervals drawn
// from the survival law under the damping generator, each jump collapsed
// and classified as detected with probability eta (port chosen by click
// weight) or undetected (channel chosen by emission weight).  Results are
// reproducible bit-for-bit for a given seed: trajectories use hashed
// substreams and are reduced in index order.
inline MonteCarloResult monte_carlo(const SuperoperatorBundle& bundle,
                                    const DensityOperator& rho0, double t,
                                    std::size_t n_traj, std::uint64_t seed) {
  if (n_traj < 1) throw std::invalid_argument("monte_carlo: n_traj < 1");
  if (t < 0.0) throw std::invalid_argument("monte_carlo: negative time");
  if (rho0.space() != bundle.space)
    throw std::invalid_argument("monte_carlo: state/bundle space mismatch");
  const int d = bundle.space.dim();

  // Damping generator G = sum_ch (rate/2) A^dag A, eigendecomposed once;
  // the no-jump ket evolves as exp(-G tau) psi.
  Matrix g_sum = Matrix::Zero(d, d);
  for (const auto& ch : bundle.channels)
    g_sum += 0.5 * ch.rate * (ch.op.mat.adjoint() * ch.op.mat);
  Eigen::SelfAdjointEigenSolver<Matrix> es(g_sum);
  const Matrix& v_basis = es.eigenvectors();
  RealVector lambda = es.eigenvalues().cwiseMax(0.0);

  // Initial-state ensemble (spectral decomposition of rho0).
  Eigen::SelfAdjointEigenSolver<Matrix> es0(rho0.matrix());
  std::vector<double> init_weight;
  std::vector<Vector> init_ket;
  for (int k = 0; k < d; ++k) {
    const double w = es0.eigenvalues()(k);
    if (w > 1e-14) {
      init_weight.push_back(w);
      init_ket.push_back(es0.eigenvectors().col(k));
    }
  }

  const std::size_t n_ports = bundle.ports.size();
  MonteCarloResult result;
  result.n_traj = n_traj;
  result.port_clicks.assign(n_ports, 0);
  result.one_click_traj.assign(n_ports, 0);
  std::vector<Matrix> state_acc(n_ports, Matrix::Zero(d, d));
  std::array<std::size_t, 3> scenario_count{};
  std::size_t extra_count = 0;

  for (std::size_t i = 0; i < n_traj; ++i) {
    detail::SplitMix64 rng{detail::substream_seed(seed, i)};

    // Draw the initial ket.
    double u_init = rng.uniform();
    std::size_t k0 = 0;
    for (double acc = 0.0; k0 + 1 < init_weight.size(); ++k0) {
      acc += init_weight[k0];
      if (u_init < acc) break;
    }
    Vector psi = init_ket[k0];

    double t_rem = t;
    double t_abs = 0.0;
    std::vector<std::pair<double, std::size_t>> clicks;
    while (true) {
      // Survival S(tau) = || exp(-G tau) psi ||^2 in the eigenbasis of G.
      Vector c = v_basis.adjoint() * psi;
      auto survival = [&](double tau) {
        double s = 0.0;
        for (int k = 0; k < d; ++k)
          s += std::norm(c(k)) * std::exp(-2.0 * lambda(k) * tau);
        return s;
      };
      const double u = rng.uniform();
      if (survival(t_rem) >= u) {
        // No further jump: propagate to the end of the window.
        Vector ce = c;
        for (int k = 0; k < d; ++k) ce(k) *= std::exp(-lambda(k) * t_rem);
        psi = v_basis * ce;
        psi.normalize();
        break;
      }
      // Bisect the jump time S(tau*) = u on [0, t_rem].
      double lo = 0.0, hi = t_rem;
      for (int it = 0; it < 64; ++it) {
        const double mid = 0.5 * (lo + hi);
        (survival(mid) >= u ? lo : hi) = mid;
      }
      const double tau_jump = 0.5 * (lo + hi);
      Vector ce = c;
      for (int k = 0; k < d; ++k) ce(k) *= std::exp(-lambda(k) * tau_jump);
      psi = v_basis * ce;
      psi.normalize();
      t_abs += tau_jump;
      t_rem -= tau_jump;

      // Classify the jump, then collapse.
      const bool detected = rng.uniform() < bundle.eta;
      const double u_sel = rng.uniform();
      if (detected && n_ports > 0) {
        std::vector<double> w(n_ports);
        double w_tot = 0.0;
        for (std::size_t p = 0; p < n_ports; ++p) {
          w[p] = bundle.port_rates[p] *
                 (bundle.ports[p].op.mat * psi).squaredNorm();
          w_tot += w[p];
        }
        std::size_t pick = n_ports - 1;
        double acc = 0.0;
        for (std::size_t p = 0; p < n_ports; ++p) {
          acc += w[p];
          if (u_sel * w_tot < acc) {
            pick = p;
            break;
          }
        }
        psi = bundle.ports[pick].op.mat * psi;
        psi.normalize();
        clicks.emplace_back(t_abs, pick);
      } else {
        const std::size_t n_ch = bundle.channels.size();
        std::vector<double> w(n_ch);
        double w_tot = 0.0;
        for (std::size_t ch = 0; ch < n_ch; ++ch) {
          w[ch] = bundle.channels[ch].rate *
                  (bundle.channels[ch].op.mat * psi).squaredNorm();
          w_tot += w[ch];
        }
        std::size_t pick = n_ch - 1;
        double acc = 0.0;
        for (std::size_t ch = 0; ch < n_ch; ++ch) {
          acc += w[ch];
          if (u_sel * w_tot < acc) {
            pick = ch;
            break;
          }
        }
        psi = bundle.channels[pick].op.mat * psi;
        psi.normalize();
      }
    }

    const ClickRecord record(t, clicks);  // validates ordering invariants
    const std::size_t n_clicks = record.clicks.size();
    if (n_clicks < 3)
      ++scenario_count[n_clicks];
    else
      ++extra_count;
    for (const auto& [time, port] : record.clicks) {
      (void)time;
      ++result.port_clicks[port];
    }
    if (n_clicks == 1) {
      const std::size_t port = record.clicks.front().second;
      ++result.one_click_traj[port];
      state_acc[port] += psi * psi.adjoint();
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n_traj);
  for (int k = 0; k < 3; ++k)
    result.scenario[static_cast<std::size_t>(k)] =
        static_cast<double>(scenario_count[static_cast<std::size_t>(k)]) * inv_n;
  result.p_extra = static_cast<double>(extra_count) * inv_n;
  result.one_click_state.assign(n_ports, std::nullopt);
  for (std::size_t p = 0; p < n_ports; ++p) {
    if (result.one_click_traj[p] == 0) continue;
    result.one_click_state[p] = DensityOperator(
        bundle.space,
        state_acc[p] / static_cast<double>(result.one_click_traj[p]));
  }
  return result;
}

}  // namespace entsim
