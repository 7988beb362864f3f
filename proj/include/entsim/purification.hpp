#pragma once

// Recurrence entanglement purification composed with the one-photon
// source.  Ground truth for one purification step is a brute-force
// two-pair (16x16) density-matrix simulation ("oracle"): local x-axis
// rotations (+pi/2 on Alice's qubits, -pi/2 on Bob's), bilateral CNOTs
// from the kept pair onto the measured pair, computational-basis
// measurement of the measured pair, and post-selection on coincident
// outcomes.  The Bell-diagonal coefficient recurrence is provided as an
// independent fast path and is validated against the oracle.
//
// Conventions (fixed here, documented in the README):
//   - Bell ordering: (A, B, C, D) = coefficients of (Phi+, Psi-, Psi+,
//     Phi-), with A the fidelity coordinate.
//   - Qubit values: basis index 0 = |e>, 1 = |g>; so Phi+ = (|ee>+|gg>)/
//     sqrt(2) and Psi+ = (|eg>+|ge>)/sqrt(2).
//   - Frame change for the source: X on the second qubit maps
//     |Psi+> <-> |Phi+> (involutive).
//   - Two-pair factor order: (A1, B1, A2, B2); pair 1 is kept, pair 2 is
//     measured.

#include "entsim/protocols.hpp"

namespace entsim {

namespace detail {

inline Vector bell_ket(const HilbertSpace& space, int i0, int i1, double sign) {
  if (space.dims() != std::vector<int>{2, 2})
    throw std::invalid_argument("bell ket: expected a two-qubit space");
  Vector v = Vector::Zero(space.dim());
  v(space.basis_index({i0, i1})) = 1.0 / std::sqrt(2.0);
  v(space.basis_index({1 - i0, 1 - i1})) = sign / std::sqrt(2.0);
  return v;
}

}  // namespace detail

inline Vector bell_phi_plus(const HilbertSpace& space) {
  return detail::bell_ket(space, 0, 0, +1.0);
}

inline Vector bell_phi_minus(const HilbertSpace& space) {
  return detail::bell_ket(space, 0, 0, -1.0);
}

inline Vector bell_psi_plus(const HilbertSpace& space) {
  return detail::bell_ket(space, 0, 1, +1.0);
}

inline Vector bell_psi_minus(const HilbertSpace& space) {
  return detail::bell_ket(space, 0, 1, -1.0);
}

// Probabilities over (Phi+, Psi-, Psi+, Phi-).
struct BellDiagonalState {
  double a, b, c, d;

  BellDiagonalState(double a_, double b_, double c_, double d_)
      : a(a_), b(b_), c(c_), d(d_) {
    for (double x : {a, b, c, d})
      if (x < -1e-12 || x > 1.0 + 1e-12)
        throw std::invalid_argument("BellDiagonalState: coefficient outside [0,1]");
    if (std::abs(a + b + c + d - 1.0) > tol::exact)
      throw std::invalid_argument("BellDiagonalState: coefficients do not sum to 1");
  }

  DensityOperator to_density() const {
    const HilbertSpace space = two_qubit_space();
    const Vector phi_p = bell_phi_plus(space);
    const Vector psi_m = bell_psi_minus(space);
    const Vector psi_p = bell_psi_plus(space);
    const Vector phi_m = bell_phi_minus(space);
    Matrix m = a * (phi_p * phi_p.adjoint()) + b * (psi_m * psi_m.adjoint()) +
               c * (psi_p * psi_p.adjoint()) + d * (phi_m * phi_m.adjoint());
    return DensityOperator(space, std::move(m));
  }

  static BellDiagonalState from_density(const DensityOperator& rho) {
    const HilbertSpace& space = rho.space();
    auto coeff = [&](const Vector& bell) {
      return (bell.adjoint() * rho.matrix() * bell)(0).real();
    };
    return BellDiagonalState(coeff(bell_phi_plus(space)),
                             coeff(bell_psi_minus(space)),
                             coeff(bell_psi_plus(space)),
                             coeff(bell_phi_minus(space)));
  }
};

// Largest deviation of rho from its projection onto the Bell diagonal.
inline double bell_diagonal_residual(const DensityOperator& rho) {
  const BellDiagonalState s = BellDiagonalState::from_density(
      DensityOperator(rho.space(), rho.matrix() / rho.trace()));
  return (rho.matrix() / rho.trace() - s.to_density().matrix())
      .cwiseAbs()
      .maxCoeff();
}

namespace detail {

inline Matrix cnot_4q(int control, int target) {
  Matrix m = Matrix::Zero(16, 16);
  for (int i = 0; i < 16; ++i) {
    int q[4] = {(i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1};
    if (q[control]) q[target] ^= 1;
    const int j = q[0] * 8 + q[1] * 4 + q[2] * 2 + q[3];
    m(j, i) = 1.0;
  }
  return m;
}

// Full local network of one purification step on (A1, B1, A2, B2).
inline const Matrix& purification_unitary() {
  static const Matrix u = [] {
    Matrix rx_plus(2, 2), rx_minus(2, 2);  // exp(-i (+/- pi/2) X / 2)
    const double s = 1.0 / std::sqrt(2.0);
    rx_plus << s, Complex(0, -s), Complex(0, -s), s;
    rx_minus << s, Complex(0, s), Complex(0, s), s;
    Matrix rot = Eigen::kroneckerProduct(
        Eigen::kroneckerProduct(rx_plus, rx_minus).eval(),
        Eigen::kroneckerProduct(rx_plus, rx_minus).eval());
    return Matrix(cnot_4q(1, 3) * cnot_4q(0, 2) * rot);
  }();
  return u;
}

inline const Matrix& coincidence_projector() {
  static const Matrix p = [] {
    Matrix m = Matrix::Zero(16, 16);
    for (int i = 0; i < 16; ++i) {
      const int a2 = (i >> 1) & 1, b2 = i & 1;
      if (a2 == b2) m(i, i) = 1.0;
    }
    return m;
  }();
  return p;
}

}  // namespace detail

// One purification step, simulated in full on two copies of the pair.
// Returns the post-selection probability N and the normalized surviving
// pair.  Throws NullEventError when the coincidence probability vanishes.
inline std::pair<double, DensityOperator> oracle_step(
    const DensityOperator& rho_pair) {
  if (rho_pair.space().dims() != std::vector<int>{2, 2})
    throw std::invalid_argument("oracle_step: expected a two-qubit pair");
  if (!rho_pair.is_normalized() ||
      std::abs(rho_pair.trace() - 1.0) > tol::structural)
    throw std::invalid_argument("oracle_step: pair state must be normalized");

  // Two-pair state on (A1, B1, A2, B2) = (pair1, pair2).
  Matrix two_pair =
      Eigen::kroneckerProduct(rho_pair.matrix(), rho_pair.matrix());
  const Matrix& u = detail::purification_unitary();
  two_pair = u * two_pair * u.adjoint();

  const Matrix& proj = detail::coincidence_projector();
  const Matrix kept = proj * two_pair * proj;
  const double n_prob = kept.trace().real();
  if (n_prob < 1e-15) throw NullEventError("oracle_step: null coincidence event");

  const HilbertSpace two_pair_space =
      HilbertSpace::join({rho_pair.space(), rho_pair.space()});
  const DensityOperator survivor = partial_trace(
      DensityOperator(two_pair_space, kept / n_prob), {0, 1});
  return {n_prob, survivor};
}

// Bell-coefficient recurrence for one step (fast path; agrees with
// oracle_step on Bell-diagonal inputs).  N is never zero for a valid
// input since (a+b) + (c+d) = 1.
inline std::pair<double, BellDiagonalState> recurrence_step(
    const BellDiagonalState& s) {
  const double n_prob = (s.a + s.b) * (s.a + s.b) + (s.c + s.d) * (s.c + s.d);
  return {n_prob, BellDiagonalState((s.a * s.a + s.b * s.b) / n_prob,
                                    2.0 * s.c * s.d / n_prob,
                                    (s.c * s.c + s.d * s.d) / n_prob,
                                    2.0 * s.a * s.b / n_prob)};
}

enum class BellFrame { to_phi, to_psi };

// X on the second qubit: |Psi+> <-> |Phi+>.  Involutive, so the direction
// parameter only documents intent.
inline DensityOperator bell_frame_rotation(const DensityOperator& rho,
                                           BellFrame direction) {
  (void)direction;
  if (rho.space().dims() != std::vector<int>{2, 2})
    throw std::invalid_argument("bell_frame_rotation: expected two qubits");
  static const Matrix u = [] {
    Matrix x(2, 2);
    x << 0, 1, 1, 0;
    return Matrix(
        Eigen::kroneckerProduct(Matrix(Matrix::Identity(2, 2)), x));
  }();
  return DensityOperator(rho.space(), u * rho.matrix() * u.adjoint(),
                         rho.is_normalized() ? Normalization::normalized
                                             : Normalization::subnormalized);
}

// A heralded pair delivered by a one-photon scheme: normalized state (in
// the |Psi+> frame) and the per-attempt success probability.
struct PairSource {
  DensityOperator rho_m;
  double p_suc;
};

// Closed-form source state of the cw scheme: F |Psi+><Psi+| +
// (1-F) |g,g><g,g| with F = (1-p1)/(1-eta p1).
inline PairSource pair_source_1cw(double p1, double eta) {
  const auto triple = eval_1cw(SchemeParams1cw::from_p1(p1, eta));
  const HilbertSpace space = two_qubit_space();
  const Vector psi_p = bell_psi_plus(space);
  const Vector gg = basis_ket(space, {"g", "g"});
  Matrix m = triple.F * (psi_p * psi_p.adjoint()) +
             (1.0 - triple.F) * (gg * gg.adjoint());
  return PairSource{DensityOperator(space, std::move(m)), triple.P_suc};
}

// Engine-derived source state: full unraveling of the cw model,
// conditioned on a single click at D+.
inline PairSource pair_source_1cw_engine(double p1, double eta) {
  const ProtocolModel model = build_model(SchemeParams1cw::from_p1(p1, eta));
  const auto bundle = build_bundle(model.channels, model.ports);
  const auto [prob, rho] = conditional_state_one_click(
      bundle, model.rho0, find_port(bundle, "D+"), model.window);
  return PairSource{rho, 2.0 * prob};  // both ports herald symmetrically
}

struct PurificationPlan {
  int J = 0;
  long n_pairs = 1;                  // 2^J
  std::vector<double> step_success;  // N_0 .. N_{J-1}
  double p_pur = 1.0;                // prod_{j=1..J} N_{j-1}^(2^(J-j))
  double P_pur = 0.0;                // p_suc * p_pur / 2^J
  double F_pur = 0.0;                // target overlap after the last step
  DensityOperator final_state;       // surviving pair, |Psi+> frame
};

// Runs J nested purification steps on 2^J source pairs (oracle step map
// on the average state), tracking per-step success probabilities and the
// resource-weighted overall success probability.
inline PurificationPlan run_plan(const PairSource& source, int steps_j) {
  if (steps_j < 0 || steps_j > 40)
    throw std::invalid_argument("run_plan: J outside [0, 40]");
  DensityOperator rho = bell_frame_rotation(source.rho_m, BellFrame::to_phi);
  std::vector<double> step_success;
  for (int j = 0; j < steps_j; ++j) {
    auto [n_prob, next] = oracle_step(rho);
    step_success.push_back(n_prob);
    rho = std::move(next);
  }
  double p_pur = 1.0;
  for (int j = 1; j <= steps_j; ++j)
    p_pur *= std::pow(step_success[static_cast<std::size_t>(j - 1)],
                      static_cast<double>(1L << (steps_j - j)));
  const double n_pairs = std::pow(2.0, steps_j);
  DensityOperator final_state = bell_frame_rotation(rho, BellFrame::to_psi);
  const double f_pur =
      fidelity(bell_psi_plus(final_state.space()), final_state);
  return PurificationPlan{steps_j,
                          static_cast<long>(n_pairs),
                          std::move(step_success),
                          p_pur,
                          source.p_suc * p_pur / n_pairs,
                          f_pur,
                          std::move(final_state)};
}

struct PurifiedLevel {
  int J;
  double F_pur;
  double P_pur;
  bool f_ok;  // F_pur > F_th
  bool p_ok;  // P_pur > eta^2/2  (two-photon comparison at p2 -> 1)
};

struct PurifiedRegionPoint {
  double p1;
  double eta;
  std::vector<PurifiedLevel> levels;
};

// Classifies every grid point of the closed-form cw source against the
// threshold fidelity and the two-photon success baseline, for each
// requested purification depth.  Strict inequalities; boundary ties fall
// outside.
inline std::vector<PurifiedRegionPoint> purified_region(
    const std::vector<double>& p1_grid, const std::vector<double>& eta_grid,
    double f_th, const std::vector<int>& j_list) {
  if (f_th <= 0.0 || f_th >= 1.0)
    throw std::invalid_argument("purified_region: F_th outside (0,1)");
  int j_max = 0;
  for (int j : j_list) {
    if (j < 0) throw std::invalid_argument("purified_region: negative J");
    j_max = std::max(j_max, j);
  }
  for (double p1 : p1_grid)
    if (p1 < 0.0 || p1 > 1.0)
      throw std::invalid_argument("purified_region: p1 outside [0,1]");
  for (double eta : eta_grid)
    if (eta < 0.0 || eta > 1.0)
      throw std::invalid_argument("purified_region: eta outside [0,1]");

  std::vector<PurifiedRegionPoint> out;
  out.reserve(p1_grid.size() * eta_grid.size());
  for (double p1 : p1_grid) {
    for (double eta : eta_grid) {
      const PairSource source = pair_source_1cw(p1, eta);
      // March the oracle once up to j_max, recording every level.
      std::vector<double> fid_at(1), n_probs;
      DensityOperator rho =
          bell_frame_rotation(source.rho_m, BellFrame::to_phi);
      fid_at[0] = fidelity(bell_phi_plus(rho.space()), rho);
      bool dead = false;
      for (int j = 0; j < j_max; ++j) {
        if (dead) break;
        try {
          auto [n_prob, next] = oracle_step(rho);
          n_probs.push_back(n_prob);
          rho = std::move(next);
          fid_at.push_back(fidelity(bell_phi_plus(rho.space()), rho));
        } catch (const NullEventError&) {
          dead = true;
        }
      }
      PurifiedRegionPoint point{p1, eta, {}};
      for (int j_val : j_list) {
        if (static_cast<std::size_t>(j_val) >= fid_at.size()) {
          point.levels.push_back(PurifiedLevel{j_val, 0.0, 0.0, false, false});
          continue;
        }
        double p_pur = 1.0;
        for (int j = 1; j <= j_val; ++j)
          p_pur *= std::pow(n_probs[static_cast<std::size_t>(j - 1)],
                            static_cast<double>(1L << (j_val - j)));
        const double p_total =
            source.p_suc * p_pur / std::pow(2.0, j_val);
        const double f_val = fid_at[static_cast<std::size_t>(j_val)];
        point.levels.push_back(PurifiedLevel{j_val, f_val, p_total,
                                             f_val > f_th,
                                             p_total > 0.5 * eta * eta});
      }
      out.push_back(std::move(point));
    }
  }
  return out;
}

}  // namespace entsim
