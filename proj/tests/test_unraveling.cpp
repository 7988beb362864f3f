// Photon-counting unraveling: jump/click split, no-click propagator,
// detection-scenario statistics, conditioned states, click-instant
// independence, and the quantum-jump sampler.

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <vector>

#include "entsim/entsim.hpp"

using namespace entsim;

namespace {

Matrix random_matrix(int d, std::uint64_t seed) {
  detail::SplitMix64 rng{seed};
  Matrix m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      m(i, j) = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
  return m;
}

DensityOperator random_density(const HilbertSpace& space, std::uint64_t seed) {
  const Matrix g = random_matrix(space.dim(), seed);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  return DensityOperator(space, rho);
}

// Two-level emitter with one monitored decay channel, wired straight to a
// single detector (trivial beam splitter).
SuperoperatorBundle single_emitter_bundle(double eta) {
  const HilbertSpace atom({2}, {{"e", "g"}});
  const Operator low = ket_bra(atom, {"g"}, {"e"});
  return build_bundle({JumpChannel{1, "", low, 1.0}},
                      {DetectorPort{+1, "", low, eta}});
}

// Three-level cascade r -> e -> g emitting twice into the same channel;
// violates the emit-at-most-once assumption on purpose.
SuperoperatorBundle recycling_bundle(double eta) {
  const HilbertSpace atom({3}, {{"r", "e", "g"}});
  const Matrix a_mat =
      ket_bra(atom, {"e"}, {"r"}).mat + ket_bra(atom, {"g"}, {"e"}).mat;
  const Operator a(atom, a_mat);
  return build_bundle({JumpChannel{1, "", a, 1.0}},
                      {DetectorPort{+1, "", a, eta}});
}

}  // namespace

TEST_CASE("beam splitter wiring produces the interference ports") {
  const auto model = build_model(SchemeParams1cw::from_p1(0.3, 0.5));
  const auto& space = model.space;
  const auto ports = beam_split_ports(model.channels, 0.5);

  REQUIRE(ports.size() == 2);
  CHECK(ports[0].label() == "D+");
  CHECK(ports[1].label() == "D-");

  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const int gg = space.basis_index({"g", "g"});
  const int eg = space.basis_index({"e", "g"});
  const int ge = space.basis_index({"g", "e"});
  for (const auto& port : ports) {
    // d = (A1 + sign A2)/sqrt(2): emitter 1 contributes |g,x><e,x|,
    // emitter 2 contributes sign |x,g><x,e|.
    CHECK(std::abs(port.op.mat(gg, eg) - Complex(inv_sqrt2)) < 1e-14);
    CHECK(std::abs(port.op.mat(gg, ge) - Complex(port.sign * inv_sqrt2)) <
          1e-14);
  }

  // Unitarity of the splitter: total click rate at eta=1 equals the total
  // emission rate, operatorwise.
  Matrix lhs = Matrix::Zero(space.dim(), space.dim());
  for (const auto& port : ports) lhs += port.op.mat.adjoint() * port.op.mat;
  Matrix rhs = Matrix::Zero(space.dim(), space.dim());
  for (const auto& ch : model.channels) rhs += ch.op.mat.adjoint() * ch.op.mat;
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);

  // Both emitters must feed every channel label.
  const HilbertSpace atom({2}, {{"e", "g"}});
  const Operator low = ket_bra(atom, {"g"}, {"e"});
  CHECK_THROWS_AS(beam_split_ports({JumpChannel{1, "", low, 1.0}}, 0.5),
                  std::invalid_argument);
}

TEST_CASE("bundle assembly validates wiring and efficiency") {
  SECTION("eta extremes collapse to the expected generators") {
    const auto closed = single_emitter_bundle(0.0);
    CHECK(closed.click.mat.cwiseAbs().maxCoeff() == 0.0);
    CHECK((closed.no_click_gen.mat - closed.damping.mat - closed.jump.mat)
              .cwiseAbs()
              .maxCoeff() == 0.0);

    const auto open = single_emitter_bundle(1.0);
    CHECK((open.no_click_gen.mat - open.damping.mat).cwiseAbs().maxCoeff() ==
          0.0);
  }

  SECTION("click split and port decomposition hold as linear maps") {
    const auto model = build_model(SchemeParams1cw::from_p1(0.4, 0.37));
    const auto bundle = build_bundle(model.channels, model.ports);

    const Matrix resplit =
        bundle.click.mat + (1.0 - bundle.eta) * bundle.jump.mat;
    CHECK((resplit - bundle.jump.mat).cwiseAbs().maxCoeff() < 1e-12);

    Matrix port_sum = Matrix::Zero(bundle.click.mat.rows(),
                                   bundle.click.mat.cols());
    for (const auto& cp : bundle.port_click) port_sum += cp.mat;
    CHECK((port_sum - bundle.click.mat).cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("the full master equation preserves trace") {
    for (const char* scheme : {"1cw", "1pls", "2ph"}) {
      ProtocolModel model = [&] {
        if (std::string(scheme) == "1cw")
          return build_model(SchemeParams1cw::from_p1(0.3, 0.4));
        if (std::string(scheme) == "1pls")
          return build_model(SchemeParams1pls::from_pcav(0.15, 0.4, 0.1));
        return build_model(SchemeParams2ph::from_p2(0.5, 0.4,
                                                    BellSubset::half));
      }();
      const auto bundle = build_bundle(model.channels, model.ports);
      const Superoperator full(model.space,
                               bundle.damping.mat + bundle.jump.mat);
      for (std::uint64_t k = 0; k < 20; ++k) {
        const DensityOperator rho = random_density(model.space, 100 + k);
        const Matrix drho =
            unvec(full.mat * vec(rho.matrix()), model.space.dim());
        CHECK(std::abs(drho.trace()) < 1e-10);
      }
    }
  }

  SECTION("invalid wiring is rejected") {
    const HilbertSpace atom({2}, {{"e", "g"}});
    const HilbertSpace other({3}, {{"r", "e", "g"}});
    const Operator low = ket_bra(atom, {"g"}, {"e"});
    const Operator low3 = ket_bra(other, {"g"}, {"e"});

    CHECK_THROWS_AS(build_bundle({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(build_bundle({JumpChannel{1, "", low, 1.0}},
                                 {DetectorPort{+1, "", low3, 0.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_bundle({JumpChannel{1, "", low, 0.0}},
                                 {DetectorPort{+1, "", low, 0.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_bundle({JumpChannel{1, "", low, 1.0}},
                                 {DetectorPort{+1, "", low, 1.5}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(build_bundle({JumpChannel{1, "", low, 1.0}},
                                 {DetectorPort{+1, "", low, -0.1}}),
                    std::invalid_argument);

    // Non-uniform efficiency across ports.
    const auto model = build_model(SchemeParams1cw::from_p1(0.3, 0.5));
    auto ports = model.ports;
    ports[1].efficiency = 0.25;
    CHECK_THROWS_AS(build_bundle(model.channels, ports),
                    std::invalid_argument);

    // Unknown port label lookup.
    const auto bundle = build_bundle(model.channels, model.ports);
    CHECK(find_port(bundle, "D+") == 0);
    CHECK(find_port(bundle, "D-") == 1);
    CHECK_THROWS_AS(find_port(bundle, "D?"), std::invalid_argument);
  }
}

TEST_CASE("no-click propagator is trace-non-increasing and exact") {
  const auto model = build_model(SchemeParams1cw::from_p1(0.3, 0.5));
  const auto bundle = build_bundle(model.channels, model.ports);

  SECTION("zero time is the identity map") {
    const Superoperator u0 = no_click_propagator(bundle, 0.0);
    const int d2 = model.space.dim() * model.space.dim();
    CHECK((u0.mat - Matrix::Identity(d2, d2)).cwiseAbs().maxCoeff() < 1e-14);
  }

  SECTION("negative time is rejected") {
    CHECK_THROWS_AS(no_click_propagator(bundle, -0.1), std::invalid_argument);
  }

  SECTION("silent detectors with eta=0 leak no information") {
    const auto deaf = build_bundle(model.channels,
                                   beam_split_ports(model.channels, 0.0));
    for (double tau : {0.3, 1.0, 2.7}) {
      const Superoperator u = no_click_propagator(deaf, tau);
      const DensityOperator rho = random_density(model.space, 7);
      const Matrix out = unvec(u.mat * vec(rho.matrix()), model.space.dim());
      CHECK(std::abs(out.trace() - 1.0) < 1e-10);
    }
  }

  SECTION("no-click weight factorizes over independent emitters") {
    // With each emitter emitting-and-getting-detected independently, the
    // survival weight after time tau is (1 - eta p1(tau))^2.
    const auto model_h = build_model(SchemeParams1cw{1.0, 1.0, 0.5});
    const auto bundle_h = build_bundle(model_h.channels, model_h.ports);
    const Superoperator u = no_click_propagator(bundle_h, 1.0);
    const Matrix out =
        unvec(u.mat * vec(model_h.rho0.matrix()), model_h.space.dim());
    const double p1 = 1.0 - std::exp(-1.0);
    const double expected = (1.0 - 0.5 * p1) * (1.0 - 0.5 * p1);
    CHECK(std::abs(out.trace().real() - expected) < 1e-12);

    // And the weight never exceeds one on arbitrary states.
    for (std::uint64_t k = 0; k < 5; ++k) {
      const DensityOperator rho = random_density(model_h.space, 40 + k);
      const Matrix evolved =
          unvec(u.mat * vec(rho.matrix()), model_h.space.dim());
      CHECK(evolved.trace().real() <= 1.0 + 1e-12);
    }
  }
}

TEST_CASE("detection-scenario probabilities match the closed forms") {
  SECTION("blind detectors record nothing") {
    const auto model = build_model(SchemeParams1cw::from_p1(0.3, 0.5));
    const auto deaf = build_bundle(model.channels,
                                   beam_split_ports(model.channels, 0.0));
    const auto p = scenario_probabilities(deaf, model.rho0, model.window);
    CHECK(std::abs(p[0] - 1.0) < 1e-12);
    CHECK(std::abs(p[1]) < 1e-12);
    CHECK(std::abs(p[2]) < 1e-12);
  }

  SECTION("single-click probability for the driven-emitter pair") {
    const double p1 = 0.35, eta = 0.6;
    const auto model = build_model(SchemeParams1cw::from_p1(p1, eta));
    const auto bundle = build_bundle(model.channels, model.ports);
    const auto p = scenario_probabilities(bundle, model.rho0, model.window);
    CHECK(std::abs(p[1] - 2.0 * eta * p1 * (1.0 - eta * p1)) < tol::engine);
  }

  SECTION("two-click probability saturates at eta^2 for long windows") {
    const double eta = 0.45, t = 30.0;
    const auto model = build_model(SchemeParams2ph{1.0, t, eta,
                                                   BellSubset::half});
    const auto bundle = build_bundle(model.channels, model.ports);
    const auto p = scenario_probabilities(bundle, model.rho0, model.window);
    const double p2 = 1.0 - std::exp(-t);
    CHECK(std::abs(p[2] - eta * eta * p2 * p2) < tol::engine);
  }

  SECTION("the three scenarios are exhaustive for every protocol") {
    const std::vector<ProtocolModel> models = {
        build_model(SchemeParams1cw::from_p1(0.25, 0.7)),
        build_model(SchemeParams1pls::from_pcav(0.3, 0.7, 0.2)),
        build_model(SchemeParams2ph::from_p2(0.6, 0.7, BellSubset::half))};
    for (const auto& model : models) {
      const auto bundle = build_bundle(model.channels, model.ports);
      const auto p = scenario_probabilities(bundle, model.rho0, model.window);
      CHECK(std::abs(p[0] + p[1] + p[2] - 1.0) < 1e-8);
    }
  }

  SECTION("adaptive quadrature agrees with the counting generator") {
    const auto model = build_model(SchemeParams1cw::from_p1(0.3, 0.5));
    const auto bundle = build_bundle(model.channels, model.ports);
    const auto a = scenario_probabilities(bundle, model.rho0, model.window);
    const auto b = scenario_probabilities_quadrature(bundle, model.rho0,
                                                     model.window, 1e-9);
    for (int k = 0; k < 3; ++k) CHECK(std::abs(a[k] - b[k]) < 1e-8);
  }
}

TEST_CASE("one-click conditioned states reproduce the protocol fidelities") {
  SECTION("weak driving at low efficiency") {
    const auto model = build_model(SchemeParams1cw::from_p1(0.15, 0.005));
    const auto bundle = build_bundle(model.channels, model.ports);
    const auto [prob, rho] = conditional_state_one_click(
        bundle, model.rho0, find_port(bundle, "D+"), model.window);
    const double f = fidelity(model.psi_plus, rho);
    CHECK(std::abs(f - (1.0 - 0.15) / (1.0 - 0.005 * 0.15)) < tol::engine);
    CHECK(std::abs(f - 0.8506) < 1e-4);
    // The port sees half of the total single-click probability.
    CHECK(std::abs(2.0 * prob -
                   2.0 * 0.005 * 0.15 * (1.0 - 0.005 * 0.15)) < tol::engine);
  }

  SECTION("perfect detection leaves the single-excitation sector pure") {
    const auto model = build_model(SchemeParams1cw::from_p1(0.3, 1.0));
    const auto bundle = build_bundle(model.channels, model.ports);
    const auto [prob, rho] = conditional_state_one_click(
        bundle, model.rho0, find_port(bundle, "D+"), model.window);
    CHECK(std::abs(fidelity(model.psi_plus, rho) - 1.0) < 1e-12);
    CHECK(std::abs(prob - 0.21) < tol::engine);  // eta p1 (1 - eta p1)
  }

  SECTION("cavity-assisted emission") {
    const auto model = build_model(SchemeParams1pls::from_pcav(0.15, 0.31,
                                                               0.1));
    const auto bundle = build_bundle(model.channels, model.ports);
    const auto [prob, rho] = conditional_state_one_click(
        bundle, model.rho0, find_port(bundle, "D+"), model.window);
    const double f = fidelity(model.psi_plus, rho);
    CHECK(std::abs(f - 0.877193) < 1e-6);
    CHECK(within_two_sig_figs(f, 0.88));
    (void)prob;
  }

  SECTION("the two output arms are statistically identical") {
    for (int which = 0; which < 2; ++which) {
      const ProtocolModel model =
          which == 0 ? build_model(SchemeParams1cw::from_p1(0.3, 0.5))
                     : build_model(SchemeParams1pls::from_pcav(0.2, 0.5, 0.15));
      const auto bundle = build_bundle(model.channels, model.ports);
      const auto [pp, rp] = conditional_state_one_click(
          bundle, model.rho0, find_port(bundle, "D+"), model.window);
      const auto [pm, rm] = conditional_state_one_click(
          bundle, model.rho0, find_port(bundle, "D-"), model.window);
      CHECK(std::abs(pp - pm) < 1e-10);
      (void)rp;
      (void)rm;
    }
  }

  SECTION("conditioning on impossible events is an error") {
    const auto model = build_model(SchemeParams1cw::from_p1(0.3, 0.5));
    const auto deaf = build_bundle(model.channels,
                                   beam_split_ports(model.channels, 0.0));
    CHECK_THROWS_AS(
        conditional_state_one_click(deaf, model.rho0, 0, model.window),
        NullEventError);
    const auto bundle = build_bundle(model.channels, model.ports);
    CHECK_THROWS_AS(
        conditional_state_one_click(bundle, model.rho0, 5, model.window),
        std::invalid_argument);
  }
}

TEST_CASE("coincidence-conditioned states are the advertised Bell states") {
  const auto model = build_model(SchemeParams2ph{1.0, 1.3, 0.3,
                                                 BellSubset::half});
  const auto bundle = build_bundle(model.channels, model.ports);

  SECTION("same-sign coincidences herald the symmetric state") {
    const auto [prob, rho] = conditional_state_two_clicks(
        bundle, model.rho0, find_port(bundle, "D+e"), find_port(bundle, "D+g"),
        model.window);
    CHECK(std::abs(fidelity(model.psi_plus, rho) - 1.0) < 1e-10);
    CHECK(prob > 0.0);
  }

  SECTION("opposite-sign coincidences herald the antisymmetric state") {
    const auto [prob, rho] = conditional_state_two_clicks(
        bundle, model.rho0, find_port(bundle, "D+e"), find_port(bundle, "D-g"),
        model.window);
    CHECK(std::abs(fidelity(model.psi_minus, rho) - 1.0) < 1e-10);
    CHECK(prob > 0.0);
  }

  SECTION("every coincidence pattern heralds its own Bell state") {
    for (const auto& pattern : bell_patterns()) {
      const auto [prob, rho] = conditional_state_two_clicks(
          bundle, model.rho0, find_port(bundle, pattern.ports[0]),
          find_port(bundle, pattern.ports[1]), model.window);
      const Vector& target =
          pattern.target_sign > 0 ? model.psi_plus : model.psi_minus;
      CHECK(std::abs(fidelity(target, rho) - 1.0) < 1e-10);
      (void)prob;
    }
  }

  SECTION("double emission in the driven-pair scheme dumps both atoms") {
    const auto pair_model = build_model(SchemeParams1cw::from_p1(0.4, 0.6));
    const auto pair_bundle =
        build_bundle(pair_model.channels, pair_model.ports);
    const std::size_t dplus = find_port(pair_bundle, "D+");
    const auto [prob, rho] = conditional_state_two_clicks(
        pair_bundle, pair_model.rho0, dplus, dplus, pair_model.window);
    const Vector gg = basis_ket(pair_model.space, {"g", "g"});
    CHECK(std::abs(fidelity(gg, rho) - 1.0) < 1e-12);
    CHECK(prob > 0.0);
  }
}

TEST_CASE("the click instant does not matter when emitters fire once") {
  const auto model = build_model(SchemeParams1cw{1.0, 2.0, 0.3});
  const auto bundle = build_bundle(model.channels, model.ports);
  const double t = model.window;

  SECTION("twenty click instants across the window agree") {
    std::vector<double> grid;
    for (int i = 0; i < 20; ++i) grid.push_back(t * i / 19.0);
    const double dev = tau_independence_check(bundle, model.rho0,
                                              find_port(bundle, "D+"), t,
                                              grid);
    CHECK(dev < 1e-10);
  }

  SECTION("the endpoint instant is the reference itself") {
    CHECK(tau_independence_check(bundle, model.rho0, 0, t, {t}) == 0.0);
  }

  SECTION("a recycling cascade breaks the property, loudly") {
    const auto cascade = recycling_bundle(0.3);
    const DensityOperator rho0 = DensityOperator::from_ket(
        cascade.space, basis_ket(cascade.space, {"r"}));
    std::vector<double> grid;
    for (int i = 0; i < 10; ++i) grid.push_back(2.0 * i / 9.0);
    CHECK(tau_independence_check(cascade, rho0, 0, 2.0, grid) > 0.01);
  }

  SECTION("argument validation") {
    CHECK_THROWS_AS(tau_independence_check(bundle, model.rho0, 9, t, {t}),
                    std::invalid_argument);
    CHECK_THROWS_AS(tau_independence_check(bundle, model.rho0, 0, t, {-0.1}),
                    std::invalid_argument);
    CHECK_THROWS_AS(tau_independence_check(bundle, model.rho0, 0, t,
                                           {1.5 * t}),
                    std::invalid_argument);
    const DensityOperator half(model.space, 0.5 * model.rho0.matrix(),
                               Normalization::subnormalized);
    CHECK_THROWS_AS(tau_independence_check(bundle, half, 0, t, {t}),
                    std::invalid_argument);
  }
}

TEST_CASE("click records keep causal order") {
  CHECK_NOTHROW(ClickRecord(2.0, {{0.5, 0}, {1.5, 1}}));
  CHECK_NOTHROW(ClickRecord(2.0, {{2.0, 0}}));  // boundary click allowed
  CHECK_NOTHROW(ClickRecord(2.0, {}));
  CHECK_THROWS_AS(ClickRecord(2.0, {{2.5, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(ClickRecord(2.0, {{-0.1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(ClickRecord(2.0, {{1.0, 0}, {1.0, 1}}),
                  std::invalid_argument);
  CHECK_THROWS_AS(ClickRecord(2.0, {{1.5, 0}, {0.5, 1}}),
                  std::invalid_argument);
}

TEST_CASE("the trajectory sampler estimates the deterministic statistics") {
  SECTION("blind detectors never click") {
    const auto model = build_model(SchemeParams1cw::from_p1(0.4, 0.5));
    const auto deaf = build_bundle(model.channels,
                                   beam_split_ports(model.channels, 0.0));
    const auto mc = monte_carlo(deaf, model.rho0, model.window, 500, 3);
    CHECK(mc.scenario[0] == 1.0);
    CHECK(mc.scenario[1] == 0.0);
    for (std::size_t clicks : mc.port_clicks) CHECK(clicks == 0);
  }

  SECTION("empirical scenario frequencies sit within four sigma") {
    std::uint64_t seed = 1000;
    for (double eta : {0.2, 0.5, 0.8}) {
      for (double p1 : {0.1, 0.3, 0.5}) {
        const auto model = build_model(SchemeParams1cw::from_p1(p1, eta));
        const auto bundle = build_bundle(model.channels, model.ports);
        const auto det =
            scenario_probabilities(bundle, model.rho0, model.window);
        const std::size_t n = 100000;
        const auto mc = monte_carlo(bundle, model.rho0, model.window, n,
                                    seed++);
        CHECK(mc.p_extra == 0.0);  // two emitters, at most two photons
        for (int k : {1, 2}) {
          const double sigma =
              std::sqrt(det[k] * (1.0 - det[k]) / static_cast<double>(n));
          INFO("eta=" << eta << " p1=" << p1 << " scenario=" << k);
          CHECK(std::abs(mc.scenario[k] - det[k]) <= 4.0 * sigma);
        }
      }
    }
  }

  SECTION("averaged one-click states converge to the conditioned state") {
    const auto model = build_model(SchemeParams1cw::from_p1(0.3, 0.5));
    const auto bundle = build_bundle(model.channels, model.ports);
    const std::size_t dplus = find_port(bundle, "D+");
    const auto mc = monte_carlo(bundle, model.rho0, model.window, 100000, 7);
    const auto [prob, rho] =
        conditional_state_one_click(bundle, model.rho0, dplus, model.window);
    REQUIRE(mc.one_click_state[dplus].has_value());
    const double dev = (mc.one_click_state[dplus]->matrix() - rho.matrix())
                           .cwiseAbs()
                           .maxCoeff();
    CHECK(dev < 0.01);
    CHECK(mc.one_click_traj[dplus] > 10000);
    (void)prob;
  }

  SECTION("weak-excitation benchmark point at one million trajectories") {
    const auto model = build_model(SchemeParams1cw::from_p1(0.15, 0.005));
    const auto bundle = build_bundle(model.channels, model.ports);
    const auto det = scenario_probabilities(bundle, model.rho0, model.window);
    const std::size_t n = 1000000;
    const auto mc = monte_carlo(bundle, model.rho0, model.window, n, 12345);
    const double sigma =
        std::sqrt(det[1] * (1.0 - det[1]) / static_cast<double>(n));
    CHECK(std::abs(det[1] - 1.499e-3) < 1e-6);
    CHECK(std::abs(mc.scenario[1] - det[1]) <= 3.0 * sigma);
  }

  SECTION("identical seeds reproduce bit-identical results") {
    const auto model = build_model(SchemeParams1cw::from_p1(0.3, 0.5));
    const auto bundle = build_bundle(model.channels, model.ports);
    const auto a = monte_carlo(bundle, model.rho0, model.window, 2000, 42);
    const auto b = monte_carlo(bundle, model.rho0, model.window, 2000, 42);
    CHECK(a.scenario == b.scenario);
    CHECK(a.p_extra == b.p_extra);
    CHECK(a.port_clicks == b.port_clicks);
    CHECK(a.one_click_traj == b.one_click_traj);
    for (std::size_t p = 0; p < a.one_click_state.size(); ++p) {
      REQUIRE(a.one_click_state[p].has_value() ==
              b.one_click_state[p].has_value());
      if (a.one_click_state[p])
        CHECK((a.one_click_state[p]->matrix() -
               b.one_click_state[p]->matrix())
                  .cwiseAbs()
                  .maxCoeff() == 0.0);
    }

    const auto c = monte_carlo(bundle, model.rho0, model.window, 2000, 43);
    CHECK(a.port_clicks != c.port_clicks);
  }
}
