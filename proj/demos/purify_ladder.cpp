// Purification ladder: fidelity and resource-weighted success probability
// of the cw source after J nested purification steps.

#include <cstdio>

#include "entsim/entsim.hpp"

int main() {
  const double p1 = 0.3, eta = 0.4;
  const auto source = entsim::pair_source_1cw(p1, eta);
  const auto pair = entsim::two_qubit_space();

  std::printf("cw source at p1 = %.2f, eta = %.2f: P_suc = %.4f, F = %.4f\n\n",
              p1, eta, source.p_suc,
              entsim::fidelity(entsim::bell_psi_plus(pair), source.rho_m));
  std::printf("%4s %8s %12s %12s\n", "J", "pairs", "F_pur", "P_pur");
  for (int j = 0; j <= 4; ++j) {
    const auto plan = entsim::run_plan(source, j);
    std::printf("%4d %8ld %12.8f %12.4e\n", plan.J, plan.n_pairs, plan.F_pur,
                plan.P_pur);
  }
  return 0;
}
