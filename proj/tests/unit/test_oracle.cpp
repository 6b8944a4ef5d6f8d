#include "pspin/errors.hpp"
#include "pspin/oracle.hpp"

#include <doctest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace pspin;

TEST_CASE("oracle size limits") {
  CHECK_THROWS_AS(check_oracle_size(0), DomainError);
  CHECK_THROWS_AS(check_oracle_size(kOracleMaxSpins + 1), DomainError);
  CHECK_NOTHROW(check_oracle_size(kOracleMaxSpins));
  CHECK(up_count(0b1011u) == 3);
}

TEST_CASE("uniform superposition is the x-polarized product state") {
  const auto s = uniform_superposition(6);
  CHECK(s.amplitudes.norm() == doctest::Approx(1.0));
  CHECK(symmetric_weight(s) == doctest::Approx(1.0));
  const Eigen::VectorXcd sym = symmetric_projection(s);
  const auto x = x_polarized_state(6);
  CHECK((sym - x.amplitudes).norm() < 1e-14);
  CHECK(permutation_spread(s) < 1e-15);
}

TEST_CASE("full ground state agrees with the reduced ground state") {
  for (int p : {2, 3}) {
    ModelParams mp{p, 1.0, 8};
    const double gamma = 0.9;
    const auto full = full_ground_state(mp, gamma);
    const auto reduced = initial_quantum_state(mp, gamma);
    CHECK(symmetric_weight(full) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK((magnetization_marginal(full) - reduced.probabilities()).cwiseAbs().maxCoeff() < 1e-9);
    // Rayleigh quotient equals the lowest reduced eigenvalue.
    Eigen::VectorXcd hx(full.size());
    apply_full_hamiltonian(mp, gamma, full.amplitudes, hx);
    const double e = std::real(full.amplitudes.dot(hx));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(build_quantum_hamiltonian(mp, gamma).dense(),
                                                      Eigen::EigenvaluesOnly);
    CHECK(e == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-11));
  }
}

TEST_CASE("Boltzmann state and detailed balance") {
  ModelParams mp{3, 1.0, 7};
  const auto b = full_boltzmann_state(mp, 0.7);
  CHECK(b.probabilities.sum() == doctest::Approx(1.0));
  CHECK((magnetization_marginal(b) - equilibrium_distribution(mp, 0.7).probabilities).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(detailed_balance_residual(mp, 0.7) < 1e-12);
  CHECK(detailed_balance_residual(mp, 0.0) == 0.0);
  const auto cold = full_boltzmann_state(mp, 0.0);
  CHECK(cold.probabilities(cold.size() - 1) == doctest::Approx(1.0));
}

TEST_CASE("reduced dynamics reproduce the full-space evolutions") {
  for (int p : {2, 3}) {
    ModelParams mp{p, 1.0, 6};
    AnnealingSchedule q{Driver::transverse_field, 2.0, 0.0, 10.0};
    OracleTrace trace;
    IntegratorConfig cfg;
    cfg.record_every = 1.0;
    const auto rt = full_quantum_evolve(full_ground_state(mp, 2.0), mp, q, false, cfg, &trace);
    const auto rt_reduced = evolve_rt(initial_quantum_state(mp, 2.0), q, mp);
    CHECK(full_residual_energy(rt, mp) == doctest::Approx(residual_energy_quantum(rt_reduced, mp)).epsilon(1e-9));
    REQUIRE(!trace.symmetric_weight.empty());
    for (double w : trace.symmetric_weight) CHECK(w == doctest::Approx(1.0).epsilon(1e-9));
    for (double s : trace.permutation_spread) CHECK(s < 1e-9);

    const auto it = full_quantum_evolve(uniform_superposition(mp.N), mp, q, true);
    const auto it_reduced = evolve_it(x_polarized_state(mp.N), q, mp);
    CHECK(full_residual_energy(it, mp) == doctest::Approx(residual_energy_quantum(it_reduced, mp)).epsilon(1e-9));

    AnnealingSchedule s{Driver::temperature, 2.0, 0.1, 10.0};
    OracleTrace ctrace;
    const auto sa = full_master_evolve(full_boltzmann_state(mp, 2.0), mp, s, cfg, &ctrace);
    const auto sa_reduced = evolve_sa(equilibrium_state(mp, 2.0), s, mp);
    CHECK(full_residual_energy(sa, mp, 0.1) ==
          doctest::Approx(residual_energy_classical(sa_reduced, mp, 0.1)).epsilon(1e-9));
    CHECK((magnetization_marginal(sa) - sa_reduced.probabilities).cwiseAbs().maxCoeff() < 1e-10);
    for (double r : ctrace.aggregation_residual) CHECK(r < 1e-10);
  }
}

TEST_CASE("state kind mismatches are rejected") {
  ModelParams mp{2, 1.0, 4};
  AnnealingSchedule q{Driver::transverse_field, 1.0, 0.0, 1.0};
  CHECK_THROWS_AS(full_quantum_evolve(full_boltzmann_state(mp, 1.0), mp, q, false), DomainError);
  AnnealingSchedule s{Driver::temperature, 1.0, 0.0, 1.0};
  CHECK_THROWS_AS(full_master_evolve(uniform_superposition(4), mp, s), DomainError);
}
