#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "instance_gen.hpp"
#include "stoclear/pricing.hpp"

using namespace stoclear;

namespace {

struct Solved {
  DispatchSolution dispatch;
  DualSolution duals;
};

Solved solve_kind(const Instance& inst, Formulation kind, bool perturb = false,
                  std::uint64_t seed = 0) {
  auto [model, map] = kind == Formulation::Clairvoyant
                          ? build_clairvoyant(inst, 0)
                      : kind == Formulation::Canonical ? build_canonical(inst)
                      : kind == Formulation::MeanVector
                          ? build_mean_vector(inst)
                          : build_state_vector(inst);
  if (perturb) perturb_objective(model, seed);
  const LpSolution sol = solve_lp(model);
  REQUIRE(sol.status == LpStatus::Optimal);
  return {extract_dispatch(inst, sol, map), extract_duals(inst, sol, map)};
}

}  // namespace

TEST_CASE("canonical micro1 prices") {
  const Solved r = solve_kind(make_micro1(), Formulation::Canonical);
  // Day-ahead marginal unit is the generator; real-time price is its
  // decremental bid when availability drops and incremental bid when it rises.
  CHECK(r.duals.pi_c[0] == doctest::Approx(10.0));
  CHECK(r.duals.Pi[0][0] == doctest::Approx(8.0));
  CHECK(r.duals.Pi[1][0] == doctest::Approx(11.0));
}

TEST_CASE("mean-vector micro1 day-ahead prices average to the canonical one") {
  const Instance inst = make_micro1();
  const Solved c = solve_kind(inst, Formulation::Canonical);
  const Solved m = solve_kind(inst, Formulation::MeanVector);
  double mean_pi = 0.0;
  for (std::size_t s = 0; s < inst.num_scenarios(); ++s)
    mean_pi += m.duals.probs[s] * m.duals.pi[s][0];
  CHECK(mean_pi == doctest::Approx(c.duals.pi_c[0]).epsilon(1e-7));
  for (std::size_t s = 0; s < inst.num_scenarios(); ++s)
    CHECK(m.duals.Pi[s][0] == doctest::Approx(c.duals.Pi[s][0]).epsilon(1e-7));
}

TEST_CASE("state-vector sigma has zero mean") {
  const Instance inst = make_micro1();
  const Solved s = solve_kind(inst, Formulation::StateVector);
  for (std::size_t i = 0; i < inst.participants.size(); ++i) {
    double e = 0.0;
    for (std::size_t w = 0; w < inst.num_scenarios(); ++w)
      e += s.duals.probs[w] * s.duals.sigma_x[w][i];
    CHECK(std::abs(e) <= 1e-7);
  }
}

TEST_CASE("sigma from centred mu under perturbation") {
  const Instance inst = make_micro1();
  const Solved m = solve_kind(inst, Formulation::MeanVector, true, 17);
  const Solved s = solve_kind(inst, Formulation::StateVector, true, 17);
  const auto centred = derive_sigma_from_mu(m.duals.mu_x, m.duals.probs);
  double mean = 0.0;
  for (std::size_t w = 0; w < inst.num_scenarios(); ++w)
    for (std::size_t i = 0; i < inst.participants.size(); ++i) {
      CHECK(std::abs(centred[w][i] - s.duals.sigma_x[w][i]) <= 1e-5);
      mean += m.duals.probs[w] * centred[w][i];
    }
  CHECK(std::abs(mean) <= 1e-9);
}

TEST_CASE("canonical settlement on micro1, by hand") {
  const Instance inst = make_micro1();
  const Solved r = solve_kind(inst, Formulation::Canonical);
  const PaymentTable pay = payments_canonical(inst, r.dispatch, r.duals);
  // rho_G = pi*x + Pi*(X - x): 10*40 = 400, then 400 + 11*40 = 840.
  CHECK(pay.rho[0][0] == doctest::Approx(400.0));
  CHECK(pay.rho[1][0] == doctest::Approx(840.0));
  CHECK(pay.rho[0][1] == doctest::Approx(-400.0));
  CHECK(pay.rho[1][1] == doctest::Approx(-840.0));
  CHECK(pay.expected_rho[0] == doctest::Approx(620.0));
  // Generator profit rho + phi is exactly zero here in both scenarios.
  CHECK(pay.rho[0][0] + realized_value(inst.participants[0], 40, 40) ==
        doctest::Approx(0.0));
  CHECK(pay.rho[1][0] + realized_value(inst.participants[0], 40, 80) ==
        doctest::Approx(0.0));
}

TEST_CASE("settlement functions reject mismatched formulations") {
  const Instance inst = make_micro1();
  const Solved c = solve_kind(inst, Formulation::Canonical);
  CHECK_THROWS(payments_mean_vector(inst, c.dispatch, c.duals));
  CHECK_THROWS(payments_state_vector(inst, c.dispatch, c.duals));
}

TEST_CASE("canonical distortion on micro1 is per bus") {
  const Instance inst = make_micro1();
  const Solved r = solve_kind(inst, Formulation::Canonical);
  const DistortionTable d = price_distortion(Mechanism::Rc, inst, r.duals);
  CHECK(d.per_bus);
  CHECK(d.M[0][0] == doctest::Approx(2.0));    // 10 - 8
  CHECK(d.M[1][0] == doctest::Approx(-1.0));   // 10 - 11
  CHECK(d.expected_M[0] == doctest::Approx(0.5));
}

TEST_CASE("state-vector distortion stays inside the premium band") {
  const Instance inst = make_micro1();
  const Solved s = solve_kind(inst, Formulation::StateVector);
  const DistortionTable d = price_distortion(Mechanism::Rs, inst, s.duals);
  CHECK_FALSE(d.per_bus);
  for (std::size_t w = 0; w < inst.num_scenarios(); ++w) {
    CHECK(d.M[w][0] >= -1.0 - 1e-9);  // generator band [-1, 2]
    CHECK(d.M[w][0] <= 2.0 + 1e-9);
    CHECK(d.M[w][1] >= -3.0 - 1e-9);  // load band [-3, 3]
    CHECK(d.M[w][1] <= 3.0 + 1e-9);
  }
}

TEST_CASE("expected payments agree across mechanisms on dispatch-by-value") {
  // Loads always pay, generators are always paid, in every mechanism.
  std::mt19937_64 rng(4242);
  for (int k = 0; k < 5; ++k) {
    const Instance inst = testing::random_instance(rng);
    const Solved s = solve_kind(inst, Formulation::StateVector);
    const PaymentTable pay = payments_state_vector(inst, s.dispatch, s.duals);
    double total = 0.0;
    for (std::size_t i = 0; i < inst.participants.size(); ++i)
      total += pay.expected_rho[i];
    // Revenue adequacy in expectation: the ISO does not lose money.
    CHECK(total <= 1e-6);
  }
}

TEST_CASE("clairvoyant duals carry unit probability") {
  const Solved r = solve_kind(make_micro1(), Formulation::Clairvoyant);
  REQUIRE(r.duals.probs.size() == 1);
  CHECK(r.duals.probs[0] == 1.0);
}
