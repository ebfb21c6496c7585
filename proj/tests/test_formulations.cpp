#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "instance_gen.hpp"
#include "stoclear/formulations.hpp"

using namespace stoclear;

namespace {

DispatchSolution solve_kind(const Instance& inst, Formulation kind,
                            std::size_t scenario = 0) {
  auto [model, map] = kind == Formulation::Clairvoyant
                          ? build_clairvoyant(inst, scenario)
                      : kind == Formulation::Canonical ? build_canonical(inst)
                      : kind == Formulation::MeanVector
                          ? build_mean_vector(inst)
                          : build_state_vector(inst);
  const LpSolution sol = solve_lp(model);
  REQUIRE(sol.status == LpStatus::Optimal);
  REQUIRE(check_kkt(model, sol, 1e-7).pass);
  return extract_dispatch(inst, sol, map);
}

}  // namespace

TEST_CASE("clairvoyant micro1: serve exactly what is available") {
  const Instance inst = make_micro1();
  const DispatchSolution d1 = solve_kind(inst, Formulation::Clairvoyant, 0);
  CHECK(d1.x_bar[0] == doctest::Approx(40.0));
  CHECK(d1.X[0][0] == doctest::Approx(40.0));
  CHECK(d1.objective == doctest::Approx(-1600.0));

  // With 80 MW available the load's day-ahead floor (-60) binds, so the
  // last 20 MW clear as a real-time deviation.
  const DispatchSolution d2 = solve_kind(inst, Formulation::Clairvoyant, 1);
  CHECK(d2.x_bar[0] == doctest::Approx(60.0));
  CHECK(d2.X[0][0] == doctest::Approx(80.0));
  CHECK(d2.objective == doctest::Approx(-3120.0));
}

TEST_CASE("clairvoyant rejects an unknown scenario") {
  CHECK_THROWS_AS(build_clairvoyant(make_micro1(), 5), std::out_of_range);
}

TEST_CASE("canonical micro1 hedges low") {
  const DispatchSolution d = solve_kind(make_micro1(), Formulation::Canonical);
  CHECK(d.x_bar[0] == doctest::Approx(40.0));
  CHECK(d.objective == doctest::Approx(-2320.0));
  CHECK(d.X[0][0] == doctest::Approx(40.0));
  CHECK(d.X[1][0] == doctest::Approx(80.0));
  CHECK(d.X[0][1] == doctest::Approx(-40.0));
  CHECK(d.X[1][1] == doctest::Approx(-80.0));
}

TEST_CASE("mean-vector micro1 matches canonical with equal copies") {
  const Instance inst = make_micro1();
  const DispatchSolution d = solve_kind(inst, Formulation::MeanVector);
  CHECK(d.objective == doctest::Approx(-2320.0));
  for (std::size_t s = 0; s < inst.num_scenarios(); ++s)
    CHECK(d.x_at(s, 0) == doctest::Approx(40.0));
  CHECK(d.x_bar[0] == doctest::Approx(40.0));
}

TEST_CASE("state-vector micro1 matches canonical objective") {
  const DispatchSolution c = solve_kind(make_micro1(), Formulation::Canonical);
  const DispatchSolution s = solve_kind(make_micro1(), Formulation::StateVector);
  CHECK(s.objective ==
        doctest::Approx(c.objective).epsilon(1e-7));
  CHECK(s.x_bar[0] == doctest::Approx(40.0));
}

TEST_CASE("single scenario collapses to the clairvoyant problem") {
  std::mt19937_64 rng(5);
  testing::GenOptions opt;
  opt.max_scenarios = 1;
  for (int k = 0; k < 5; ++k) {
    const Instance inst = testing::random_instance(rng, opt);
    const DispatchSolution cla = solve_kind(inst, Formulation::Clairvoyant, 0);
    const DispatchSolution can = solve_kind(inst, Formulation::Canonical);
    CHECK(can.objective ==
          doctest::Approx(cla.objective).epsilon(1e-9));
  }
}

TEST_CASE("zero-demand market clears at zero") {
  Instance inst = make_micro1();
  inst.participants[1].x_min = 0.0;
  inst.participants[1].X_min = 0.0;
  inst.participants[1].stochastic = false;
  const DispatchSolution d = solve_kind(inst, Formulation::Canonical);
  CHECK(d.objective == doctest::Approx(0.0));
  CHECK(d.x_bar[0] == doctest::Approx(0.0));
  CHECK(d.x_bar[1] == doctest::Approx(0.0));
}

TEST_CASE("formulation equivalence on random networked instances") {
  std::mt19937_64 rng(314);
  for (int k = 0; k < 10; ++k) {
    const Instance inst = testing::random_instance(rng);
    const DispatchSolution c = solve_kind(inst, Formulation::Canonical);
    const DispatchSolution m = solve_kind(inst, Formulation::MeanVector);
    const DispatchSolution s = solve_kind(inst, Formulation::StateVector);
    const double scale = 1.0 + std::abs(c.objective);
    CHECK(std::abs(c.objective - m.objective) / scale <= 1e-6);
    CHECK(std::abs(c.objective - s.objective) / scale <= 1e-6);
    // The implementable vectors satisfy the day-ahead balance.
    for (const DispatchSolution* d : {&c, &m, &s}) {
      std::vector<double> byflow(inst.buses.size(), 0.0);
      for (std::size_t l = 0; l < inst.lines.size(); ++l) {
        byflow[static_cast<std::size_t>(inst.bus_index(inst.lines[l].from))] -=
            d->f_bar[l];
        byflow[static_cast<std::size_t>(inst.bus_index(inst.lines[l].to))] +=
            d->f_bar[l];
      }
      for (std::size_t i = 0; i < inst.participants.size(); ++i)
        byflow[static_cast<std::size_t>(
            inst.bus_index(inst.participants[i].bus))] += d->x_bar[i];
      for (double r : byflow) CHECK(std::abs(r) <= 1e-6);
    }
  }
}

TEST_CASE("extract_dispatch refuses a non-optimal solution") {
  auto [model, map] = build_canonical(make_micro1());
  LpSolution bogus;
  bogus.status = LpStatus::Unbounded;
  CHECK_THROWS_AS(extract_dispatch(make_micro1(), bogus, map),
                  std::runtime_error);
}
