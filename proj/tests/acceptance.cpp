// Acceptance battery: one line per criterion, nonzero exit on any failure.
// Skipped golden-number checks (incomplete fixtures) do not fail the run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "instance_gen.hpp"
#include "onebus_oracle.hpp"
#include "stoclear/io.hpp"
#include "stoclear/metrics.hpp"
#include "stoclear/ph.hpp"

using namespace stoclear;
using stoclear::testing::GenOptions;
using stoclear::testing::random_instance;

namespace {

int failures = 0;

void report(int number, const char* name, bool pass, const std::string& detail = "") {
  std::printf("%s  criterion %d: %s%s%s\n", pass ? "PASS" : "FAIL", number,
              name, detail.empty() ? "" : " — ", detail.c_str());
  if (!pass) ++failures;
}

void report_skip(int number, const char* name, const std::string& why) {
  std::printf("SKIP  criterion %d: %s — %s\n", number, name, why.c_str());
}

FormulationResult solve_kind(const Instance& inst, Formulation kind,
                             std::size_t scenario = 0, bool perturb = false,
                             std::uint64_t seed = 0, bool reselect = true) {
  auto [model, map] = kind == Formulation::Clairvoyant
                          ? build_clairvoyant(inst, scenario)
                      : kind == Formulation::Canonical ? build_canonical(inst)
                      : kind == Formulation::MeanVector
                          ? build_mean_vector(inst)
                          : build_state_vector(inst);
  if (perturb) perturb_objective(model, seed);
  const LpSolution sol = solve_lp(model);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("solve failed in acceptance battery");
  return {extract_dispatch(inst, sol, map),
          extract_duals(inst, sol, map, reselect)};
}

// Objective value only, skipping the dual extraction work.
double solve_objective(const Instance& inst, Formulation kind) {
  auto [model, map] = kind == Formulation::Canonical ? build_canonical(inst)
                      : kind == Formulation::MeanVector
                          ? build_mean_vector(inst)
                          : build_state_vector(inst);
  const LpSolution sol = solve_lp(model);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("solve failed in acceptance battery");
  return extract_dispatch(inst, sol, map).objective;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

// 1: objectives of the three formulations agree on 100 random instances.
void criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(1001);
  bool pass = true;
  std::string detail;
  for (int k = 0; k < 100 && pass; ++k) {
    const Instance inst = random_instance(rng);
    const double c = solve_objective(inst, Formulation::Canonical);
    const double m = solve_objective(inst, Formulation::MeanVector);
    const double s = solve_objective(inst, Formulation::StateVector);
    const double scale = 1.0 + std::abs(c);
    if (std::abs(c - m) / scale > 1e-6 || std::abs(c - s) / scale > 1e-6) {
      pass = false;
      detail = "objective mismatch on instance " + std::to_string(k);
    }
  }
  const double elapsed = seconds_since(t0);
  if (elapsed >= 60.0) {
    pass = false;
    detail = "took " + std::to_string(elapsed) + " s";
  }
  report(1, "formulation equivalence on 100 random instances", pass, detail);
}

// 2: dual relationships under perturbation; E[sigma]=0 also unperturbed.
void criterion2() {
  std::mt19937_64 rng(2002);
  bool pass = true;
  std::string detail;
  for (int k = 0; k < 30 && pass; ++k) {
    const Instance inst = random_instance(rng);
    // Jitter the instance data itself so all three formulations solve the
    // same generically nondegenerate problem.
    const Instance pert =
        perturbed_copy(inst, 5000 + static_cast<std::uint64_t>(k));
    const FormulationResult c = solve_kind(pert, Formulation::Canonical);
    const FormulationResult m = solve_kind(pert, Formulation::MeanVector);
    const FormulationResult s = solve_kind(pert, Formulation::StateVector);
    const DualConsistencyReport rep = relationship_checks(pert, c, m, s, 1e-5);
    if (!rep.pass) {
      pass = false;
      detail = "residuals above 1e-5 on perturbed instance " + std::to_string(k);
    }
    // E[sigma] = 0 must hold unperturbed at 1e-7 as well. The solver's own
    // duals satisfy it exactly, so no canonical reselection is needed.
    const FormulationResult sv =
        solve_kind(inst, Formulation::StateVector, 0, false, 0, false);
    for (std::size_t i = 0; i < inst.participants.size(); ++i) {
      double e = 0.0;
      for (std::size_t w = 0; w < inst.num_scenarios(); ++w)
        e += sv.duals.probs[w] * sv.duals.sigma_x[w][i];
      if (std::abs(e) > 1e-7) {
        pass = false;
        detail = "E[sigma] above 1e-7 on instance " + std::to_string(k);
      }
    }
  }
  report(2, "dual relationships across formulations", pass, detail);
}

// 3: state-vector settlement guarantees, scenario by scenario.
void criterion3() {
  std::mt19937_64 rng(3003);
  GenOptions opt;
  opt.settlement_regular = true;
  bool pass = true;
  std::string detail;
  for (int k = 0; k < 30 && pass; ++k) {
    const Instance inst = random_instance(rng, opt);
    // Settlement bounds hold for any exact optimal dual vector, so keep the
    // solver's own duals rather than the (band-relaxed) canonical point.
    const FormulationResult sv =
        solve_kind(inst, Formulation::StateVector, 0, false, 0, false);
    const PaymentTable pay = payments_state_vector(inst, sv.dispatch, sv.duals);
    for (const GeneratorVerdict& v :
         cost_recovery(inst, pay, sv.dispatch, VerdictMode::Scenario))
      for (double p : v.profit)
        if (p < -1e-6) {
          pass = false;
          detail = v.participant + " profit " + std::to_string(p) +
                   " on instance " + std::to_string(k);
        }
    double total = 0.0;
    for (double e : pay.expected_rho) total += e;
    if (total > 1e-6) {
      pass = false;
      detail = "expected payments sum " + std::to_string(total);
    }
    const DistortionTable dist = price_distortion(Mechanism::Rs, inst, sv.duals);
    for (std::size_t w = 0; w < dist.M.size(); ++w)
      for (std::size_t i = 0; i < inst.participants.size(); ++i) {
        const Participant& p = inst.participants[i];
        if (dist.M[w][i] < -p.premium_up - 1e-6 ||
            dist.M[w][i] > p.premium_down + 1e-6) {
          pass = false;
          detail = "distortion outside band for " + p.id;
        }
      }
  }
  report(3, "scenario-wise state-vector settlement guarantees", pass, detail);
}

// 4: mean-vector conditional guarantees; band violations are reported only.
void criterion4() {
  std::mt19937_64 rng(4004);
  GenOptions opt;
  opt.settlement_regular = true;
  bool pass = true;
  std::string detail;
  int band_violations = 0;
  for (int k = 0; k < 30 && pass; ++k) {
    const Instance inst = random_instance(rng, opt);
    const FormulationResult mv =
        solve_kind(inst, Formulation::MeanVector, 0, false, 0, false);
    const PaymentTable pay = payments_mean_vector(inst, mv.dispatch, mv.duals);
    const MvConditionReport cond = mv_conditions(inst, mv.duals, mv.dispatch);
    if (cond.aggregate <= 0.0) {
      double total = 0.0;
      for (double e : pay.expected_rho) total += e;
      if (total > 1e-6) {
        pass = false;
        detail = "condition held but expected payments sum " +
                 std::to_string(total);
      }
    }
    const auto verdicts =
        cost_recovery(inst, pay, mv.dispatch, VerdictMode::Expectation);
    for (const GeneratorVerdict& v : verdicts) {
      const std::size_t i = static_cast<std::size_t>(
          inst.participant_index(v.participant));
      if (cond.expected_mu[i] >= 0.0 && v.expected_profit < -1e-6) {
        pass = false;
        detail = "E[mu] >= 0 but expected profit " +
                 std::to_string(v.expected_profit) + " for " + v.participant;
      }
    }
    const DistortionTable dist = price_distortion(Mechanism::Rm, inst, mv.duals);
    for (std::size_t w = 0; w < dist.M.size(); ++w)
      for (std::size_t i = 0; i < inst.participants.size(); ++i) {
        const Participant& p = inst.participants[i];
        const double shift =
            inst.scenario_set.scenarios[w].prob * mv.duals.mu_x[w][i];
        if (dist.M[w][i] < -p.premium_up + shift - 1e-6 ||
            dist.M[w][i] > p.premium_down + shift + 1e-6)
          ++band_violations;
      }
  }
  report(4, "mean-vector conditional settlement guarantees", pass,
         detail.empty() ? (std::to_string(band_violations) +
                           " shifted-band violations observed (reported only)")
                        : detail);
}

// 5: canonical settlement guarantees in expectation.
void criterion5() {
  std::mt19937_64 rng(5005);
  GenOptions opt;
  opt.settlement_regular = true;
  bool pass = true;
  std::string detail;
  for (int k = 0; k < 30 && pass; ++k) {
    const Instance inst = random_instance(rng, opt);
    const FormulationResult c =
        solve_kind(inst, Formulation::Canonical, 0, false, 0, false);
    const PaymentTable pay = payments_canonical(inst, c.dispatch, c.duals);
    for (const GeneratorVerdict& v :
         cost_recovery(inst, pay, c.dispatch, VerdictMode::Expectation))
      if (v.expected_profit < -1e-6) {
        pass = false;
        detail = "expected profit " + std::to_string(v.expected_profit) +
                 " for " + v.participant;
      }
    double total = 0.0;
    for (double e : pay.expected_rho) total += e;
    if (total > 1e-6) {
      pass = false;
      detail = "expected payments sum " + std::to_string(total);
    }
    const DistortionTable dist = price_distortion(Mechanism::Rc, inst, c.duals);
    for (std::size_t n = 0; n < inst.buses.size(); ++n) {
      double lo = -kInf, hi = kInf;
      bool any = false;
      for (const Participant& p : inst.participants)
        if (p.bus == inst.buses[n].id) {
          any = true;
          lo = std::max(lo, -p.premium_up);
          hi = std::min(hi, p.premium_down);
        }
      if (!any) continue;
      if (dist.expected_M[n] < lo - 1e-6 || dist.expected_M[n] > hi + 1e-6) {
        pass = false;
        detail = "expected nodal distortion outside band at bus " +
                 std::to_string(inst.buses[n].id);
      }
    }
  }
  report(5, "canonical settlement guarantees in expectation", pass, detail);
}

// 6: clairvoyant settlement holds scenario-wise by construction.
void criterion6() {
  std::mt19937_64 rng(6006);
  bool pass = true;
  std::string detail;
  for (int k = 0; k < 20 && pass; ++k) {
    const Instance inst = random_instance(rng);
    for (std::size_t s = 0; s < inst.num_scenarios() && pass; ++s) {
      const FormulationResult r =
          solve_kind(inst, Formulation::Clairvoyant, s);
      const PaymentTable pay = payments_canonical(inst, r.dispatch, r.duals);
      double total = 0.0;
      for (std::size_t i = 0; i < inst.participants.size(); ++i) {
        total += pay.rho[0][i];
        const Participant& p = inst.participants[i];
        if (!p.is_generator()) continue;
        const double profit =
            pay.rho[0][i] + realized_value(p, r.dispatch.x_at(0, i),
                                           r.dispatch.X[0][i]);
        if (profit < -1e-6) {
          pass = false;
          detail = "profit " + std::to_string(profit) + " for " + p.id;
        }
      }
      if (total > 1e-6) {
        pass = false;
        detail = "payments sum " + std::to_string(total);
      }
    }
  }
  report(6, "clairvoyant settlement holds in every scenario", pass, detail);
}

// 7: brute-force one-bus oracle agrees with the LP.
void criterion7() {
  bool pass = true;
  std::string detail;
  auto compare = [&](const Instance& inst, const std::string& label) {
    const FormulationResult lp = solve_kind(inst, Formulation::Canonical);
    const testing::OnebusSolution oracle = testing::onebus_optimum(inst);
    if (std::abs(lp.dispatch.objective - oracle.objective) > 1e-9) {
      pass = false;
      detail = label + ": objective " + std::to_string(lp.dispatch.objective) +
               " vs oracle " + std::to_string(oracle.objective);
      return;
    }
    for (std::size_t i = 0; i < inst.participants.size(); ++i)
      if (std::abs(lp.dispatch.x_bar[i] - oracle.x[i]) > 1e-7) {
        pass = false;
        detail = label + ": dispatch mismatch for " + inst.participants[i].id;
      }
  };
  compare(make_micro1(), "micro1");
  std::mt19937_64 rng(7007);
  GenOptions opt;
  opt.one_bus = true;
  opt.min_participants = 2;
  opt.max_participants = 3;
  opt.max_scenarios = 4;
  for (int k = 0; k < 20 && pass; ++k)
    compare(random_instance(rng, opt), "onebus " + std::to_string(k));
  report(7, "brute-force oracle equivalence on one-bus instances", pass, detail);
}

// 8: progressive hedging tracks the extensive-form optimum.
void criterion8() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;
  std::mt19937_64 rng(8008);
  GenOptions opt;
  opt.max_participants = 6;
  opt.max_scenarios = 8;
  std::vector<Instance> cases{make_micro1()};
  for (int k = 0; k < 4; ++k) cases.push_back(random_instance(rng, opt));
  for (std::size_t k = 0; k < cases.size() && pass; ++k) {
    const Instance& inst = cases[k];
    PhParams params;
    const PhResult ph = solve_progressive_hedging(inst, params);
    const FormulationResult mv = solve_kind(inst, Formulation::MeanVector);
    const double scale = 1.0 + std::abs(mv.dispatch.objective);
    if (std::abs(ph.objective - mv.dispatch.objective) / scale > 1e-4) {
      pass = false;
      detail = "objective gap on case " + std::to_string(k);
    }
    for (std::size_t i = 0; i < inst.participants.size(); ++i) {
      double e = 0.0;
      for (std::size_t s = 0; s < ph.w_x.size(); ++s)
        e += inst.scenario_set.scenarios[s].prob * ph.w_x[s][i];
      if (std::abs(e) > 1e-10) {
        pass = false;
        detail = "E[w] nonzero on case " + std::to_string(k);
      }
      if (std::abs(ph.dispatch.x_bar[i] - mv.dispatch.x_bar[i]) > 1e-3) {
        pass = false;
        detail = "implementable vector gap on case " + std::to_string(k);
      }
    }
  }
  const double elapsed = seconds_since(t0);
  if (elapsed >= 120.0) {
    pass = false;
    detail = "took " + std::to_string(elapsed) + " s";
  }
  report(8, "progressive hedging matches the extensive form", pass, detail);
}

// 9: golden numbers, only meaningful with complete fixture data.
void criterion9() {
  bool all_complete = true;
  for (const std::string& name : {"pzp6", "zkab6"})
    if (!embedded_instance(name).fixture_complete) all_complete = false;
  if (!all_complete) {
    report_skip(9, "published-result reproduction",
                "shipped fixtures contain reconstructed placeholder data");
    return;
  }
  bool pass = true;
  std::string detail;
  struct Golden {
    const char* name;
    double condition, net_income_rm, net_income_rs;
  };
  const std::vector<Golden> goldens = {
      {"pzp6", 546674.0, -502834.36, 29301.96},
      {"zkab6", 12562.0, 181404.96, 181682.40},
  };
  for (const Golden& g : goldens) {
    const Instance inst = embedded_instance(g.name);
    const FormulationResult mv = solve_kind(inst, Formulation::MeanVector);
    const FormulationResult sv = solve_kind(inst, Formulation::StateVector);
    const MvConditionReport cond = mv_conditions(inst, mv.duals, mv.dispatch);
    const PaymentTable rm = payments_mean_vector(inst, mv.dispatch, mv.duals);
    const PaymentTable rs = payments_state_vector(inst, sv.dispatch, sv.duals);
    const double ni_rm =
        revenue_adequacy(inst, rm, VerdictMode::Expectation).net_income;
    const double ni_rs =
        revenue_adequacy(inst, rs, VerdictMode::Expectation).net_income;
    auto within = [](double got, double want) {
      return std::abs(got - want) <= 1e-3 * std::abs(want);
    };
    if (!within(cond.aggregate, g.condition) ||
        !within(ni_rm, g.net_income_rm) || !within(ni_rs, g.net_income_rs)) {
      pass = false;
      detail = g.name;
    }
  }
  report(9, "published-result reproduction", pass, detail);
}

}  // namespace

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  if (failures) std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
