#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stoclear/io.hpp"
#include "stoclear/lp.hpp"
#include "stoclear/ph.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

stoclear::Instance load_instance(const std::string& arg) {
  const auto names = stoclear::embedded_instance_names();
  for (const std::string& n : names)
    if (n == arg) return stoclear::embedded_instance(arg);
  return stoclear::parse_instance(arg);
}

int cmd_validate(const std::string& instance) {
  const stoclear::Instance inst = load_instance(instance);
  const stoclear::ValidationReport report = stoclear::validate_instance(inst);
  for (const std::string& e : report.errors)
    std::cout << "error: " << e << "\n";
  for (const std::string& w : report.warnings)
    std::cout << "warning: " << w << "\n";
  if (!report.ok()) return kExitInput;
  std::cout << "ok: " << inst.buses.size() << " buses, " << inst.lines.size()
            << " lines, " << inst.participants.size() << " participants, "
            << inst.num_scenarios() << " scenarios\n";
  return kExitOk;
}

int cmd_run(const stoclear::ExperimentConfig& config) {
  const stoclear::RunArtifacts artifacts = stoclear::run_experiment(config);
  std::cout << artifacts.summary;
  for (const std::string& f : artifacts.files_written)
    std::cout << "wrote " << f << "\n";
  return kExitOk;
}

int cmd_verify(const std::string& instance, double tol) {
  using namespace stoclear;
  const Instance inst = load_instance(instance);
  const ValidationReport report = validate_instance(inst);
  if (!report.ok()) {
    for (const std::string& e : report.errors)
      std::cout << "error: " << e << "\n";
    return kExitInput;
  }

  auto solve = [&](Formulation kind) {
    auto [model, map] = kind == Formulation::Canonical ? build_canonical(inst)
                        : kind == Formulation::MeanVector
                            ? build_mean_vector(inst)
                            : build_state_vector(inst);
    const LpSolution sol = solve_lp(model);
    if (sol.status != LpStatus::Optimal)
      throw std::runtime_error(std::string("solve failed: ") +
                               formulation_name(kind));
    const KktReport kkt = check_kkt(model, sol, tol);
    if (!kkt.pass)
      throw std::runtime_error(std::string("optimality check failed: ") +
                               formulation_name(kind));
    return FormulationResult{extract_dispatch(inst, sol, map),
                             extract_duals(inst, sol, map)};
  };

  int violations = 0;
  auto check = [&](const std::string& name, bool pass) {
    std::cout << (pass ? "pass" : "FAIL") << "  " << name << "\n";
    if (!pass) ++violations;
  };

  try {
    const FormulationResult canonical = solve(Formulation::Canonical);
    const FormulationResult mv = solve(Formulation::MeanVector);
    const FormulationResult sv = solve(Formulation::StateVector);

    const double scale = 1.0 + std::abs(canonical.dispatch.objective);
    check("objectives agree across formulations",
          std::abs(canonical.dispatch.objective - mv.dispatch.objective) <=
                  tol * scale &&
              std::abs(canonical.dispatch.objective - sv.dispatch.objective) <=
                  tol * scale);

    const DualConsistencyReport rel =
        relationship_checks(inst, canonical, mv, sv, 1e-5);
    check("primal-dual relationships across formulations",
          rel.pass || rel.dual_multiplicity_suspected);

    // Scenario-wise guarantees of the state-vector settlement.
    const PaymentTable rs = payments_state_vector(inst, sv.dispatch, sv.duals);
    bool recovery = true;
    for (const GeneratorVerdict& v :
         cost_recovery(inst, rs, sv.dispatch, VerdictMode::Scenario))
      if (v.guarantee_applies && !v.pass) recovery = false;
    check("rs cost recovery in every scenario", recovery);
    check("rs revenue adequacy in expectation",
          revenue_adequacy(inst, rs, VerdictMode::Expectation).pass);

    const DistortionTable dist = price_distortion(Mechanism::Rs, inst, sv.duals);
    bool bounded = true;
    for (std::size_t s = 0; s < dist.M.size(); ++s)
      for (std::size_t i = 0; i < inst.participants.size(); ++i) {
        const Participant& p = inst.participants[i];
        if (dist.M[s][i] < -p.premium_up - 1e-6 ||
            dist.M[s][i] > p.premium_down + 1e-6)
          bounded = false;
      }
    check("rs price distortion within premium band", bounded);

    // Expectation-wise guarantees of the canonical settlement.
    const PaymentTable rc =
        payments_canonical(inst, canonical.dispatch, canonical.duals);
    bool exp_recovery = true;
    for (const GeneratorVerdict& v : cost_recovery(
             inst, rc, canonical.dispatch, VerdictMode::Expectation))
      if (v.guarantee_applies && !v.pass) exp_recovery = false;
    check("rc cost recovery in expectation", exp_recovery);
    check("rc revenue adequacy in expectation",
          revenue_adequacy(inst, rc, VerdictMode::Expectation).pass);

    const MvConditionReport cond = mv_conditions(inst, mv.duals, mv.dispatch);
    std::cout << "info  rm adequacy condition sum_E[mu]E[x] = "
              << cond.aggregate
              << (cond.adequacy_guaranteed ? " (guarantee applies)"
                                           : " (no guarantee)")
              << "\n";
    if (cond.adequacy_guaranteed) {
      const PaymentTable rm = payments_mean_vector(inst, mv.dispatch, mv.duals);
      check("rm revenue adequacy in expectation (condition holds)",
            revenue_adequacy(inst, rm, VerdictMode::Expectation).pass);
    }
  } catch (const std::runtime_error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }

  return violations == 0 ? kExitOk : kExitViolation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic market clearing: formulations, prices, settlement"};
  app.require_subcommand(1);

  stoclear::ExperimentConfig config;
  std::string mechanism = "all";

  CLI::App* run = app.add_subcommand("run", "Solve and write artifact tables");
  run->add_option("--instance", config.instance,
                  "Instance file or embedded name (micro1, pzp6, zkab6)")
      ->required();
  run->add_option("--formulation", config.formulation,
                  "canonical | mean_vector | state_vector | clairvoyant:<s> | all");
  run->add_option("--solver", config.solver, "extensive | ph");
  run->add_option("--mechanism", mechanism, "rc | rm | rs | all");
  run->add_flag("--perturb", config.perturb,
                "Jitter objective coefficients to break dual ties");
  run->add_option("--seed", config.seed, "Perturbation seed");
  run->add_option("--out", config.out_dir, "Output directory");
  run->add_option("--tol", config.tol, "Optimality tolerance");

  std::string instance;
  CLI::App* validate =
      app.add_subcommand("validate", "Check an instance file and exit");
  validate->add_option("--instance", instance, "Instance file or embedded name")
      ->required();

  std::string verify_instance;
  double verify_tol = 1e-6;
  CLI::App* verify = app.add_subcommand(
      "verify", "Solve all formulations and check the settlement guarantees");
  verify->add_option("--instance", verify_instance,
                     "Instance file or embedded name")
      ->required();
  verify->add_option("--tol", verify_tol, "Optimality tolerance");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      if (mechanism == "rc")
        config.mechanisms = {stoclear::Mechanism::Rc};
      else if (mechanism == "rm")
        config.mechanisms = {stoclear::Mechanism::Rm};
      else if (mechanism == "rs")
        config.mechanisms = {stoclear::Mechanism::Rs};
      else if (mechanism != "all") {
        std::cerr << "unknown mechanism \"" << mechanism << "\"\n";
        return kExitInput;
      }
      return cmd_run(config);
    }
    if (validate->parsed()) return cmd_validate(instance);
    return cmd_verify(verify_instance, verify_tol);
  } catch (const stoclear::ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kExitSolver;
  }
}
