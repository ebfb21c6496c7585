#include "stoclear/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace stoclear {

double money_tol(double value) {
  const double v = std::abs(value);
  return v > 1e3 ? 1e-6 * (1.0 + v) : 1e-6;
}

std::vector<GeneratorVerdict> cost_recovery(const Instance& inst,
                                            const PaymentTable& payments,
                                            const DispatchSolution& dispatch,
                                            VerdictMode mode) {
  const std::size_t nS = payments.rho.size();
  if (nS != dispatch.X.size())
    throw std::invalid_argument("cost_recovery: scenario sets differ");
  std::vector<GeneratorVerdict> out;
  for (std::size_t i = 0; i < inst.participants.size(); ++i) {
    const Participant& p = inst.participants[i];
    if (!p.is_generator()) continue;
    GeneratorVerdict v;
    v.participant = p.id;
    v.guarantee_applies = p.x_min == 0.0 && p.X_min == 0.0;
    v.profit.resize(nS);
    double worst = kInf;
    for (std::size_t s = 0; s < nS; ++s) {
      const double phi =
          realized_value(p, dispatch.x_at(s, i), dispatch.X[s][i]);
      v.profit[s] = payments.rho[s][i] + phi;
      v.expected_profit +=
          inst.scenario_set.scenarios[s].prob * v.profit[s];
      worst = std::min(worst, v.profit[s]);
    }
    if (mode == VerdictMode::Scenario) {
      v.worst_profit = worst;
      v.pass = worst >= -money_tol(worst);
    } else {
      v.worst_profit = v.expected_profit;
      v.pass = v.expected_profit >= -money_tol(v.expected_profit);
    }
    out.push_back(std::move(v));
  }
  return out;
}

AdequacyVerdict revenue_adequacy(const Instance& inst,
                                 const PaymentTable& payments,
                                 VerdictMode mode) {
  AdequacyVerdict v;
  const std::size_t nS = payments.rho.size();
  v.per_scenario.assign(nS, 0.0);
  for (std::size_t s = 0; s < nS; ++s) {
    double total = 0.0;
    for (double rho : payments.rho[s]) total += rho;
    v.per_scenario[s] = -total;
    v.net_income += inst.scenario_set.scenarios[s].prob * -total;
  }
  if (mode == VerdictMode::Scenario) {
    v.pass = true;
    for (double n : v.per_scenario)
      if (n < -money_tol(n)) v.pass = false;
  } else {
    v.pass = v.net_income >= -money_tol(v.net_income);
  }
  return v;
}

MvConditionReport mv_conditions(const Instance& inst, const DualSolution& duals,
                                const DispatchSolution& dispatch) {
  if (duals.kind != Formulation::MeanVector)
    throw std::invalid_argument("mv_conditions: mean-vector duals required");
  MvConditionReport rep;
  const std::size_t nP = inst.participants.size();
  rep.expected_mu.assign(nP, 0.0);
  rep.expected_x.assign(nP, 0.0);
  for (std::size_t s = 0; s < duals.probs.size(); ++s)
    for (std::size_t i = 0; i < nP; ++i) {
      rep.expected_mu[i] += duals.probs[s] * duals.mu_x[s][i];
      rep.expected_x[i] += duals.probs[s] * dispatch.x_at(s, i);
    }
  for (std::size_t i = 0; i < nP; ++i)
    rep.aggregate += rep.expected_mu[i] * rep.expected_x[i];
  rep.adequacy_guaranteed = rep.aggregate <= money_tol(rep.aggregate);
  return rep;
}

DualConsistencyReport relationship_checks(const Instance& inst,
                                const FormulationResult& canonical,
                                const FormulationResult& mv,
                                const FormulationResult& sv, double tol) {
  if (canonical.duals.kind != Formulation::Canonical ||
      mv.duals.kind != Formulation::MeanVector ||
      sv.duals.kind != Formulation::StateVector)
    throw std::invalid_argument("relationship_checks: formulation mismatch");
  const std::size_t nN = inst.buses.size();
  const std::size_t nP = inst.participants.size();
  const std::size_t nL = inst.lines.size();
  const std::size_t nS = inst.num_scenarios();
  if (mv.duals.probs.size() != nS || sv.duals.probs.size() != nS)
    throw std::invalid_argument("relationship_checks: instances differ");

  DualConsistencyReport rep;
  for (std::size_t n = 0; n < nN; ++n) {
    double em = 0.0, es = 0.0;
    for (std::size_t s = 0; s < nS; ++s) {
      em += mv.duals.probs[s] * mv.duals.pi[s][n];
      es += sv.duals.probs[s] * sv.duals.pi[s][n];
    }
    rep.pi_c_vs_mean_pi_m =
        std::max(rep.pi_c_vs_mean_pi_m, std::abs(canonical.duals.pi_c[n] - em));
    rep.pi_c_vs_mean_pi_s =
        std::max(rep.pi_c_vs_mean_pi_s, std::abs(canonical.duals.pi_c[n] - es));
  }
  for (std::size_t s = 0; s < nS; ++s)
    for (std::size_t n = 0; n < nN; ++n)
      rep.pi_m_vs_pi_s =
          std::max(rep.pi_m_vs_pi_s,
                   std::abs(mv.duals.pi[s][n] - sv.duals.pi[s][n]));
  rep.centered_mu_comparable = rep.pi_m_vs_pi_s <= tol;

  for (std::size_t i = 0; i < nP; ++i) {
    double e = 0.0;
    for (std::size_t s = 0; s < nS; ++s)
      e += sv.duals.probs[s] * sv.duals.sigma_x[s][i];
    rep.mean_sigma = std::max(rep.mean_sigma, std::abs(e));
  }
  for (std::size_t l = 0; l < nL; ++l) {
    double e = 0.0;
    for (std::size_t s = 0; s < nS; ++s)
      e += sv.duals.probs[s] * sv.duals.sigma_f[s][l];
    rep.mean_sigma = std::max(rep.mean_sigma, std::abs(e));
  }

  const auto centered = derive_sigma_from_mu(mv.duals.mu_x, mv.duals.probs);
  for (std::size_t s = 0; s < nS; ++s)
    for (std::size_t i = 0; i < nP; ++i)
      rep.sigma_vs_centered_mu =
          std::max(rep.sigma_vs_centered_mu,
                   std::abs(sv.duals.sigma_x[s][i] - centered[s][i]));

  for (std::size_t s = 0; s < nS; ++s)
    for (std::size_t n = 0; n < nN; ++n) {
      rep.Pi_c_vs_Pi_m = std::max(
          rep.Pi_c_vs_Pi_m,
          std::abs(canonical.duals.Pi[s][n] - mv.duals.Pi[s][n]));
      rep.Pi_c_vs_Pi_s = std::max(
          rep.Pi_c_vs_Pi_s,
          std::abs(canonical.duals.Pi[s][n] - sv.duals.Pi[s][n]));
    }

  const double obj_scale = 1.0 + std::abs(canonical.dispatch.objective);
  rep.objective_spread =
      std::max(std::abs(canonical.dispatch.objective - mv.dispatch.objective),
               std::abs(canonical.dispatch.objective - sv.dispatch.objective)) /
      obj_scale;

  const bool iii_ok =
      !rep.centered_mu_comparable || rep.sigma_vs_centered_mu <= tol;
  rep.pass = rep.pi_c_vs_mean_pi_m <= tol && rep.pi_c_vs_mean_pi_s <= tol &&
             rep.mean_sigma <= tol && iii_ok && rep.Pi_c_vs_Pi_m <= tol &&
             rep.Pi_c_vs_Pi_s <= tol;
  // The centered-mu identity assumes both formulations picked the same dual
  // vertex; with degenerate duals it can fail while everything else holds.
  if (!iii_ok && rep.pi_c_vs_mean_pi_m <= tol && rep.pi_c_vs_mean_pi_s <= tol &&
      rep.mean_sigma <= tol && rep.Pi_c_vs_Pi_m <= tol && rep.Pi_c_vs_Pi_s <= tol)
    rep.dual_multiplicity_suspected = true;
  return rep;
}

}  // namespace stoclear
