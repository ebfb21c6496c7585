#ifndef STOCLEAR_PRICING_HPP
#define STOCLEAR_PRICING_HPP

#include <vector>

#include "stoclear/formulations.hpp"
#include "stoclear/market.hpp"

namespace stoclear {

enum class Mechanism { Rc, Rm, Rs };

const char* mechanism_name(Mechanism m);

/// Probability-rescaled duals. Raw constraint duals are divided by the
/// scenario probability wherever the row is scenario-indexed; the canonical
/// day-ahead price pi_c is the raw dual (the row is not scenario-indexed).
struct DualSolution {
  Formulation kind = Formulation::Canonical;
  std::vector<double> probs;

  std::vector<double> pi_c;                  // [bus], canonical/clairvoyant
  std::vector<std::vector<double>> pi;       // [s][bus], MV/SV
  std::vector<std::vector<double>> Pi;       // [s][bus], all forms
  std::vector<std::vector<double>> mu_x;     // [s][participant], MV
  std::vector<std::vector<double>> mu_f;     // [s][line], MV
  std::vector<std::vector<double>> sigma_x;  // [s][participant], SV
  std::vector<std::vector<double>> sigma_f;  // [s][line], SV

  // Day-ahead price seen by bus n under scenario s for this formulation.
  double da_price(std::size_t s, std::size_t bus) const;
};

// With reselect=true the duals are moved to a canonical optimal vertex so
// independently built formulations report the same prices; with reselect=false
// the solver's own (exactly optimal) duals are kept, which is preferable when
// only one formulation's settlement is being evaluated.
DualSolution extract_duals(const Instance& inst, const LpSolution& sol,
                           const IndexMap& map, bool reselect = true);

// sigma_i(w) = mu_i(w) - E[mu_i]
std::vector<std::vector<double>> derive_sigma_from_mu(
    const std::vector<std::vector<double>>& mu, const std::vector<double>& probs);

struct PaymentTable {
  Mechanism mechanism = Mechanism::Rc;
  std::vector<std::vector<double>> rho;  // [s][participant], +ve to generator
  std::vector<double> expected_rho;      // [participant]
};

PaymentTable payments_canonical(const Instance& inst,
                                const DispatchSolution& dispatch,
                                const DualSolution& duals);
PaymentTable payments_mean_vector(const Instance& inst,
                                  const DispatchSolution& dispatch,
                                  const DualSolution& duals);
PaymentTable payments_state_vector(const Instance& inst,
                                   const DispatchSolution& dispatch,
                                   const DualSolution& duals);

struct DistortionTable {
  Mechanism mechanism = Mechanism::Rc;
  bool per_bus = false;                // R^c is per bus, R^m/R^s per participant
  std::vector<std::vector<double>> M;  // [s][bus or participant]
  std::vector<double> expected_M;
};

DistortionTable price_distortion(Mechanism mech, const Instance& inst,
                                 const DualSolution& duals);

}  // namespace stoclear

#endif
