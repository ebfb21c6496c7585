#ifndef STOCLEAR_FORMULATIONS_HPP
#define STOCLEAR_FORMULATIONS_HPP

#include <utility>
#include <vector>

#include "stoclear/lp.hpp"
#include "stoclear/market.hpp"

namespace stoclear {

enum class Formulation { Clairvoyant, Canonical, MeanVector, StateVector };

const char* formulation_name(Formulation f);

/// Maps model columns/rows back to domain objects. First-stage entries are
/// indexed [scenario][object]; canonical and clairvoyant store a single
/// scenario slot. -1 marks an absent index (e.g. no lines, no state vars).
struct IndexMap {
  Formulation kind = Formulation::Canonical;
  std::size_t n_scen = 0;

  // variables
  std::vector<std::vector<int>> x;      // [s][participant] day-ahead
  std::vector<std::vector<int>> f;      // [s][line]
  std::vector<std::vector<int>> theta;  // [s][bus]
  std::vector<std::vector<int>> X;      // [s][participant] real-time
  std::vector<std::vector<int>> F;      // [s][line]
  std::vector<std::vector<int>> Theta;  // [s][bus]
  std::vector<std::vector<int>> u;      // [s][participant] (X-x)_+
  std::vector<std::vector<int>> v;      // [s][participant] (X-x)_-
  std::vector<int> chi_x;               // [participant], state-vector only
  std::vector<int> chi_f;               // [line], state-vector only

  // constraints
  std::vector<std::vector<int>> da_balance;  // [s][bus] (canonical: s=0)
  std::vector<std::vector<int>> rt_balance;  // [s][bus]
  std::vector<std::vector<int>> split;       // [s][participant]
  std::vector<std::vector<int>> na_x;        // [s][participant] MV/SV
  std::vector<std::vector<int>> na_f;        // [s][line] MV/SV

  std::size_t first_stage_copies() const {
    return (kind == Formulation::MeanVector || kind == Formulation::StateVector)
               ? n_scen
               : 1;
  }
};

struct DispatchSolution {
  Formulation kind = Formulation::Canonical;
  // First-stage quantities per scenario copy (one row for canonical and
  // clairvoyant), second-stage quantities per scenario.
  std::vector<std::vector<double>> x;  // [copy][participant]
  std::vector<std::vector<double>> f;  // [copy][line]
  std::vector<std::vector<double>> X;  // [s][participant]
  std::vector<std::vector<double>> F;  // [s][line]
  std::vector<double> x_bar;           // implementable day-ahead vector
  std::vector<double> f_bar;
  double objective = 0.0;

  // Day-ahead quantity of participant i as used by the pricing formulas:
  // the scenario copy for MV/SV, the single vector otherwise.
  double x_at(std::size_t s, std::size_t i) const;
  double f_at(std::size_t s, std::size_t l) const;
};

std::pair<LpModel, IndexMap> build_clairvoyant(const Instance& inst,
                                               std::size_t scenario);
std::pair<LpModel, IndexMap> build_canonical(const Instance& inst);
std::pair<LpModel, IndexMap> build_mean_vector(const Instance& inst);
std::pair<LpModel, IndexMap> build_state_vector(const Instance& inst);

// Throws std::runtime_error if the solution is not optimal.
DispatchSolution extract_dispatch(const Instance& inst, const LpSolution& sol,
                                  const IndexMap& map);

}  // namespace stoclear

#endif
