#ifndef STOCLEAR_PH_HPP
#define STOCLEAR_PH_HPP

#include <vector>

#include "stoclear/formulations.hpp"

namespace stoclear {

struct PhParams {
  double penalty = 1.0;     // $/MWh^2
  int max_iters = 400;
  double primal_tol = 1e-4;  // max scenario spread of first-stage vars
  double dual_tol = 1e-4;    // max multiplier drift between iterations
  int breakpoints = 21;      // PWL grid for the quadratic penalty
};

struct PhIterRecord {
  double spread = 0.0;
  double objective_estimate = 0.0;
  double multiplier_norm = 0.0;
};

struct PhTrace {
  std::vector<PhIterRecord> iterations;
};

struct PhResult {
  bool converged = false;
  DispatchSolution dispatch;             // kind = MeanVector
  std::vector<std::vector<double>> w_x;  // [s][participant] multipliers
  std::vector<std::vector<double>> w_f;  // [s][line]
  PhTrace trace;
  double objective = 0.0;  // exact objective of the implementable x_bar
};

// Progressive hedging on the mean-vector form. Scenario subproblems are the
// clairvoyant LPs augmented with w*x and a piecewise-linear proxy of the
// quadratic penalty, so a single LP solver serves the whole repo. The
// returned w satisfy E[w] = 0 and are estimates of sigma, not certified
// LP duals.
PhResult solve_progressive_hedging(const Instance& inst, const PhParams& params);

}  // namespace stoclear

#endif
