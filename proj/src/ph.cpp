#include "stoclear/ph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stoclear {

namespace {

// Epigraph of a piecewise-linear secant approximation of
// (pen/2)*(z - center)^2 over [lo, hi]: adds a cost-1 variable q and one
// ">=" row per segment. Breakpoints grow geometrically away from the center,
// so the first kink next to the center has a near-zero slope: a uniform grid
// would put a steep kink at the consensus point and freeze the iterates on
// whichever consensus formed first, well away from the optimum.
void add_pwl_penalty(LpModel& model, int z_col, double lo, double hi,
                     double center, double pen, int breakpoints) {
  if (pen <= 0.0) return;
  if (!std::isfinite(lo)) lo = center - 1e3;
  if (!std::isfinite(hi)) hi = center + 1e3;
  if (hi - lo < 1e-12) return;
  center = std::clamp(center, lo, hi);
  const double w0 =
      std::max((hi - lo) * std::ldexp(1.0, -std::max(breakpoints, 8)), 1e-9);
  std::vector<double> grid{center};
  for (double d = w0; center + d < hi; d *= 2.0) grid.push_back(center + d);
  for (double d = w0; center - d > lo; d *= 2.0) grid.push_back(center - d);
  grid.push_back(lo);
  grid.push_back(hi);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             grid.end());

  const std::string zname = model.vars[static_cast<std::size_t>(z_col)].name;
  const int q = model.add_variable("pen_" + zname, 0.0, kInf, 1.0);
  auto g = [&](double t) { return 0.5 * pen * (t - center) * (t - center); };
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double t0 = grid[k], t1 = grid[k + 1];
    const double m = (g(t1) - g(t0)) / (t1 - t0);
    const double b = g(t0) - m * t0;
    const int r = model.add_row("pen_" + zname + "_" + std::to_string(k),
                                RowSense::Ge, b);
    model.add_coeff(r, q, 1.0);
    model.add_coeff(r, z_col, -m);
  }
}

}  // namespace

PhResult solve_progressive_hedging(const Instance& inst,
                                   const PhParams& params) {
  const std::size_t nS = inst.num_scenarios();
  const std::size_t nP = inst.participants.size();
  const std::size_t nL = inst.lines.size();
  if (nS == 0) throw std::invalid_argument("progressive hedging: no scenarios");

  std::vector<double> probs(nS);
  for (std::size_t s = 0; s < nS; ++s)
    probs[s] = inst.scenario_set.scenarios[s].prob;

  // Base scenario subproblems (shared structure, objective rebuilt each pass).
  std::vector<LpModel> base_models;
  std::vector<IndexMap> maps;
  base_models.reserve(nS);
  for (std::size_t s = 0; s < nS; ++s) {
    auto [model, map] = build_clairvoyant(inst, s);
    base_models.push_back(std::move(model));
    maps.push_back(std::move(map));
  }

  PhResult res;
  res.w_x.assign(nS, std::vector<double>(nP, 0.0));
  res.w_f.assign(nS, std::vector<double>(nL, 0.0));

  std::vector<std::vector<double>> xs(nS, std::vector<double>(nP, 0.0));
  std::vector<std::vector<double>> fs(nS, std::vector<double>(nL, 0.0));
  std::vector<std::vector<double>> Xs(nS, std::vector<double>(nP, 0.0));
  std::vector<std::vector<double>> Fs(nS, std::vector<double>(nL, 0.0));
  std::vector<double> x_bar(nP, 0.0), f_bar(nL, 0.0);
  std::vector<double> x_bar_prev, f_bar_prev;
  bool have_bar = false;

  for (int iter = 0; iter < params.max_iters; ++iter) {
    double obj_estimate = 0.0;
    for (std::size_t s = 0; s < nS; ++s) {
      LpModel model = base_models[s];
      const IndexMap& map = maps[s];
      for (std::size_t i = 0; i < nP; ++i) {
        const int col = map.x[0][i];
        model.add_obj(col, res.w_x[s][i]);
        if (have_bar)
          add_pwl_penalty(model, col, model.vars[col].lower,
                          model.vars[col].upper, x_bar[i], params.penalty,
                          params.breakpoints);
      }
      for (std::size_t l = 0; l < nL; ++l) {
        const int col = map.f[0][l];
        model.add_obj(col, res.w_f[s][l]);
        if (have_bar)
          add_pwl_penalty(model, col, model.vars[col].lower,
                          model.vars[col].upper, f_bar[l], params.penalty,
                          params.breakpoints);
      }
      const LpSolution sol = solve_lp(model);
      if (sol.status != LpStatus::Optimal)
        throw std::runtime_error("progressive hedging: subproblem " +
                                 std::to_string(s) + " did not solve");
      for (std::size_t i = 0; i < nP; ++i) {
        xs[s][i] = sol.primal[static_cast<std::size_t>(map.x[0][i])];
        Xs[s][i] = sol.primal[static_cast<std::size_t>(map.X[0][i])];
      }
      for (std::size_t l = 0; l < nL; ++l) {
        fs[s][l] = sol.primal[static_cast<std::size_t>(map.f[0][l])];
        Fs[s][l] = sol.primal[static_cast<std::size_t>(map.F[0][l])];
      }
      // Strip the multiplier and penalty terms to estimate the true cost.
      double raw = sol.objective;
      for (std::size_t i = 0; i < nP; ++i) raw -= res.w_x[s][i] * xs[s][i];
      for (std::size_t l = 0; l < nL; ++l) raw -= res.w_f[s][l] * fs[s][l];
      for (std::size_t c = base_models[s].num_vars(); c < model.num_vars(); ++c)
        raw -= model.obj[c] * sol.primal[c];
      obj_estimate += probs[s] * raw;
    }

    // Implementable point and multiplier update.
    x_bar_prev = x_bar;
    f_bar_prev = f_bar;
    std::fill(x_bar.begin(), x_bar.end(), 0.0);
    std::fill(f_bar.begin(), f_bar.end(), 0.0);
    for (std::size_t s = 0; s < nS; ++s) {
      for (std::size_t i = 0; i < nP; ++i) x_bar[i] += probs[s] * xs[s][i];
      for (std::size_t l = 0; l < nL; ++l) f_bar[l] += probs[s] * fs[s][l];
    }
    // When every scenario shares a descent direction the spread stays tiny
    // while the consensus point itself creeps toward the optimum, so the
    // movement of the implementable point must gate termination too.
    double movement = 0.0;
    if (have_bar) {
      for (std::size_t i = 0; i < nP; ++i)
        movement = std::max(movement, std::abs(x_bar[i] - x_bar_prev[i]));
      for (std::size_t l = 0; l < nL; ++l)
        movement = std::max(movement, std::abs(f_bar[l] - f_bar_prev[l]));
    }
    have_bar = true;

    double spread = 0.0, scale = 1.0, drift = 0.0;
    for (std::size_t i = 0; i < nP; ++i) scale = std::max(scale, std::abs(x_bar[i]));
    for (std::size_t l = 0; l < nL; ++l) scale = std::max(scale, std::abs(f_bar[l]));
    for (std::size_t s = 0; s < nS; ++s) {
      for (std::size_t i = 0; i < nP; ++i) {
        spread = std::max(spread, std::abs(xs[s][i] - x_bar[i]));
        const double step = params.penalty * (xs[s][i] - x_bar[i]);
        res.w_x[s][i] += step;
        drift = std::max(drift, std::abs(step));
      }
      for (std::size_t l = 0; l < nL; ++l) {
        spread = std::max(spread, std::abs(fs[s][l] - f_bar[l]));
        const double step = params.penalty * (fs[s][l] - f_bar[l]);
        res.w_f[s][l] += step;
        drift = std::max(drift, std::abs(step));
      }
    }
    // Keep E[w] = 0 exactly despite floating-point accumulation.
    for (std::size_t i = 0; i < nP; ++i) {
      double e = 0.0;
      for (std::size_t s = 0; s < nS; ++s) e += probs[s] * res.w_x[s][i];
      for (std::size_t s = 0; s < nS; ++s) res.w_x[s][i] -= e;
    }
    for (std::size_t l = 0; l < nL; ++l) {
      double e = 0.0;
      for (std::size_t s = 0; s < nS; ++s) e += probs[s] * res.w_f[s][l];
      for (std::size_t s = 0; s < nS; ++s) res.w_f[s][l] -= e;
    }

    double wnorm = 0.0;
    for (const auto& row : res.w_x)
      for (double w : row) wnorm = std::max(wnorm, std::abs(w));
    for (const auto& row : res.w_f)
      for (double w : row) wnorm = std::max(wnorm, std::abs(w));
    res.trace.iterations.push_back({spread, obj_estimate, wnorm});

    if (spread <= params.primal_tol * scale &&
        movement <= params.primal_tol * scale &&
        (iter == 0 || drift <= params.dual_tol * std::max(1.0, wnorm))) {
      res.converged = true;
      break;
    }
  }

  // Exact cost of the implementable point: fix the day-ahead vector in the
  // extensive form and re-solve the second stage.
  auto [model, map] = build_canonical(inst);
  for (std::size_t i = 0; i < nP; ++i) {
    auto& var = model.vars[static_cast<std::size_t>(map.x[0][i])];
    const double v = std::clamp(x_bar[i], var.lower, var.upper);
    var.lower = var.upper = v;
    x_bar[i] = v;
  }
  for (std::size_t l = 0; l < nL; ++l) {
    auto& var = model.vars[static_cast<std::size_t>(map.f[0][l])];
    const double v = std::clamp(f_bar[l], var.lower, var.upper);
    var.lower = var.upper = v;
    f_bar[l] = v;
  }
  const LpSolution fixed = solve_lp(model);
  if (fixed.status != LpStatus::Optimal)
    throw std::runtime_error(
        "progressive hedging: fixed day-ahead evaluation failed");
  DispatchSolution d = extract_dispatch(inst, fixed, map);
  res.objective = fixed.objective;

  res.dispatch.kind = Formulation::MeanVector;
  res.dispatch.x = xs;
  res.dispatch.f = fs;
  res.dispatch.X = d.X;
  res.dispatch.F = d.F;
  res.dispatch.x_bar = x_bar;
  res.dispatch.f_bar = f_bar;
  res.dispatch.objective = res.objective;
  return res;
}

}  // namespace stoclear
