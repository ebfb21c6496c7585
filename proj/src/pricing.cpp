#include "stoclear/pricing.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stoclear {

namespace {

// Admissible range for a (probability-rescaled) nonanticipativity dual around
// its extracted value. The dual multiplies the first-stage copy's
// nonanticipativity row, so moving it changes that copy's reduced cost by
// minus prob times the move; the sign condition on the reduced cost at the
// copy's bound status limits how far it may move while the dual vector stays
// optimal. Interior copies pin the dual exactly.
struct NaRange {
  double lo, hi;
};

NaRange na_range(double value, double primal, double lower, double upper,
                 double reduced, double prob) {
  const bool at_lo = primal <= lower + 1e-7 * (1.0 + std::abs(lower));
  const bool at_hi = primal >= upper - 1e-7 * (1.0 + std::abs(upper));
  if (at_lo && at_hi) return {-kInf, kInf};
  if (at_lo) return {-kInf, value + std::max(reduced, 0.0) / prob};
  if (at_hi) return {value + std::min(reduced, 0.0) / prob, kInf};
  return {value, value};
}

double filled_mean(const std::vector<double>& lo, const std::vector<double>& hi,
                   const std::vector<double>& probs, double t) {
  double m = 0.0;
  for (std::size_t s = 0; s < lo.size(); ++s)
    m += probs[s] * std::clamp(t, lo[s], hi[s]);
  return m;
}

// Common-level fill: sigma(s) = clamp(t, lo(s), hi(s)) with t chosen so the
// probability-weighted mean hits `target`. The mean is continuous and
// nondecreasing in t, so bisection converges; the result depends only on the
// intervals, not on the vertex the simplex happened to stop at.
std::vector<double> waterfill(const std::vector<double>& lo,
                              const std::vector<double>& hi,
                              const std::vector<double>& probs, double target) {
  double tl = -1e18, th = 1e18;
  for (int it = 0; it < 200; ++it) {
    const double tm = 0.5 * (tl + th);
    if (filled_mean(lo, hi, probs, tm) < target)
      tl = tm;
    else
      th = tm;
  }
  std::vector<double> out(lo.size());
  for (std::size_t s = 0; s < lo.size(); ++s)
    out[s] = std::clamp(th, lo[s], hi[s]);
  return out;
}

// A degenerate vertex admits many optimal nonanticipativity duals. Pick a
// canonical one: keep the probability-weighted mean fixed (so the aggregated
// optimality conditions are untouched) and, within the admissible ranges,
// stay as close to the per-scenario target band as the mean allows.
std::vector<double> select_na_duals(const std::vector<double>& value,
                                    const std::vector<NaRange>& range,
                                    const std::vector<double>& band_lo,
                                    const std::vector<double>& band_hi,
                                    const std::vector<double>& probs) {
  const std::size_t nS = value.size();
  bool pinned = true;
  for (const NaRange& r : range) pinned = pinned && r.lo == r.hi;
  if (pinned || nS < 2) return value;

  double target = 0.0;
  for (std::size_t s = 0; s < nS; ++s) target += probs[s] * value[s];
  std::vector<double> L(nS), H(nS), box_lo(nS), box_hi(nS);
  for (std::size_t s = 0; s < nS; ++s) {
    box_lo[s] = range[s].lo;
    box_hi[s] = range[s].hi;
    L[s] = std::max(band_lo[s], box_lo[s]);
    H[s] = std::min(band_hi[s], box_hi[s]);
    if (L[s] > H[s]) {
      // Admissible range and band are disjoint: the closest admissible point.
      L[s] = H[s] = box_lo[s] > band_hi[s] ? box_lo[s] : box_hi[s];
    }
  }
  double mean_lo = 0.0, mean_hi = 0.0;
  for (std::size_t s = 0; s < nS; ++s) {
    mean_lo += probs[s] * L[s];
    mean_hi += probs[s] * H[s];
  }
  if (target < mean_lo) return waterfill(box_lo, L, probs, target);
  if (target > mean_hi) return waterfill(H, box_hi, probs, target);
  return waterfill(L, H, probs, target);
}

}  // namespace

const char* mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::Rc: return "rc";
    case Mechanism::Rm: return "rm";
    case Mechanism::Rs: return "rs";
  }
  return "?";
}

double DualSolution::da_price(std::size_t s, std::size_t bus) const {
  if (kind == Formulation::MeanVector || kind == Formulation::StateVector)
    return pi[s][bus];
  return pi_c[bus];
}

DualSolution extract_duals(const Instance& inst, const LpSolution& sol,
                           const IndexMap& map, bool reselect) {
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("extract_duals: solution is not optimal");
  DualSolution d;
  d.kind = map.kind;
  const std::size_t nN = inst.buses.size();
  const std::size_t nP = inst.participants.size();
  const std::size_t nL = inst.lines.size();
  const std::size_t nS = map.n_scen;
  d.probs.resize(nS);
  for (std::size_t s = 0; s < nS; ++s)
    d.probs[s] = map.kind == Formulation::Clairvoyant
                     ? 1.0
                     : inst.scenario_set.scenarios[s].prob;

  // Degenerate clearing LPs admit many optimal dual vectors, and different
  // formulations generally stop at different vertices of that set. Reselect a
  // canonical point — the smallest probability-weighted real-time price sum,
  // with a tiny day-ahead tie-break and an L1 anchor to the solver's duals —
  // so that independently built formulations report the same prices.
  LpSolution canon = sol;
  if (reselect && map.kind != Formulation::Clairvoyant) {
    const auto built = map.kind == Formulation::Canonical ? build_canonical(inst)
                       : map.kind == Formulation::MeanVector
                           ? build_mean_vector(inst)
                           : build_state_vector(inst);
    const LpModel& model = built.first;
    if (model.rows.size() == sol.duals.size() &&
        model.vars.size() == sol.primal.size()) {
      // Weight 1 on each real-time balance row targets the smallest
      // probability-weighted price sum; the hash-based perturbation makes the
      // weights generic so the minimizer is a single vertex, the same one for
      // every formulation. The hash depends only on the (scenario, bus)
      // position, which is shared across formulations.
      auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
      };
      std::vector<double> w(model.rows.size(), 0.0);
      for (std::size_t s = 0; s < nS; ++s)
        for (std::size_t n = 0; n < nN; ++n)
          w[static_cast<std::size_t>(map.rt_balance[s][n])] =
              1.0 + 1e-4 * static_cast<double>(mix(s * nN + n) >> 11) * 0x1p-53;
      // The probability-weighted day-ahead price of a bus is already the
      // same for every optimal dual vector; preserve it so the reselection
      // tolerances cannot smear it.
      std::vector<std::vector<int>> keep(nN);
      for (std::size_t n = 0; n < nN; ++n)
        for (std::size_t s = 0; s < map.da_balance.size(); ++s)
          keep[n].push_back(map.da_balance[s][n]);
      canon = select_optimal_duals(model, sol, w, keep);
    }
  }

  auto dual = [&canon](int row) { return canon.duals[static_cast<std::size_t>(row)]; };

  const bool per_scen_first =
      map.kind == Formulation::MeanVector || map.kind == Formulation::StateVector;
  if (per_scen_first) {
    d.pi.assign(nS, std::vector<double>(nN, 0.0));
    for (std::size_t s = 0; s < nS; ++s)
      for (std::size_t n = 0; n < nN; ++n)
        d.pi[s][n] = dual(map.da_balance[s][n]) / d.probs[s];
  } else {
    d.pi_c.assign(nN, 0.0);
    for (std::size_t n = 0; n < nN; ++n)
      d.pi_c[n] = dual(map.da_balance[0][n]);
  }

  d.Pi.assign(nS, std::vector<double>(nN, 0.0));
  for (std::size_t s = 0; s < nS; ++s)
    for (std::size_t n = 0; n < nN; ++n)
      d.Pi[s][n] = dual(map.rt_balance[s][n]) / d.probs[s];

  if (map.kind == Formulation::MeanVector ||
      map.kind == Formulation::StateVector) {
    const bool mv = map.kind == Formulation::MeanVector;
    auto& na_x = mv ? d.mu_x : d.sigma_x;
    auto& na_f = mv ? d.mu_f : d.sigma_f;
    na_x.assign(nS, std::vector<double>(nP, 0.0));
    na_f.assign(nS, std::vector<double>(nL, 0.0));
    for (std::size_t s = 0; s < nS; ++s) {
      for (std::size_t i = 0; i < nP; ++i)
        na_x[s][i] = dual(map.na_x[s][i]) / d.probs[s];
      for (std::size_t l = 0; l < nL; ++l)
        na_f[s][l] = dual(map.na_f[s][l]) / d.probs[s];
    }
    // Canonical dual selection. Only the centered part of the mean-vector
    // dual enters reduced costs, so both formulations share the same
    // admissible ranges; the mean-vector mean is carried through unchanged.
    auto primal = [&canon](int col) {
      return canon.primal[static_cast<std::size_t>(col)];
    };
    auto reduced = [&canon](int col) {
      return canon.reduced_costs[static_cast<std::size_t>(col)];
    };
    std::vector<double> value(nS), band_lo(nS), band_hi(nS);
    std::vector<NaRange> range(nS);
    for (std::size_t i = 0; i < nP; ++i) {
      const Participant& p = inst.participants[i];
      const std::size_t n =
          static_cast<std::size_t>(inst.bus_index(p.bus));
      double mean = 0.0;
      for (std::size_t s = 0; s < nS; ++s) mean += d.probs[s] * na_x[s][i];
      if (!mv) mean = 0.0;
      for (std::size_t s = 0; s < nS; ++s) {
        value[s] = na_x[s][i] - mean;
        range[s] = na_range(value[s], primal(map.x[s][i]), p.x_min, p.x_max,
                            reduced(map.x[s][i]), d.probs[s]);
        // Target: keep the implied day-ahead/real-time price gap within the
        // participant's premium band.
        band_lo[s] = d.Pi[s][n] - d.pi[s][n] - p.premium_up;
        band_hi[s] = d.Pi[s][n] - d.pi[s][n] + p.premium_down;
      }
      const std::vector<double> sel =
          select_na_duals(value, range, band_lo, band_hi, d.probs);
      for (std::size_t s = 0; s < nS; ++s) na_x[s][i] = sel[s] + mean;
    }
    for (std::size_t l = 0; l < nL; ++l) {
      const Line& line = inst.lines[l];
      double mean = 0.0;
      for (std::size_t s = 0; s < nS; ++s) mean += d.probs[s] * na_f[s][l];
      if (!mv) mean = 0.0;
      for (std::size_t s = 0; s < nS; ++s) {
        value[s] = na_f[s][l] - mean;
        range[s] = na_range(value[s], primal(map.f[s][l]), line.f_min,
                            line.f_max, reduced(map.f[s][l]), d.probs[s]);
        band_lo[s] = band_hi[s] = 0.0;  // no premiums on flows: pull to zero
      }
      const std::vector<double> sel =
          select_na_duals(value, range, band_lo, band_hi, d.probs);
      for (std::size_t s = 0; s < nS; ++s) na_f[s][l] = sel[s] + mean;
    }
  }
  return d;
}

std::vector<std::vector<double>> derive_sigma_from_mu(
    const std::vector<std::vector<double>>& mu,
    const std::vector<double>& probs) {
  const std::size_t nS = mu.size();
  if (nS == 0) return {};
  const std::size_t n = mu[0].size();
  std::vector<double> mean(n, 0.0);
  for (std::size_t s = 0; s < nS; ++s)
    for (std::size_t i = 0; i < n; ++i) mean[i] += probs[s] * mu[s][i];
  auto sigma = mu;
  for (std::size_t s = 0; s < nS; ++s)
    for (std::size_t i = 0; i < n; ++i) sigma[s][i] -= mean[i];
  return sigma;
}

namespace {

PaymentTable settle(const Instance& inst, const DispatchSolution& dispatch,
                    const DualSolution& duals, Mechanism mech) {
  const std::size_t nP = inst.participants.size();
  const std::size_t nS = duals.Pi.size();
  PaymentTable table;
  table.mechanism = mech;
  table.rho.assign(nS, std::vector<double>(nP, 0.0));
  table.expected_rho.assign(nP, 0.0);
  for (std::size_t s = 0; s < nS; ++s) {
    for (std::size_t i = 0; i < nP; ++i) {
      const std::size_t n =
          static_cast<std::size_t>(inst.bus_index(inst.participants[i].bus));
      const double x = dispatch.x_at(s, i);
      const double X = dispatch.X[s][i];
      double da_price = duals.da_price(s, n);
      if (mech == Mechanism::Rm) da_price += duals.mu_x[s][i];
      if (mech == Mechanism::Rs) da_price += duals.sigma_x[s][i];
      table.rho[s][i] = da_price * x + duals.Pi[s][n] * (X - x);
      table.expected_rho[i] += duals.probs[s] * table.rho[s][i];
    }
  }
  return table;
}

void require_kind(const DualSolution& duals, Formulation a, Formulation b,
                  const char* what) {
  if (duals.kind != a && duals.kind != b)
    throw std::runtime_error(std::string(what) +
                             ": duals from the wrong formulation");
}

}  // namespace

PaymentTable payments_canonical(const Instance& inst,
                                const DispatchSolution& dispatch,
                                const DualSolution& duals) {
  require_kind(duals, Formulation::Canonical, Formulation::Clairvoyant,
               "payments_canonical");
  return settle(inst, dispatch, duals, Mechanism::Rc);
}

PaymentTable payments_mean_vector(const Instance& inst,
                                  const DispatchSolution& dispatch,
                                  const DualSolution& duals) {
  require_kind(duals, Formulation::MeanVector, Formulation::MeanVector,
               "payments_mean_vector");
  return settle(inst, dispatch, duals, Mechanism::Rm);
}

PaymentTable payments_state_vector(const Instance& inst,
                                   const DispatchSolution& dispatch,
                                   const DualSolution& duals) {
  require_kind(duals, Formulation::StateVector, Formulation::StateVector,
               "payments_state_vector");
  return settle(inst, dispatch, duals, Mechanism::Rs);
}

DistortionTable price_distortion(Mechanism mech, const Instance& inst,
                                 const DualSolution& duals) {
  const std::size_t nS = duals.Pi.size();
  const std::size_t nN = inst.buses.size();
  const std::size_t nP = inst.participants.size();
  DistortionTable t;
  t.mechanism = mech;
  t.per_bus = mech == Mechanism::Rc;
  const std::size_t cols = t.per_bus ? nN : nP;
  t.M.assign(nS, std::vector<double>(cols, 0.0));
  t.expected_M.assign(cols, 0.0);
  for (std::size_t s = 0; s < nS; ++s) {
    for (std::size_t k = 0; k < cols; ++k) {
      double m;
      if (t.per_bus) {
        m = duals.pi_c[k] - duals.Pi[s][k];
      } else {
        const std::size_t n = static_cast<std::size_t>(
            inst.bus_index(inst.participants[k].bus));
        const double adj = mech == Mechanism::Rm ? duals.mu_x[s][k]
                                                 : duals.sigma_x[s][k];
        m = duals.da_price(s, n) + adj - duals.Pi[s][n];
      }
      t.M[s][k] = m;
      t.expected_M[k] += duals.probs[s] * m;
    }
  }
  return t;
}

}  // namespace stoclear
