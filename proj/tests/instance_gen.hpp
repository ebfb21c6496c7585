#ifndef STOCLEAR_TESTS_INSTANCE_GEN_HPP
#define STOCLEAR_TESTS_INSTANCE_GEN_HPP

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "stoclear/market.hpp"

namespace stoclear::testing {

struct GenOptions {
  int max_buses = 5;
  int min_participants = 2;
  int max_participants = 8;
  int max_scenarios = 10;
  bool one_bus = false;
  // Generators get x_min = X_min = 0 either way; set to allow positive
  // minimum-run levels instead.
  bool allow_positive_min = false;
  // Shape the draw so the settlement guarantees are exercised away from their
  // known edge cases: per-instance uniform premiums, generator bids clustered
  // within one premium band of each other (so real-time redispatch never
  // displaces a capacity-pinned unit), load bids far above any generator's
  // marginal cost (loads always clear fully and are never curtailed), firm
  // capacity comfortably above total demand, and a network that never
  // congests. Day-ahead and real-time bounds coincide.
  bool settlement_regular = false;
};

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Instance random_instance(std::mt19937_64& rng,
                                const GenOptions& opt = {}) {
  Instance inst;
  inst.name = "random";
  const int nB = opt.one_bus ? 1 : uniform_int(rng, 1, opt.max_buses);
  for (int b = 1; b <= nB; ++b)
    inst.buses.push_back({b, "b" + std::to_string(b)});
  inst.reference_bus = 1;

  // Spanning tree keeps the network connected; a few extra lines add loops.
  for (int b = 2; b <= nB; ++b) {
    const double cap = uniform(rng, 80.0, 400.0);
    inst.lines.push_back({uniform_int(rng, 1, b - 1), b, -cap, cap,
                          -cap * 1.2, cap * 1.2, uniform(rng, 50.0, 200.0)});
  }
  if (nB > 2)
    for (int e = uniform_int(rng, 0, 2); e > 0; --e) {
      const int i = uniform_int(rng, 1, nB);
      int j = uniform_int(rng, 1, nB);
      if (i == j) continue;
      const double cap = uniform(rng, 80.0, 400.0);
      inst.lines.push_back(
          {i, j, -cap, cap, -cap * 1.2, cap * 1.2, uniform(rng, 50.0, 200.0)});
    }

  const int nP = uniform_int(rng, opt.min_participants, opt.max_participants);
  const int nS = uniform_int(rng, 1, opt.max_scenarios);
  const double prem_up = uniform(rng, 2.0, 8.0);
  const double prem_down = uniform(rng, 2.0, 8.0);
  std::vector<std::string> stochastic_ids;
  int n_loads = 0;
  double total_demand = 0.0;
  double firm_capacity = 0.0;
  for (int k = 0; k < nP; ++k) {
    Participant p;
    p.id = "p" + std::to_string(k + 1);
    p.bus = uniform_int(rng, 1, nB);
    // Alternate kinds so both sides of the market are always present.
    const bool load = k == 1 || (k > 1 && uniform(rng, 0.0, 1.0) < 0.35);
    if (load) {
      ++n_loads;
      p.kind = ParticipantKind::Load;
      p.bid = opt.settlement_regular ? uniform(rng, 150.0, 300.0)
                                     : uniform(rng, 60.0, 300.0);
      p.premium_up = opt.settlement_regular ? prem_up : uniform(rng, 0.5, 8.0);
      p.premium_down =
          opt.settlement_regular ? prem_down : uniform(rng, 0.5, 8.0);
      const double demand = uniform(rng, 20.0, 120.0);
      total_demand += demand;
      p.x_min = -demand;
      p.x_max = 0.0;
      p.X_min = opt.settlement_regular ? -demand : -demand * uniform(rng, 1.0, 1.3);
      p.X_max = 0.0;
    } else {
      p.kind = ParticipantKind::Generator;
      if (opt.settlement_regular) {
        p.bid = uniform(rng, 25.0, 25.0 + 0.9 * (prem_up + prem_down));
        p.premium_up = prem_up;
        p.premium_down = prem_down;
      } else {
        p.bid = uniform(rng, 5.0, 60.0);
        p.premium_up = uniform(rng, 0.5, 8.0);
        p.premium_down = uniform(rng, 0.5, std::max(0.6, p.bid * 0.2));
      }
      p.x_max = uniform(rng, 30.0, 150.0);
      p.X_max = opt.settlement_regular ? p.x_max
                                       : p.x_max * uniform(rng, 1.0, 1.3);
      p.x_min = p.X_min = 0.0;
      if (!opt.settlement_regular && opt.allow_positive_min &&
          uniform(rng, 0.0, 1.0) < 0.3)
        p.x_min = p.X_min = uniform(rng, 0.0, p.x_max * 0.2);
      // The first generator stays firm so firm capacity is never zero.
      if (p.X_min == 0.0 && k != 0 && uniform(rng, 0.0, 1.0) < 0.4) {
        p.stochastic = true;
        stochastic_ids.push_back(p.id);
      } else {
        firm_capacity += p.x_max;
      }
    }
    inst.participants.push_back(p);
  }
  if (n_loads == 0) {
    // min_participants == 1 edge case: force a load in.
    inst.participants[0].kind = ParticipantKind::Load;
  }
  if (opt.settlement_regular) {
    // Firm capacity covers demand with margin, so curtailment is never
    // optimal against the much higher load bids.
    const double need = 1.3 * total_demand;
    if (firm_capacity < need && firm_capacity > 0.0) {
      const double scale = need / firm_capacity;
      for (Participant& p : inst.participants)
        if (p.kind == ParticipantKind::Generator && !p.stochastic) {
          p.x_max *= scale;
          p.X_max = p.x_max;
        }
    }
    // Caps above total demand keep every line uncongested, and wide angle
    // bounds keep them non-binding too.
    const double cap = std::max(100.0, 1.2 * total_demand);
    for (Line& l : inst.lines) {
      l.f_min = l.F_min = -cap * uniform(rng, 1.0, 1.5);
      l.f_max = l.F_max = -l.f_min;
    }
    inst.theta_min = -100.0;
    inst.theta_max = 100.0;
  }

  std::vector<double> probs(static_cast<std::size_t>(nS));
  double total = 0.0;
  for (double& p : probs) total += (p = uniform(rng, 0.2, 1.0));
  double acc = 0.0;
  for (std::size_t s = 0; s + 1 < probs.size(); ++s) {
    probs[s] /= total;
    acc += probs[s];
  }
  probs.back() = 1.0 - acc;

  for (int s = 0; s < nS; ++s) {
    Scenario scen;
    scen.prob = probs[static_cast<std::size_t>(s)];
    for (const std::string& id : stochastic_ids) {
      const Participant& p =
          inst.participants[static_cast<std::size_t>(inst.participant_index(id))];
      scen.x_avail[id] = uniform(rng, 0.0, p.X_max);
    }
    inst.scenario_set.scenarios.push_back(std::move(scen));
  }
  return inst;
}

}  // namespace stoclear::testing

#endif
