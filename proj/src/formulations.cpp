#include "stoclear/formulations.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stoclear {

const char* formulation_name(Formulation f) {
  switch (f) {
    case Formulation::Clairvoyant: return "clairvoyant";
    case Formulation::Canonical: return "canonical";
    case Formulation::MeanVector: return "mean_vector";
    case Formulation::StateVector: return "state_vector";
  }
  return "?";
}

double DispatchSolution::x_at(std::size_t s, std::size_t i) const {
  return x[std::min(s, x.size() - 1)][i];
}

double DispatchSolution::f_at(std::size_t s, std::size_t l) const {
  return f[std::min(s, f.size() - 1)][l];
}

namespace {

struct Builder {
  const Instance& inst;
  Formulation kind;
  LpModel model;
  IndexMap map;
  std::size_t nP, nL, nN, nS;

  Builder(const Instance& in, Formulation k, std::size_t scen_count)
      : inst(in), kind(k) {
    nP = inst.participants.size();
    nL = inst.lines.size();
    nN = inst.buses.size();
    nS = scen_count;
    map.kind = k;
    map.n_scen = nS;
    const std::size_t fs = first_stage_copies();
    auto grid = [](std::size_t a, std::size_t b) {
      return std::vector<std::vector<int>>(a, std::vector<int>(b, -1));
    };
    map.x = grid(fs, nP);
    map.f = grid(fs, nL);
    map.theta = grid(fs, nN);
    map.X = grid(nS, nP);
    map.F = grid(nS, nL);
    map.Theta = grid(nS, nN);
    map.u = grid(nS, nP);
    map.v = grid(nS, nP);
    map.da_balance = grid(fs, nN);
    map.rt_balance = grid(nS, nN);
    map.split = grid(nS, nP);
    if (k == Formulation::MeanVector || k == Formulation::StateVector) {
      map.na_x = grid(nS, nP);
      map.na_f = grid(nS, nL);
    }
    if (k == Formulation::StateVector) {
      map.chi_x.assign(nP, -1);
      map.chi_f.assign(nL, -1);
    }
  }

  std::size_t first_stage_copies() const {
    return (kind == Formulation::MeanVector || kind == Formulation::StateVector)
               ? nS
               : 1;
  }

  // probability weight attached to the second-stage cost of scenario s (the
  // clairvoyant problem is a single unweighted scenario)
  double weight(std::size_t scenario_index) const {
    if (kind == Formulation::Clairvoyant) return 1.0;
    return inst.scenario_set.scenarios[scenario_index].prob;
  }

  static std::string tag(const char* base, std::size_t s, const std::string& id) {
    return std::string(base) + "_" + std::to_string(s) + "_" + id;
  }

  void add_first_stage(std::size_t c, std::size_t scenario_for_weight) {
    const double px =
        first_stage_copies() > 1 ? weight(scenario_for_weight) : 1.0;
    for (std::size_t i = 0; i < nP; ++i) {
      const Participant& p = inst.participants[i];
      map.x[c][i] = model.add_variable(tag("x", c, p.id), p.x_min, p.x_max,
                                       px * p.bid);
    }
    for (std::size_t l = 0; l < nL; ++l)
      map.f[c][l] = model.add_variable(tag("f", c, std::to_string(l)),
                                       inst.lines[l].f_min, inst.lines[l].f_max);
    if (nL > 0) {
      for (std::size_t n = 0; n < nN; ++n) {
        const bool ref = inst.buses[n].id == inst.reference_bus;
        map.theta[c][n] = model.add_variable(
            tag("th", c, std::to_string(inst.buses[n].id)),
            ref ? 0.0 : inst.theta_min, ref ? 0.0 : inst.theta_max);
      }
    }
    for (std::size_t n = 0; n < nN; ++n)
      map.da_balance[c][n] = model.add_row(
          tag("da_bal", c, std::to_string(inst.buses[n].id)), RowSense::Eq, 0.0);
    for (std::size_t l = 0; l < nL; ++l) {
      const Line& line = inst.lines[l];
      int row = model.add_row(tag("da_flow", c, std::to_string(l)),
                              RowSense::Eq, 0.0);
      model.add_coeff(row, map.f[c][l], 1.0);
      model.add_coeff(row, map.theta[c][static_cast<std::size_t>(inst.bus_index(line.from))], -line.beta);
      model.add_coeff(row, map.theta[c][static_cast<std::size_t>(inst.bus_index(line.to))], line.beta);
      // net flow tau_n(f): +f into `to`, -f out of `from`
      model.add_coeff(map.da_balance[c][static_cast<std::size_t>(inst.bus_index(line.to))], map.f[c][l], 1.0);
      model.add_coeff(map.da_balance[c][static_cast<std::size_t>(inst.bus_index(line.from))], map.f[c][l], -1.0);
    }
    for (std::size_t i = 0; i < nP; ++i)
      model.add_coeff(
          map.da_balance[c][static_cast<std::size_t>(inst.bus_index(inst.participants[i].bus))],
          map.x[c][i], 1.0);
  }

  void add_second_stage(std::size_t s, std::size_t scenario_index,
                        std::size_t first_stage_copy) {
    const double p = weight(scenario_index);
    for (std::size_t i = 0; i < nP; ++i) {
      const Participant& part = inst.participants[i];
      const double avail = inst.availability(i, scenario_index);
      const double lo = std::max(part.X_min, -avail);
      const double hi = std::min(part.X_max, avail);
      map.X[s][i] = model.add_variable(tag("X", s, part.id), lo, hi);
      map.u[s][i] = model.add_variable(tag("u", s, part.id), 0.0, kInf,
                                       p * (part.bid + part.premium_up));
      map.v[s][i] = model.add_variable(tag("v", s, part.id), 0.0, kInf,
                                       -p * (part.bid - part.premium_down));
    }
    for (std::size_t l = 0; l < nL; ++l)
      map.F[s][l] = model.add_variable(tag("F", s, std::to_string(l)),
                                       inst.lines[l].F_min, inst.lines[l].F_max);
    if (nL > 0) {
      for (std::size_t n = 0; n < nN; ++n) {
        const bool ref = inst.buses[n].id == inst.reference_bus;
        map.Theta[s][n] = model.add_variable(
            tag("Th", s, std::to_string(inst.buses[n].id)),
            ref ? 0.0 : inst.theta_min, ref ? 0.0 : inst.theta_max);
      }
    }
    for (std::size_t n = 0; n < nN; ++n)
      map.rt_balance[s][n] = model.add_row(
          tag("rt_bal", s, std::to_string(inst.buses[n].id)), RowSense::Eq, 0.0);
    for (std::size_t l = 0; l < nL; ++l) {
      const Line& line = inst.lines[l];
      int row = model.add_row(tag("rt_flow", s, std::to_string(l)),
                              RowSense::Eq, 0.0);
      model.add_coeff(row, map.F[s][l], 1.0);
      model.add_coeff(row, map.Theta[s][static_cast<std::size_t>(inst.bus_index(line.from))], -line.beta);
      model.add_coeff(row, map.Theta[s][static_cast<std::size_t>(inst.bus_index(line.to))], line.beta);
      // tau(F) - tau(f)
      const std::size_t to = static_cast<std::size_t>(inst.bus_index(line.to));
      const std::size_t from = static_cast<std::size_t>(inst.bus_index(line.from));
      model.add_coeff(map.rt_balance[s][to], map.F[s][l], 1.0);
      model.add_coeff(map.rt_balance[s][from], map.F[s][l], -1.0);
      model.add_coeff(map.rt_balance[s][to], map.f[first_stage_copy][l], -1.0);
      model.add_coeff(map.rt_balance[s][from], map.f[first_stage_copy][l], 1.0);
    }
    for (std::size_t i = 0; i < nP; ++i) {
      const std::size_t n =
          static_cast<std::size_t>(inst.bus_index(inst.participants[i].bus));
      model.add_coeff(map.rt_balance[s][n], map.X[s][i], 1.0);
      model.add_coeff(map.rt_balance[s][n], map.x[first_stage_copy][i], -1.0);
      // X - x = u - v
      map.split[s][i] = model.add_row(tag("split", s, inst.participants[i].id),
                                      RowSense::Eq, 0.0);
      model.add_coeff(map.split[s][i], map.X[s][i], 1.0);
      model.add_coeff(map.split[s][i], map.x[first_stage_copy][i], -1.0);
      model.add_coeff(map.split[s][i], map.u[s][i], -1.0);
      model.add_coeff(map.split[s][i], map.v[s][i], 1.0);
    }
  }
};

}  // namespace

std::pair<LpModel, IndexMap> build_clairvoyant(const Instance& inst,
                                               std::size_t scenario) {
  if (scenario >= inst.num_scenarios())
    throw std::out_of_range("unknown scenario " + std::to_string(scenario));
  Builder b(inst, Formulation::Clairvoyant, 1);
  b.add_first_stage(0, scenario);
  b.add_second_stage(0, scenario, 0);
  return {std::move(b.model), std::move(b.map)};
}

std::pair<LpModel, IndexMap> build_canonical(const Instance& inst) {
  Builder b(inst, Formulation::Canonical, inst.num_scenarios());
  b.add_first_stage(0, 0);
  for (std::size_t s = 0; s < b.nS; ++s) b.add_second_stage(s, s, 0);
  return {std::move(b.model), std::move(b.map)};
}

std::pair<LpModel, IndexMap> build_mean_vector(const Instance& inst) {
  Builder b(inst, Formulation::MeanVector, inst.num_scenarios());
  for (std::size_t s = 0; s < b.nS; ++s) {
    b.add_first_stage(s, s);
    b.add_second_stage(s, s, s);
  }
  // nonanticipativity: x(w) - sum_w' p(w') x(w') = 0, likewise for flows
  const auto& scens = inst.scenario_set.scenarios;
  for (std::size_t s = 0; s < b.nS; ++s) {
    for (std::size_t i = 0; i < b.nP; ++i) {
      int row = b.model.add_row(
          Builder::tag("na_x", s, inst.participants[i].id), RowSense::Eq, 0.0);
      b.map.na_x[s][i] = row;
      for (std::size_t t = 0; t < b.nS; ++t) {
        double coef = (t == s ? 1.0 : 0.0) - scens[t].prob;
        b.model.add_coeff(row, b.map.x[t][i], coef);
      }
    }
    for (std::size_t l = 0; l < b.nL; ++l) {
      int row = b.model.add_row(Builder::tag("na_f", s, std::to_string(l)),
                                RowSense::Eq, 0.0);
      b.map.na_f[s][l] = row;
      for (std::size_t t = 0; t < b.nS; ++t) {
        double coef = (t == s ? 1.0 : 0.0) - scens[t].prob;
        b.model.add_coeff(row, b.map.f[t][l], coef);
      }
    }
  }
  return {std::move(b.model), std::move(b.map)};
}

std::pair<LpModel, IndexMap> build_state_vector(const Instance& inst) {
  Builder b(inst, Formulation::StateVector, inst.num_scenarios());
  for (std::size_t s = 0; s < b.nS; ++s) {
    b.add_first_stage(s, s);
    b.add_second_stage(s, s, s);
  }
  for (std::size_t i = 0; i < b.nP; ++i)
    b.map.chi_x[i] = b.model.add_variable("chi_x_" + inst.participants[i].id,
                                          -kInf, kInf);
  for (std::size_t l = 0; l < b.nL; ++l)
    b.map.chi_f[l] = b.model.add_variable("chi_f_" + std::to_string(l), -kInf,
                                          kInf);
  for (std::size_t s = 0; s < b.nS; ++s) {
    for (std::size_t i = 0; i < b.nP; ++i) {
      int row = b.model.add_row(
          Builder::tag("na_x", s, inst.participants[i].id), RowSense::Eq, 0.0);
      b.map.na_x[s][i] = row;
      b.model.add_coeff(row, b.map.x[s][i], 1.0);
      b.model.add_coeff(row, b.map.chi_x[i], -1.0);
    }
    for (std::size_t l = 0; l < b.nL; ++l) {
      int row = b.model.add_row(Builder::tag("na_f", s, std::to_string(l)),
                                RowSense::Eq, 0.0);
      b.map.na_f[s][l] = row;
      b.model.add_coeff(row, b.map.f[s][l], 1.0);
      b.model.add_coeff(row, b.map.chi_f[l], -1.0);
    }
  }
  return {std::move(b.model), std::move(b.map)};
}

DispatchSolution extract_dispatch(const Instance& inst, const LpSolution& sol,
                                  const IndexMap& map) {
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error("extract_dispatch: solution is not optimal");
  DispatchSolution d;
  d.kind = map.kind;
  d.objective = sol.objective;
  const std::size_t fs = map.first_stage_copies();
  const std::size_t nP = inst.participants.size();
  const std::size_t nL = inst.lines.size();

  auto val = [&sol](int idx) {
    return idx >= 0 ? sol.primal[static_cast<std::size_t>(idx)] : 0.0;
  };

  d.x.assign(fs, std::vector<double>(nP, 0.0));
  d.f.assign(fs, std::vector<double>(nL, 0.0));
  for (std::size_t c = 0; c < fs; ++c) {
    for (std::size_t i = 0; i < nP; ++i) d.x[c][i] = val(map.x[c][i]);
    for (std::size_t l = 0; l < nL; ++l) d.f[c][l] = val(map.f[c][l]);
  }
  d.X.assign(map.n_scen, std::vector<double>(nP, 0.0));
  d.F.assign(map.n_scen, std::vector<double>(nL, 0.0));
  for (std::size_t s = 0; s < map.n_scen; ++s) {
    for (std::size_t i = 0; i < nP; ++i) d.X[s][i] = val(map.X[s][i]);
    for (std::size_t l = 0; l < nL; ++l) d.F[s][l] = val(map.F[s][l]);
  }

  d.x_bar.assign(nP, 0.0);
  d.f_bar.assign(nL, 0.0);
  if (map.kind == Formulation::StateVector) {
    for (std::size_t i = 0; i < nP; ++i) d.x_bar[i] = val(map.chi_x[i]);
    for (std::size_t l = 0; l < nL; ++l) d.f_bar[l] = val(map.chi_f[l]);
  } else if (map.kind == Formulation::MeanVector) {
    const auto& scens = inst.scenario_set.scenarios;
    for (std::size_t s = 0; s < map.n_scen; ++s) {
      for (std::size_t i = 0; i < nP; ++i) d.x_bar[i] += scens[s].prob * d.x[s][i];
      for (std::size_t l = 0; l < nL; ++l) d.f_bar[l] += scens[s].prob * d.f[s][l];
    }
  } else {
    d.x_bar = d.x[0];
    d.f_bar = d.f[0];
  }
  return d;
}

}  // namespace stoclear
