#include "stoclear/market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>

namespace stoclear {

int Instance::bus_index(BusId id) const {
  for (std::size_t n = 0; n < buses.size(); ++n)
    if (buses[n].id == id) return static_cast<int>(n);
  return -1;
}

int Instance::participant_index(const std::string& id) const {
  for (std::size_t i = 0; i < participants.size(); ++i)
    if (participants[i].id == id) return static_cast<int>(i);
  return -1;
}

double Instance::availability(std::size_t i, std::size_t s) const {
  const Participant& p = participants[i];
  if (!p.stochastic) return kInf;
  const auto& avail = scenario_set.scenarios[s].x_avail;
  auto it = avail.find(p.id);
  return it == avail.end() ? kInf : it->second;
}

namespace {

std::string fmt(const char* format, ...) {
  char buf[256];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

bool network_connected(const Instance& inst) {
  if (inst.buses.empty()) return false;
  std::set<BusId> seen{inst.buses.front().id};
  std::queue<BusId> frontier;
  frontier.push(inst.buses.front().id);
  while (!frontier.empty()) {
    BusId n = frontier.front();
    frontier.pop();
    for (const Line& l : inst.lines) {
      BusId other = l.from == n ? l.to : (l.to == n ? l.from : n);
      if (other != n && seen.insert(other).second) frontier.push(other);
    }
  }
  return seen.size() == inst.buses.size();
}

}  // namespace

ValidationReport validate_instance(const Instance& inst) {
  ValidationReport rep;
  auto err = [&rep](std::string m) { rep.errors.push_back(std::move(m)); };
  auto warn = [&rep](std::string m) { rep.warnings.push_back(std::move(m)); };

  std::set<BusId> bus_ids;
  for (const Bus& b : inst.buses)
    if (!bus_ids.insert(b.id).second)
      err(fmt("duplicate bus id %d", b.id));
  if (inst.buses.empty()) err("instance has no buses");
  if (!bus_ids.count(inst.reference_bus))
    err(fmt("reference bus %d does not exist", inst.reference_bus));

  for (std::size_t l = 0; l < inst.lines.size(); ++l) {
    const Line& line = inst.lines[l];
    if (!bus_ids.count(line.from) || !bus_ids.count(line.to))
      err(fmt("line %zu references unknown bus", l));
    if (line.from == line.to) err(fmt("line %zu is a self-loop", l));
    if (line.f_min > line.f_max)
      err(fmt("line %zu: bound inversion f_min > f_max", l));
    if (line.F_min > line.F_max)
      err(fmt("line %zu: bound inversion F_min > F_max", l));
    if (!(line.beta > 0)) err(fmt("line %zu: beta must be positive", l));
  }

  std::set<std::string> part_ids;
  bool any_gen = false, any_load = false;
  for (const Participant& p : inst.participants) {
    if (!part_ids.insert(p.id).second)
      err("duplicate participant id " + p.id);
    if (!bus_ids.count(p.bus))
      err("participant " + p.id + " references unknown bus");
    if (!(p.premium_up > 0) || !(p.premium_down > 0))
      err("participant " + p.id + " must have positive deviation premiums");
    if (p.x_min > p.x_max)
      err("participant " + p.id + ": bound inversion x_min > x_max");
    if (p.X_min > p.X_max)
      err("participant " + p.id + ": bound inversion X_min > X_max");
    if (p.is_generator()) {
      any_gen = true;
      if (p.x_min < 0) err("generator " + p.id + " has negative x_min");
      if (p.bid - p.premium_down < 0)
        warn("generator " + p.id + ": c - delta- is negative");
    } else {
      any_load = true;
      if (p.x_max > 0) err("load " + p.id + " has positive x_max");
    }
  }
  if (!any_gen) err("instance has no generator");
  if (!any_load) err("instance has no load");

  const auto& scens = inst.scenario_set.scenarios;
  if (scens.empty()) {
    err("instance has no scenarios");
  } else {
    double total = 0.0;
    for (const Scenario& s : scens) {
      if (!(s.prob > 0) || s.prob > 1.0)
        err(fmt("scenario probability %g outside (0,1]", s.prob));
      total += s.prob;
      for (const auto& [id, avail] : s.x_avail) {
        if (!part_ids.count(id))
          err("scenario availability for unknown participant " + id);
        if (avail < 0) err("negative availability for " + id);
      }
    }
    if (std::abs(total - 1.0) > 1e-12)
      err(fmt("probabilities sum to %.12g", total));
    for (const Participant& p : inst.participants) {
      if (!p.stochastic) continue;
      for (std::size_t s = 0; s < scens.size(); ++s)
        if (!scens[s].x_avail.count(p.id))
          err(fmt("stochastic participant %s missing availability in scenario %zu",
                  p.id.c_str(), s));
    }
  }

  if (!inst.buses.empty() && !network_connected(inst))
    err("network is not connected");
  if (inst.theta_min > inst.theta_max)
    err("bound inversion theta_min > theta_max");
  return rep;
}

ScenarioSet product_scenarios(
    const std::map<std::string, std::vector<double>>& outcomes) {
  for (const auto& [id, vals] : outcomes)
    if (vals.empty())
      throw std::invalid_argument("empty outcome list for " + id);
  std::size_t n = 1;
  for (const auto& [id, vals] : outcomes) n *= vals.size();

  ScenarioSet set;
  set.scenarios.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    Scenario& sc = set.scenarios[k];
    sc.prob = 1.0 / static_cast<double>(n);
    // lexicographic: the last participant's outcome index varies fastest
    std::size_t rem = k;
    for (auto it = outcomes.rbegin(); it != outcomes.rend(); ++it) {
      sc.x_avail[it->first] = it->second[rem % it->second.size()];
      rem /= it->second.size();
    }
  }
  return set;
}

double realized_value(const Participant& p, double x, double X) {
  const double d = X - x;
  const double pos = std::max(d, 0.0);
  const double neg = std::max(-d, 0.0);
  return -p.bid * x - (p.bid + p.premium_up) * pos +
         (p.bid - p.premium_down) * neg;
}

double social_surplus(const Instance& inst, const std::vector<double>& x,
                      const std::vector<double>& X) {
  double total = 0.0;
  for (std::size_t i = 0; i < inst.participants.size(); ++i)
    total += realized_value(inst.participants[i], x[i], X[i]);
  return total;
}

Instance make_micro1() {
  Instance inst;
  inst.name = "micro1";
  inst.buses = {{1, "hub"}};
  inst.reference_bus = 1;
  inst.participants = {
      {"G", ParticipantKind::Generator, 1, 10.0, 1.0, 2.0, 0.0, 100.0, 0.0,
       100.0, false},
      {"D", ParticipantKind::Load, 1, 50.0, 3.0, 3.0, -60.0, 0.0, -100.0, 0.0,
       true}};
  inst.scenario_set.scenarios = {{0.5, {{"D", 40.0}}}, {0.5, {{"D", 80.0}}}};
  return inst;
}

Instance perturbed_copy(const Instance& inst, std::uint64_t seed, double rel) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-rel, rel);
  const auto jitter = [&](double v) {
    return std::isfinite(v) && v != 0.0 ? v * (1.0 + dist(rng)) : v;
  };
  // Same factor for a pair of equal values (e.g. matching day-ahead and
  // real-time bounds), so intended coincidences survive the jitter.
  const auto jitter_pair = [&](double& a, double& b) {
    if (a == b) {
      a = b = jitter(a);
    } else {
      a = jitter(a);
      b = jitter(b);
    }
  };
  Instance out = inst;
  for (Participant& p : out.participants) {
    p.bid = jitter(p.bid);
    p.premium_up = jitter(p.premium_up);
    p.premium_down = jitter(p.premium_down);
    jitter_pair(p.x_min, p.X_min);
    jitter_pair(p.x_max, p.X_max);
  }
  for (Line& l : out.lines) {
    jitter_pair(l.f_min, l.F_min);
    jitter_pair(l.f_max, l.F_max);
    l.beta = jitter(l.beta);
  }
  double total = 0.0;
  for (Scenario& s : out.scenario_set.scenarios) {
    for (auto& [id, avail] : s.x_avail) avail = jitter(avail);
    total += (s.prob = jitter(s.prob));
  }
  for (Scenario& s : out.scenario_set.scenarios) s.prob /= total;
  return out;
}

}  // namespace stoclear
