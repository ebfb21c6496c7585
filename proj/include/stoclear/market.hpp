#ifndef STOCLEAR_MARKET_HPP
#define STOCLEAR_MARKET_HPP

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

namespace stoclear {

using BusId = int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Bus {
  BusId id = 0;
  std::string name;
};

/// Transmission line with separate day-ahead and real-time flow limits.
/// beta is the MW-per-radian coefficient of the DC flow relation
/// f = beta * (theta_from - theta_to).
struct Line {
  BusId from = 0;
  BusId to = 0;
  double f_min = -kInf;
  double f_max = kInf;
  double F_min = -kInf;
  double F_max = kInf;
  double beta = 1.0;
};

enum class ParticipantKind { Generator, Load };

struct Participant {
  std::string id;
  ParticipantKind kind = ParticipantKind::Generator;
  BusId bus = 0;
  double bid = 0.0;           // c, $/MWh day-ahead
  double premium_up = 0.0;    // delta+, $/MWh
  double premium_down = 0.0;  // delta-, $/MWh
  double x_min = 0.0, x_max = 0.0;  // day-ahead MW bounds
  double X_min = 0.0, X_max = 0.0;  // real-time MW bounds
  bool stochastic = false;

  bool is_generator() const { return kind == ParticipantKind::Generator; }
};

struct Scenario {
  double prob = 0.0;
  // participant id -> observed availability X_avail (MW, >= 0).
  std::map<std::string, double> x_avail;
};

struct ScenarioSet {
  std::vector<Scenario> scenarios;
  std::size_t size() const { return scenarios.size(); }
};

struct Instance {
  std::string name;
  // Free-form fixture annotations, preserved by the readers and writers.
  std::vector<std::string> notes;
  // False when a shipped fixture contains reconstructed placeholder data;
  // golden-number tests check this flag before comparing.
  bool fixture_complete = true;
  std::vector<Bus> buses;
  std::vector<Line> lines;
  std::vector<Participant> participants;
  ScenarioSet scenario_set;
  double theta_min = -0.5;
  double theta_max = 0.5;
  BusId reference_bus = 0;

  int bus_index(BusId id) const;
  int participant_index(const std::string& id) const;
  // Availability of participant i under scenario s; +inf for
  // non-stochastic participants.
  double availability(std::size_t i, std::size_t s) const;
  std::size_t num_scenarios() const { return scenario_set.size(); }
};

struct ValidationReport {
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  bool ok() const { return errors.empty(); }
};

ValidationReport validate_instance(const Instance& inst);

// Cartesian product of per-participant outcome lists; every scenario gets
// probability 1/n. Ordering is lexicographic by participant id, then
// outcome index. Throws std::invalid_argument on an empty outcome list.
ScenarioSet product_scenarios(
    const std::map<std::string, std::vector<double>>& outcomes);

// phi_i = -c*x - (c+d+)(X-x)_+ + (c-d-)(X-x)_-  with a_+ = max(a,0),
// a_- = max(-a,0). Negative for generators, positive for loads.
double realized_value(const Participant& p, double x, double X);

// Sum of realized values over all participants for one scenario's dispatch,
// keyed by participant index.
double social_surplus(const Instance& inst, const std::vector<double>& x,
                      const std::vector<double>& X);

// Reference one-bus instance used throughout the tests: one deterministic
// generator and one stochastic load with availability {40, 80}.
Instance make_micro1();

// Copy of the instance with every cost and every finite nonzero bound
// multiplied by an independent factor near one (relative size `rel`);
// probabilities are jittered and renormalized. Breaking exact data ties this
// way makes the optimum generically unique while staying within rounding
// distance of the original, so cross-formulation identities can be checked
// without dual degeneracy. Paired bounds (equal day-ahead and real-time
// limits) receive the same factor so they stay equal.
Instance perturbed_copy(const Instance& inst, std::uint64_t seed,
                        double rel = 1e-7);

}  // namespace stoclear

#endif
