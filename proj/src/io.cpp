#include "stoclear/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "stoclear/lp.hpp"
#include "stoclear/ph.hpp"

namespace stoclear {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

void check_fields(const json& obj, const std::string& where,
                  const std::set<std::string>& allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(where, "unknown field \"" + it.key() + "\"");
}

double number_or_inf(const json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
  }
  fail(where, "expected a number, \"inf\" or \"-inf\"");
}

double require_number(const json& obj, const std::string& key,
                      const std::string& where) {
  if (!obj.contains(key)) fail(where, "missing field \"" + key + "\"");
  const json& v = obj.at(key);
  if (!v.is_number()) fail(where, "field \"" + key + "\" must be a number");
  return v.get<double>();
}

json to_json_or_inf(double v) {
  if (v == kInf) return json("inf");
  if (v == -kInf) return json("-inf");
  return json(v);
}

}  // namespace

Instance parse_instance_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    fail("instance", e.what());
  }
  check_fields(doc, "instance",
               {"name", "notes", "fixture_complete", "reference_bus",
                "theta_min_rad", "theta_max_rad", "buses", "lines",
                "participants", "scenarios"});
  Instance inst;
  if (doc.contains("name")) inst.name = doc.at("name").get<std::string>();
  if (doc.contains("notes"))
    for (const auto& n : doc.at("notes"))
      inst.notes.push_back(n.get<std::string>());
  if (doc.contains("fixture_complete"))
    inst.fixture_complete = doc.at("fixture_complete").get<bool>();
  if (doc.contains("theta_min_rad"))
    inst.theta_min = require_number(doc, "theta_min_rad", "instance");
  if (doc.contains("theta_max_rad"))
    inst.theta_max = require_number(doc, "theta_max_rad", "instance");

  if (!doc.contains("buses")) fail("instance", "missing field \"buses\"");
  for (const auto& b : doc.at("buses")) {
    const std::string where = "buses[" + std::to_string(inst.buses.size()) + "]";
    check_fields(b, where, {"id", "name"});
    Bus bus;
    bus.id = static_cast<BusId>(require_number(b, "id", where));
    if (b.contains("name")) bus.name = b.at("name").get<std::string>();
    inst.buses.push_back(bus);
  }
  inst.reference_bus =
      doc.contains("reference_bus")
          ? static_cast<BusId>(require_number(doc, "reference_bus", "instance"))
          : (inst.buses.empty() ? 0 : inst.buses.front().id);

  if (doc.contains("lines"))
    for (const auto& l : doc.at("lines")) {
      const std::string where =
          "lines[" + std::to_string(inst.lines.size()) + "]";
      check_fields(l, where,
                   {"from", "to", "f_min_mw", "f_max_mw", "F_min_mw",
                    "F_max_mw", "beta_mw_per_rad"});
      Line line;
      line.from = static_cast<BusId>(require_number(l, "from", where));
      line.to = static_cast<BusId>(require_number(l, "to", where));
      if (l.contains("f_min_mw")) line.f_min = number_or_inf(l.at("f_min_mw"), where);
      if (l.contains("f_max_mw")) line.f_max = number_or_inf(l.at("f_max_mw"), where);
      if (l.contains("F_min_mw")) line.F_min = number_or_inf(l.at("F_min_mw"), where);
      if (l.contains("F_max_mw")) line.F_max = number_or_inf(l.at("F_max_mw"), where);
      if (l.contains("beta_mw_per_rad"))
        line.beta = require_number(l, "beta_mw_per_rad", where);
      inst.lines.push_back(line);
    }

  if (!doc.contains("participants"))
    fail("instance", "missing field \"participants\"");
  for (const auto& p : doc.at("participants")) {
    const std::string where =
        "participants[" + std::to_string(inst.participants.size()) + "]";
    check_fields(p, where,
                 {"id", "kind", "bus", "bid_usd_per_mwh",
                  "premium_up_usd_per_mwh", "premium_down_usd_per_mwh",
                  "x_min_mw", "x_max_mw", "X_min_mw", "X_max_mw",
                  "is_stochastic"});
    Participant part;
    if (!p.contains("id")) fail(where, "missing field \"id\"");
    part.id = p.at("id").get<std::string>();
    if (!p.contains("kind")) fail(where, "missing field \"kind\"");
    const std::string kind = p.at("kind").get<std::string>();
    if (kind == "generator")
      part.kind = ParticipantKind::Generator;
    else if (kind == "load")
      part.kind = ParticipantKind::Load;
    else
      fail(where, "kind must be \"generator\" or \"load\"");
    part.bus = static_cast<BusId>(require_number(p, "bus", where));
    part.bid = require_number(p, "bid_usd_per_mwh", where);
    part.premium_up = require_number(p, "premium_up_usd_per_mwh", where);
    part.premium_down = require_number(p, "premium_down_usd_per_mwh", where);
    part.x_min = number_or_inf(p.at("x_min_mw"), where);
    part.x_max = number_or_inf(p.at("x_max_mw"), where);
    part.X_min = number_or_inf(p.at("X_min_mw"), where);
    part.X_max = number_or_inf(p.at("X_max_mw"), where);
    if (p.contains("is_stochastic"))
      part.stochastic = p.at("is_stochastic").get<bool>();
    inst.participants.push_back(part);
  }

  if (doc.contains("scenarios"))
    for (const auto& s : doc.at("scenarios")) {
      const std::string where =
          "scenarios[" + std::to_string(inst.scenario_set.size()) + "]";
      check_fields(s, where, {"prob", "x_avail_mw"});
      Scenario scen;
      scen.prob = require_number(s, "prob", where);
      if (s.contains("x_avail_mw"))
        for (auto it = s.at("x_avail_mw").begin(); it != s.at("x_avail_mw").end();
             ++it)
          scen.x_avail[it.key()] = number_or_inf(it.value(), where);
      inst.scenario_set.scenarios.push_back(std::move(scen));
    }
  return inst;
}

Instance parse_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_instance_json(buf.str());
  } catch (const ParseError& e) {
    fail(path, e.what());
  }
}

std::string print_instance(const Instance& inst) {
  json doc;
  doc["name"] = inst.name;
  if (!inst.notes.empty()) doc["notes"] = inst.notes;
  if (!inst.fixture_complete) doc["fixture_complete"] = false;
  doc["reference_bus"] = inst.reference_bus;
  doc["theta_min_rad"] = inst.theta_min;
  doc["theta_max_rad"] = inst.theta_max;
  doc["buses"] = json::array();
  for (const Bus& b : inst.buses) {
    json jb{{"id", b.id}};
    if (!b.name.empty()) jb["name"] = b.name;
    doc["buses"].push_back(jb);
  }
  if (!inst.lines.empty()) {
    doc["lines"] = json::array();
    for (const Line& l : inst.lines)
      doc["lines"].push_back({{"from", l.from},
                              {"to", l.to},
                              {"f_min_mw", to_json_or_inf(l.f_min)},
                              {"f_max_mw", to_json_or_inf(l.f_max)},
                              {"F_min_mw", to_json_or_inf(l.F_min)},
                              {"F_max_mw", to_json_or_inf(l.F_max)},
                              {"beta_mw_per_rad", l.beta}});
  }
  doc["participants"] = json::array();
  for (const Participant& p : inst.participants)
    doc["participants"].push_back(
        {{"id", p.id},
         {"kind", p.is_generator() ? "generator" : "load"},
         {"bus", p.bus},
         {"bid_usd_per_mwh", p.bid},
         {"premium_up_usd_per_mwh", p.premium_up},
         {"premium_down_usd_per_mwh", p.premium_down},
         {"x_min_mw", to_json_or_inf(p.x_min)},
         {"x_max_mw", to_json_or_inf(p.x_max)},
         {"X_min_mw", to_json_or_inf(p.X_min)},
         {"X_max_mw", to_json_or_inf(p.X_max)},
         {"is_stochastic", p.stochastic}});
  doc["scenarios"] = json::array();
  for (const Scenario& s : inst.scenario_set.scenarios) {
    json js{{"prob", s.prob}};
    js["x_avail_mw"] = json::object();
    for (const auto& [id, a] : s.x_avail) js["x_avail_mw"][id] = to_json_or_inf(a);
    doc["scenarios"].push_back(js);
  }
  return doc.dump(2) + "\n";
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

ScenarioSet parse_scenarios_csv_text(const std::string& text,
                                     const Instance& inst) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail("scenarios", "empty file");
  const std::vector<std::string> header = split_csv_line(line);
  bool has_prob = !header.empty() && header.front() == "prob";
  std::vector<int> cols;  // participant index per data column
  for (std::size_t c = has_prob ? 1 : 0; c < header.size(); ++c) {
    const int i = inst.participant_index(header[c]);
    if (i < 0)
      fail("scenarios", "unknown participant column \"" + header[c] + "\"");
    cols.push_back(i);
  }
  ScenarioSet set;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      fail("scenarios", "line " + std::to_string(lineno) + ": expected " +
                            std::to_string(header.size()) + " cells, got " +
                            std::to_string(cells.size()));
    Scenario s;
    std::size_t c = 0;
    try {
      if (has_prob) s.prob = std::stod(cells[c++]);
      for (int i : cols) {
        const double a = std::stod(cells[c++]);
        if (a < 0.0)
          fail("scenarios", "line " + std::to_string(lineno) +
                                ": negative availability for " +
                                inst.participants[static_cast<std::size_t>(i)].id);
        s.x_avail[inst.participants[static_cast<std::size_t>(i)].id] = a;
      }
    } catch (const std::invalid_argument&) {
      fail("scenarios",
           "line " + std::to_string(lineno) + ": cell " + std::to_string(c) +
               " is not a number");
    }
    set.scenarios.push_back(std::move(s));
  }
  if (set.scenarios.empty()) fail("scenarios", "no data rows");
  if (!has_prob) {
    const double p = 1.0 / static_cast<double>(set.size());
    for (Scenario& s : set.scenarios) s.prob = p;
  } else {
    double total = 0.0;
    for (const Scenario& s : set.scenarios) total += s.prob;
    if (std::abs(total - 1.0) > 1e-9) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.12g", total);
      fail("scenarios", std::string("probabilities sum to ") + buf);
    }
  }
  return set;
}

ScenarioSet parse_scenarios_csv(const std::string& path, const Instance& inst) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenarios_csv_text(buf.str(), inst);
  } catch (const ParseError& e) {
    fail(path, e.what());
  }
}

namespace {

Instance make_pzp6() {
  Instance inst;
  inst.name = "pzp6";
  inst.fixture_complete = false;
  inst.notes = {
      "Verbatim fields: line (1,6) capacity 150 MW, wind outcome set "
      "{30,50,60,70,90} MW with 25 equally likely scenarios, wind day-ahead "
      "cap 90 MW, thermal2 premiums up 9 / down 12.",
      "Reconstructed fields (placeholder values pending the original "
      "source system): remaining line limits and betas, bus topology, "
      "bids, other premiums, capacities, and the demand quantity."};
  for (int b = 1; b <= 6; ++b) inst.buses.push_back({b, "b" + std::to_string(b)});
  inst.reference_bus = 1;
  auto line = [](int from, int to, double cap) {
    return Line{from, to, -cap, cap, -cap, cap, 100.0};
  };
  inst.lines = {line(1, 2, kInf), line(2, 3, kInf), line(3, 4, kInf),
                line(4, 5, kInf), line(5, 6, kInf), line(1, 6, 150.0)};
  inst.participants = {
      // reconstructed bids/premiums/capacities below
      {"wind1", ParticipantKind::Generator, 1, 1.0, 0.65, 0.6, 0.0, 90.0, 0.0,
       90.0, true},
      {"wind2", ParticipantKind::Generator, 2, 1.0, 0.65, 0.6, 0.0, 90.0, 0.0,
       90.0, true},
      {"thermal1", ParticipantKind::Generator, 3, 45.0, 6.0, 8.0, 0.0, 120.0,
       0.0, 120.0, false},
      {"thermal2", ParticipantKind::Generator, 4, 60.0, 9.0, 12.0, 0.0, 100.0,
       0.0, 100.0, false},
      {"hydro1", ParticipantKind::Generator, 6, 30.0, 4.0, 5.0, 0.0, 80.0, 0.0,
       80.0, false},
      {"hydro2", ParticipantKind::Generator, 6, 35.0, 4.0, 5.0, 0.0, 80.0, 0.0,
       80.0, false},
      {"demand", ParticipantKind::Load, 5, 200.0, 10.0, 10.0, -300.0, 0.0,
       -300.0, 0.0, false}};
  inst.scenario_set = product_scenarios(
      {{"wind1", {30, 50, 60, 70, 90}}, {"wind2", {30, 50, 60, 70, 90}}});
  return inst;
}

Instance make_zkab6() {
  Instance inst;
  inst.name = "zkab6";
  inst.fixture_complete = false;
  inst.notes = {
      "Verbatim fields: six buses, five generators plus one deterministic "
      "load, wind outcome set {10,20,60,70,90} MW with 25 equally likely "
      "scenarios, wind day-ahead cap 90 MW, every line capacitated.",
      "Reconstructed fields (placeholder values pending the original "
      "source system): line limits and betas, topology, bids, premiums, "
      "capacities, and the demand quantity."};
  for (int b = 1; b <= 6; ++b) inst.buses.push_back({b, "b" + std::to_string(b)});
  inst.reference_bus = 1;
  auto line = [](int from, int to, double cap) {
    return Line{from, to, -cap, cap, -cap, cap, 100.0};
  };
  inst.lines = {line(1, 2, 200.0), line(2, 3, 200.0), line(3, 4, 200.0),
                line(4, 5, 200.0), line(5, 6, 200.0), line(1, 6, 150.0)};
  inst.participants = {
      // reconstructed bids/premiums/capacities below
      {"wind1", ParticipantKind::Generator, 1, 1.0, 0.65, 0.6, 0.0, 90.0, 0.0,
       90.0, true},
      {"wind2", ParticipantKind::Generator, 2, 1.0, 0.65, 0.6, 0.0, 90.0, 0.0,
       90.0, true},
      {"thermal1", ParticipantKind::Generator, 3, 50.0, 7.0, 9.0, 0.0, 150.0,
       0.0, 150.0, false},
      {"thermal2", ParticipantKind::Generator, 4, 65.0, 9.0, 12.0, 0.0, 120.0,
       0.0, 120.0, false},
      {"hydro1", ParticipantKind::Generator, 6, 28.0, 4.0, 5.0, 0.0, 100.0, 0.0,
       100.0, false},
      {"demand", ParticipantKind::Load, 5, 220.0, 10.0, 10.0, -280.0, 0.0,
       -280.0, 0.0, false}};
  inst.scenario_set = product_scenarios(
      {{"wind1", {10, 20, 60, 70, 90}}, {"wind2", {10, 20, 60, 70, 90}}});
  return inst;
}

}  // namespace

Instance embedded_instance(const std::string& name) {
  if (name == "micro1") return make_micro1();
  if (name == "pzp6") return make_pzp6();
  if (name == "zkab6") return make_zkab6();
  fail("embedded instance", "unknown name \"" + name + "\"");
}

std::vector<std::string> embedded_instance_names() {
  return {"micro1", "pzp6", "zkab6"};
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

namespace {

std::string money(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v + 0.0);  // normalise -0
  return buf;
}
std::string price(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v + 0.0);
  return buf;
}
std::string qty(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", v + 0.0);
  return buf;
}

struct ArtifactWriter {
  fs::path dir;
  std::vector<std::string> written;

  std::ofstream open(const std::string& file) {
    const fs::path p = dir / file;
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    written.push_back(p.string());
    return out;
  }
  void cleanup() {
    for (const std::string& f : written) {
      std::error_code ec;
      fs::remove(f, ec);
    }
  }
};

struct SolvedForm {
  Formulation kind;
  FormulationResult result;
  KktReport kkt;
};

SolvedForm solve_formulation(const Instance& inst, Formulation kind,
                             std::size_t scenario, bool perturb,
                             std::uint64_t seed, double tol) {
  auto [model, map] = kind == Formulation::Clairvoyant ? build_clairvoyant(inst, scenario)
                      : kind == Formulation::Canonical ? build_canonical(inst)
                      : kind == Formulation::MeanVector
                          ? build_mean_vector(inst)
                          : build_state_vector(inst);
  if (perturb) perturb_objective(model, seed);
  const LpSolution sol = solve_lp(model);
  if (sol.status != LpStatus::Optimal)
    throw std::runtime_error(std::string("solver failure on ") +
                             formulation_name(kind));
  SolvedForm out{kind,
                 {extract_dispatch(inst, sol, map), extract_duals(inst, sol, map)},
                 check_kkt(model, sol, tol)};
  if (!out.kkt.pass)
    throw std::runtime_error(std::string("optimality check failed on ") +
                             formulation_name(kind));
  return out;
}

void write_dispatch(std::ofstream& out, const Instance& inst,
                    const std::string& form, const DispatchSolution& d) {
  out << "formulation,scenario,participant,x_mw,X_mw\n";
  for (std::size_t s = 0; s < d.X.size(); ++s)
    for (std::size_t i = 0; i < inst.participants.size(); ++i)
      out << form << ',' << s << ',' << inst.participants[i].id << ','
          << qty(d.x_at(s, i)) << ',' << qty(d.X[s][i]) << '\n';
  out << "# objective_usd," << money(d.objective) << '\n';
}

void write_duals(std::ofstream& out, const Instance& inst,
                 const std::string& form, const DualSolution& du) {
  out << "formulation,scenario,bus,pi_usd_per_mwh,Pi_usd_per_mwh\n";
  for (std::size_t s = 0; s < du.Pi.size(); ++s)
    for (std::size_t n = 0; n < inst.buses.size(); ++n)
      out << form << ',' << s << ',' << inst.buses[n].id << ','
          << price(du.da_price(s, n)) << ',' << price(du.Pi[s][n]) << '\n';
  if (!du.mu_x.empty() || !du.sigma_x.empty()) {
    const bool mv = !du.mu_x.empty();
    out << "formulation,scenario,participant,"
        << (mv ? "mu" : "sigma") << "_usd_per_mwh\n";
    const auto& adj = mv ? du.mu_x : du.sigma_x;
    for (std::size_t s = 0; s < adj.size(); ++s)
      for (std::size_t i = 0; i < inst.participants.size(); ++i)
        out << form << ',' << s << ',' << inst.participants[i].id << ','
            << price(adj[s][i]) << '\n';
  }
}

void write_payments(std::ofstream& out, const Instance& inst,
                    const PaymentTable& pay) {
  out << "mechanism,scenario,participant,rho_usd\n";
  for (std::size_t s = 0; s < pay.rho.size(); ++s)
    for (std::size_t i = 0; i < inst.participants.size(); ++i)
      out << mechanism_name(pay.mechanism) << ',' << s << ','
          << inst.participants[i].id << ',' << money(pay.rho[s][i]) << '\n';
  out << "mechanism,participant,expected_rho_usd\n";
  for (std::size_t i = 0; i < inst.participants.size(); ++i)
    out << mechanism_name(pay.mechanism) << ',' << inst.participants[i].id
        << ',' << money(pay.expected_rho[i]) << '\n';
}

void write_distortion(std::ofstream& out, const Instance& inst,
                      const DistortionTable& dist) {
  out << "mechanism," << (dist.per_bus ? "bus" : "participant")
      << ",scenario,M_usd_per_mwh\n";
  for (std::size_t s = 0; s < dist.M.size(); ++s)
    for (std::size_t k = 0; k < dist.M[s].size(); ++k) {
      const std::string key = dist.per_bus
                                  ? std::to_string(inst.buses[k].id)
                                  : inst.participants[k].id;
      out << mechanism_name(dist.mechanism) << ',' << key << ',' << s << ','
          << price(dist.M[s][k]) << '\n';
    }
  out << "mechanism," << (dist.per_bus ? "bus" : "participant")
      << ",expected_M_usd_per_mwh\n";
  for (std::size_t k = 0; k < dist.expected_M.size(); ++k) {
    const std::string key = dist.per_bus ? std::to_string(inst.buses[k].id)
                                         : inst.participants[k].id;
    out << mechanism_name(dist.mechanism) << ',' << key << ','
        << price(dist.expected_M[k]) << '\n';
  }
}

Formulation mechanism_formulation(Mechanism m) {
  switch (m) {
    case Mechanism::Rc: return Formulation::Canonical;
    case Mechanism::Rm: return Formulation::MeanVector;
    case Mechanism::Rs: return Formulation::StateVector;
  }
  return Formulation::Canonical;
}

PaymentTable settle(Mechanism m, const Instance& inst,
                    const FormulationResult& r) {
  switch (m) {
    case Mechanism::Rc: return payments_canonical(inst, r.dispatch, r.duals);
    case Mechanism::Rm: return payments_mean_vector(inst, r.dispatch, r.duals);
    case Mechanism::Rs: return payments_state_vector(inst, r.dispatch, r.duals);
  }
  throw std::logic_error("unreachable");
}

}  // namespace

RunArtifacts run_experiment(const ExperimentConfig& config) {
  Instance inst;
  const auto names = embedded_instance_names();
  if (std::find(names.begin(), names.end(), config.instance) != names.end())
    inst = embedded_instance(config.instance);
  else
    inst = parse_instance(config.instance);
  const ValidationReport report = validate_instance(inst);
  if (!report.ok()) {
    std::string msg = "invalid instance:";
    for (const std::string& e : report.errors) msg += "\n  " + e;
    throw ParseError(msg);
  }

  std::vector<Formulation> forms;
  std::size_t clair_scenario = 0;
  if (config.formulation == "all")
    forms = {Formulation::Canonical, Formulation::MeanVector,
             Formulation::StateVector};
  else if (config.formulation == "canonical")
    forms = {Formulation::Canonical};
  else if (config.formulation == "mean_vector")
    forms = {Formulation::MeanVector};
  else if (config.formulation == "state_vector")
    forms = {Formulation::StateVector};
  else if (config.formulation.rfind("clairvoyant:", 0) == 0) {
    forms = {Formulation::Clairvoyant};
    clair_scenario = static_cast<std::size_t>(
        std::stoul(config.formulation.substr(12)));
    if (clair_scenario >= inst.num_scenarios())
      throw ParseError("clairvoyant scenario index out of range");
  } else
    throw ParseError("unknown formulation \"" + config.formulation + "\"");

  if (config.solver == "ph") {
    if (forms.size() != 1 || (forms[0] != Formulation::MeanVector &&
                              forms[0] != Formulation::StateVector))
      throw ParseError(
          "the ph solver requires --formulation mean_vector or state_vector");
  } else if (config.solver != "extensive") {
    throw ParseError("unknown solver \"" + config.solver + "\"");
  }

  ArtifactWriter w;
  w.dir = config.out_dir;
  fs::create_directories(w.dir);
  std::ostringstream summary;
  const std::string base = inst.name.empty() ? "run" : inst.name;

  try {
    summary << "instance: " << base << "\n"
            << "scenarios: " << inst.num_scenarios() << "\n"
            << "solver: " << config.solver << "\n";
    if (config.perturb) summary << "perturbation seed: " << config.seed << "\n";
    for (const std::string& warn : report.warnings)
      summary << "warning: " << warn << "\n";

    if (config.solver == "ph") {
      PhParams params;
      const PhResult ph = solve_progressive_hedging(inst, params);
      auto out = w.open(base + "_dispatch.csv");
      write_dispatch(out, inst, "ph", ph.dispatch);
      auto mout = w.open(base + "_multipliers.csv");
      mout << "scenario,participant,w_usd_per_mwh\n";
      for (std::size_t s = 0; s < ph.w_x.size(); ++s)
        for (std::size_t i = 0; i < inst.participants.size(); ++i)
          mout << s << ',' << inst.participants[i].id << ','
               << price(ph.w_x[s][i]) << '\n';
      summary << "ph converged: " << (ph.converged ? "yes" : "no") << "\n"
              << "ph iterations: " << ph.trace.iterations.size() << "\n"
              << "objective_usd: " << money(ph.objective) << "\n";
    } else {
      std::map<Formulation, SolvedForm> solved;
      for (Formulation f : forms)
        solved.emplace(f, solve_formulation(inst, f, clair_scenario,
                                            config.perturb, config.seed,
                                            config.tol));

      {
        auto out = w.open(base + "_dispatch.csv");
        bool first = true;
        for (const auto& [f, sf] : solved) {
          if (!first) out << '\n';
          first = false;
          write_dispatch(out, inst, formulation_name(f), sf.result.dispatch);
          summary << formulation_name(f)
                  << " objective_usd: " << money(sf.result.dispatch.objective)
                  << "\n";
        }
      }
      {
        auto out = w.open(base + "_duals.csv");
        bool first = true;
        for (const auto& [f, sf] : solved) {
          if (!first) out << '\n';
          first = false;
          write_duals(out, inst, formulation_name(f), sf.result.duals);
        }
      }

      for (Mechanism m : config.mechanisms) {
        const Formulation f = mechanism_formulation(m);
        const auto it = solved.find(f);
        if (it == solved.end()) continue;
        const PaymentTable pay = settle(m, inst, it->second.result);
        const DistortionTable dist =
            price_distortion(m, inst, it->second.result.duals);
        {
          auto out =
              w.open(base + "_payments_" + mechanism_name(m) + ".csv");
          write_payments(out, inst, pay);
        }
        {
          auto out =
              w.open(base + "_distortion_" + mechanism_name(m) + ".csv");
          write_distortion(out, inst, dist);
        }
        const VerdictMode mode = m == Mechanism::Rs ? VerdictMode::Scenario
                                                    : VerdictMode::Expectation;
        const auto recovery =
            cost_recovery(inst, pay, it->second.result.dispatch, mode);
        const auto adequacy = revenue_adequacy(inst, pay, mode);
        double cost = 0.0, revenue = 0.0;
        for (std::size_t i = 0; i < inst.participants.size(); ++i)
          (inst.participants[i].is_generator() ? cost : revenue) +=
              pay.expected_rho[i];
        auto out = w.open(base + "_metrics_" + mechanism_name(m) + ".csv");
        out << "mechanism,participant,recovers_cost,expected_profit_usd,"
               "worst_profit_usd\n";
        for (const GeneratorVerdict& v : recovery)
          out << mechanism_name(m) << ',' << v.participant << ','
              << (v.pass ? "yes" : "no") << ',' << money(v.expected_profit)
              << ',' << money(v.worst_profit) << '\n';
        out << "mechanism,cost_usd,revenue_usd,net_income_usd,"
               "revenue_adequate\n";
        out << mechanism_name(m) << ',' << money(cost) << ','
            << money(-revenue) << ',' << money(adequacy.net_income) << ','
            << (adequacy.pass ? "yes" : "no") << '\n';
        summary << mechanism_name(m) << " net_income_usd: "
                << money(adequacy.net_income)
                << (adequacy.pass ? " (adequate)" : " (not adequate)") << "\n";
        if (m == Mechanism::Rm) {
          const MvConditionReport mv = mv_conditions(
              inst, it->second.result.duals, it->second.result.dispatch);
          summary << "rm condition sum_E[mu]E[x]: " << money(mv.aggregate)
                  << "\n";
        }
      }

      if (config.formulation == "all") {
        const DualConsistencyReport rep = relationship_checks(
            inst, solved.at(Formulation::Canonical).result,
            solved.at(Formulation::MeanVector).result,
            solved.at(Formulation::StateVector).result, config.tol);
        auto out = w.open(base + "_consistency.csv");
        out << "check,value\n"
            << "pi_c_vs_mean_pi_m," << price(rep.pi_c_vs_mean_pi_m) << '\n'
            << "pi_c_vs_mean_pi_s," << price(rep.pi_c_vs_mean_pi_s) << '\n'
            << "mean_sigma," << price(rep.mean_sigma) << '\n'
            << "sigma_vs_centered_mu," << price(rep.sigma_vs_centered_mu)
            << '\n'
            << "Pi_c_vs_Pi_m," << price(rep.Pi_c_vs_Pi_m) << '\n'
            << "Pi_c_vs_Pi_s," << price(rep.Pi_c_vs_Pi_s) << '\n'
            << "objective_spread," << price(rep.objective_spread) << '\n'
            << "pass," << (rep.pass ? "yes" : "no") << '\n';
        summary << "dual consistency: " << (rep.pass ? "pass" : "FAIL")
                << (rep.dual_multiplicity_suspected
                        ? " (dual multiplicity suspected)"
                        : "")
                << "\n";
      }
    }

    auto out = w.open(base + "_summary.txt");
    out << summary.str();
  } catch (...) {
    w.cleanup();
    throw;
  }

  return {w.written, summary.str()};
}

}  // namespace stoclear
