#include "flexform/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "flexform/numeric_io.hpp"
#include "json.hpp"

namespace flexform {

namespace {

using nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& origin, const std::string& what) {
  throw ScenarioError(origin + ": " + what);
}

const ordered_json& field(const ordered_json& j, const char* name,
                          const std::string& context) {
  const auto it = j.find(name);
  if (it == j.end()) {
    throw ScenarioError(context + ": missing field '" + name + "'");
  }
  return *it;
}

double number_field(const ordered_json& j, const char* name,
                    const std::string& context) {
  const auto& v = field(j, name, context);
  if (!v.is_number()) {
    throw ScenarioError(context + ": field '" + name + "' must be a number");
  }
  return v.get<double>();
}

Eigen::Vector2d vec2_field(const ordered_json& j, const char* name,
                           const std::string& context) {
  const auto& v = field(j, name, context);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() ||
      !v[1].is_number()) {
    throw ScenarioError(context + ": field '" + name +
                        "' must be an array of two numbers");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

ActuationType parse_actuation(const ordered_json& j, const std::string& context) {
  const auto& v = field(j, "actuation", context);
  const std::string s = v.is_string() ? v.get<std::string>() : "";
  if (s == "fa" || s == "fully_actuated") return ActuationType::FullyActuated;
  if (s == "ap") return ActuationType::AP;
  if (s == "pa") return ActuationType::PA;
  throw ScenarioError(context +
                      ": field 'actuation' must be one of \"fa\", \"ap\", "
                      "\"pa\"");
}

const char* actuation_name(ActuationType a) {
  switch (a) {
    case ActuationType::AP:
      return "ap";
    case ActuationType::PA:
      return "pa";
    default:
      return "fa";
  }
}

LinkParams parse_link(const ordered_json& j, const std::string& context) {
  LinkParams link;
  link.mass = number_field(j, "mass", context);
  link.inertia_com = number_field(j, "inertia_com", context);
  link.length = number_field(j, "length", context);
  link.com_offset = number_field(j, "com_offset", context);
  return link;
}

ordered_json link_json(const LinkParams& link) {
  return ordered_json{{"mass", link.mass},
                      {"inertia_com", link.inertia_com},
                      {"length", link.length},
                      {"com_offset", link.com_offset}};
}

}  // namespace

namespace {

Scenario parse_scenario_json(const ordered_json& j, const std::string& origin);

}  // namespace

Scenario parse_scenario(std::istream& in, const std::string& origin) {
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    fail(origin, std::string("JSON parse error: ") + e.what());
  }
  try {
    return parse_scenario_json(j, origin);
  } catch (const nlohmann::json::exception& e) {
    fail(origin, std::string("malformed scenario: ") + e.what());
  }
}

namespace {

Scenario parse_scenario_json(const ordered_json& j,
                             const std::string& origin) {
  Scenario sc;
  sc.name = field(j, "name", origin).get<std::string>();

  const std::string method = field(j, "method", origin).get<std::string>();
  if (method == "distance") {
    sc.method = FormationMethod::Distance;
  } else if (method == "displacement") {
    sc.method = FormationMethod::Displacement;
  } else {
    fail(origin, "field 'method' must be \"distance\" or \"displacement\"");
  }

  sc.dt = number_field(j, "dt", origin);
  sc.t_final = number_field(j, "t_final", origin);
  sc.seed = field(j, "seed", origin).get<std::uint64_t>();

  const auto& graph = field(j, "graph", origin);
  sc.framework.graph.n_vertices =
      field(graph, "n_vertices", origin + ".graph").get<int>();
  for (const auto& e : field(graph, "edges", origin + ".graph")) {
    if (!e.is_array() || e.size() != 2) {
      fail(origin, "graph.edges entries must be [tail, head] pairs");
    }
    // stored 1-based in the file, 0-based in memory
    sc.framework.graph.edges.emplace_back(e[0].get<int>() - 1,
                                          e[1].get<int>() - 1);
  }

  for (const auto& p : field(j, "x_star", origin)) {
    if (!p.is_array() || p.size() != 2) {
      fail(origin, "x_star entries must be [x, y] pairs");
    }
    sc.framework.x_star.emplace_back(p[0].get<double>(), p[1].get<double>());
  }

  const auto& gains = field(j, "gains", origin);
  const auto& ks = field(gains, "k_S", origin + ".gains");
  const int n_edges = static_cast<int>(sc.framework.graph.edges.size());
  if (ks.is_number()) {
    sc.gains.k_S = Eigen::VectorXd::Constant(n_edges, ks.get<double>());
  } else if (ks.is_array()) {
    sc.gains.k_S.resize(static_cast<Eigen::Index>(ks.size()));
    for (std::size_t i = 0; i < ks.size(); ++i) {
      sc.gains.k_S(static_cast<Eigen::Index>(i)) = ks[i].get<double>();
    }
  } else {
    fail(origin, "gains.k_S must be a number or an array");
  }
  sc.gains.k_D = number_field(gains, "k_D", origin + ".gains");

  const auto& arms = field(j, "manipulators", origin);
  for (std::size_t i = 0; i < arms.size(); ++i) {
    const std::string context =
        origin + ".manipulators[" + std::to_string(i + 1) + "]";
    const auto& a = arms[static_cast<int>(i)];
    ManipulatorConfig config;
    config.actuation = parse_actuation(a, context);
    config.base = vec2_field(a, "base", context);
    config.beta = number_field(a, "beta", context);
    config.stiffness = vec2_field(a, "stiffness", context);
    config.params = make_mech_params(parse_link(field(a, "link1", context),
                                                context + ".link1"),
                                     parse_link(field(a, "link2", context),
                                                context + ".link2"));
    sc.manipulators.push_back(config);
  }

  const auto& states = field(j, "initial_states", origin);
  for (std::size_t i = 0; i < states.size(); ++i) {
    const std::string context =
        origin + ".initial_states[" + std::to_string(i + 1) + "]";
    const auto& s = states[static_cast<int>(i)];
    ManipulatorState state;
    state.q = vec2_field(s, "q", context);
    state.qdot = vec2_field(s, "qdot", context);
    sc.initial_states.push_back(state);
  }

  validate(sc);
  return sc;
}

}  // namespace

Scenario load_scenario(const std::string& path) {
  if (is_builtin_scenario(path)) {
    return builtin_scenario(path);
  }
  std::ifstream in(path);
  if (!in) {
    throw ScenarioError("cannot open scenario file '" + path + "'");
  }
  return parse_scenario(in, path);
}

void write_scenario(const Scenario& scenario, std::ostream& out) {
  ordered_json j;
  j["name"] = scenario.name;
  j["method"] = scenario.method == FormationMethod::Distance ? "distance"
                                                             : "displacement";
  j["dt"] = scenario.dt;
  j["t_final"] = scenario.t_final;
  j["seed"] = scenario.seed;

  ordered_json graph;
  graph["n_vertices"] = scenario.framework.graph.n_vertices;
  graph["edges"] = ordered_json::array();
  for (const auto& [tail, head] : scenario.framework.graph.edges) {
    graph["edges"].push_back({tail + 1, head + 1});
  }
  j["graph"] = graph;

  j["x_star"] = ordered_json::array();
  for (const auto& p : scenario.framework.x_star) {
    j["x_star"].push_back({p.x(), p.y()});
  }

  j["gains"] = ordered_json{
      {"k_S", std::vector<double>(scenario.gains.k_S.begin(),
                                  scenario.gains.k_S.end())},
      {"k_D", scenario.gains.k_D}};

  j["manipulators"] = ordered_json::array();
  for (const auto& config : scenario.manipulators) {
    ordered_json a;
    a["actuation"] = actuation_name(config.actuation);
    a["base"] = {config.base.x(), config.base.y()};
    a["beta"] = config.beta;
    a["stiffness"] = {config.stiffness(0), config.stiffness(1)};
    a["link1"] = link_json(config.params.link1);
    a["link2"] = link_json(config.params.link2);
    j["manipulators"].push_back(a);
  }

  j["initial_states"] = ordered_json::array();
  for (const auto& state : scenario.initial_states) {
    j["initial_states"].push_back(
        ordered_json{{"q", {state.q(0), state.q(1)}},
                     {"qdot", {state.qdot(0), state.qdot(1)}}});
  }

  out << j.dump(2) << '\n';
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw ScenarioError("cannot open '" + path + "' for writing");
  }
  write_scenario(scenario, out);
}

namespace {

// Shared setup of the four reference cases: four identical arms at the
// corners of a 3 x 2 m workspace, square formation of side 2 centered in
// it, five edges (the square plus one diagonal).
Scenario reference_scenario(const std::string& name,
                            const std::vector<ActuationType>& actuations,
                            double k_s, double k_d) {
  Scenario sc;
  sc.name = name;
  sc.method = FormationMethod::Distance;
  sc.dt = 1e-3;
  sc.t_final = 60.0;
  sc.seed = 1;

  const LinkParams link1{0.7223, 0.0082, 0.3, 0.1184};
  const LinkParams link2{1.2963, 0.0358, 0.5, 0.2357};
  const MechParams params = make_mech_params(link1, link2);

  const std::vector<Eigen::Vector2d> bases = {
      {0.0, 0.0}, {3.0, 0.0}, {3.0, 2.0}, {0.0, 2.0}};
  for (int i = 0; i < 4; ++i) {
    ManipulatorConfig config;
    config.params = params;
    config.stiffness = {5.0, 5.0};
    config.actuation = actuations[i];
    config.base = bases[i];
    config.beta = 0.0;
    sc.manipulators.push_back(config);
  }

  sc.initial_states = {
      {{-M_PI / 2.0, M_PI / 3.0}, {0.0, 0.0}},
      {{M_PI / 3.0, -M_PI / 3.0}, {0.0, 0.0}},
      {{M_PI / 3.0, -M_PI / 3.0}, {0.0, 0.0}},
      {{-M_PI / 6.0, -M_PI / 3.0}, {0.0, 0.0}},
  };

  sc.framework.graph.n_vertices = 4;
  sc.framework.graph.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}};
  sc.framework.x_star = {{0.5, 0.0}, {2.5, 0.0}, {2.5, 2.0}, {0.5, 2.0}};

  sc.gains.k_S = Eigen::VectorXd::Constant(5, k_s);
  sc.gains.k_D = k_d;

  validate(sc);
  return sc;
}

}  // namespace

Scenario builtin_scenario(const std::string& name) {
  using A = ActuationType;
  if (name == "case1") {
    return reference_scenario(name, {A::FullyActuated, A::FullyActuated,
                                     A::FullyActuated, A::AP},
                              0.5, 0.4);
  }
  if (name == "case2") {
    return reference_scenario(
        name, {A::FullyActuated, A::FullyActuated, A::AP, A::PA}, 0.5, 0.4);
  }
  if (name == "case3") {
    return reference_scenario(name,
                              {A::FullyActuated, A::AP, A::AP, A::PA}, 0.4,
                              0.5);
  }
  if (name == "case4") {
    return reference_scenario(name, {A::AP, A::AP, A::AP, A::PA}, 0.5, 0.4);
  }
  throw ScenarioError("unknown built-in scenario '" + name + "'");
}

std::vector<std::string> builtin_scenario_names() {
  return {"case1", "case2", "case3", "case4"};
}

bool is_builtin_scenario(const std::string& name) {
  return name == "case1" || name == "case2" || name == "case3" ||
         name == "case4";
}

void write_trajectory(const TrajectoryRecord& record, std::ostream& out) {
  const int samples = record.samples();
  const int n2 = samples > 0 ? static_cast<int>(record.q.front().size()) : 0;
  const int n = n2 / 2;
  const int n_edges =
      samples > 0 ? static_cast<int>(record.edge_errors.front().size()) : 0;

  out << 't';
  for (int i = 0; i < n; ++i)
    for (int jnt = 1; jnt <= 2; ++jnt)
      out << ",q_" << i + 1 << '_' << jnt;
  for (int i = 0; i < n; ++i)
    for (int jnt = 1; jnt <= 2; ++jnt)
      out << ",qd_" << i + 1 << '_' << jnt;
  for (int i = 0; i < n; ++i) out << ",xend_" << i + 1 << "_x,xend_" << i + 1 << "_y";
  for (int i = 0; i < n; ++i) out << ",xhat_" << i + 1 << "_x,xhat_" << i + 1 << "_y";
  out << ",U";
  for (int k = 0; k < n_edges; ++k) out << ",edge_err_" << k + 1;
  for (int i = 0; i < n; ++i) out << ",sing_" << i + 1;
  for (int i = 0; i < n; ++i)
    for (int jnt = 1; jnt <= 2; ++jnt)
      out << ",tau_" << i + 1 << '_' << jnt;
  out << '\n';

  for (int s = 0; s < samples; ++s) {
    out << format_double(record.t[s]);
    for (int i = 0; i < n2; ++i) out << ',' << format_double(record.q[s](i));
    for (int i = 0; i < n2; ++i) out << ',' << format_double(record.qdot[s](i));
    for (int i = 0; i < n; ++i) {
      out << ',' << format_double(record.x_end[s][i].x()) << ','
          << format_double(record.x_end[s][i].y());
    }
    for (int i = 0; i < n; ++i) {
      out << ',' << format_double(record.xhat_end[s][i].x()) << ','
          << format_double(record.xhat_end[s][i].y());
    }
    out << ',' << format_double(record.U[s]);
    for (int k = 0; k < n_edges; ++k) {
      out << ',' << format_double(record.edge_errors[s](k));
    }
    for (int i = 0; i < n; ++i) {
      out << ',' << format_double(record.singularity_distance[s](i));
    }
    for (int i = 0; i < n2; ++i) {
      out << ',' << format_double(record.torques[s](i));
    }
    out << '\n';
  }
}

void save_trajectory(const TrajectoryRecord& record, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw ScenarioError("cannot open '" + path + "' for writing");
  }
  write_trajectory(record, out);
}

std::vector<double> read_trajectory_column(const std::string& path,
                                           const std::string& column) {
  std::ifstream in(path);
  if (!in) {
    throw ScenarioError("cannot open trajectory file '" + path + "'");
  }
  std::string header;
  if (!std::getline(in, header)) {
    throw ScenarioError(path + ": empty trajectory file");
  }
  int target = -1;
  {
    std::stringstream ss(header);
    std::string cell;
    for (int idx = 0; std::getline(ss, cell, ','); ++idx) {
      if (cell == column) {
        target = idx;
        break;
      }
    }
  }
  if (target < 0) {
    throw ScenarioError(path + ": no column named '" + column + "'");
  }
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (int idx = 0; std::getline(ss, cell, ','); ++idx) {
      if (idx == target) {
        values.push_back(parse_double(cell));
        break;
      }
    }
  }
  return values;
}

}  // namespace flexform
