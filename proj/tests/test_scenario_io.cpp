#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "flexform/numeric_io.hpp"
#include "flexform/scenario_io.hpp"

using namespace flexform;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

bool scenarios_equal(const Scenario& a, const Scenario& b) {
  if (a.name != b.name || a.method != b.method || a.dt != b.dt ||
      a.t_final != b.t_final || a.seed != b.seed) {
    return false;
  }
  if (a.gains.k_D != b.gains.k_D || a.gains.k_S != b.gains.k_S) return false;
  if (a.framework.graph.n_vertices != b.framework.graph.n_vertices ||
      a.framework.graph.edges != b.framework.graph.edges) {
    return false;
  }
  for (std::size_t i = 0; i < a.framework.x_star.size(); ++i) {
    if (a.framework.x_star[i] != b.framework.x_star[i]) return false;
  }
  for (std::size_t i = 0; i < a.manipulators.size(); ++i) {
    const auto& ca = a.manipulators[i];
    const auto& cb = b.manipulators[i];
    if (ca.actuation != cb.actuation || ca.base != cb.base ||
        ca.beta != cb.beta || ca.stiffness != cb.stiffness) {
      return false;
    }
    if (ca.params.alpha1 != cb.params.alpha1 ||
        ca.params.alpha2 != cb.params.alpha2 ||
        ca.params.alpha3 != cb.params.alpha3) {
      return false;
    }
  }
  for (std::size_t i = 0; i < a.initial_states.size(); ++i) {
    if (a.initial_states[i].q != b.initial_states[i].q ||
        a.initial_states[i].qdot != b.initial_states[i].qdot) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("number formatting round-trips") {
  for (double v : {0.0, -0.0, 1.0 / 3.0, M_PI, -2.7401923788646685e2,
                   1e-300, 5.0, 0.1}) {
    CHECK(parse_double(format_double(v)) == v);
  }
}

TEST_CASE("builtin scenarios") {
  SUBCASE("case2 actuation pattern and gains") {
    const Scenario sc = builtin_scenario("case2");
    CHECK(sc.manipulators.size() == 4);
    CHECK(sc.manipulators[0].actuation == ActuationType::FullyActuated);
    CHECK(sc.manipulators[1].actuation == ActuationType::FullyActuated);
    CHECK(sc.manipulators[2].actuation == ActuationType::AP);
    CHECK(sc.manipulators[3].actuation == ActuationType::PA);
    CHECK(sc.gains.k_D == 0.4);
    CHECK(sc.gains.k_S == Eigen::VectorXd::Constant(5, 0.5));
    CHECK(sc.framework.graph.edges.size() == 5);
  }

  SUBCASE("case3 gains differ") {
    const Scenario sc = builtin_scenario("case3");
    CHECK(sc.manipulators[1].actuation == ActuationType::AP);
    CHECK(sc.gains.k_D == 0.5);
    CHECK(sc.gains.k_S(0) == 0.4);
  }

  SUBCASE("all four names resolve and validate") {
    for (const auto& name : builtin_scenario_names()) {
      CHECK_NOTHROW(builtin_scenario(name));
    }
    CHECK_THROWS_AS(builtin_scenario("case9"), ScenarioError);
  }
}

TEST_CASE("scenario save/load round trip") {
  const Scenario original = builtin_scenario("case3");
  const auto path = temp_file("flexform_roundtrip.json");
  save_scenario(original, path.string());
  const Scenario loaded = load_scenario(path.string());
  CHECK(scenarios_equal(original, loaded));
  std::filesystem::remove(path);
}

TEST_CASE("parse errors name the field") {
  const Scenario sc = builtin_scenario("case2");
  std::ostringstream buffer;
  write_scenario(sc, buffer);
  std::string text = buffer.str();

  SUBCASE("missing stiffness") {
    const auto at = text.find("\"stiffness\"");
    REQUIRE(at != std::string::npos);
    // rename the first stiffness key so the field is missing
    std::string broken = text;
    broken.replace(at, 11, "\"stuffness\"");
    std::istringstream in(broken);
    CHECK_THROWS_WITH_AS(parse_scenario(in, "test"),
                         doctest::Contains("stiffness"), ScenarioError);
  }

  SUBCASE("malformed JSON") {
    std::istringstream in("{ not json");
    CHECK_THROWS_AS(parse_scenario(in, "test"), ScenarioError);
  }

  SUBCASE("wrong field type") {
    std::string broken = text;
    const auto at = broken.find("\"name\": \"case2\"");
    REQUIRE(at != std::string::npos);
    broken.replace(at, 15, "\"name\": 1234567");
    std::istringstream in(broken);
    CHECK_THROWS_AS(parse_scenario(in, "test"), ScenarioError);
  }

  SUBCASE("invariant violations are named") {
    std::string broken = text;
    const auto at = broken.find("\"k_D\": 0.4");
    REQUIRE(at != std::string::npos);
    broken.replace(at, 10, "\"k_D\": -10");
    std::istringstream in(broken);
    CHECK_THROWS_WITH_AS(parse_scenario(in, "test"),
                         doctest::Contains("k_D"), std::invalid_argument);
  }
}

TEST_CASE("scalar k_S expands to every edge") {
  const Scenario sc = builtin_scenario("case2");
  std::ostringstream buffer;
  write_scenario(sc, buffer);
  std::string text = buffer.str();
  const auto at = text.find("\"k_S\"");
  REQUIRE(at != std::string::npos);
  const auto end = text.find(']', at);
  text.replace(at, end - at + 1, "\"k_S\": 0.25");
  std::istringstream in(text);
  const Scenario loaded = parse_scenario(in, "test");
  CHECK(loaded.gains.k_S == Eigen::VectorXd::Constant(5, 0.25));
}

TEST_CASE("trajectory CSV round trip") {
  Scenario sc = builtin_scenario("case2");
  sc.t_final = 0.25;
  const TrajectoryRecord rec = run(sc);
  const auto path = temp_file("flexform_traj.csv");
  save_trajectory(rec, path.string());

  SUBCASE("U column reloads bit-identically") {
    const auto u = read_trajectory_column(path.string(), "U");
    REQUIRE(u.size() == rec.U.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
      CHECK(u[k] == rec.U[k]);
    }
  }

  SUBCASE("header names every column") {
    std::ifstream in(path.string());
    std::string header;
    std::getline(in, header);
    CHECK(header.find("t,") == 0);
    CHECK(header.find("q_1_1") != std::string::npos);
    CHECK(header.find("qd_4_2") != std::string::npos);
    CHECK(header.find("xend_2_y") != std::string::npos);
    CHECK(header.find("xhat_3_x") != std::string::npos);
    CHECK(header.find(",U,") != std::string::npos);
    CHECK(header.find("edge_err_5") != std::string::npos);
    CHECK(header.find("sing_4") != std::string::npos);
    CHECK(header.find("tau_4_2") != std::string::npos);
  }

  SUBCASE("unknown column is reported") {
    CHECK_THROWS_AS(read_trajectory_column(path.string(), "bogus"),
                    ScenarioError);
  }

  std::filesystem::remove(path);
}
