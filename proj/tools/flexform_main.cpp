#include <exception>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "flexform/reachable_shapes.hpp"
#include "flexform/scenario_io.hpp"
#include "flexform/verification.hpp"

namespace {

using namespace flexform;

int cmd_simulate(const std::string& scenario_ref, double dt_override,
                 double t_final_override, const std::string& out_path) {
  Scenario scenario = load_scenario(scenario_ref);
  if (dt_override > 0.0) scenario.dt = dt_override;
  if (t_final_override > 0.0) scenario.t_final = t_final_override;
  validate(scenario);

  const TrajectoryRecord rec = run(scenario);
  if (!out_path.empty()) {
    save_trajectory(rec, out_path);
  }

  std::cout << "scenario: " << scenario.name << "  (dt=" << scenario.dt
            << " s, t_final=" << scenario.t_final << " s)\n";
  std::cout << "final inner-distance errors (m):";
  const auto& final_err = rec.edge_errors.back();
  for (int k = 0; k < final_err.size(); ++k) {
    std::cout << ' ' << final_err(k);
  }
  std::cout << "\nfinal U = " << rec.U.back()
            << " J, max step increase = " << rec.max_U_increase << " J\n";
  std::cout << "converged: " << (rec.converged ? "yes" : "no")
            << ", U monotone within allowance: "
            << (rec.u_monotone ? "yes" : "no") << ", singularity margin hit: "
            << (rec.singularity_flagged ? "yes" : "no") << '\n';
  if (!out_path.empty()) {
    std::cout << "trajectory written to " << out_path << " ("
              << rec.samples() << " samples)\n";
  }
  return 0;
}

int cmd_solve_shapes(const std::string& scenario_ref,
                     const std::string& method_override, int starts,
                     std::uint64_t seed, bool seed_given, int vertex,
                     const std::string& out_path) {
  Scenario scenario = load_scenario(scenario_ref);
  FormationMethod method = scenario.method;
  if (method_override == "distance") method = FormationMethod::Distance;
  if (method_override == "displacement") method = FormationMethod::Displacement;
  const std::uint64_t used_seed = seed_given ? seed : scenario.seed;

  const ShapeSolutionSet set = solve_shapes(
      method, scenario.manipulators, scenario.framework, starts, used_seed);

  int n_fa = 0, n_ap = 0, n_pa = 0;
  for (const auto& config : scenario.manipulators) {
    switch (config.actuation) {
      case ActuationType::FullyActuated: ++n_fa; break;
      case ActuationType::AP: ++n_ap; break;
      default: ++n_pa; break;
    }
  }
  const CardinalityPrediction prediction =
      classify_cardinality(n_fa, n_ap, n_pa, method);

  std::cout << "scenario: " << scenario.name << ", method: "
            << (method == FormationMethod::Distance ? "distance"
                                                    : "displacement")
            << ", starts: " << set.n_starts << ", seed: " << set.seed
            << ", tol: " << set.tol << '\n';
  std::cout << "prediction from actuation counts: "
            << to_string(prediction.predicted) << " (" << prediction.unknowns
            << " unknowns vs " << prediction.equations << " equations)\n";
  std::cout << "distinct solutions: " << set.solutions.size()
            << ", classification: " << to_string(set.classification) << '\n';

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "cannot open " << out_path << " for writing\n";
      return 1;
    }
    export_projection(set, vertex - 1, out);
    std::cout << "vertex " << vertex << " projection written to " << out_path
              << '\n';
  }
  return 0;
}

int cmd_check_rigidity(const std::string& scenario_ref) {
  const Scenario scenario = load_scenario(scenario_ref);
  const RigidityReport report = rigidity_check(scenario.framework);
  const int n = scenario.framework.graph.n_vertices;
  std::cout << "rigidity-matrix rank: " << report.rank << " (2N-3 = "
            << 2 * n - 3 << ")\n";
  std::cout << "infinitesimally rigid: "
            << (report.infinitesimally_rigid ? "yes" : "no") << '\n';
  return 0;
}

int cmd_verify(int starts) {
  VerificationOptions options;
  options.solver_starts = starts;
  const auto results = run_verification_suite(options);
  const bool ok = report_checks(results, std::cout);
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Distributed end-effector formation control for planar two-link "
      "flexible-joint manipulator networks"};
  app.require_subcommand(1);

  std::string scenario_ref;
  std::string out_path;
  double dt_override = 0.0;
  double t_final_override = 0.0;

  auto* simulate = app.add_subcommand(
      "simulate", "Run a closed-loop simulation and export the trajectory");
  simulate->add_option("--scenario", scenario_ref,
                       "Scenario file or built-in name (case1..case4)")
      ->required();
  simulate->add_option("--dt", dt_override, "Override the integration step");
  simulate->add_option("--t-final", t_final_override,
                       "Override the simulation horizon");
  simulate->add_option("--out", out_path, "Trajectory CSV output path");

  std::string method_override;
  int starts = 2000;
  std::uint64_t seed = 0;
  int vertex = 1;
  auto* solve = app.add_subcommand(
      "solve-shapes",
      "Multi-start search for the desired-and-reachable shape set");
  solve->add_option("--scenario", scenario_ref,
                    "Scenario file or built-in name (case1..case4)")
      ->required();
  solve->add_option("--method", method_override,
                    "Override the formation method")
      ->check(CLI::IsMember({"distance", "displacement"}));
  solve->add_option("--starts", starts, "Number of random starts");
  auto* seed_opt = solve->add_option("--seed", seed, "Random seed");
  solve->add_option("--vertex", vertex,
                    "1-based vertex whose projection is exported");
  solve->add_option("--out", out_path, "Projection CSV output path");

  auto* rigidity = app.add_subcommand(
      "check-rigidity", "Rank test on the framework's rigidity matrix");
  rigidity->add_option("--scenario", scenario_ref,
                       "Scenario file or built-in name (case1..case4)")
      ->required();

  int verify_starts = 2000;
  auto* verify = app.add_subcommand(
      "verify", "Run the numerical verification suite (nonzero exit on failure)");
  verify->add_option("--starts", verify_starts,
                     "Multi-start budget of the cardinality study");

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      return cmd_simulate(scenario_ref, dt_override, t_final_override,
                          out_path);
    }
    if (solve->parsed()) {
      return cmd_solve_shapes(scenario_ref, method_override, starts, seed,
                              seed_opt->count() > 0, vertex, out_path);
    }
    if (rigidity->parsed()) {
      return cmd_check_rigidity(scenario_ref);
    }
    if (verify->parsed()) {
      return cmd_verify(verify_starts);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
