#ifndef FLEXFORM_REACHABLE_SHAPES_HPP
#define FLEXFORM_REACHABLE_SHAPES_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "flexform/formation_graph.hpp"

namespace flexform {

/// Layout of the stacked active-coordinate vector q^a: two angles per
/// fully-actuated agent, then one active angle per AP agent, then one per PA
/// agent, each block in agent order.
struct ActiveLayout {
  std::vector<int> offset;  // per agent, start index into q^a
  std::vector<int> width;   // 2 for FA, 1 for AP/PA
  int total = 0;            // N + N1
};

ActiveLayout make_active_layout(std::span<const ManipulatorConfig> configs);

/// Virtual end-effector positions of every agent at the given active
/// coordinates (passive angles held at zero).
std::vector<PlanarPoint> virtual_positions_from_active(
    std::span<const ManipulatorConfig> configs, const Eigen::VectorXd& q_a);

/// Residual f_G(xhat(q_a)) - f_G(x_star) of the desired-and-reachable shape
/// equations.
Eigen::VectorXd shape_residual(FormationMethod method,
                               std::span<const ManipulatorConfig> configs,
                               const Framework& framework,
                               const Eigen::VectorXd& q_a);

/// Analytic Jacobian of the residual with respect to q_a.
Eigen::MatrixXd shape_residual_jacobian(
    FormationMethod method, std::span<const ManipulatorConfig> configs,
    const Framework& framework, const Eigen::VectorXd& q_a);

enum class ShapeClass { Continuum, Curve, Isolated, Empty, Undetermined };

const char* to_string(ShapeClass c);

struct ShapeSolution {
  Eigen::VectorXd q_a;                        // wrapped into [-pi, pi)
  std::vector<PlanarPoint> virtual_positions;
  double residual_norm = 0.0;                 // max-norm of the residual
  int nullity = 0;                            // of the residual Jacobian
};

struct ShapeSolutionSet {
  std::vector<ShapeSolution> solutions;  // deduplicated
  int n_starts = 0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  ShapeClass classification = ShapeClass::Undetermined;
};

/// Multi-start Levenberg-Marquardt search over q_a in [-pi, pi)^{N+N1}.
/// Keeps converged runs with max-norm residual below `tol`, deduplicates
/// solutions closer than 1e-4 rad componentwise (mod 2pi), and classifies
/// the set by the Jacobian nullity at the solutions: >= 2 continuum, 1
/// curve, 0 isolated. No solutions counts as empty once n_starts >= 2000.
/// The distance method requires an infinitesimally rigid framework.
ShapeSolutionSet solve_shapes(FormationMethod method,
                              std::span<const ManipulatorConfig> configs,
                              const Framework& framework, int n_starts,
                              std::uint64_t seed, double tol = 1e-8);

/// Single Levenberg-Marquardt run from a given start. Exposed so callers
/// can seed a start at a known solution.
struct LmResult {
  Eigen::VectorXd q_a;
  double residual_norm = 0.0;
  bool converged = false;
  int iterations = 0;
};

LmResult solve_shape_from(FormationMethod method,
                          std::span<const ManipulatorConfig> configs,
                          const Framework& framework,
                          const Eigen::VectorXd& q_a_start, double tol = 1e-8);

enum class PredictedCardinality { Continuum, Isolated, PossiblyEmpty };

const char* to_string(PredictedCardinality c);

/// Unknown/equation bookkeeping behind the prediction: N+N1 unknowns
/// against 2N-3 (distance) or 2N-2 (displacement) independent equations.
struct CardinalityPrediction {
  PredictedCardinality predicted;
  int unknowns = 0;
  int equations = 0;
};

CardinalityPrediction classify_cardinality(int n_fa, int n_ap, int n_pa,
                                           FormationMethod method);

/// Writes one CSV row per solution with the chosen vertex's virtual
/// position. Header: solution_id,x,y. Numbers round-trip exactly.
void export_projection(const ShapeSolutionSet& set, int vertex,
                       std::ostream& out);

}  // namespace flexform

#endif
