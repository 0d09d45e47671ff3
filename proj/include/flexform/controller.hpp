#ifndef FLEXFORM_CONTROLLER_HPP
#define FLEXFORM_CONTROLLER_HPP

#include <Eigen/Dense>
#include <map>
#include <span>

#include "flexform/formation_graph.hpp"

namespace flexform {

struct ControlGains {
  Eigen::VectorXd k_S;  // virtual spring stiffness, one entry per edge
  double k_D = 0.0;     // damping gain on the active joints
};

void validate(const ControlGains& gains, int n_edges);

/// Observations available to one agent: exactly its graph neighbors, keyed
/// by vertex index. No other agent's state is reachable through this type.
struct NeighborMessages {
  std::map<int, ObservedNeighbor> by_vertex;
};

/// The i-th block of the potential gradient, assembled from the agent's own
/// virtual end-effector and its neighbors' (edge stiffness looked up by edge
/// index; the orientation sign is handled by negating head-side terms).
Eigen::Vector2d local_gradient(
    int vertex, const PlanarPoint& own_virtual,
    const std::map<int, PlanarPoint>& neighbor_virtuals,
    const Framework& framework, FormationMethod method,
    const ControlGains& gains);

/// Distributed control torque for agent `vertex` built only from its own
/// state and neighbor observations. The passive entry is exactly zero for
/// AP/PA arms. Rejects message sets that do not cover exactly the graph
/// neighborhood.
Eigen::Vector2d control_torque(int vertex, const ManipulatorConfig& config,
                               const ManipulatorState& state,
                               const NeighborMessages& msgs,
                               const Framework& framework,
                               FormationMethod method,
                               const ControlGains& gains);

struct SingularityStatus {
  bool near_singular = false;
  double distance = 0.0;  // rad to the nearest singular angle
};

/// Distance of the relevant joint angle from the singular set: multiples of
/// pi for fully-actuated arms (q2+beta), multiples of pi/2 for AP (q1+beta)
/// and PA (q2+beta). Flags when the distance drops below `margin`.
SingularityStatus singularity_check(const ManipulatorConfig& config,
                                    const ManipulatorState& state,
                                    double margin);

}  // namespace flexform

#endif
