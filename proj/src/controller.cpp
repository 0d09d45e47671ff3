#include "flexform/controller.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flexform {

void validate(const ControlGains& gains, int n_edges) {
  if (gains.k_S.size() != n_edges) {
    throw std::invalid_argument(
        "gains: k_S must carry one entry per graph edge");
  }
  if ((gains.k_S.array() <= 0.0).any()) {
    throw std::invalid_argument("gains: k_S entries must be strictly positive");
  }
  if (!(gains.k_D > 0.0)) {
    throw std::invalid_argument("gains: k_D must be strictly positive");
  }
}

Eigen::Vector2d local_gradient(
    int vertex, const PlanarPoint& own_virtual,
    const std::map<int, PlanarPoint>& neighbor_virtuals,
    const Framework& framework, FormationMethod method,
    const ControlGains& gains) {
  Eigen::Vector2d grad = Eigen::Vector2d::Zero();
  const auto& edges = framework.graph.edges;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& [tail, head] = edges[k];
    if (tail != vertex && head != vertex) continue;
    const int other = tail == vertex ? head : tail;
    const auto it = neighbor_virtuals.find(other);
    if (it == neighbor_virtuals.end()) {
      throw std::invalid_argument("local_gradient: missing neighbor " +
                                  std::to_string(other + 1));
    }
    const double ks = gains.k_S(static_cast<int>(k));
    const Eigen::Vector2d d = own_virtual - it->second;
    if (method == FormationMethod::Distance) {
      const double target =
          (framework.x_star[tail] - framework.x_star[head]).squaredNorm();
      grad += 2.0 * ks * (d.squaredNorm() - target) * d;
    } else {
      const Eigen::Vector2d target =
          framework.x_star[vertex] - framework.x_star[other];
      grad += ks * (d - target);
    }
  }
  return grad;
}

Eigen::Vector2d control_torque(int vertex, const ManipulatorConfig& config,
                               const ManipulatorState& state,
                               const NeighborMessages& msgs,
                               const Framework& framework,
                               FormationMethod method,
                               const ControlGains& gains) {
  // The message set must cover the graph neighborhood exactly.
  const auto neighbors = framework.graph.neighbors(vertex);
  if (msgs.by_vertex.size() != neighbors.size()) {
    throw std::invalid_argument(
        "control_torque: message set does not match the neighborhood of "
        "agent " +
        std::to_string(vertex + 1));
  }
  std::map<int, PlanarPoint> neighbor_virtuals;
  for (int j : neighbors) {
    const auto it = msgs.by_vertex.find(j);
    if (it == msgs.by_vertex.end()) {
      throw std::invalid_argument("control_torque: missing message from " +
                                  std::to_string(j + 1));
    }
    neighbor_virtuals[j] = virtual_from_observables(it->second);
  }

  const PlanarPoint own = virtual_end_effector(config, state.q);
  const Eigen::Vector2d ehat = local_gradient(vertex, own, neighbor_virtuals,
                                              framework, method, gains);

  switch (config.actuation) {
    case ActuationType::FullyActuated: {
      const Eigen::Matrix2d j = jacobian(config, state.q);
      return -j.transpose() * ehat - gains.k_D * state.qdot +
             Eigen::Vector2d(config.stiffness.array() * state.q.array());
    }
    case ActuationType::AP: {
      const ReducedJacobian rj = reduced_jacobian(config, state.q(0));
      const double u1 = -rj.radius * rj.direction.dot(ehat) -
                        gains.k_D * state.qdot(0) +
                        config.stiffness(0) * state.q(0);
      return {u1, 0.0};
    }
    default: {
      const ReducedJacobian rj = reduced_jacobian(config, state.q(1));
      const double u2 = -rj.radius * rj.direction.dot(ehat) -
                        gains.k_D * state.qdot(1) +
                        config.stiffness(1) * state.q(1);
      return {0.0, u2};
    }
  }
}

SingularityStatus singularity_check(const ManipulatorConfig& config,
                                    const ManipulatorState& state,
                                    double margin) {
  // Fully actuated arms lose rank at q2+beta = k pi; underactuated ones at
  // multiples of pi/2 of the active angle plus beta.
  double angle = 0.0;
  double period = 0.0;
  switch (config.actuation) {
    case ActuationType::FullyActuated:
      angle = state.q(1) + config.beta;
      period = M_PI;
      break;
    case ActuationType::AP:
      angle = state.q(0) + config.beta;
      period = M_PI / 2.0;
      break;
    default:
      angle = state.q(1) + config.beta;
      period = M_PI / 2.0;
      break;
  }
  SingularityStatus status;
  status.distance = std::abs(std::remainder(angle, period));
  status.near_singular = status.distance < margin;
  return status;
}

}  // namespace flexform
