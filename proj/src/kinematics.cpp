#include "flexform/kinematics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flexform {

namespace {

constexpr double kObservationTol = 1e-9;
constexpr double kDegenerateNorm = 1e-9;

}  // namespace

void validate(const ObservedNeighbor& obs, const char* label) {
  const double seg2 = (obs.end - obs.mid).norm();
  const double seg1 = (obs.mid - obs.base).norm();
  if (std::abs(seg2 - obs.length2) > kObservationTol ||
      std::abs(seg1 - obs.length1) > kObservationTol) {
    throw std::invalid_argument(
        std::string(label) +
        ": observed segment lengths are inconsistent with the link lengths");
  }
}

PlanarPoint link_chain(double length1, double length2, double beta, double q1,
                       double q2) {
  const double a1 = q1 + beta;
  const double a2 = q1 + q2 + beta;
  return {-length1 * std::sin(a1) - length2 * std::sin(a2),
          length1 * std::cos(a1) + length2 * std::cos(a2)};
}

PlanarPoint forward_kinematics(const ManipulatorConfig& config,
                               const Eigen::Vector2d& q) {
  return link_chain(config.params.link1.length, config.params.link2.length,
                    config.beta, q(0), q(1)) +
         config.base;
}

PlanarPoint mid_joint(const ManipulatorConfig& config, double q1) {
  const double l1 = config.params.link1.length;
  const double a = q1 + config.beta;
  return config.base + PlanarPoint(-l1 * std::sin(a), l1 * std::cos(a));
}

Eigen::Matrix2d jacobian(const ManipulatorConfig& config,
                         const Eigen::Vector2d& q) {
  const double l1 = config.params.link1.length;
  const double l2 = config.params.link2.length;
  const double a1 = q(0) + config.beta;
  const double a2 = q(0) + q(1) + config.beta;
  Eigen::Matrix2d j;
  j << -l1 * std::cos(a1) - l2 * std::cos(a2), -l2 * std::cos(a2),  //
      -l1 * std::sin(a1) - l2 * std::sin(a2), -l2 * std::sin(a2);
  return j;
}

PlanarPoint virtual_end_effector(const ManipulatorConfig& config,
                                 const Eigen::Vector2d& q) {
  switch (config.actuation) {
    case ActuationType::AP:
      return forward_kinematics(config, {q(0), 0.0});
    case ActuationType::PA:
      return forward_kinematics(config, {0.0, q(1)});
    default:
      return forward_kinematics(config, q);
  }
}

double relative_segment_angle(const PlanarPoint& end, const PlanarPoint& mid,
                              const PlanarPoint& base) {
  const PlanarPoint a = mid - base;
  const PlanarPoint b = end - mid;
  if (a.norm() < kDegenerateNorm || b.norm() < kDegenerateNorm) {
    throw std::invalid_argument(
        "relative_segment_angle: degenerate observation, coincident points");
  }
  const double cross = a.x() * b.y() - a.y() * b.x();
  const double dot = a.dot(b);
  return std::atan2(cross, dot);
}

PlanarPoint virtual_from_observables(const ObservedNeighbor& obs) {
  validate(obs, "virtual_from_observables");
  switch (obs.actuation) {
    case ActuationType::FullyActuated:
      return obs.end;
    case ActuationType::AP: {
      const double scale = (obs.length1 + obs.length2) / obs.length1;
      return scale * (obs.mid - obs.base) + obs.base;
    }
    default: {
      const double q2 = relative_segment_angle(obs.end, obs.mid, obs.base);
      return link_chain(obs.length1, obs.length2, obs.beta, 0.0, q2) +
             obs.base;
    }
  }
}

ReducedJacobian reduced_jacobian(const ManipulatorConfig& config,
                                 double active_angle) {
  if (config.actuation == ActuationType::FullyActuated) {
    throw std::invalid_argument(
        "reduced_jacobian: only defined for AP and PA arms");
  }
  const double a = active_angle + config.beta;
  ReducedJacobian rj;
  rj.direction = {-std::cos(a), -std::sin(a)};
  rj.radius = config.actuation == ActuationType::AP
                  ? config.params.link1.length + config.params.link2.length
                  : config.params.link2.length;
  return rj;
}

}  // namespace flexform
