#include "flexform/dynamics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flexform {

namespace {

void require(bool condition, const char* label, const std::string& what) {
  if (!condition) {
    throw std::invalid_argument(std::string(label) + ": " + what);
  }
}

}  // namespace

MechParams make_mech_params(const LinkParams& link1, const LinkParams& link2) {
  validate(link1, "link1");
  validate(link2, "link2");
  MechParams p;
  p.link1 = link1;
  p.link2 = link2;
  p.alpha1 = link1.mass * link1.com_offset * link1.com_offset +
             link2.mass * link1.length * link1.length + link1.inertia_com;
  p.alpha2 = link2.mass * link2.com_offset * link2.com_offset +
             link2.inertia_com;
  p.alpha3 = link2.mass * link1.length * link2.com_offset;
  return p;
}

int passive_joint_index(ActuationType actuation) {
  switch (actuation) {
    case ActuationType::AP:
      return 1;
    case ActuationType::PA:
      return 0;
    default:
      return -1;
  }
}

void validate(const LinkParams& link, const char* label) {
  require(link.mass > 0.0, label, "mass must be strictly positive");
  require(link.inertia_com > 0.0, label,
          "inertia_com must be strictly positive");
  require(link.length > 0.0, label, "length must be strictly positive");
  require(link.com_offset > 0.0, label,
          "com_offset must be strictly positive");
  require(link.com_offset <= link.length, label,
          "com_offset must not exceed length");
}

void validate(const MechParams& params, const char* label) {
  validate(params.link1, label);
  validate(params.link2, label);
  require(params.alpha1 > 0.0 && params.alpha2 > 0.0 && params.alpha3 > 0.0,
          label, "alpha parameters must be strictly positive");
}

void validate(const ManipulatorConfig& config, const char* label) {
  validate(config.params, label);
  require(config.stiffness(0) > 0.0 && config.stiffness(1) > 0.0, label,
          "joint stiffness entries must be strictly positive");
  require(config.base.allFinite() && std::isfinite(config.beta), label,
          "base pose must be finite");
}

void validate(const ManipulatorState& state, const char* label) {
  require(state.q.allFinite() && state.qdot.allFinite(), label,
          "state entries must be finite");
}

Eigen::Matrix2d mass_matrix(const MechParams& params, double q2) {
  const double c = std::cos(q2);
  const double cross = params.alpha2 + params.alpha3 * c;
  Eigen::Matrix2d m;
  m << params.alpha1 + params.alpha2 + 2.0 * params.alpha3 * c, cross,  //
      cross, params.alpha2;
  return m;
}

Eigen::Matrix2d coriolis_matrix(const MechParams& params, double q2,
                                const Eigen::Vector2d& qdot) {
  const double s = params.alpha3 * std::sin(q2);
  Eigen::Matrix2d c;
  c << -s * qdot(1), -s * (qdot(0) + qdot(1)),  //
      s * qdot(0), 0.0;
  return c;
}

Eigen::Matrix2d mass_matrix_rate(const MechParams& params, double q2,
                                 double qdot2) {
  const double d = -params.alpha3 * std::sin(q2) * qdot2;
  Eigen::Matrix2d m;
  m << 2.0 * d, d,  //
      d, 0.0;
  return m;
}

Eigen::Vector2d apply_actuation_mask(ActuationType actuation,
                                     const Eigen::Vector2d& torque) {
  Eigen::Vector2d masked = torque;
  const int passive = passive_joint_index(actuation);
  if (passive >= 0) {
    masked(passive) = 0.0;
  }
  return masked;
}

Eigen::Vector2d forward_dynamics(const ManipulatorConfig& config,
                                 const ManipulatorState& state,
                                 const Eigen::Vector2d& torque) {
  const int passive = passive_joint_index(config.actuation);
  if (passive >= 0 && torque(passive) != 0.0) {
    throw std::invalid_argument(
        "forward_dynamics: nonzero torque on the passive joint");
  }

  const Eigen::Matrix2d m = mass_matrix(config.params, state.q(1));
  const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  if (det < 1e-12) {
    throw std::invalid_argument(
        "forward_dynamics: mass matrix determinant below 1e-12, "
        "parameters are corrupt");
  }

  const Eigen::Matrix2d c =
      coriolis_matrix(config.params, state.q(1), state.qdot);
  const Eigen::Vector2d rhs =
      torque - c * state.qdot -
      Eigen::Vector2d(config.stiffness.array() * state.q.array());

  // closed-form 2x2 inverse (adjugate over determinant)
  return Eigen::Vector2d(m(1, 1) * rhs(0) - m(0, 1) * rhs(1),
                         -m(1, 0) * rhs(0) + m(0, 0) * rhs(1)) /
         det;
}

}  // namespace flexform
