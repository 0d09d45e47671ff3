#ifndef FLEXFORM_DYNAMICS_HPP
#define FLEXFORM_DYNAMICS_HPP

#include <Eigen/Dense>

namespace flexform {

/// One link of a planar two-link arm.
struct LinkParams {
  double mass;         // kg
  double inertia_com;  // kg m^2, moment of inertia about the link CoM
  double length;       // m
  double com_offset;   // m, distance from the joint to the CoM
};

/// Mechanical parameters of a two-link arm. The alpha values are the only
/// quantities the equations of motion use; they are cached at construction
/// and treated as canonical. The links are kept for provenance.
struct MechParams {
  LinkParams link1;
  LinkParams link2;
  double alpha1;  // m1 l1^2 + m2 L1^2 + I1
  double alpha2;  // m2 l2^2 + I2
  double alpha3;  // m2 L1 l2
};

/// Builds MechParams with the alpha cache filled in from the links.
MechParams make_mech_params(const LinkParams& link1, const LinkParams& link2);

enum class ActuationType { FullyActuated, AP, PA };

/// Index (0 or 1) of the passive joint, or -1 for a fully-actuated arm.
int passive_joint_index(ActuationType actuation);

struct ManipulatorConfig {
  MechParams params;
  Eigen::Vector2d stiffness;  // torsional spring constants (K1, K2), N m/rad
  ActuationType actuation;
  Eigen::Vector2d base;       // world-frame base position, m
  double beta;                // frame offset between world and local frame, rad
};

struct ManipulatorState {
  Eigen::Vector2d q;     // joint angles, rad
  Eigen::Vector2d qdot;  // joint angular velocities, rad/s
};

void validate(const LinkParams& link, const char* label);
void validate(const MechParams& params, const char* label);
void validate(const ManipulatorConfig& config, const char* label);
void validate(const ManipulatorState& state, const char* label);

/// Mass matrix M(q2). Symmetric positive definite for valid parameters.
Eigen::Matrix2d mass_matrix(const MechParams& params, double q2);

/// Coriolis/centrifugal matrix C(q2, qdot).
Eigen::Matrix2d coriolis_matrix(const MechParams& params, double q2,
                                const Eigen::Vector2d& qdot);

/// dM/dt given q2 and qdot2 (entries depend on q2 only).
Eigen::Matrix2d mass_matrix_rate(const MechParams& params, double q2,
                                 double qdot2);

/// Zeroes the passive torque entry; identity for fully-actuated arms.
Eigen::Vector2d apply_actuation_mask(ActuationType actuation,
                                     const Eigen::Vector2d& torque);

/// Joint accelerations qdd = M^{-1}(u - C qdot - K q). The 2x2 inverse is
/// taken in closed form. Rejects torques whose passive entry is nonzero and
/// mass matrices with determinant below 1e-12.
Eigen::Vector2d forward_dynamics(const ManipulatorConfig& config,
                                 const ManipulatorState& state,
                                 const Eigen::Vector2d& torque);

}  // namespace flexform

#endif
