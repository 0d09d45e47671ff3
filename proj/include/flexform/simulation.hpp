#ifndef FLEXFORM_SIMULATION_HPP
#define FLEXFORM_SIMULATION_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "flexform/controller.hpp"

namespace flexform {

/// Complete description of one closed-loop run.
struct Scenario {
  std::string name;
  std::vector<ManipulatorConfig> manipulators;
  std::vector<ManipulatorState> initial_states;
  Framework framework;
  FormationMethod method = FormationMethod::Distance;
  ControlGains gains;
  double dt = 1e-3;
  double t_final = 60.0;
  std::uint64_t seed = 0;
};

/// Rejects scenarios that violate any structural invariant, naming the
/// failing invariant in the exception message.
void validate(const Scenario& scenario);

struct NetworkState {
  double t = 0.0;
  Eigen::VectorXd q;     // 2N
  Eigen::VectorXd qdot;  // 2N
};

NetworkState initial_network_state(const Scenario& scenario);

class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double t)
      : std::runtime_error(what), t_(t) {}
  double time() const { return t_; }

 private:
  double t_;
};

/// Torques of the synchronous round: every agent observes the same state
/// snapshot and evaluates its distributed controller.
std::vector<Eigen::Vector2d> network_torques(const Scenario& scenario,
                                             const NetworkState& state);

/// One classical RK4 step of the 4N-dimensional network ODE with the given
/// torques held constant (zero-order hold).
NetworkState rk4_step(std::span<const ManipulatorConfig> configs,
                      const NetworkState& state,
                      std::span<const Eigen::Vector2d> torques, double dt);

/// One synchronous simulation round: assemble neighbor messages, evaluate
/// the controllers, integrate one step. Throws IntegrationError if the
/// state leaves the finite range.
NetworkState step(const Scenario& scenario, const NetworkState& state);

struct LyapunovSample {
  double U = 0.0;                 // V(e) + kinetic + passive spring energy
  double U_dot_analytic = 0.0;    // -k_D ||qdot^a||^2
};

LyapunovSample lyapunov(const Scenario& scenario, const NetworkState& state);

/// Everything recorded along a run, one sample per step boundary
/// (n_steps + 1 samples at uniform dt spacing).
struct TrajectoryRecord {
  double dt = 0.0;
  std::vector<double> t;
  std::vector<Eigen::VectorXd> q;                    // 2N
  std::vector<Eigen::VectorXd> qdot;                 // 2N
  std::vector<std::vector<PlanarPoint>> x_end;       // N
  std::vector<std::vector<PlanarPoint>> xhat_end;    // N
  std::vector<double> U;
  std::vector<Eigen::VectorXd> edge_errors;          // | |z_k| - d*_k |, per edge
  std::vector<Eigen::VectorXd> singularity_distance; // per agent
  std::vector<Eigen::VectorXd> torques;              // 2N, input applied over [t, t+dt)
  // flags
  bool converged = false;
  bool singularity_flagged = false;
  double max_U_increase = 0.0;   // largest U(t_{k+1}) - U(t_k)
  bool u_monotone = false;       // within the integrator allowance

  int samples() const { return static_cast<int>(t.size()); }
};

struct RunOptions {
  double singularity_margin = 0.05;     // rad
  // Allowance for the U-monotonicity flag: eps = u_increase_allowance *
  // dt^4 * max|U|.
  double u_increase_allowance = 10.0;
};

TrajectoryRecord run(const Scenario& scenario, const RunOptions& options = {});

/// Rest-equilibrium check behind the steady-state property of underactuated
/// arms: with the active angle fixed and the active torque constant, the
/// passive row of the dynamics at rest ( qdd = qdot = 0 ) is solved for the
/// passive angle. The root is 0 for any AP arm and for any PA arm with
/// alpha2 != alpha3.
struct RestEquilibrium {
  double passive_angle = 0.0;
  double residual = 0.0;  // passive-row residual at the returned angle
};

RestEquilibrium verify_rest_equilibrium(const ManipulatorConfig& config,
                                        double q_active, double u_active);

/// Simulates a single arm under a constant active torque plus viscous
/// damping on the active joint: u_active(t) = u_constant - damping *
/// qdot_active. Used to observe the passive angle settling to zero.
ManipulatorState settle_single_arm(const ManipulatorConfig& config,
                                   const ManipulatorState& initial,
                                   double u_constant, double damping,
                                   double t_final, double dt);

}  // namespace flexform

#endif
