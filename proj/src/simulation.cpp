#include "flexform/simulation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace flexform {

namespace {

constexpr double kAlphaGapTol = 1e-9;

// Passive-row residual of the full dynamics at rest (qdd = qdot = 0): the
// only surviving term is the spring torque row K q - u with the passive
// input zero.
double passive_rest_residual(const ManipulatorConfig& config, double q_active,
                             double q_passive, double u_active) {
  const int passive = passive_joint_index(config.actuation);
  Eigen::Vector2d q;
  q(passive) = q_passive;
  q(1 - passive) = q_active;
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  u(1 - passive) = u_active;
  const Eigen::Vector2d row =
      Eigen::Vector2d(config.stiffness.array() * q.array()) - u;
  return row(passive);
}

std::vector<PlanarPoint> end_effectors(
    std::span<const ManipulatorConfig> configs, const Eigen::VectorXd& q) {
  std::vector<PlanarPoint> out(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    out[i] = forward_kinematics(configs[i], q.segment<2>(2 * i));
  }
  return out;
}

std::vector<PlanarPoint> virtual_effectors(
    std::span<const ManipulatorConfig> configs, const Eigen::VectorXd& q) {
  std::vector<PlanarPoint> out(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    out[i] = virtual_end_effector(configs[i], q.segment<2>(2 * i));
  }
  return out;
}

Eigen::VectorXd network_accelerations(
    std::span<const ManipulatorConfig> configs, const Eigen::VectorXd& q,
    const Eigen::VectorXd& qdot, std::span<const Eigen::Vector2d> torques) {
  Eigen::VectorXd qdd(q.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const ManipulatorState s{q.segment<2>(2 * i), qdot.segment<2>(2 * i)};
    qdd.segment<2>(2 * i) = forward_dynamics(configs[i], s, torques[i]);
  }
  return qdd;
}

}  // namespace

void validate(const Scenario& scenario) {
  const int n = static_cast<int>(scenario.manipulators.size());
  if (n < 1) {
    throw std::invalid_argument("scenario: needs at least one manipulator");
  }
  if (static_cast<int>(scenario.initial_states.size()) != n) {
    throw std::invalid_argument(
        "scenario: initial_states length must equal the manipulator count");
  }
  for (int i = 0; i < n; ++i) {
    const std::string label = "manipulator " + std::to_string(i + 1);
    validate(scenario.manipulators[i], label.c_str());
    validate(scenario.initial_states[i], label.c_str());
    if (scenario.manipulators[i].actuation == ActuationType::PA) {
      const auto& p = scenario.manipulators[i].params;
      if (std::abs(p.alpha2 - p.alpha3) < kAlphaGapTol) {
        throw std::invalid_argument(
            label + ": PA arm requires alpha2 != alpha3");
      }
    }
  }
  validate(scenario.framework);
  if (scenario.framework.graph.n_vertices != n) {
    throw std::invalid_argument(
        "scenario: graph vertex count must equal the manipulator count");
  }
  validate(scenario.gains,
           static_cast<int>(scenario.framework.graph.edges.size()));
  if (!(scenario.dt > 0.0)) {
    throw std::invalid_argument("scenario: dt must be strictly positive");
  }
  if (!(scenario.t_final >= scenario.dt)) {
    throw std::invalid_argument("scenario: t_final must be at least dt");
  }
}

NetworkState initial_network_state(const Scenario& scenario) {
  const int n = static_cast<int>(scenario.manipulators.size());
  NetworkState state;
  state.t = 0.0;
  state.q.resize(2 * n);
  state.qdot.resize(2 * n);
  for (int i = 0; i < n; ++i) {
    state.q.segment<2>(2 * i) = scenario.initial_states[i].q;
    state.qdot.segment<2>(2 * i) = scenario.initial_states[i].qdot;
  }
  return state;
}

std::vector<Eigen::Vector2d> network_torques(const Scenario& scenario,
                                             const NetworkState& state) {
  const auto& configs = scenario.manipulators;
  const int n = static_cast<int>(configs.size());
  std::vector<Eigen::Vector2d> torques(n);
  for (int i = 0; i < n; ++i) {
    NeighborMessages msgs;
    for (int j : scenario.framework.graph.neighbors(i)) {
      const Eigen::Vector2d qj = state.q.segment<2>(2 * j);
      ObservedNeighbor obs;
      obs.end = forward_kinematics(configs[j], qj);
      obs.mid = mid_joint(configs[j], qj(0));
      obs.base = configs[j].base;
      obs.beta = configs[j].beta;
      obs.length1 = configs[j].params.link1.length;
      obs.length2 = configs[j].params.link2.length;
      obs.actuation = configs[j].actuation;
      msgs.by_vertex.emplace(j, obs);
    }
    const ManipulatorState si{state.q.segment<2>(2 * i),
                              state.qdot.segment<2>(2 * i)};
    torques[i] = control_torque(i, configs[i], si, msgs, scenario.framework,
                                scenario.method, scenario.gains);
  }
  return torques;
}

NetworkState rk4_step(std::span<const ManipulatorConfig> configs,
                      const NetworkState& state,
                      std::span<const Eigen::Vector2d> torques, double dt) {
  const Eigen::VectorXd& q = state.q;
  const Eigen::VectorXd& qd = state.qdot;

  const Eigen::VectorXd a1 = network_accelerations(configs, q, qd, torques);
  const Eigen::VectorXd q2 = q + 0.5 * dt * qd;
  const Eigen::VectorXd v2 = qd + 0.5 * dt * a1;
  const Eigen::VectorXd a2 = network_accelerations(configs, q2, v2, torques);
  const Eigen::VectorXd q3 = q + 0.5 * dt * v2;
  const Eigen::VectorXd v3 = qd + 0.5 * dt * a2;
  const Eigen::VectorXd a3 = network_accelerations(configs, q3, v3, torques);
  const Eigen::VectorXd q4 = q + dt * v3;
  const Eigen::VectorXd v4 = qd + dt * a3;
  const Eigen::VectorXd a4 = network_accelerations(configs, q4, v4, torques);

  NetworkState next;
  next.t = state.t + dt;
  next.q = q + (dt / 6.0) * (qd + 2.0 * v2 + 2.0 * v3 + v4);
  next.qdot = qd + (dt / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
  return next;
}

NetworkState step(const Scenario& scenario, const NetworkState& state) {
  const auto torques = network_torques(scenario, state);
  NetworkState next =
      rk4_step(scenario.manipulators, state, torques, scenario.dt);
  if (!next.q.allFinite() || !next.qdot.allFinite()) {
    throw IntegrationError(
        "integration failure: non-finite state at t = " +
            std::to_string(next.t),
        next.t);
  }
  return next;
}

LyapunovSample lyapunov(const Scenario& scenario, const NetworkState& state) {
  const auto& configs = scenario.manipulators;
  const int n = static_cast<int>(configs.size());

  const auto xhat = virtual_effectors(configs, state.q);
  const Eigen::VectorXd e =
      formation_error(scenario.method, scenario.framework, xhat);
  const Eigen::VectorXd k_diag =
      expand_stiffness(scenario.method, scenario.gains.k_S,
                       static_cast<int>(scenario.framework.graph.edges.size()));

  double kinetic = 0.0;
  double passive_spring = 0.0;
  double active_rate2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::Vector2d qi = state.q.segment<2>(2 * i);
    const Eigen::Vector2d qdi = state.qdot.segment<2>(2 * i);
    kinetic += 0.5 * qdi.dot(mass_matrix(configs[i].params, qi(1)) * qdi);
    const int passive = passive_joint_index(configs[i].actuation);
    if (passive >= 0) {
      passive_spring +=
          0.5 * configs[i].stiffness(passive) * qi(passive) * qi(passive);
      active_rate2 += qdi(1 - passive) * qdi(1 - passive);
    } else {
      active_rate2 += qdi.squaredNorm();
    }
  }

  LyapunovSample sample;
  sample.U = potential(e, k_diag) + kinetic + passive_spring;
  sample.U_dot_analytic = -scenario.gains.k_D * active_rate2;
  return sample;
}

TrajectoryRecord run(const Scenario& scenario, const RunOptions& options) {
  validate(scenario);
  const auto& configs = scenario.manipulators;
  const int n = static_cast<int>(configs.size());
  const int n_edges = static_cast<int>(scenario.framework.graph.edges.size());
  const int n_steps = static_cast<int>(std::round(scenario.t_final / scenario.dt));

  Eigen::VectorXd d_star(n_edges);
  for (int k = 0; k < n_edges; ++k) {
    const auto& [tail, head] = scenario.framework.graph.edges[k];
    d_star(k) =
        (scenario.framework.x_star[tail] - scenario.framework.x_star[head])
            .norm();
  }
  const Eigen::VectorXd k_diag = expand_stiffness(
      scenario.method, scenario.gains.k_S, n_edges);

  TrajectoryRecord rec;
  rec.dt = scenario.dt;
  rec.t.reserve(n_steps + 1);

  NetworkState state = initial_network_state(scenario);
  // velocity-quiet window used by the convergence flag
  int quiet_samples = 0;
  const int quiet_needed = static_cast<int>(std::round(1.0 / scenario.dt));
  bool errors_small_tail = false;

  for (int k = 0; k <= n_steps; ++k) {
    const auto torques = network_torques(scenario, state);

    rec.t.push_back(state.t);
    rec.q.push_back(state.q);
    rec.qdot.push_back(state.qdot);
    rec.x_end.push_back(end_effectors(configs, state.q));
    rec.xhat_end.push_back(virtual_effectors(configs, state.q));
    rec.U.push_back(lyapunov(scenario, state).U);

    const auto z = relative_displacements(scenario.framework.graph,
                                          rec.x_end.back());
    Eigen::VectorXd edge_err(n_edges);
    for (int m = 0; m < n_edges; ++m) {
      edge_err(m) = std::abs(z[m].norm() - d_star(m));
    }
    rec.edge_errors.push_back(edge_err);

    Eigen::VectorXd sing(n);
    bool near = false;
    for (int i = 0; i < n; ++i) {
      const ManipulatorState si{state.q.segment<2>(2 * i),
                                state.qdot.segment<2>(2 * i)};
      const auto status =
          singularity_check(configs[i], si, options.singularity_margin);
      sing(i) = status.distance;
      near = near || status.near_singular;
    }
    rec.singularity_distance.push_back(sing);
    rec.singularity_flagged = rec.singularity_flagged || near;

    Eigen::VectorXd tau(2 * n);
    for (int i = 0; i < n; ++i) {
      tau.segment<2>(2 * i) = torques[i];
    }
    rec.torques.push_back(tau);

    // convergence bookkeeping on the formation-error components
    const Eigen::VectorXd e = formation_error(scenario.method,
                                              scenario.framework,
                                              rec.xhat_end.back());
    const bool errors_small = e.lpNorm<Eigen::Infinity>() < 1e-2;
    const bool velocities_small = state.qdot.norm() < 1e-3;
    if (errors_small && velocities_small) {
      ++quiet_samples;
    } else {
      quiet_samples = 0;
    }
    errors_small_tail = quiet_samples >= quiet_needed;

    if (k == n_steps) break;
    state = rk4_step(configs, state, torques, scenario.dt);
    if (!state.q.allFinite() || !state.qdot.allFinite()) {
      throw IntegrationError(
          "integration failure: non-finite state at t = " +
              std::to_string(state.t),
          state.t);
    }
  }

  rec.converged = errors_small_tail;

  double max_abs_u = 0.0;
  for (double u : rec.U) max_abs_u = std::max(max_abs_u, std::abs(u));
  const double eps_int = options.u_increase_allowance *
                         std::pow(scenario.dt, 4) * max_abs_u;
  rec.max_U_increase = 0.0;
  rec.u_monotone = true;
  for (std::size_t k = 1; k < rec.U.size(); ++k) {
    const double d = rec.U[k] - rec.U[k - 1];
    rec.max_U_increase = std::max(rec.max_U_increase, d);
    if (d > eps_int) rec.u_monotone = false;
  }
  return rec;
}

RestEquilibrium verify_rest_equilibrium(const ManipulatorConfig& config,
                                        double q_active, double u_active) {
  const int passive = passive_joint_index(config.actuation);
  if (passive < 0) {
    throw std::invalid_argument(
        "verify_rest_equilibrium: arm must be underactuated");
  }
  if (config.actuation == ActuationType::PA &&
      std::abs(config.params.alpha2 - config.params.alpha3) < kAlphaGapTol) {
    throw std::invalid_argument(
        "verify_rest_equilibrium: PA arm requires alpha2 != alpha3");
  }

  // Newton on the passive-row rest residual (linear in the passive angle).
  double q_passive = 0.7;
  double residual = passive_rest_residual(config, q_active, q_passive,
                                          u_active);
  for (int it = 0; it < 50 && std::abs(residual) > 1e-14; ++it) {
    const double h = 1e-6;
    const double slope =
        (passive_rest_residual(config, q_active, q_passive + h, u_active) -
         passive_rest_residual(config, q_active, q_passive - h, u_active)) /
        (2.0 * h);
    if (slope == 0.0) break;
    q_passive -= residual / slope;
    residual = passive_rest_residual(config, q_active, q_passive, u_active);
  }

  RestEquilibrium out;
  out.passive_angle = q_passive;
  out.residual = std::abs(residual);
  return out;
}

ManipulatorState settle_single_arm(const ManipulatorConfig& config,
                                   const ManipulatorState& initial,
                                   double u_constant, double damping,
                                   double t_final, double dt) {
  const int passive = passive_joint_index(config.actuation);
  if (passive < 0) {
    throw std::invalid_argument("settle_single_arm: arm must be underactuated");
  }
  const int active = 1 - passive;
  const int n_steps = static_cast<int>(std::round(t_final / dt));

  std::vector<ManipulatorConfig> configs{config};
  NetworkState state;
  state.t = 0.0;
  state.q = initial.q;
  state.qdot = initial.qdot;
  for (int k = 0; k < n_steps; ++k) {
    Eigen::Vector2d u = Eigen::Vector2d::Zero();
    u(active) = u_constant - damping * state.qdot(active);
    const std::vector<Eigen::Vector2d> torques{u};
    state = rk4_step(configs, state, torques, dt);
    if (!state.q.allFinite() || !state.qdot.allFinite()) {
      throw IntegrationError(
          "integration failure: non-finite state at t = " +
              std::to_string(state.t),
          state.t);
    }
  }
  return {state.q, state.qdot};
}

}  // namespace flexform
