#include "flexform/reachable_shapes.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <random>
#include <stdexcept>

#include "flexform/numeric_io.hpp"

namespace flexform {

namespace {

constexpr double kDedupEps = 1e-4;   // rad, componentwise mod 2pi
constexpr double kStepTol = 1e-10;
constexpr int kMaxIterations = 200;

double wrap_pi(double angle) { return std::remainder(angle, 2.0 * M_PI); }

double angular_distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(wrap_pi(a(i) - b(i))));
  }
  return worst;
}

// Uniform doubles in [-pi, pi) built from the raw 64-bit stream so the
// sequence is identical across standard libraries.
double uniform_angle(std::mt19937_64& rng) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return -M_PI + 2.0 * M_PI * u;
}

int jacobian_nullity(const Eigen::MatrixXd& j) {
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(j);
  const auto& sv = svd.singularValues();
  int rank = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    rank = static_cast<int>((sv.array() > 1e-9 * sv(0)).count());
  }
  return static_cast<int>(j.cols()) - rank;
}

}  // namespace

ActiveLayout make_active_layout(std::span<const ManipulatorConfig> configs) {
  ActiveLayout layout;
  const int n = static_cast<int>(configs.size());
  layout.offset.assign(n, -1);
  layout.width.assign(n, 0);
  int next = 0;
  for (int pass = 0; pass < 3; ++pass) {
    const ActuationType want = pass == 0   ? ActuationType::FullyActuated
                               : pass == 1 ? ActuationType::AP
                                           : ActuationType::PA;
    for (int i = 0; i < n; ++i) {
      if (configs[i].actuation != want) continue;
      layout.offset[i] = next;
      layout.width[i] = want == ActuationType::FullyActuated ? 2 : 1;
      next += layout.width[i];
    }
  }
  layout.total = next;
  return layout;
}

std::vector<PlanarPoint> virtual_positions_from_active(
    std::span<const ManipulatorConfig> configs, const Eigen::VectorXd& q_a) {
  const ActiveLayout layout = make_active_layout(configs);
  if (q_a.size() != layout.total) {
    throw std::invalid_argument(
        "virtual_positions_from_active: q_a length mismatch, expected " +
        std::to_string(layout.total));
  }
  std::vector<PlanarPoint> out(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const int o = layout.offset[i];
    switch (configs[i].actuation) {
      case ActuationType::FullyActuated:
        out[i] = virtual_end_effector(configs[i], {q_a(o), q_a(o + 1)});
        break;
      case ActuationType::AP:
        out[i] = virtual_end_effector(configs[i], {q_a(o), 0.0});
        break;
      default:
        out[i] = virtual_end_effector(configs[i], {0.0, q_a(o)});
        break;
    }
  }
  return out;
}

Eigen::VectorXd shape_residual(FormationMethod method,
                               std::span<const ManipulatorConfig> configs,
                               const Framework& framework,
                               const Eigen::VectorXd& q_a) {
  const auto positions = virtual_positions_from_active(configs, q_a);
  return formation_error(method, framework, positions);
}

Eigen::MatrixXd shape_residual_jacobian(
    FormationMethod method, std::span<const ManipulatorConfig> configs,
    const Framework& framework, const Eigen::VectorXd& q_a) {
  const ActiveLayout layout = make_active_layout(configs);
  const auto positions = virtual_positions_from_active(configs, q_a);
  const auto z = relative_displacements(framework.graph, positions);

  // d xhat_i / d q_a, a 2 x width block per agent.
  std::vector<Eigen::Matrix<double, 2, Eigen::Dynamic>> blocks(configs.size());
  for (std::size_t i = 0; i < configs.size(); ++i) {
    const int o = layout.offset[i];
    if (configs[i].actuation == ActuationType::FullyActuated) {
      blocks[i] = jacobian(configs[i], {q_a(o), q_a(o + 1)});
    } else {
      const ReducedJacobian rj = reduced_jacobian(configs[i], q_a(o));
      blocks[i] = rj.radius * rj.direction;
    }
  }

  const int p = components_per_edge(method);
  const int n_edges = static_cast<int>(framework.graph.edges.size());
  Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(p * n_edges, layout.total);
  for (int k = 0; k < n_edges; ++k) {
    const auto& [tail, head] = framework.graph.edges[k];
    if (method == FormationMethod::Distance) {
      const Eigen::RowVector2d row = 2.0 * z[k].transpose();
      jac.block(k, layout.offset[tail], 1, layout.width[tail]) +=
          row * blocks[tail];
      jac.block(k, layout.offset[head], 1, layout.width[head]) -=
          row * blocks[head];
    } else {
      jac.block(2 * k, layout.offset[tail], 2, layout.width[tail]) +=
          blocks[tail];
      jac.block(2 * k, layout.offset[head], 2, layout.width[head]) -=
          blocks[head];
    }
  }
  return jac;
}

LmResult solve_shape_from(FormationMethod method,
                          std::span<const ManipulatorConfig> configs,
                          const Framework& framework,
                          const Eigen::VectorXd& q_a_start, double tol) {
  LmResult result;
  Eigen::VectorXd q = q_a_start;
  Eigen::VectorXd r = shape_residual(method, configs, framework, q);
  double cost = 0.5 * r.squaredNorm();
  double lambda = 1e-3;
  const Eigen::Index n = q.size();

  for (int it = 0; it < kMaxIterations; ++it) {
    result.iterations = it;
    if (r.lpNorm<Eigen::Infinity>() < tol) break;

    const Eigen::MatrixXd jac =
        shape_residual_jacobian(method, configs, framework, q);
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;

    const Eigen::VectorXd step =
        (jtj + lambda * Eigen::MatrixXd::Identity(n, n)).ldlt().solve(-g);
    if (step.norm() < kStepTol) break;

    const Eigen::VectorXd q_new = q + step;
    const Eigen::VectorXd r_new =
        shape_residual(method, configs, framework, q_new);
    const double cost_new = 0.5 * r_new.squaredNorm();
    if (cost_new < cost) {
      q = q_new;
      r = r_new;
      cost = cost_new;
      lambda = std::max(lambda / 10.0, 1e-12);
    } else {
      lambda *= 10.0;
    }
  }

  result.residual_norm = r.lpNorm<Eigen::Infinity>();
  result.converged = result.residual_norm < tol;
  result.q_a = q;
  return result;
}

ShapeSolutionSet solve_shapes(FormationMethod method,
                              std::span<const ManipulatorConfig> configs,
                              const Framework& framework, int n_starts,
                              std::uint64_t seed, double tol) {
  if (n_starts < 1) {
    throw std::invalid_argument("solve_shapes: n_starts must be at least 1");
  }
  validate(framework);
  if (method == FormationMethod::Distance) {
    const RigidityReport rigidity = rigidity_check(framework);
    if (!rigidity.infinitesimally_rigid) {
      throw std::invalid_argument(
          "solve_shapes: the distance method requires an infinitesimally "
          "rigid framework (rank " +
          std::to_string(rigidity.rank) + " of " +
          std::to_string(2 * framework.graph.n_vertices - 3) + ")");
    }
  }

  const ActiveLayout layout = make_active_layout(configs);
  std::mt19937_64 rng(seed);

  struct Converged {
    double residual;
    Eigen::VectorXd q_a;
  };
  std::vector<Converged> converged;
  for (int s = 0; s < n_starts; ++s) {
    Eigen::VectorXd start(layout.total);
    for (int i = 0; i < layout.total; ++i) {
      start(i) = uniform_angle(rng);
    }
    const LmResult lm =
        solve_shape_from(method, configs, framework, start, tol);
    if (lm.converged) {
      Eigen::VectorXd wrapped = lm.q_a;
      for (Eigen::Index i = 0; i < wrapped.size(); ++i) {
        wrapped(i) = wrap_pi(wrapped(i));
      }
      converged.push_back({lm.residual_norm, wrapped});
    }
  }

  // Deterministic order before dedup: residual, then lexicographic q_a.
  std::sort(converged.begin(), converged.end(),
            [](const Converged& a, const Converged& b) {
              if (a.residual != b.residual) return a.residual < b.residual;
              return std::lexicographical_compare(
                  a.q_a.data(), a.q_a.data() + a.q_a.size(), b.q_a.data(),
                  b.q_a.data() + b.q_a.size());
            });

  ShapeSolutionSet set;
  set.n_starts = n_starts;
  set.seed = seed;
  set.tol = tol;
  for (const auto& c : converged) {
    bool duplicate = false;
    for (const auto& kept : set.solutions) {
      if (angular_distance(c.q_a, kept.q_a) < kDedupEps) {
        duplicate = true;
        break;
      }
    }
    if (duplicate) continue;
    ShapeSolution sol;
    sol.q_a = c.q_a;
    sol.virtual_positions = virtual_positions_from_active(configs, c.q_a);
    sol.residual_norm = c.residual;
    sol.nullity = jacobian_nullity(
        shape_residual_jacobian(method, configs, framework, c.q_a));
    set.solutions.push_back(std::move(sol));
  }

  if (set.solutions.empty()) {
    set.classification =
        n_starts >= 2000 ? ShapeClass::Empty : ShapeClass::Undetermined;
    return set;
  }

  // Classify by the modal nullity; a split vote stays undetermined.
  std::map<int, int> votes;
  for (const auto& sol : set.solutions) votes[sol.nullity]++;
  const auto modal = std::max_element(
      votes.begin(), votes.end(),
      [](const auto& a, const auto& b) { return a.second < b.second; });
  const bool tie =
      std::count_if(votes.begin(), votes.end(), [&](const auto& v) {
        return v.second == modal->second;
      }) > 1;
  if (tie) {
    set.classification = ShapeClass::Undetermined;
  } else if (modal->first >= 2) {
    set.classification = ShapeClass::Continuum;
  } else if (modal->first == 1) {
    set.classification = ShapeClass::Curve;
  } else {
    set.classification = ShapeClass::Isolated;
  }
  return set;
}

const char* to_string(ShapeClass c) {
  switch (c) {
    case ShapeClass::Continuum:
      return "continuum";
    case ShapeClass::Curve:
      return "curve";
    case ShapeClass::Isolated:
      return "isolated";
    case ShapeClass::Empty:
      return "empty";
    default:
      return "undetermined";
  }
}

const char* to_string(PredictedCardinality c) {
  switch (c) {
    case PredictedCardinality::Continuum:
      return "continuum";
    case PredictedCardinality::Isolated:
      return "isolated";
    default:
      return "possibly-empty";
  }
}

CardinalityPrediction classify_cardinality(int n_fa, int n_ap, int n_pa,
                                           FormationMethod method) {
  if (n_fa < 0 || n_ap < 0 || n_pa < 0) {
    throw std::invalid_argument("classify_cardinality: counts must be >= 0");
  }
  const int n = n_fa + n_ap + n_pa;
  const int underactuated = n_ap + n_pa;
  CardinalityPrediction prediction;
  prediction.unknowns = n + n_fa;  // N + N1
  if (method == FormationMethod::Distance) {
    prediction.equations = 2 * n - 3;
    prediction.predicted = underactuated <= 2 ? PredictedCardinality::Continuum
                           : underactuated == 3
                               ? PredictedCardinality::Isolated
                               : PredictedCardinality::PossiblyEmpty;
  } else {
    prediction.equations = 2 * n - 2;
    prediction.predicted = underactuated <= 1 ? PredictedCardinality::Continuum
                           : underactuated == 2
                               ? PredictedCardinality::Isolated
                               : PredictedCardinality::PossiblyEmpty;
  }
  return prediction;
}

void export_projection(const ShapeSolutionSet& set, int vertex,
                       std::ostream& out) {
  out << "solution_id,x,y\n";
  for (std::size_t s = 0; s < set.solutions.size(); ++s) {
    const auto& p = set.solutions[s].virtual_positions.at(vertex);
    out << s << ',' << format_double(p.x()) << ',' << format_double(p.y())
        << '\n';
  }
}

}  // namespace flexform
