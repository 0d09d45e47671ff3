#include "flexform/formation_graph.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <stdexcept>
#include <string>

namespace flexform {

std::vector<int> FormationGraph::neighbors(int vertex) const {
  std::vector<int> out;
  for (const auto& [tail, head] : edges) {
    if (tail == vertex) out.push_back(head);
    if (head == vertex) out.push_back(tail);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void validate(const FormationGraph& graph) {
  if (graph.n_vertices < 1) {
    throw std::invalid_argument("graph: n_vertices must be at least 1");
  }
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    const auto& [tail, head] = graph.edges[k];
    if (tail < 0 || tail >= graph.n_vertices || head < 0 ||
        head >= graph.n_vertices) {
      throw std::invalid_argument("graph: edge " + std::to_string(k + 1) +
                                  " has a vertex outside the valid range");
    }
    if (tail == head) {
      throw std::invalid_argument("graph: edge " + std::to_string(k + 1) +
                                  " is a self-loop");
    }
  }
}

void validate(const Framework& framework) {
  validate(framework.graph);
  if (static_cast<int>(framework.x_star.size()) !=
      framework.graph.n_vertices) {
    throw std::invalid_argument(
        "framework: x_star length must equal the vertex count");
  }
}

int components_per_edge(FormationMethod method) {
  return method == FormationMethod::Distance ? 1 : 2;
}

Eigen::MatrixXd incidence_matrix(const FormationGraph& graph) {
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(
      graph.n_vertices, static_cast<Eigen::Index>(graph.edges.size()));
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    b(graph.edges[k].first, static_cast<Eigen::Index>(k)) = 1.0;
    b(graph.edges[k].second, static_cast<Eigen::Index>(k)) = -1.0;
  }
  return b;
}

std::vector<Eigen::Vector2d> relative_displacements(
    const FormationGraph& graph, std::span<const PlanarPoint> positions) {
  if (static_cast<int>(positions.size()) != graph.n_vertices) {
    throw std::invalid_argument(
        "relative_displacements: positions length must equal the vertex "
        "count");
  }
  std::vector<Eigen::Vector2d> z;
  z.reserve(graph.edges.size());
  for (const auto& [tail, head] : graph.edges) {
    z.push_back(positions[tail] - positions[head]);
  }
  return z;
}

Eigen::VectorXd edge_function(FormationMethod method,
                              const FormationGraph& graph,
                              std::span<const PlanarPoint> positions) {
  const auto z = relative_displacements(graph, positions);
  const int e = static_cast<int>(z.size());
  if (method == FormationMethod::Distance) {
    Eigen::VectorXd f(e);
    for (int k = 0; k < e; ++k) {
      f(k) = z[k].squaredNorm();
    }
    return f;
  }
  Eigen::VectorXd f(2 * e);
  for (int k = 0; k < e; ++k) {
    f.segment<2>(2 * k) = z[k];
  }
  return f;
}

Eigen::VectorXd formation_error(FormationMethod method,
                                const Framework& framework,
                                std::span<const PlanarPoint> positions) {
  return edge_function(method, framework.graph, positions) -
         edge_function(method, framework.graph, framework.x_star);
}

Eigen::VectorXd expand_stiffness(FormationMethod method,
                                 const Eigen::VectorXd& per_edge,
                                 int n_edges) {
  if (per_edge.size() != n_edges) {
    throw std::invalid_argument(
        "expand_stiffness: need one stiffness entry per edge");
  }
  if (method == FormationMethod::Distance) {
    return per_edge;
  }
  Eigen::VectorXd k(2 * n_edges);
  for (int i = 0; i < n_edges; ++i) {
    k(2 * i) = per_edge(i);
    k(2 * i + 1) = per_edge(i);
  }
  return k;
}

double potential(const Eigen::VectorXd& error, const Eigen::VectorXd& k_diag) {
  if (k_diag.size() != error.size()) {
    throw std::invalid_argument(
        "potential: stiffness diagonal must match the error length");
  }
  if ((k_diag.array() <= 0.0).any()) {
    throw std::invalid_argument(
        "potential: spring stiffness entries must be strictly positive");
  }
  return 0.5 * error.dot(Eigen::VectorXd(k_diag.array() * error.array()));
}

std::vector<Eigen::Vector2d> potential_gradient(
    FormationMethod method, const Framework& framework,
    std::span<const PlanarPoint> positions, const Eigen::VectorXd& k_diag) {
  const auto& graph = framework.graph;
  const Eigen::VectorXd e = formation_error(method, framework, positions);
  if (k_diag.size() != e.size()) {
    throw std::invalid_argument(
        "potential_gradient: stiffness diagonal must match the error length");
  }
  const auto z = relative_displacements(graph, positions);

  // ehat = Bbar D(z) k_S e, accumulated edge by edge.
  std::vector<Eigen::Vector2d> grad(graph.n_vertices,
                                    Eigen::Vector2d::Zero());
  for (std::size_t k = 0; k < graph.edges.size(); ++k) {
    const auto& [tail, head] = graph.edges[k];
    Eigen::Vector2d w;
    if (method == FormationMethod::Distance) {
      w = 2.0 * z[k] * (k_diag(static_cast<int>(k)) * e(static_cast<int>(k)));
    } else {
      w = Eigen::Vector2d(k_diag.segment<2>(2 * static_cast<int>(k)).array() *
                          e.segment<2>(2 * static_cast<int>(k)).array());
    }
    grad[tail] += w;
    grad[head] -= w;
  }
  return grad;
}

RigidityReport rigidity_check(const Framework& framework) {
  validate(framework);
  const int n = framework.graph.n_vertices;
  if (n < 3) {
    throw std::invalid_argument("rigidity_check: needs at least 3 vertices");
  }
  const auto& edges = framework.graph.edges;
  Eigen::MatrixXd r =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(edges.size()), 2 * n);
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& [tail, head] = edges[k];
    const Eigen::Vector2d z =
        framework.x_star[tail] - framework.x_star[head];
    r.block<1, 2>(static_cast<Eigen::Index>(k), 2 * tail) = 2.0 * z.transpose();
    r.block<1, 2>(static_cast<Eigen::Index>(k), 2 * head) =
        -2.0 * z.transpose();
  }
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  const auto& sv = svd.singularValues();
  int rank = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    rank = static_cast<int>((sv.array() > 1e-9 * sv(0)).count());
  }
  RigidityReport report;
  report.rank = rank;
  report.infinitesimally_rigid = rank == 2 * n - 3;
  return report;
}

}  // namespace flexform
