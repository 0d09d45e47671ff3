#ifndef FLEXFORM_FORMATION_GRAPH_HPP
#define FLEXFORM_FORMATION_GRAPH_HPP

#include <Eigen/Dense>
#include <span>
#include <utility>
#include <vector>

#include "flexform/kinematics.hpp"

namespace flexform {

/// Undirected formation graph with a fixed orientation per edge. Vertices
/// are 0-based indices; the edge list order defines the column order of the
/// incidence matrix and of every per-edge vector in the project.
struct FormationGraph {
  int n_vertices = 0;
  std::vector<std::pair<int, int>> edges;  // (tail, head)

  std::vector<int> neighbors(int vertex) const;
};

void validate(const FormationGraph& graph);

/// Formation graph together with the reference positions defining the
/// desired shape.
struct Framework {
  FormationGraph graph;
  std::vector<PlanarPoint> x_star;
};

void validate(const Framework& framework);

enum class FormationMethod { Distance, Displacement };

/// Components per edge in the edge function: 1 for distance, 2 for
/// displacement.
int components_per_edge(FormationMethod method);

/// N x |E| matrix with +1 at the tail and -1 at the head of each edge.
Eigen::MatrixXd incidence_matrix(const FormationGraph& graph);

/// z_k = x_tail - x_head for every edge.
std::vector<Eigen::Vector2d> relative_displacements(
    const FormationGraph& graph, std::span<const PlanarPoint> positions);

/// Edge function f_G: squared edge lengths for the distance method (|E|
/// values) or stacked relative displacements for the displacement method
/// (2|E| values).
Eigen::VectorXd edge_function(FormationMethod method,
                              const FormationGraph& graph,
                              std::span<const PlanarPoint> positions);

/// Formation error e = f_G(positions) - f_G(x_star).
Eigen::VectorXd formation_error(FormationMethod method,
                                const Framework& framework,
                                std::span<const PlanarPoint> positions);

/// Expands per-edge virtual spring stiffness to one entry per edge-function
/// component (duplicates each edge's value for the displacement method).
Eigen::VectorXd expand_stiffness(FormationMethod method,
                                 const Eigen::VectorXd& per_edge, int n_edges);

/// Virtual spring potential V = 1/2 e^T diag(k) e. The stiffness vector k
/// must have one positive entry per error component.
double potential(const Eigen::VectorXd& error, const Eigen::VectorXd& k_diag);

/// Gradient of the potential with respect to each vertex position.
std::vector<Eigen::Vector2d> potential_gradient(
    FormationMethod method, const Framework& framework,
    std::span<const PlanarPoint> positions, const Eigen::VectorXd& k_diag);

struct RigidityReport {
  int rank = 0;
  bool infinitesimally_rigid = false;
};

/// Rank of the |E| x 2N rigidity matrix at x_star (rows 2 z_k^T placed with
/// +/- signs at the tail/head blocks); rigid iff rank == 2N-3. Requires
/// N >= 3.
RigidityReport rigidity_check(const Framework& framework);

}  // namespace flexform

#endif
