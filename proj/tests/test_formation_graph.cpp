#include <cmath>
#include <random>

#include "doctest.h"
#include "flexform/formation_graph.hpp"

using namespace flexform;

namespace {

// square plus one diagonal, the reference five-edge graph
FormationGraph reference_graph() {
  FormationGraph g;
  g.n_vertices = 4;
  g.edges = {{0, 1}, {1, 2}, {2, 3}, {3, 0}, {0, 2}};
  return g;
}

std::vector<PlanarPoint> square_corners() {
  return {{0.0, 0.0}, {2.0, 0.0}, {2.0, 2.0}, {0.0, 2.0}};
}

double unif(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<PlanarPoint> random_positions(std::mt19937_64& rng, int n) {
  std::vector<PlanarPoint> p;
  for (int i = 0; i < n; ++i) {
    p.emplace_back(unif(rng, -2.0, 2.0), unif(rng, -2.0, 2.0));
  }
  return p;
}

Eigen::Rotation2D<double> rot(double angle) {
  return Eigen::Rotation2D<double>(angle);
}

}  // namespace

TEST_CASE("incidence matrix") {
  SUBCASE("reference graph reproduces the printed matrix") {
    const Eigen::MatrixXd b = incidence_matrix(reference_graph());
    Eigen::MatrixXd expected(4, 5);
    expected << 1, 0, 0, -1, 1,  //
        -1, 1, 0, 0, 0,          //
        0, -1, 1, 0, -1,         //
        0, 0, -1, 1, 0;
    CHECK((b - expected).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("single edge") {
    FormationGraph g;
    g.n_vertices = 2;
    g.edges = {{0, 1}};
    const Eigen::MatrixXd b = incidence_matrix(g);
    CHECK(b(0, 0) == 1.0);
    CHECK(b(1, 0) == -1.0);
  }

  SUBCASE("columns always sum to zero") {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
      FormationGraph g;
      g.n_vertices = 3 + static_cast<int>(rng() % 5);
      for (int k = 0; k < 6; ++k) {
        const int a = static_cast<int>(rng() % g.n_vertices);
        const int b2 = static_cast<int>(rng() % g.n_vertices);
        if (a != b2) g.edges.emplace_back(a, b2);
      }
      if (g.edges.empty()) continue;
      const Eigen::VectorXd sums =
          incidence_matrix(g).colwise().sum().transpose();
      CHECK(sums.cwiseAbs().maxCoeff() == 0.0);
    }
  }
}

TEST_CASE("relative displacements") {
  const FormationGraph g = reference_graph();

  SUBCASE("square corners, orientation fixed by the edge list") {
    const auto z = relative_displacements(g, square_corners());
    CHECK((z[0] - Eigen::Vector2d(-2.0, 0.0)).norm() == 0.0);
    CHECK((z[1] - Eigen::Vector2d(0.0, -2.0)).norm() == 0.0);
    CHECK((z[2] - Eigen::Vector2d(2.0, 0.0)).norm() == 0.0);
    CHECK((z[3] - Eigen::Vector2d(0.0, 2.0)).norm() == 0.0);
    CHECK((z[4] - Eigen::Vector2d(-2.0, -2.0)).norm() == 0.0);
  }

  SUBCASE("coincident positions and translation invariance") {
    const std::vector<PlanarPoint> same(4, PlanarPoint(0.3, -0.1));
    for (const auto& zk : relative_displacements(g, same)) {
      CHECK(zk.norm() == 0.0);
    }
    std::mt19937_64 rng(32);
    const auto p = random_positions(rng, 4);
    auto shifted = p;
    for (auto& x : shifted) x += PlanarPoint(1.7, -2.9);
    const auto z0 = relative_displacements(g, p);
    const auto z1 = relative_displacements(g, shifted);
    for (int k = 0; k < 5; ++k) {
      CHECK((z0[k] - z1[k]).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
}

TEST_CASE("edge function") {
  const FormationGraph g = reference_graph();

  SUBCASE("side-2 square under the distance method") {
    const Eigen::VectorXd f =
        edge_function(FormationMethod::Distance, g, square_corners());
    Eigen::VectorXd expected(5);
    expected << 4.0, 4.0, 4.0, 4.0, 8.0;
    CHECK((f - expected).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("distance output is SE(2) invariant") {
    std::mt19937_64 rng(33);
    const auto p = random_positions(rng, 4);
    std::vector<PlanarPoint> moved;
    const auto r = rot(0.83);
    for (const auto& x : p) moved.push_back(r * x + PlanarPoint(0.4, -1.2));
    const Eigen::VectorXd f0 = edge_function(FormationMethod::Distance, g, p);
    const Eigen::VectorXd f1 =
        edge_function(FormationMethod::Distance, g, moved);
    CHECK((f0 - f1).cwiseAbs().maxCoeff() < 1e-10);
  }

  SUBCASE("displacement output moves with rotations") {
    std::mt19937_64 rng(34);
    const auto p = random_positions(rng, 4);
    std::vector<PlanarPoint> translated = p;
    for (auto& x : translated) x += PlanarPoint(0.5, 0.5);
    const Eigen::VectorXd f0 =
        edge_function(FormationMethod::Displacement, g, p);
    CHECK((f0 - edge_function(FormationMethod::Displacement, g, translated))
              .cwiseAbs()
              .maxCoeff() < 1e-14);

    std::vector<PlanarPoint> rotated;
    const auto r = rot(M_PI / 2.0);
    for (const auto& x : p) rotated.push_back(r * x);
    CHECK((f0 - edge_function(FormationMethod::Displacement, g, rotated))
              .cwiseAbs()
              .maxCoeff() > 1e-3);
  }
}

TEST_CASE("formation error") {
  Framework fw;
  fw.graph = reference_graph();
  fw.x_star = square_corners();

  SUBCASE("zero at the reference") {
    for (FormationMethod m :
         {FormationMethod::Distance, FormationMethod::Displacement}) {
      CHECK(formation_error(m, fw, fw.x_star).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SUBCASE("distance error ignores rotations of the reference") {
    std::vector<PlanarPoint> rotated;
    const auto r = rot(1.1);
    for (const auto& x : fw.x_star) rotated.push_back(r * x);
    CHECK(formation_error(FormationMethod::Distance, fw, rotated)
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }

  SUBCASE("displacement error ignores translations of the reference") {
    std::vector<PlanarPoint> shifted = fw.x_star;
    for (auto& x : shifted) x += PlanarPoint(1.0, 1.0);
    CHECK(formation_error(FormationMethod::Displacement, fw, shifted)
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
}

TEST_CASE("potential") {
  SUBCASE("zero error") {
    CHECK(potential(Eigen::VectorXd::Zero(3),
                    Eigen::VectorXd::Constant(3, 0.5)) == 0.0);
  }
  SUBCASE("scalar example and linearity in the stiffness") {
    Eigen::VectorXd e(1);
    e << 2.0;
    Eigen::VectorXd k(1);
    k << 0.5;
    CHECK(potential(e, k) == doctest::Approx(1.0));
    CHECK(potential(e, Eigen::VectorXd(2.0 * k)) ==
          doctest::Approx(2.0 * potential(e, k)));
  }
  SUBCASE("non-positive stiffness is rejected") {
    Eigen::VectorXd e(1), k(1);
    e << 1.0;
    k << 0.0;
    CHECK_THROWS_AS(potential(e, k), std::invalid_argument);
  }
}

TEST_CASE("potential gradient vs finite differences") {
  std::mt19937_64 rng(35);
  Framework fw;
  fw.graph = reference_graph();
  fw.x_star = square_corners();

  for (FormationMethod method :
       {FormationMethod::Distance, FormationMethod::Displacement}) {
    const int n_edges = static_cast<int>(fw.graph.edges.size());
    Eigen::VectorXd per_edge(n_edges);
    for (int k = 0; k < n_edges; ++k) per_edge(k) = unif(rng, 0.2, 2.0);
    const Eigen::VectorXd k_diag = expand_stiffness(method, per_edge, n_edges);

    for (int trial = 0; trial < 25; ++trial) {
      const auto pos = random_positions(rng, 4);
      const auto grad = potential_gradient(method, fw, pos, k_diag);

      // translation invariance: the per-vertex gradients sum to zero
      Eigen::Vector2d total = Eigen::Vector2d::Zero();
      for (const auto& gi : grad) total += gi;
      CHECK(total.cwiseAbs().maxCoeff() < 1e-12);

      const double h = 1e-6;
      for (int v = 0; v < 4; ++v) {
        for (int c = 0; c < 2; ++c) {
          auto plus = pos;
          auto minus = pos;
          plus[v](c) += h;
          minus[v](c) -= h;
          const double fd =
              (potential(formation_error(method, fw, plus), k_diag) -
               potential(formation_error(method, fw, minus), k_diag)) /
              (2.0 * h);
          CHECK(std::abs(grad[v](c) - fd) < 1e-6);
        }
      }
    }
  }

  SUBCASE("zero at the desired shape") {
    const Eigen::VectorXd k_diag = Eigen::VectorXd::Constant(5, 0.5);
    const auto grad = potential_gradient(FormationMethod::Distance, fw,
                                         fw.x_star, k_diag);
    for (const auto& gi : grad) CHECK(gi.norm() == 0.0);
  }
}

TEST_CASE("rigidity check") {
  Framework fw;
  fw.graph = reference_graph();
  fw.x_star = square_corners();

  SUBCASE("square plus diagonal is rigid") {
    const RigidityReport r = rigidity_check(fw);
    CHECK(r.rank == 5);
    CHECK(r.infinitesimally_rigid);
  }

  SUBCASE("plain square flexes") {
    Framework square = fw;
    square.graph.edges.pop_back();
    const RigidityReport r = rigidity_check(square);
    CHECK(r.rank == 4);
    CHECK_FALSE(r.infinitesimally_rigid);
  }

  SUBCASE("three collinear points are not rigid") {
    Framework collinear;
    collinear.graph.n_vertices = 3;
    collinear.graph.edges = {{0, 1}, {1, 2}, {2, 0}};
    collinear.x_star = {{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}};
    const RigidityReport r = rigidity_check(collinear);
    CHECK(r.rank < 3);
    CHECK_FALSE(r.infinitesimally_rigid);
  }

  SUBCASE("rank is invariant under rotation and translation") {
    Framework moved = fw;
    const auto r = rot(0.37);
    for (auto& x : moved.x_star) x = r * x + PlanarPoint(5.0, -3.0);
    CHECK(rigidity_check(moved).rank == 5);
  }

  SUBCASE("fewer than three vertices is rejected") {
    Framework tiny;
    tiny.graph.n_vertices = 2;
    tiny.graph.edges = {{0, 1}};
    tiny.x_star = {{0.0, 0.0}, {1.0, 0.0}};
    CHECK_THROWS_AS(rigidity_check(tiny), std::invalid_argument);
  }
}

TEST_CASE("duplicate edges collapse to one neighbor") {
  FormationGraph g;
  g.n_vertices = 3;
  g.edges = {{0, 1}, {1, 0}, {1, 2}};
  const auto n = g.neighbors(1);
  CHECK(n == std::vector<int>{0, 2});
}

TEST_CASE("incidence gram matrix is positive definite on acyclic graphs") {
  // path graph on four vertices
  FormationGraph path;
  path.n_vertices = 4;
  path.edges = {{0, 1}, {1, 2}, {2, 3}};
  const Eigen::MatrixXd b = incidence_matrix(path);
  const Eigen::MatrixXd gram = b.transpose() * b;
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
  CHECK(eig.eigenvalues().minCoeff() > 1e-9);
}
