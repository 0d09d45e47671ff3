#include <cmath>
#include <random>

#include "doctest.h"
#include "flexform/kinematics.hpp"

using namespace flexform;

namespace {

ManipulatorConfig make_config(ActuationType actuation,
                              const Eigen::Vector2d& base = {0.0, 0.0},
                              double beta = 0.0) {
  ManipulatorConfig config;
  config.params = make_mech_params({0.7223, 0.0082, 0.3, 0.1184},
                                   {1.2963, 0.0358, 0.5, 0.2357});
  config.stiffness = {5.0, 5.0};
  config.actuation = actuation;
  config.base = base;
  config.beta = beta;
  return config;
}

double unif(std::mt19937_64& rng, double lo, double hi) {
  return lo + (hi - lo) * static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

ObservedNeighbor observe(const ManipulatorConfig& config,
                         const Eigen::Vector2d& q) {
  ObservedNeighbor obs;
  obs.end = forward_kinematics(config, q);
  obs.mid = mid_joint(config, q(0));
  obs.base = config.base;
  obs.beta = config.beta;
  obs.length1 = config.params.link1.length;
  obs.length2 = config.params.link2.length;
  obs.actuation = config.actuation;
  return obs;
}

}  // namespace

TEST_CASE("forward kinematics") {
  const auto fa = make_config(ActuationType::FullyActuated);

  CHECK((forward_kinematics(fa, {0.0, 0.0}) - Eigen::Vector2d(0.0, 0.8))
            .norm() < 1e-15);
  CHECK((forward_kinematics(fa, {0.0, M_PI}) - Eigen::Vector2d(0.0, -0.2))
            .norm() < 1e-15);

  const auto shifted = make_config(ActuationType::FullyActuated, {3.0, 0.0});
  const PlanarPoint p = forward_kinematics(shifted, {M_PI / 3.0, -M_PI / 3.0});
  // frozen from an independent trig evaluation
  CHECK(p.x() == doctest::Approx(2.7401923788646685).epsilon(1e-13));
  CHECK(p.y() == doctest::Approx(0.65).epsilon(1e-13));
}

TEST_CASE("mid joint") {
  const auto fa = make_config(ActuationType::FullyActuated);
  CHECK((mid_joint(fa, 0.0) - Eigen::Vector2d(0.0, 0.3)).norm() < 1e-15);

  const auto rotated =
      make_config(ActuationType::FullyActuated, {0.0, 0.0}, M_PI / 2.0);
  CHECK((mid_joint(rotated, 0.0) - Eigen::Vector2d(-0.3, 0.0)).norm() <
        1e-15);

  // the outer link always has length L2
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector2d q(unif(rng, -M_PI, M_PI), unif(rng, -M_PI, M_PI));
    const double beta = unif(rng, -M_PI, M_PI);
    const auto c = make_config(ActuationType::FullyActuated, {1.0, -2.0}, beta);
    CHECK(std::abs((forward_kinematics(c, q) - mid_joint(c, q(0))).norm() -
                   0.5) < 1e-12);
  }
}

TEST_CASE("jacobian") {
  SUBCASE("finite differences on random configurations") {
    std::mt19937_64 rng(5);
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Eigen::Vector2d q(unif(rng, -M_PI, M_PI), unif(rng, -M_PI, M_PI));
      const double beta = unif(rng, -M_PI, M_PI);
      const auto c =
          make_config(ActuationType::FullyActuated, {0.4, 0.7}, beta);
      const Eigen::Matrix2d j = jacobian(c, q);
      const double h = 1e-6;
      for (int col = 0; col < 2; ++col) {
        Eigen::Vector2d qp = q, qm = q;
        qp(col) += h;
        qm(col) -= h;
        const Eigen::Vector2d fd =
            (forward_kinematics(c, qp) - forward_kinematics(c, qm)) /
            (2.0 * h);
        worst = std::max(worst, (fd - j.col(col)).cwiseAbs().maxCoeff());
      }
    }
    CHECK(worst < 1e-6);
  }

  SUBCASE("determinant is L1 L2 sin(q2), singular at q2 = 0") {
    const auto c = make_config(ActuationType::FullyActuated);
    std::mt19937_64 rng(6);
    for (int i = 0; i < 50; ++i) {
      const Eigen::Vector2d q(unif(rng, -M_PI, M_PI), unif(rng, -M_PI, M_PI));
      const double det = jacobian(c, q).determinant();
      CHECK(det == doctest::Approx(0.15 * std::sin(q(1))).epsilon(1e-12));
    }
    CHECK(std::abs(jacobian(c, {0.7, 0.0}).determinant()) < 1e-15);
  }

  SUBCASE("hand evaluation at q = (0, pi/2)") {
    const auto c = make_config(ActuationType::FullyActuated);
    const Eigen::Matrix2d j = jacobian(c, {0.0, M_PI / 2.0});
    CHECK(j(0, 0) == doctest::Approx(-0.3).epsilon(1e-15));
    CHECK(std::abs(j(0, 1)) < 1e-15);
    CHECK(j(1, 0) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(j(1, 1) == doctest::Approx(-0.5).epsilon(1e-15));
  }
}

TEST_CASE("virtual end effector") {
  std::mt19937_64 rng(7);

  SUBCASE("fully actuated: identical to the forward kinematics") {
    const auto c = make_config(ActuationType::FullyActuated, {1.0, 2.0}, 0.3);
    for (int i = 0; i < 20; ++i) {
      const Eigen::Vector2d q(unif(rng, -M_PI, M_PI), unif(rng, -M_PI, M_PI));
      CHECK((virtual_end_effector(c, q) - forward_kinematics(c, q)).norm() ==
            0.0);
    }
  }

  SUBCASE("AP ignores the passive angle") {
    const auto c = make_config(ActuationType::AP);
    CHECK((virtual_end_effector(c, {0.0, 0.7}) - Eigen::Vector2d(0.0, 0.8))
              .norm() < 1e-15);
  }

  SUBCASE("PA ignores the passive angle") {
    const auto c = make_config(ActuationType::PA);
    CHECK((virtual_end_effector(c, {0.7, 0.0}) - Eigen::Vector2d(0.0, 0.8))
              .norm() < 1e-15);
  }

  SUBCASE("equals the true end effector when the passive angle is zero") {
    const auto ap = make_config(ActuationType::AP, {0.5, 0.5}, 0.2);
    const auto pa = make_config(ActuationType::PA, {0.5, 0.5}, 0.2);
    for (int i = 0; i < 20; ++i) {
      const double a = unif(rng, -M_PI, M_PI);
      CHECK((virtual_end_effector(ap, {a, 0.0}) -
             forward_kinematics(ap, {a, 0.0}))
                .norm() < 1e-15);
      CHECK((virtual_end_effector(pa, {0.0, a}) -
             forward_kinematics(pa, {0.0, a}))
                .norm() < 1e-15);
    }
  }
}

TEST_CASE("relative segment angle") {
  // a = (1,0), b = (0,1) turns a quarter circle counterclockwise
  CHECK(relative_segment_angle({1.0, 1.0}, {1.0, 0.0}, {0.0, 0.0}) ==
        doctest::Approx(M_PI / 2.0));
  // collinear continuation has angle zero
  CHECK(relative_segment_angle({2.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}) == 0.0);
  // coincident points are rejected
  CHECK_THROWS_AS(relative_segment_angle({1.0, 0.0}, {1.0, 0.0}, {0.0, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("virtual position recovered from observables") {
  std::mt19937_64 rng(8);

  SUBCASE("AP round trip") {
    const auto c = make_config(ActuationType::AP, {0.7, -0.3}, 0.4);
    for (int i = 0; i < 100; ++i) {
      const Eigen::Vector2d q(unif(rng, -M_PI, M_PI), unif(rng, -M_PI, M_PI));
      const PlanarPoint direct = virtual_end_effector(c, q);
      const PlanarPoint recovered = virtual_from_observables(observe(c, q));
      CHECK((direct - recovered).norm() < 1e-10);
    }
  }

  SUBCASE("PA round trip, including shifted passive angles") {
    const auto c = make_config(ActuationType::PA, {-0.2, 1.4}, -0.8);
    for (int i = 0; i < 100; ++i) {
      Eigen::Vector2d q(unif(rng, -M_PI, M_PI), unif(rng, -M_PI, M_PI));
      // keep away from the folded geometry where mid and end coincide
      if (std::abs(std::remainder(q(1), M_PI)) < 1e-3) continue;
      const auto obs = observe(c, q);
      CHECK(std::abs(relative_segment_angle(obs.end, obs.mid, obs.base)) <=
            M_PI);
      const PlanarPoint direct = virtual_end_effector(c, q);
      CHECK((direct - virtual_from_observables(observe(c, q))).norm() <
            1e-10);

      // adding 2 pi k to the true angle leaves the recovery unchanged
      Eigen::Vector2d q_shift = q;
      q_shift(1) += 2.0 * M_PI;
      const PlanarPoint shifted =
          virtual_from_observables(observe(c, q_shift));
      CHECK((direct - shifted).norm() < 1e-9);
    }
  }

  SUBCASE("fully actuated passes the end position through") {
    const auto c = make_config(ActuationType::FullyActuated, {0.1, 0.2}, 0.0);
    const Eigen::Vector2d q(0.3, -0.5);
    CHECK((virtual_from_observables(observe(c, q)) -
           forward_kinematics(c, q))
              .norm() == 0.0);
  }

  SUBCASE("inconsistent observation is rejected") {
    const auto c = make_config(ActuationType::AP);
    ObservedNeighbor obs = observe(c, {0.3, 0.4});
    obs.mid += PlanarPoint(1e-6, 0.0);
    CHECK_THROWS_AS(virtual_from_observables(obs), std::invalid_argument);
  }
}

TEST_CASE("reduced jacobian") {
  SUBCASE("AP direction and radius") {
    const auto c = make_config(ActuationType::AP);
    const ReducedJacobian rj = reduced_jacobian(c, 0.0);
    CHECK(rj.radius == doctest::Approx(0.8));
    CHECK((rj.direction - Eigen::Vector2d(-1.0, 0.0)).norm() < 1e-15);
  }

  SUBCASE("PA with beta = pi/2 at angle pi/2") {
    const auto c = make_config(ActuationType::PA, {0.0, 0.0}, M_PI / 2.0);
    const ReducedJacobian rj = reduced_jacobian(c, M_PI / 2.0);
    CHECK(rj.radius == doctest::Approx(0.5));
    CHECK(rj.direction.x() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(rj.direction.y()) < 1e-12);
  }

  SUBCASE("matches the finite difference of the virtual end effector") {
    std::mt19937_64 rng(9);
    for (ActuationType actuation : {ActuationType::AP, ActuationType::PA}) {
      const auto c = make_config(actuation, {0.3, 0.6}, 0.25);
      const int active = actuation == ActuationType::AP ? 0 : 1;
      for (int i = 0; i < 50; ++i) {
        const double a = unif(rng, -M_PI, M_PI);
        const ReducedJacobian rj = reduced_jacobian(c, a);
        const double h = 1e-6;
        Eigen::Vector2d qp = Eigen::Vector2d::Zero();
        Eigen::Vector2d qm = Eigen::Vector2d::Zero();
        qp(active) = a + h;
        qm(active) = a - h;
        const Eigen::Vector2d fd =
            (virtual_end_effector(c, qp) - virtual_end_effector(c, qm)) /
            (2.0 * h);
        CHECK((fd - rj.radius * rj.direction).cwiseAbs().maxCoeff() < 1e-6);
      }
    }
  }

  SUBCASE("rejected for fully actuated arms") {
    const auto c = make_config(ActuationType::FullyActuated);
    CHECK_THROWS_AS(reduced_jacobian(c, 0.0), std::invalid_argument);
  }
}
