#pragma once

// Samplers and brute-force oracles shared by the test binaries. Nothing here
// calls into the code under test except for constructing its value types.

#include "hypfin/geometry.hpp"

#include <Eigen/Core>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

namespace hypfin::testing {

/// Point at geodesic distance `radius` from the apex in direction `angle`
/// (d = 2), built from the closed form (cosh t, sinh t cos a, sinh t sin a).
inline geometry::HyperboloidPoint polar_point(double radius, double angle) {
  Eigen::VectorXd v(3);
  v << std::cosh(radius), std::sinh(radius) * std::cos(angle),
      std::sinh(radius) * std::sin(angle);
  return geometry::HyperboloidPoint(v);
}

/// Random point on H_d with geodesic radius uniform in [0, max_radius].
inline geometry::HyperboloidPoint random_point(std::mt19937_64 &rng, int dim,
                                               double max_radius) {
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd dir(dim);
  for (int k = 0; k < dim; ++k)
    dir[k] = gauss(rng);
  dir.normalize();
  const double t = max_radius * unit(rng);
  Eigen::VectorXd v(dim + 1);
  v[0] = std::cosh(t);
  v.tail(dim) = std::sinh(t) * dir;
  return geometry::HyperboloidPoint(v);
}

/// arcosh(x0 y0 - sum xk yk) written out term by term.
inline double componentwise_distance(const Eigen::VectorXd &x, const Eigen::VectorXd &y) {
  double u = x[0] * y[0];
  for (Eigen::Index k = 1; k < x.size(); ++k)
    u -= x[k] * y[k];
  return std::acosh(std::max(1.0, u));
}

inline Eigen::MatrixXd pairwise_hyperbolic(const std::vector<geometry::HyperboloidPoint> &pts) {
  const auto n = static_cast<Eigen::Index>(pts.size());
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      d(i, j) = d(j, i) = componentwise_distance(pts[static_cast<std::size_t>(i)].coords(),
                                                 pts[static_cast<std::size_t>(j)].coords());
  return d;
}

/// Shortest-path distances of the complete binary tree with `depth` edge
/// levels (2^(depth+1) - 1 nodes, heap numbering).
inline Eigen::MatrixXd binary_tree_distances(int depth) {
  const int n = (1 << (depth + 1)) - 1;
  auto level = [](int v) {
    int l = 0;
    while (v > 0) {
      v = (v - 1) / 2;
      ++l;
    }
    return l;
  };
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      int a = i;
      int b = j;
      int steps = 0;
      while (a != b) {
        if (level(a) >= level(b))
          a = (a - 1) / 2;
        else
          b = (b - 1) / 2;
        ++steps;
      }
      d(i, j) = d(j, i) = steps;
    }
  return d;
}

/// Von Mises sample (Best & Fisher, 1979).
inline double von_mises(std::mt19937_64 &rng, double mean, double kappa) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
  const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
  const double r = (1.0 + rho * rho) / (2.0 * rho);
  while (true) {
    const double u1 = unit(rng);
    const double u2 = unit(rng);
    const double u3 = unit(rng);
    const double z = std::cos(std::numbers::pi * u1);
    const double f = (1.0 + r * z) / (r + z);
    const double c = kappa * (r - f);
    if (c * (2.0 - c) - u2 > 0.0 || std::log(c / u2) + 1.0 - c >= 0.0) {
      const double theta = (u3 > 0.5 ? 1.0 : -1.0) * std::acos(f) + mean;
      return std::fmod(std::fmod(theta, 2.0 * std::numbers::pi) + 2.0 * std::numbers::pi,
                       2.0 * std::numbers::pi);
    }
  }
}

} // namespace hypfin::testing
