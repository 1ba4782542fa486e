#pragma once

// Hyperboloid model of hyperbolic space H_d (curvature -1), Poincare disc
// projection for d = 2, weighted hyperbolic mean and Lorentz-boost centering.

#include <Eigen/Core>

#include <span>
#include <vector>

namespace hypfin::geometry {

/// Relative tolerance on x0^2 - |x_bar|^2 = 1 accepted by HyperboloidPoint.
inline constexpr double kConstraintTolerance = 1e-9;

/// A point on the upper sheet x0^2 - x1^2 - ... - xd^2 = 1, x0 >= 1.
class HyperboloidPoint {
public:
  /// Apex (1, 0, ..., 0) of H_d.
  static HyperboloidPoint apex(int dim);

  /// Lifts spatial coordinates onto the hyperboloid, x0 = sqrt(1 + |x_bar|^2).
  static HyperboloidPoint from_spatial(const Eigen::VectorXd &spatial);

  /// Validates the full ambient vector; throws DomainError if it is not on
  /// the upper sheet within kConstraintTolerance.
  explicit HyperboloidPoint(Eigen::VectorXd coords);

  int dim() const { return static_cast<int>(coords_.size()) - 1; }
  double x0() const { return coords_[0]; }
  const Eigen::VectorXd &coords() const { return coords_; }
  Eigen::VectorXd spatial() const { return coords_.tail(coords_.size() - 1); }

  /// x0^2 - |x_bar|^2 - 1 divided by x0^2.
  double constraint_residual() const;

private:
  struct Unchecked {};
  HyperboloidPoint(Eigen::VectorXd coords, Unchecked) : coords_(std::move(coords)) {}

  Eigen::VectorXd coords_;
};

/// Polar coordinates in the open unit disc; r in [0, 1), theta in [0, 2*pi).
struct PoincarePolar {
  double r = 0.0;
  double theta = 0.0;
};

struct HyperbolicCenter {
  HyperboloidPoint mean;
  double resultant_length;
};

/// x0*y0 - x1*y1 - ... - xd*yd.
double minkowski_product(const HyperboloidPoint &x, const HyperboloidPoint &y);

/// arcosh of the Minkowski product, argument clamped to [1, inf).
double hyperboloid_distance(const HyperboloidPoint &x, const HyperboloidPoint &y);

/// Stereographic projection H_2 -> unit disc. The apex maps to (0, 0).
PoincarePolar to_poincare(const HyperboloidPoint &x);

/// Inverse of to_poincare. Throws DomainError unless 0 <= r < 1.
HyperboloidPoint from_poincare(const PoincarePolar &p);

/// Geodesic distance in the disc,
/// arcosh(1 + 2 |p - q|^2 / ((1 - r1^2)(1 - r2^2))).
double poincare_distance(const PoincarePolar &p, const PoincarePolar &q);

/// Weighted hyperbolic mean: the weighted Euclidean mean x_bar of the ambient
/// vectors, normalized by its Minkowski norm rho. Weights must be nonnegative
/// and sum to one within 1e-12.
HyperbolicCenter hyperbolic_mean(std::span<const HyperboloidPoint> points,
                                 std::span<const double> weights);

/// Lorentz boost T_c that maps the apex to c:
///   [[c0, c_bar^T], [c_bar, sqrt(I + c_bar c_bar^T)]].
Eigen::MatrixXd lorentz_boost(const HyperboloidPoint &c);

/// Applies a boost matrix to a point. The result is re-lifted from its
/// spatial part so the constraint holds to rounding.
HyperboloidPoint apply_boost(const Eigen::MatrixXd &boost,
                             const HyperboloidPoint &x);

/// Translates the cloud so that `center` moves to the apex (applies T_{-c}
/// with -c = (c0, -c_bar)).
std::vector<HyperboloidPoint> center_points(std::span<const HyperboloidPoint> points,
                                            const HyperboloidPoint &center);

} // namespace hypfin::geometry
