#include "hypfin/geometry.hpp"

#include "hypfin/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace hypfin::geometry {

namespace {

void require_same_dim(const HyperboloidPoint &x, const HyperboloidPoint &y) {
  if (x.dim() != y.dim())
    throw ContractViolation("hyperboloid points differ in dimension: " +
                            std::to_string(x.dim()) + " vs " +
                            std::to_string(y.dim()));
}

// Minkowski form on raw ambient vectors.
double minkowski(const Eigen::VectorXd &x, const Eigen::VectorXd &y) {
  const auto d = x.size() - 1;
  return x[0] * y[0] - x.tail(d).dot(y.tail(d));
}

} // namespace

HyperboloidPoint HyperboloidPoint::apex(int dim) {
  if (dim < 1)
    throw ContractViolation("hyperbolic dimension must be >= 1");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dim + 1);
  v[0] = 1.0;
  return HyperboloidPoint(std::move(v), Unchecked{});
}

HyperboloidPoint HyperboloidPoint::from_spatial(const Eigen::VectorXd &spatial) {
  if (spatial.size() < 1)
    throw ContractViolation("hyperbolic dimension must be >= 1");
  if (!spatial.allFinite())
    throw DomainError("non-finite spatial coordinates");
  Eigen::VectorXd v(spatial.size() + 1);
  v[0] = std::sqrt(1.0 + spatial.squaredNorm());
  v.tail(spatial.size()) = spatial;
  return HyperboloidPoint(std::move(v), Unchecked{});
}

HyperboloidPoint::HyperboloidPoint(Eigen::VectorXd coords)
    : coords_(std::move(coords)) {
  if (coords_.size() < 2)
    throw ContractViolation("hyperboloid point needs at least 2 coordinates");
  if (!coords_.allFinite())
    throw DomainError("non-finite hyperboloid coordinates");
  if (coords_[0] < 1.0 - kConstraintTolerance)
    throw DomainError("hyperboloid point must have x0 >= 1");
  if (std::abs(constraint_residual()) > kConstraintTolerance)
    throw DomainError("point violates hyperboloid constraint");
}

double HyperboloidPoint::constraint_residual() const {
  const double x0sq = coords_[0] * coords_[0];
  return (minkowski(coords_, coords_) - 1.0) / x0sq;
}

double minkowski_product(const HyperboloidPoint &x, const HyperboloidPoint &y) {
  require_same_dim(x, y);
  return minkowski(x.coords(), y.coords());
}

double hyperboloid_distance(const HyperboloidPoint &x, const HyperboloidPoint &y) {
  if (x.dim() != y.dim())
    throw ContractViolation("dimension mismatch");
  // 2 asinh(|x - y|_M / 2) equals arcosh(<x, y>) but stays accurate for
  // nearby points, where arcosh of a value close to 1 loses half the digits.
  const Eigen::VectorXd diff = x.coords() - y.coords();
  const double q = diff.tail(diff.size() - 1).squaredNorm() - diff[0] * diff[0];
  return 2.0 * std::asinh(0.5 * std::sqrt(std::max(0.0, q)));
}

PoincarePolar to_poincare(const HyperboloidPoint &x) {
  if (x.dim() != 2)
    throw ContractViolation("Poincare disc projection requires d = 2");
  const auto &c = x.coords();
  if (c[1] == 0.0 && c[2] == 0.0)
    return {0.0, 0.0};
  // (x0 - 1)/(x0 + 1) == |x_bar|^2 / (x0 + 1)^2 on the hyperboloid; the right
  // form keeps full precision near the apex.
  const double r = std::hypot(c[1], c[2]) / (c[0] + 1.0);
  double theta = std::atan2(c[2], c[1]);
  if (theta < 0.0)
    theta += 2.0 * std::numbers::pi;
  if (theta >= 2.0 * std::numbers::pi)
    theta = 0.0;
  return {r, theta};
}

HyperboloidPoint from_poincare(const PoincarePolar &p) {
  if (!(p.r >= 0.0 && p.r < 1.0))
    throw DomainError("Poincare radius must lie in [0, 1), got " +
                      std::to_string(p.r));
  const double one_minus_r2 = (1.0 - p.r) * (1.0 + p.r);
  const double rho = 2.0 * p.r / one_minus_r2;
  Eigen::VectorXd spatial(2);
  spatial << rho * std::cos(p.theta), rho * std::sin(p.theta);
  return HyperboloidPoint::from_spatial(spatial);
}

double poincare_distance(const PoincarePolar &p, const PoincarePolar &q) {
  const double dx = p.r * std::cos(p.theta) - q.r * std::cos(q.theta);
  const double dy = p.r * std::sin(p.theta) - q.r * std::sin(q.theta);
  const double chord2 = dx * dx + dy * dy;
  const double denom = (1.0 - p.r) * (1.0 + p.r) * (1.0 - q.r) * (1.0 + q.r);
  return std::acosh(1.0 + 2.0 * chord2 / denom);
}

HyperbolicCenter hyperbolic_mean(std::span<const HyperboloidPoint> points,
                                 std::span<const double> weights) {
  if (points.empty())
    throw ContractViolation("hyperbolic_mean of an empty point set");
  if (weights.size() != points.size())
    throw ContractViolation("hyperbolic_mean: one weight per point required");

  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0))
      throw ContractViolation("hyperbolic_mean: weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ContractViolation("hyperbolic_mean: weights must sum to 1");

  const int dim = points.front().dim();
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim + 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim() != dim)
      throw ContractViolation("hyperbolic_mean: mixed dimensions");
    mean += weights[i] * points[i].coords();
  }

  const double rho = std::sqrt(minkowski(mean, mean));
  // Convex combinations of upper-sheet points are timelike; re-lift the
  // spatial part to remove rounding in x0.
  HyperboloidPoint c = HyperboloidPoint::from_spatial(mean.tail(dim) / rho);
  return {std::move(c), rho};
}

Eigen::MatrixXd lorentz_boost(const HyperboloidPoint &c) {
  const int d = c.dim();
  const Eigen::VectorXd cbar = c.spatial();
  // sqrt(I + v v^T) = I + a v v^T with a = (sqrt(1 + |v|^2) - 1)/|v|^2,
  // written as 1/(sqrt(1 + |v|^2) + 1) to stay exact as |v| -> 0.
  const double a = 1.0 / (std::sqrt(1.0 + cbar.squaredNorm()) + 1.0);

  Eigen::MatrixXd t(d + 1, d + 1);
  t(0, 0) = c.x0();
  t.block(0, 1, 1, d) = cbar.transpose();
  t.block(1, 0, d, 1) = cbar;
  t.block(1, 1, d, d) =
      Eigen::MatrixXd::Identity(d, d) + a * cbar * cbar.transpose();
  return t;
}

HyperboloidPoint apply_boost(const Eigen::MatrixXd &boost,
                             const HyperboloidPoint &x) {
  if (boost.rows() != x.dim() + 1 || boost.cols() != x.dim() + 1)
    throw ContractViolation("boost matrix does not match point dimension");
  const Eigen::VectorXd y = boost * x.coords();
  return HyperboloidPoint::from_spatial(y.tail(x.dim()));
}

std::vector<HyperboloidPoint> center_points(std::span<const HyperboloidPoint> points,
                                            const HyperboloidPoint &center) {
  Eigen::VectorXd neg = center.coords();
  neg.tail(center.dim()) *= -1.0;
  const Eigen::MatrixXd t = lorentz_boost(HyperboloidPoint(neg));

  std::vector<HyperboloidPoint> out;
  out.reserve(points.size());
  for (const auto &p : points) {
    if (p.dim() != center.dim())
      throw ContractViolation("center_points: mixed dimensions");
    out.push_back(apply_boost(t, p));
  }
  return out;
}

} // namespace hypfin::geometry
