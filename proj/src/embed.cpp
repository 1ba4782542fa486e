#include "hypfin/embed.hpp"

#include "hypfin/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>
#include <random>

namespace hypfin::embed {

namespace {

using geometry::HyperboloidPoint;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kCoincidentProduct = 1e-12; // u - 1 below this counts as coincident
constexpr double kMaxArcoshSlope = 1e6;
constexpr double kCoincidentDistance = 1e-6;

std::string pair_label(Eigen::Index i, Eigen::Index j) {
  return "(" + std::to_string(i) + ", " + std::to_string(j) + ")";
}

double mean_dissimilarity(const DissimilarityMatrix &target) {
  const int n = target.size();
  return target.values().sum() / (static_cast<double>(n) * (n - 1));
}

void require_dim(const DissimilarityMatrix &target, int dim) {
  if (dim < 1 || dim > target.size() - 1)
    throw ContractViolation("embedding dimension must lie in [1, n - 1], got " +
                            std::to_string(dim));
}

VectorXd lifted_x0(const MatrixXd &spatial) {
  return (1.0 + spatial.rowwise().squaredNorm().array()).sqrt().matrix();
}

// Factor 1/(n(n-1)) of the stress functional applied to the ordered-pair
// sum; each unordered pair enters twice.
double pair_normalizer(int n) { return 2.0 / (static_cast<double>(n) * (n - 1)); }

struct HyperbolicModel {
  static MatrixXd distances(const MatrixXd &spatial) {
    const Eigen::Index n = spatial.rows();
    const VectorXd x0 = lifted_x0(spatial);
    MatrixXd dist = MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double u = x0[i] * x0[j] - spatial.row(i).dot(spatial.row(j));
        dist(i, j) = dist(j, i) = std::acosh(std::max(1.0, u));
      }
    return dist;
  }

  static MatrixXd gradient(const MatrixXd &spatial, const DissimilarityMatrix &target) {
    const Eigen::Index n = spatial.rows();
    const VectorXd x0 = lifted_x0(spatial);
    MatrixXd grad = MatrixXd::Zero(n, spatial.cols());
    double sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const double u = x0[i] * x0[j] - spatial.row(i).dot(spatial.row(j));
        double dist;
        double slope;
        if (u < 1.0 + kCoincidentProduct) {
          dist = kCoincidentDistance;
          slope = kMaxArcoshSlope;
        } else {
          dist = std::acosh(u);
          slope = std::min(kMaxArcoshSlope, 1.0 / std::sqrt((u - 1.0) * (u + 1.0)));
        }
        const double resid = dist - target(static_cast<int>(i), static_cast<int>(j));
        sq += resid * resid;
        const double c = resid * slope;
        // du/dx_i = (x0_j / x0_i) x_i - x_j, and symmetrically for j.
        grad.row(i) += c * ((x0[j] / x0[i]) * spatial.row(i) - spatial.row(j));
        grad.row(j) += c * ((x0[i] / x0[j]) * spatial.row(j) - spatial.row(i));
        if (!std::isfinite(c))
          throw NumericalError("non-finite stress gradient at pair " + pair_label(i, j));
      }
    return scale_gradient(grad, sq, static_cast<int>(n));
  }

  // d Stress = d Q / (2 sqrt Q), Q = normalizer * sum_{i<j} resid^2.
  static MatrixXd scale_gradient(MatrixXd grad, double sq, int n) {
    const double q = pair_normalizer(n) * sq;
    if (q <= 0.0)
      return MatrixXd::Zero(grad.rows(), grad.cols());
    return grad * (pair_normalizer(n) / std::sqrt(q));
  }
};

struct EuclideanModel {
  static MatrixXd distances(const MatrixXd &points) {
    const Eigen::Index n = points.rows();
    MatrixXd dist = MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j)
        dist(i, j) = dist(j, i) = (points.row(i) - points.row(j)).norm();
    return dist;
  }

  static MatrixXd gradient(const MatrixXd &points, const DissimilarityMatrix &target) {
    const Eigen::Index n = points.rows();
    MatrixXd grad = MatrixXd::Zero(n, points.cols());
    double sq = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const Eigen::RowVectorXd diff = points.row(i) - points.row(j);
        const double dist = diff.norm();
        const double resid = dist - target(static_cast<int>(i), static_cast<int>(j));
        sq += resid * resid;
        if (dist < kCoincidentDistance)
          continue;
        const double c = resid / dist;
        grad.row(i) += c * diff;
        grad.row(j) -= c * diff;
        if (!std::isfinite(c))
          throw NumericalError("non-finite stress gradient at pair " + pair_label(i, j));
      }
    return HyperbolicModel::scale_gradient(grad, sq, static_cast<int>(n));
  }
};

struct DescentResult {
  MatrixXd params;
  int iterations = 0;
  bool converged = false;
};

template <class Model>
DescentResult run_descent(MatrixXd params, const DissimilarityMatrix &target,
                          const DescentOptions &opts, DescentTrace *trace) {
  if (opts.max_iter < 0)
    throw ContractViolation("max_iter must be nonnegative");
  if (!(opts.tolerance >= 0.0) || !(opts.initial_step > 0.0))
    throw ContractViolation("descent tolerance must be >= 0 and initial step > 0");

  double current = stress_from_distances(Model::distances(params), target);
  if (trace)
    trace->accepted.assign(1, current);

  MatrixXd grad = Model::gradient(params, target);
  double grad_max = grad.rowwise().norm().maxCoeff();
  double step = opts.initial_step * mean_dissimilarity(target) / std::max(grad_max, 1e-300);

  DescentResult out;
  while (out.iterations < opts.max_iter) {
    if (current == 0.0 || grad_max == 0.0) {
      out.converged = true;
      break;
    }
    ++out.iterations;
    MatrixXd candidate = params - step * grad;
    const double trial = stress_from_distances(Model::distances(candidate), target);
    if (std::isfinite(trial) && trial < current) {
      const double relative = (current - trial) / current;
      params = std::move(candidate);
      current = trial;
      if (trace)
        trace->accepted.push_back(current);
      step *= 1.05;
      if (relative < opts.tolerance) {
        out.converged = true;
        break;
      }
      grad = Model::gradient(params, target);
      grad_max = grad.rowwise().norm().maxCoeff();
    } else {
      step *= 0.5;
      // No representable move left along this gradient.
      const double scale = 1.0 + params.cwiseAbs().maxCoeff();
      if (step * grad_max < std::numeric_limits<double>::epsilon() * scale) {
        out.converged = true;
        break;
      }
    }
  }
  out.params = std::move(params);
  return out;
}

MatrixXd spatial_matrix(std::span<const HyperboloidPoint> points) {
  if (points.empty())
    return {};
  const int d = points.front().dim();
  MatrixXd spatial(static_cast<Eigen::Index>(points.size()), d);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim() != d)
      throw ContractViolation("embedding points differ in dimension");
    spatial.row(static_cast<Eigen::Index>(i)) = points[i].spatial().transpose();
  }
  return spatial;
}

std::vector<HyperboloidPoint> lift_rows(const MatrixXd &spatial) {
  std::vector<HyperboloidPoint> points;
  points.reserve(static_cast<std::size_t>(spatial.rows()));
  for (Eigen::Index i = 0; i < spatial.rows(); ++i)
    points.push_back(HyperboloidPoint::from_spatial(spatial.row(i).transpose()));
  return points;
}

void require_points(std::size_t count, const DissimilarityMatrix &target) {
  if (count != static_cast<std::size_t>(target.size()))
    throw ContractViolation("embedding has " + std::to_string(count) +
                            " points but the dissimilarity matrix has " +
                            std::to_string(target.size()));
}

} // namespace

DissimilarityMatrix::DissimilarityMatrix(Eigen::MatrixXd values)
    : DissimilarityMatrix({}, std::move(values)) {}

DissimilarityMatrix::DissimilarityMatrix(std::vector<std::string> labels,
                                         Eigen::MatrixXd values)
    : labels_(std::move(labels)), values_(std::move(values)) {
  const Eigen::Index n = values_.rows();
  if (values_.cols() != n)
    throw ContractViolation("dissimilarity matrix must be square");
  if (n < 3)
    throw ContractViolation("dissimilarity matrix needs n >= 3");
  if (!values_.allFinite())
    throw ContractViolation("dissimilarity matrix has non-finite entries");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (values_(i, i) != 0.0)
      throw ContractViolation("dissimilarity matrix must have a zero diagonal");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (values_(i, j) != values_(j, i))
        throw ContractViolation("dissimilarity matrix must be exactly symmetric");
      if (values_(i, j) < 0.0)
        throw ContractViolation("dissimilarities must be nonnegative");
    }
  }
  if (labels_.empty())
    for (Eigen::Index i = 0; i < n; ++i)
      labels_.push_back(std::to_string(i));
  if (labels_.size() != static_cast<std::size_t>(n))
    throw ContractViolation("one label per row of the dissimilarity matrix required");
}

double stress_from_distances(const MatrixXd &model, const DissimilarityMatrix &target) {
  const int n = target.size();
  if (model.rows() != n || model.cols() != n)
    throw ContractViolation("model distance matrix does not match target size");
  double sq = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double r = target(i, j) - model(i, j);
      sq += r * r;
    }
  return std::sqrt(pair_normalizer(n) * sq);
}

double stress(std::span<const HyperboloidPoint> points, const DissimilarityMatrix &target) {
  require_points(points.size(), target);
  const int n = target.size();
  MatrixXd dist = MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      dist(i, j) = dist(j, i) = geometry::hyperboloid_distance(points[i], points[j]);
  return stress_from_distances(dist, target);
}

double euclidean_stress(const MatrixXd &points, const DissimilarityMatrix &target) {
  require_points(static_cast<std::size_t>(points.rows()), target);
  return stress_from_distances(EuclideanModel::distances(points), target);
}

MatrixXd hyperbolic_stress_gradient(const MatrixXd &spatial, const DissimilarityMatrix &target) {
  require_points(static_cast<std::size_t>(spatial.rows()), target);
  return HyperbolicModel::gradient(spatial, target);
}

MatrixXd euclidean_stress_gradient(const MatrixXd &points, const DissimilarityMatrix &target) {
  require_points(static_cast<std::size_t>(points.rows()), target);
  return EuclideanModel::gradient(points, target);
}

EuclideanEmbedding classical_mds(const DissimilarityMatrix &target, int dim) {
  require_dim(target, dim);
  const Eigen::Index n = target.size();
  const MatrixXd sq = target.values().array().square().matrix();
  const MatrixXd centering =
      MatrixXd::Identity(n, n) - MatrixXd::Constant(n, n, 1.0 / static_cast<double>(n));
  MatrixXd b = -0.5 * centering * sq * centering;
  b = 0.5 * (b + b.transpose());

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(b);
  if (eig.info() != Eigen::Success)
    throw NumericalError("classical MDS: eigendecomposition failed");

  EuclideanEmbedding out;
  out.points = MatrixXd::Zero(n, dim);
  int truncated = 0;
  for (int k = 0; k < dim; ++k) {
    const Eigen::Index col = n - 1 - k; // eigenvalues ascend
    const double lambda = eig.eigenvalues()[col];
    if (lambda <= 0.0) {
      ++truncated;
      continue;
    }
    out.points.col(k) = std::sqrt(lambda) * eig.eigenvectors().col(col);
  }
  if (truncated > 0)
    out.warnings.push_back("classical MDS: " + std::to_string(truncated) +
                           " non-positive eigenvalue(s) truncated to zero");
  out.stress = euclidean_stress(out.points, target);
  out.converged = true;
  return out;
}

EuclideanEmbedding embed_euclidean(const DissimilarityMatrix &target, int dim,
                                   const DescentOptions &opts, bool refine) {
  EuclideanEmbedding init = classical_mds(target, dim);
  if (!refine)
    return init;
  return descend_stress_euclidean(init, target, opts);
}

HyperboloidEmbedding spectral_init_hyperbolic(const DissimilarityMatrix &target, int dim) {
  require_dim(target, dim);
  const Eigen::Index n = target.size();
  MatrixXd gram = target.values().array().cosh().matrix();
  gram.diagonal().setOnes();

  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
  if (eig.info() != Eigen::Success)
    throw NumericalError("hyperbolic spectral init: eigendecomposition failed");
  const VectorXd &lambda = eig.eigenvalues();
  const MatrixXd &vectors = eig.eigenvectors();

  HyperboloidEmbedding out;

  // Time-like coordinate from the Perron vector of the positive matrix cosh(D).
  VectorXd lead = vectors.col(n - 1);
  if (lead.sum() < 0.0)
    lead = -lead;
  const VectorXd x0 = (std::sqrt(lambda[n - 1]) * lead).cwiseMax(1.0);

  MatrixXd spatial = MatrixXd::Zero(n, dim);
  int missing = 0;
  for (int k = 0; k < dim; ++k) {
    if (lambda[k] >= 0.0) {
      ++missing;
      continue;
    }
    spatial.col(k) = std::sqrt(-lambda[k]) * vectors.col(k);
  }
  if (missing > 0)
    out.warnings.push_back("hyperbolic spectral init: only " + std::to_string(dim - missing) +
                           " negative eigenvalue(s); remaining axes set to zero");

  // Radially rescale each row onto the hyperboloid at height x0.
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = spatial.row(i).norm();
    const double radius = std::sqrt((x0[i] - 1.0) * (x0[i] + 1.0));
    if (norm > 0.0)
      spatial.row(i) *= radius / norm;
  }

  out.points = lift_rows(spatial);
  out.stress = stress(out.points, target);
  return out;
}

HyperboloidEmbedding descend_stress(const HyperboloidEmbedding &init,
                                    const DissimilarityMatrix &target,
                                    const DescentOptions &opts, DescentTrace *trace) {
  if (opts.curvature != -1.0)
    throw ContractViolation("only curvature -1 is supported");
  require_points(init.points.size(), target);

  DescentResult run =
      run_descent<HyperbolicModel>(spatial_matrix(init.points), target, opts, trace);

  HyperboloidEmbedding out;
  out.points = lift_rows(run.params);
  out.stress = stress(out.points, target);
  out.iterations = run.iterations;
  out.converged = run.converged;
  out.warnings = init.warnings;
  return out;
}

EuclideanEmbedding descend_stress_euclidean(const EuclideanEmbedding &init,
                                            const DissimilarityMatrix &target,
                                            const DescentOptions &opts, DescentTrace *trace) {
  require_points(static_cast<std::size_t>(init.points.rows()), target);
  DescentResult run = run_descent<EuclideanModel>(init.points, target, opts, trace);

  EuclideanEmbedding out;
  out.points = std::move(run.params);
  out.stress = euclidean_stress(out.points, target);
  out.iterations = run.iterations;
  out.converged = run.converged;
  out.warnings = init.warnings;
  return out;
}

HyperboloidEmbedding embed_hyperbolic(const DissimilarityMatrix &target, int dim,
                                      const DescentOptions &opts) {
  if (opts.restarts < 1)
    throw ContractViolation("restarts must be >= 1");
  const HyperboloidEmbedding init = spectral_init_hyperbolic(target, dim);
  HyperboloidEmbedding best = descend_stress(init, target, opts);

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> noise(0.0, opts.perturbation * mean_dissimilarity(target));
  const MatrixXd base = spatial_matrix(init.points);
  for (int k = 1; k < opts.restarts; ++k) {
    MatrixXd perturbed = base;
    for (Eigen::Index i = 0; i < perturbed.rows(); ++i)
      for (Eigen::Index c = 0; c < perturbed.cols(); ++c)
        perturbed(i, c) += noise(rng);
    HyperboloidEmbedding start;
    start.points = lift_rows(perturbed);
    start.warnings = init.warnings;
    HyperboloidEmbedding candidate = descend_stress(start, target, opts);
    if (candidate.stress < best.stress)
      best = std::move(candidate);
  }
  return best;
}

} // namespace hypfin::embed
