#pragma once

// Stress-minimizing embeddings of a dissimilarity matrix into Euclidean space
// (classical MDS baseline) and into the hyperboloid model of H_d.
//
// Stress(x) = sqrt( 1/(n(n-1)) * sum_{i != j} (d_ij - dist(x_i, x_j))^2 )
//
// Both embedders finish with the same first-order descent on this functional
// so that reported stresses are comparable.

#include "hypfin/geometry.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hypfin::embed {

/// Symmetric, zero-diagonal, nonnegative matrix of target distances, n >= 3.
class DissimilarityMatrix {
public:
  explicit DissimilarityMatrix(Eigen::MatrixXd values);
  DissimilarityMatrix(std::vector<std::string> labels, Eigen::MatrixXd values);

  int size() const { return static_cast<int>(values_.rows()); }
  const Eigen::MatrixXd &values() const { return values_; }
  const std::vector<std::string> &labels() const { return labels_; }
  double operator()(int i, int j) const { return values_(i, j); }

private:
  std::vector<std::string> labels_;
  Eigen::MatrixXd values_;
};

struct DescentOptions {
  int max_iter = 2000;
  /// Stop once an accepted step lowers stress by less than this fraction.
  double tolerance = 1e-8;
  /// Largest displacement of the first trial step, as a fraction of the mean
  /// dissimilarity.
  double initial_step = 0.1;
  /// Only -1 is supported.
  double curvature = -1.0;
  /// Number of descents; restart k > 0 starts from a perturbed spectral init.
  int restarts = 1;
  std::uint64_t seed = 0;
  /// Std. deviation of restart perturbations, relative to the mean dissimilarity.
  double perturbation = 0.1;
};

/// Stress after every accepted step, starting with the initial value.
struct DescentTrace {
  std::vector<double> accepted;
};

struct EuclideanEmbedding {
  Eigen::MatrixXd points; ///< n x dim
  double stress = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

struct HyperboloidEmbedding {
  std::vector<geometry::HyperboloidPoint> points;
  double stress = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> warnings;
};

/// Stress of an embedding given its pairwise model distances.
double stress_from_distances(const Eigen::MatrixXd &model, const DissimilarityMatrix &target);

double stress(std::span<const geometry::HyperboloidPoint> points,
              const DissimilarityMatrix &target);

/// Rows of `points` are Euclidean coordinates.
double euclidean_stress(const Eigen::MatrixXd &points, const DissimilarityMatrix &target);

/// Gradient of Stress with respect to the spatial coordinates (rows) of
/// hyperboloid points parameterized as x0 = sqrt(1 + |x_bar|^2).
/// Near-coincident pairs (Minkowski product below 1 + 1e-12) contribute with
/// the arcosh derivative clamped to 1e6 and distance 1e-6.
Eigen::MatrixXd hyperbolic_stress_gradient(const Eigen::MatrixXd &spatial,
                                           const DissimilarityMatrix &target);

/// Gradient of Stress with respect to Euclidean coordinates (rows).
Eigen::MatrixXd euclidean_stress_gradient(const Eigen::MatrixXd &points,
                                          const DissimilarityMatrix &target);

/// Classical (Torgerson) MDS: top eigenpairs of -1/2 J D^2 J.
EuclideanEmbedding classical_mds(const DissimilarityMatrix &target, int dim);

/// Classical MDS, optionally refined by stress descent.
EuclideanEmbedding embed_euclidean(const DissimilarityMatrix &target, int dim,
                                   const DescentOptions &opts = {}, bool refine = true);

/// Strain-based initialization from the spectrum of cosh(D).
HyperboloidEmbedding spectral_init_hyperbolic(const DissimilarityMatrix &target, int dim);

HyperboloidEmbedding descend_stress(const HyperboloidEmbedding &init,
                                    const DissimilarityMatrix &target,
                                    const DescentOptions &opts = {},
                                    DescentTrace *trace = nullptr);

EuclideanEmbedding descend_stress_euclidean(const EuclideanEmbedding &init,
                                            const DissimilarityMatrix &target,
                                            const DescentOptions &opts = {},
                                            DescentTrace *trace = nullptr);

/// Spectral initialization followed by descent; with restarts > 1 the best
/// of the seeded perturbed runs is returned.
HyperboloidEmbedding embed_hyperbolic(const DissimilarityMatrix &target, int dim,
                                      const DescentOptions &opts = {});

} // namespace hypfin::embed
