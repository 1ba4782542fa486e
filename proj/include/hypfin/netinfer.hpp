#pragma once

// One-mode projection of a bank x asset portfolio matrix onto a weighted bank
// network via liquidity-weighted portfolio overlap (LWPO).

#include <Eigen/Core>

#include <array>
#include <string>
#include <vector>

namespace hypfin::netinfer {

/// Holdings in EUR: rows are banks, columns are asset classes.
struct PortfolioMatrix {
  std::vector<std::string> banks;
  std::vector<std::string> assets;
  Eigen::MatrixXd values;

  /// Throws ContractViolation on shape mismatch, n < 2, m < 1, negative or
  /// non-finite entries, or duplicate identifiers.
  void validate() const;
};

/// Which entries of L participate in the normalizing maximum.
enum class NormMode {
  OffDiagonal, ///< strongest inter-bank link gets weight exactly 1
  All,         ///< maximum over every entry, including self-overlap
};

const char *to_string(NormMode mode);
NormMode parse_norm_mode(const std::string &text);

/// Column sums d_k = sum_i P_ik.
Eigen::VectorXd market_depths(const PortfolioMatrix &portfolio);

/// Drops asset columns nobody holds. Returns the removed identifiers.
std::vector<std::string> drop_zero_depth_assets(PortfolioMatrix &portfolio);

/// L = P D^-1 P^T, symmetrized by averaging with its transpose.
/// Throws ContractViolation if any depth is <= 0.
Eigen::MatrixXd lwpo(const Eigen::MatrixXd &holdings, const Eigen::VectorXd &depths);

/// w = L / max L. The diagonal of the result is zero (no self-edges).
/// Throws DegenerateInput if the maximum is not positive.
Eigen::MatrixXd normalize_weights(const Eigen::MatrixXd &overlap,
                                  NormMode mode = NormMode::OffDiagonal);

/// d_ij = 1 - w_ij off the diagonal, d_ii = 0.
Eigen::MatrixXd to_dissimilarity(const Eigen::MatrixXd &weights);

/// Share of total holdings per bank; sums to one.
Eigen::VectorXd capital_weights(const PortfolioMatrix &portfolio);

struct Edge {
  int i = 0; ///< i < j
  int j = 0;
  double weight = 0.0;
};

struct DecileSummary {
  /// 10%, 20%, ..., 90% quantiles (type-7 interpolation) of the upper-triangle
  /// weights.
  std::array<double, 9> deciles{};
  double inter_decile_range = 0.0; ///< q90 - q10
  double top_fraction = 0.1;
  /// Smallest weight inside the backbone.
  double top_threshold = 0.0;
  /// ceil(top_fraction * pairs) heaviest edges, heaviest first; ties broken
  /// by (i, j).
  std::vector<Edge> backbone;
};

/// Type-7 quantile of an already sorted sample.
double quantile_sorted(const std::vector<double> &sorted, double p);

DecileSummary weight_deciles(const Eigen::MatrixXd &weights,
                             double top_fraction = 0.1);

struct OverlapNetwork {
  std::vector<std::string> banks;
  std::vector<std::string> assets; ///< after zero-depth removal
  Eigen::VectorXd depths;
  Eigen::MatrixXd lwpo;
  Eigen::MatrixXd weights;
  Eigen::MatrixXd dissimilarities;
  Eigen::VectorXd capital; ///< row sums of P in EUR
  NormMode norm_mode = NormMode::OffDiagonal;
  std::vector<std::string> dropped_assets;
  std::vector<std::string> isolated_banks; ///< zero total holdings
};

/// Runs the whole inference chain on a validated portfolio.
OverlapNetwork infer_network(PortfolioMatrix portfolio,
                             NormMode mode = NormMode::OffDiagonal);

/// Maturity buckets of the asset-class layout.
inline constexpr std::array<const char *, 3> kMaturityBuckets = {"0M-3M", "3M-2Y",
                                                                 "2Y-10Y+"};

/// One raw holding column labelled by issuer country and maturity bucket.
struct RawColumn {
  std::string country;
  std::string maturity; ///< one of kMaturityBuckets
};

/// Sums raw, labelled holding columns into the country x maturity layout.
/// Column ids are "<country>_<bucket>", ordered by the given country list and
/// then by bucket. Throws SchemaError on an unknown bucket or country.
PortfolioMatrix aggregate_asset_classes(const std::vector<std::string> &banks,
                                        const std::vector<RawColumn> &columns,
                                        const Eigen::MatrixXd &raw,
                                        const std::vector<std::string> &countries);

} // namespace hypfin::netinfer
