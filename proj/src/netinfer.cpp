#include "hypfin/netinfer.hpp"

#include "hypfin/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

namespace hypfin::netinfer {

namespace {

void require_unique(const std::vector<std::string> &ids, const char *what) {
  std::set<std::string> seen;
  for (const auto &id : ids)
    if (!seen.insert(id).second)
      throw ContractViolation(std::string("duplicate ") + what + " identifier '" +
                              id + "'");
}

} // namespace

void PortfolioMatrix::validate() const {
  if (values.rows() != static_cast<Eigen::Index>(banks.size()) ||
      values.cols() != static_cast<Eigen::Index>(assets.size()))
    throw ContractViolation("portfolio matrix shape does not match identifiers");
  if (banks.size() < 2)
    throw ContractViolation("portfolio needs at least 2 banks");
  if (assets.empty())
    throw ContractViolation("portfolio needs at least 1 asset class");
  if (!values.allFinite() || (values.array() < 0.0).any())
    throw ContractViolation("portfolio holdings must be finite and nonnegative");
  require_unique(banks, "bank");
  require_unique(assets, "asset");
}

const char *to_string(NormMode mode) {
  return mode == NormMode::OffDiagonal ? "offdiag" : "all";
}

NormMode parse_norm_mode(const std::string &text) {
  if (text == "offdiag")
    return NormMode::OffDiagonal;
  if (text == "all")
    return NormMode::All;
  throw ContractViolation("unknown normalization mode '" + text +
                          "' (expected offdiag or all)");
}

Eigen::VectorXd market_depths(const PortfolioMatrix &portfolio) {
  return portfolio.values.colwise().sum().transpose();
}

std::vector<std::string> drop_zero_depth_assets(PortfolioMatrix &portfolio) {
  const Eigen::VectorXd depths = market_depths(portfolio);
  std::vector<Eigen::Index> keep;
  std::vector<std::string> dropped;
  for (Eigen::Index k = 0; k < depths.size(); ++k) {
    if (depths[k] > 0.0)
      keep.push_back(k);
    else
      dropped.push_back(portfolio.assets[k]);
  }
  if (dropped.empty())
    return dropped;

  Eigen::MatrixXd values(portfolio.values.rows(), static_cast<Eigen::Index>(keep.size()));
  std::vector<std::string> assets;
  for (std::size_t c = 0; c < keep.size(); ++c) {
    values.col(static_cast<Eigen::Index>(c)) = portfolio.values.col(keep[c]);
    assets.push_back(portfolio.assets[keep[c]]);
  }
  portfolio.values = std::move(values);
  portfolio.assets = std::move(assets);
  return dropped;
}

Eigen::MatrixXd lwpo(const Eigen::MatrixXd &holdings, const Eigen::VectorXd &depths) {
  if (holdings.cols() != depths.size())
    throw ContractViolation("lwpo: one market depth per asset required");
  if ((depths.array() <= 0.0).any())
    throw ContractViolation("lwpo: market depths must be positive");
  const Eigen::MatrixXd scaled = holdings * depths.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd l = scaled * holdings.transpose();
  return 0.5 * (l + l.transpose());
}

Eigen::MatrixXd normalize_weights(const Eigen::MatrixXd &overlap, NormMode mode) {
  const Eigen::Index n = overlap.rows();
  if (overlap.cols() != n)
    throw ContractViolation("normalize_weights: square matrix required");

  double off_max = 0.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i != j)
        off_max = std::max(off_max, overlap(i, j));
  if (!(off_max > 0.0))
    throw DegenerateInput("degenerate network: no overlapping portfolios");

  const double scale =
      mode == NormMode::All ? std::max(off_max, overlap.diagonal().maxCoeff()) : off_max;
  Eigen::MatrixXd w = overlap / scale;
  w.diagonal().setZero();
  return w;
}

Eigen::MatrixXd to_dissimilarity(const Eigen::MatrixXd &weights) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Ones(weights.rows(), weights.cols()) - weights;
  d.diagonal().setZero();
  return d;
}

Eigen::VectorXd capital_weights(const PortfolioMatrix &portfolio) {
  const Eigen::VectorXd rows = portfolio.values.rowwise().sum();
  const double total = rows.sum();
  if (!(total > 0.0))
    throw ContractViolation("capital_weights: portfolio holds nothing");
  return rows / total;
}

double quantile_sorted(const std::vector<double> &sorted, double p) {
  if (sorted.empty())
    throw ContractViolation("quantile of an empty sample");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

DecileSummary weight_deciles(const Eigen::MatrixXd &weights, double top_fraction) {
  const Eigen::Index n = weights.rows();
  if (n < 2 || weights.cols() != n)
    throw ContractViolation("weight_deciles: square matrix with n >= 2 required");
  if (!(top_fraction > 0.0 && top_fraction < 1.0))
    throw ContractViolation("weight_deciles: top fraction must lie in (0, 1)");

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      edges.push_back({static_cast<int>(i), static_cast<int>(j), weights(i, j)});

  std::vector<double> sorted;
  sorted.reserve(edges.size());
  for (const auto &e : edges)
    sorted.push_back(e.weight);
  std::sort(sorted.begin(), sorted.end());

  DecileSummary out;
  for (int k = 0; k < 9; ++k)
    out.deciles[k] = quantile_sorted(sorted, 0.1 * (k + 1));
  out.inter_decile_range = out.deciles[8] - out.deciles[0];
  out.top_fraction = top_fraction;

  std::stable_sort(edges.begin(), edges.end(),
                   [](const Edge &a, const Edge &b) { return a.weight > b.weight; });
  // Guard against 0.1 * 10 evaluating to 1.0000000000000002.
  const auto count = static_cast<std::size_t>(
      std::ceil(top_fraction * static_cast<double>(edges.size()) - 1e-9));
  edges.resize(std::max<std::size_t>(count, 1));
  out.backbone = std::move(edges);
  out.top_threshold = out.backbone.back().weight;
  return out;
}

OverlapNetwork infer_network(PortfolioMatrix portfolio, NormMode mode) {
  portfolio.validate();

  OverlapNetwork net;
  net.norm_mode = mode;
  net.dropped_assets = drop_zero_depth_assets(portfolio);
  if (portfolio.assets.empty())
    throw DegenerateInput("degenerate network: no asset is held by any bank");

  net.banks = portfolio.banks;
  net.assets = portfolio.assets;
  net.depths = market_depths(portfolio);
  net.capital = portfolio.values.rowwise().sum();
  for (Eigen::Index i = 0; i < net.capital.size(); ++i)
    if (net.capital[i] == 0.0)
      net.isolated_banks.push_back(net.banks[i]);

  net.lwpo = lwpo(portfolio.values, net.depths);
  net.weights = normalize_weights(net.lwpo, mode);
  net.dissimilarities = to_dissimilarity(net.weights);
  return net;
}

PortfolioMatrix aggregate_asset_classes(const std::vector<std::string> &banks,
                                        const std::vector<RawColumn> &columns,
                                        const Eigen::MatrixXd &raw,
                                        const std::vector<std::string> &countries) {
  if (raw.rows() != static_cast<Eigen::Index>(banks.size()) ||
      raw.cols() != static_cast<Eigen::Index>(columns.size()))
    throw ContractViolation("aggregate_asset_classes: shape mismatch");

  std::unordered_map<std::string, std::size_t> country_index;
  for (std::size_t c = 0; c < countries.size(); ++c)
    country_index.emplace(countries[c], c);

  PortfolioMatrix out;
  out.banks = banks;
  for (const auto &country : countries)
    for (const char *bucket : kMaturityBuckets)
      out.assets.push_back(country + "_" + bucket);
  out.values = Eigen::MatrixXd::Zero(raw.rows(), static_cast<Eigen::Index>(out.assets.size()));

  for (std::size_t c = 0; c < columns.size(); ++c) {
    const auto it = country_index.find(columns[c].country);
    if (it == country_index.end())
      throw SchemaError("unknown issuer country '" + columns[c].country + "'", 0, c + 1);
    const auto bucket = std::find_if(
        kMaturityBuckets.begin(), kMaturityBuckets.end(),
        [&](const char *b) { return columns[c].maturity == b; });
    if (bucket == kMaturityBuckets.end())
      throw SchemaError("unknown maturity bucket '" + columns[c].maturity + "'", 0, c + 1);
    const auto target = static_cast<Eigen::Index>(
        it->second * kMaturityBuckets.size() +
        static_cast<std::size_t>(bucket - kMaturityBuckets.begin()));
    out.values.col(target) += raw.col(static_cast<Eigen::Index>(c));
  }
  return out;
}

} // namespace hypfin::netinfer
