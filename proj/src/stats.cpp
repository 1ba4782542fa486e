#include "hypfin/stats.hpp"

#include "hypfin/errors.hpp"

#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

namespace hypfin::stats {

namespace {

constexpr std::size_t kExactLimit = 12;

double normal_two_sided(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

struct RankSummary {
  double u_a = 0.0;
  double tie_term = 0.0; // sum over tie groups of t^3 - t
  bool has_ties = false;
};

RankSummary rank_summary(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty())
    throw ContractViolation("Wilcoxon-Mann-Whitney: both groups must be non-empty");

  std::vector<std::pair<double, bool>> pooled; // value, belongs to A
  pooled.reserve(a.size() + b.size());
  for (double v : a)
    pooled.emplace_back(v, true);
  for (double v : b)
    pooled.emplace_back(v, false);
  for (const auto &p : pooled)
    if (std::isnan(p.first))
      throw ContractViolation("Wilcoxon-Mann-Whitney: NaN in sample");
  std::sort(pooled.begin(), pooled.end(),
            [](const auto &x, const auto &y) { return x.first < y.first; });

  RankSummary out;
  double rank_sum_a = 0.0;
  for (std::size_t i = 0; i < pooled.size();) {
    std::size_t j = i;
    while (j < pooled.size() && pooled[j].first == pooled[i].first)
      ++j;
    const double midrank = 0.5 * static_cast<double>(i + 1 + j); // ranks i+1..j
    const auto t = static_cast<double>(j - i);
    if (j - i > 1) {
      out.has_ties = true;
      out.tie_term += t * t * t - t;
    }
    for (std::size_t k = i; k < j; ++k)
      if (pooled[k].second)
        rank_sum_a += midrank;
    i = j;
  }
  const auto na = static_cast<double>(a.size());
  out.u_a = rank_sum_a - na * (na + 1.0) / 2.0;
  return out;
}

// counts[u] = number of assignments of ranks 1..n_a+n_b with U_A = u.
std::vector<double> mann_whitney_counts(std::size_t n_a, std::size_t n_b) {
  // table[m][n] holds the distribution for group sizes (m, n).
  std::vector<std::vector<std::vector<double>>> table(
      n_a + 1, std::vector<std::vector<double>>(n_b + 1));
  for (std::size_t m = 0; m <= n_a; ++m)
    for (std::size_t n = 0; n <= n_b; ++n) {
      auto &dist = table[m][n];
      dist.assign(m * n + 1, 0.0);
      if (m == 0 || n == 0) {
        dist[0] = 1.0;
        continue;
      }
      // Largest rank in A: it beats all n members of B.
      const auto &with_a = table[m - 1][n];
      for (std::size_t u = 0; u < with_a.size(); ++u)
        dist[u + n] += with_a[u];
      const auto &with_b = table[m][n - 1];
      for (std::size_t u = 0; u < with_b.size(); ++u)
        dist[u] += with_b[u];
    }
  return table[n_a][n_b];
}

} // namespace

const char *to_string(Method method) {
  switch (method) {
  case Method::MannWhitneyExact:
    return "mann_whitney_exact";
  case Method::MannWhitneyNormal:
    return "mann_whitney_normal";
  case Method::PearsonT:
    return "pearson_t";
  case Method::WatsonWilliamsF:
    return "watson_williams_f";
  case Method::CircularCorrelationNormal:
    return "circular_correlation_normal";
  }
  return "unknown";
}

double mann_whitney_exact_p(double u, std::size_t n_a, std::size_t n_b) {
  if (n_a == 0 || n_b == 0)
    throw ContractViolation("Wilcoxon-Mann-Whitney: both groups must be non-empty");
  const std::vector<double> counts = mann_whitney_counts(n_a, n_b);
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  double lower = 0.0;
  double upper = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const auto value = static_cast<double>(k);
    if (value <= u + 1e-9)
      lower += counts[k];
    if (value >= u - 1e-9)
      upper += counts[k];
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

TestResult mann_whitney_normal(std::span<const double> group_a,
                               std::span<const double> group_b) {
  const RankSummary ranks = rank_summary(group_a, group_b);
  const auto na = static_cast<double>(group_a.size());
  const auto nb = static_cast<double>(group_b.size());
  const double n = na + nb;

  TestResult out;
  out.statistic = ranks.u_a;
  out.method = Method::MannWhitneyNormal;
  out.n_effective = {group_a.size(), group_b.size()};

  const double mean = na * nb / 2.0;
  const double var = na * nb / 12.0 * ((n + 1.0) - ranks.tie_term / (n * (n - 1.0)));
  if (!(var > 0.0)) {
    out.p_value = 1.0;
    return out;
  }
  const double z = std::max(std::abs(ranks.u_a - mean) - 0.5, 0.0) / std::sqrt(var);
  out.p_value = std::min(1.0, normal_two_sided(z));
  return out;
}

TestResult wilcoxon_mann_whitney(std::span<const double> group_a,
                                 std::span<const double> group_b) {
  const RankSummary ranks = rank_summary(group_a, group_b);
  if (ranks.has_ties || group_a.size() + group_b.size() > kExactLimit)
    return mann_whitney_normal(group_a, group_b);

  TestResult out;
  out.statistic = ranks.u_a;
  out.method = Method::MannWhitneyExact;
  out.n_effective = {group_a.size(), group_b.size()};
  out.p_value = mann_whitney_exact_p(ranks.u_a, group_a.size(), group_b.size());
  return out;
}

TestResult pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw ContractViolation("pearson_correlation: series differ in length");
  const std::size_t n = x.size();
  if (n < 3)
    throw ContractViolation("pearson_correlation: need at least 3 pairs");

  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0))
    throw DegenerateInput("degenerate sample: zero variance");

  TestResult out;
  out.method = Method::PearsonT;
  out.n_effective = {n};
  out.statistic = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);

  const double r = out.statistic;
  if (std::abs(r) == 1.0) {
    out.p_value = 0.0;
    return out;
  }
  const double dof = static_cast<double>(n - 2);
  const double t = r * std::sqrt(dof / ((1.0 - r) * (1.0 + r)));
  const boost::math::students_t dist(dof);
  out.p_value = std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
  return out;
}

double resultant_length(std::span<const double> angles) {
  double s = 0.0;
  double c = 0.0;
  for (double a : angles) {
    s += std::sin(a);
    c += std::cos(a);
  }
  return std::hypot(s, c);
}

double circular_mean(std::span<const double> angles) {
  double s = 0.0;
  double c = 0.0;
  for (double a : angles) {
    s += std::sin(a);
    c += std::cos(a);
  }
  return std::atan2(s, c);
}

double estimate_kappa(double rbar) {
  if (rbar < 0.0 || std::isnan(rbar))
    throw ContractViolation("mean resultant length must be nonnegative");
  if (rbar >= 1.0)
    return std::numeric_limits<double>::infinity();
  if (rbar < 0.53)
    return 2.0 * rbar + std::pow(rbar, 3) + 5.0 * std::pow(rbar, 5) / 6.0;
  if (rbar < 0.85)
    return -0.4 + 1.39 * rbar + 0.43 / (1.0 - rbar);
  return 1.0 / (std::pow(rbar, 3) - 4.0 * rbar * rbar + 3.0 * rbar);
}

TestResult circular_anova(std::span<const double> angles,
                          std::span<const std::string> groups) {
  if (angles.size() != groups.size())
    throw ContractViolation("circular_anova: one group label per angle required");

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<double>> members;
  for (std::size_t i = 0; i < angles.size(); ++i) {
    auto [it, inserted] = members.try_emplace(groups[i]);
    if (inserted)
      order.push_back(groups[i]);
    it->second.push_back(angles[i]);
  }
  if (order.size() < 2)
    throw ContractViolation("circular_anova: need at least 2 groups");
  for (const auto &g : order)
    if (members[g].size() < 2)
      throw ContractViolation("circular_anova: group '" + g + "' has fewer than 2 observations");

  const auto n = static_cast<double>(angles.size());
  const auto q = static_cast<double>(order.size());
  double sum_group_r = 0.0;
  for (const auto &g : order)
    sum_group_r += resultant_length(members[g]);
  const double total_r = resultant_length(angles);

  TestResult out;
  out.method = Method::WatsonWilliamsF;
  for (const auto &g : order)
    out.n_effective.push_back(members[g].size());

  const double rbar = sum_group_r / n;
  if (rbar < kWatsonWilliamsMinConcentration)
    out.warnings.push_back("Watson-Williams: mean resultant length " + std::to_string(rbar) +
                           " < 0.7, high-concentration assumption doubtful");

  const double between = sum_group_r - total_r;
  const double within = n - sum_group_r;
  const double eps = 1e-12 * n;
  if (between <= eps) {
    out.statistic = 0.0;
    out.p_value = 1.0;
    return out;
  }
  if (within <= eps) {
    out.statistic = std::numeric_limits<double>::infinity();
    out.p_value = 0.0;
    return out;
  }

  const double correction = 1.0 + 3.0 / (8.0 * estimate_kappa(rbar));
  out.statistic = correction * (n - q) * between / ((q - 1.0) * within);
  const boost::math::fisher_f dist(q - 1.0, n - q);
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.statistic));
  return out;
}

TestResult circular_correlation(std::span<const double> theta_a,
                                std::span<const double> theta_b) {
  if (theta_a.size() != theta_b.size())
    throw ContractViolation("circular_correlation: series differ in length");
  const std::size_t n = theta_a.size();
  if (n < 3)
    throw ContractViolation("circular_correlation: need at least 3 pairs");

  const double mean_a = circular_mean(theta_a);
  const double mean_b = circular_mean(theta_b);
  double saa = 0.0;
  double sbb = 0.0;
  double sab = 0.0;
  double saabb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sa = std::sin(theta_a[i] - mean_a);
    const double sb = std::sin(theta_b[i] - mean_b);
    saa += sa * sa;
    sbb += sb * sb;
    sab += sa * sb;
    saabb += sa * sa * sb * sb;
  }
  const double floor = 1e-24 * static_cast<double>(n);
  if (saa <= floor || sbb <= floor)
    throw DegenerateInput("degenerate circular sample");

  TestResult out;
  out.method = Method::CircularCorrelationNormal;
  out.n_effective = {n};
  out.statistic = std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);

  const auto count = static_cast<double>(n);
  const double l20 = saa / count;
  const double l02 = sbb / count;
  const double l22 = saabb / count;
  if (!(l22 > 0.0)) {
    out.p_value = out.statistic == 0.0 ? 1.0 : 0.0;
    return out;
  }
  const double z = std::sqrt(count * l20 * l02 / l22) * out.statistic;
  out.p_value = std::min(1.0, normal_two_sided(z));
  return out;
}

std::vector<CenteredCoordinates> radial_ranking(std::vector<CenteredCoordinates> coords) {
  std::sort(coords.begin(), coords.end(), [](const auto &a, const auto &b) {
    if (a.r_prime != b.r_prime)
      return a.r_prime < b.r_prime;
    return a.bank_id < b.bank_id;
  });
  return coords;
}

MatchedSamples match_samples(std::span<const CenteredCoordinates> year_a,
                             std::span<const CenteredCoordinates> year_b) {
  std::map<std::string, const CenteredCoordinates *> index_b;
  for (const auto &c : year_b)
    if (!index_b.emplace(c.bank_id, &c).second)
      throw ContractViolation("match_samples: duplicate bank '" + c.bank_id + "'");

  MatchedSamples out;
  std::set<std::string> seen_a;
  for (const auto &c : year_a) {
    if (!seen_a.insert(c.bank_id).second)
      throw ContractViolation("match_samples: duplicate bank '" + c.bank_id + "'");
    const auto it = index_b.find(c.bank_id);
    if (it == index_b.end()) {
      out.only_in_a.push_back(c.bank_id);
      continue;
    }
    out.bank_ids.push_back(c.bank_id);
    out.a.push_back(c);
    out.b.push_back(*it->second);
  }
  for (const auto &c : year_b)
    if (!seen_a.count(c.bank_id))
      out.only_in_b.push_back(c.bank_id);

  if (out.bank_ids.empty())
    throw DegenerateInput("no common banks");
  return out;
}

} // namespace hypfin::stats
