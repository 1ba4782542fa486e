#pragma once

// Tests relating embedding coordinates to node annotations: rank test on the
// radial coordinate, circular ANOVA on the angle, and longitudinal
// correlations between matched samples.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hypfin::stats {

enum class Method {
  MannWhitneyExact,
  MannWhitneyNormal,
  PearsonT,
  WatsonWilliamsF,
  CircularCorrelationNormal,
};

const char *to_string(Method method);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  Method method = Method::MannWhitneyNormal;
  std::vector<std::size_t> n_effective;
  std::vector<std::string> warnings;
};

/// Two-sided Wilcoxon-Mann-Whitney test. The statistic is U of group A
/// (midranks for ties). Exact enumeration is used for combined n <= 12 without
/// ties, otherwise the tie-corrected normal approximation with continuity
/// correction.
TestResult wilcoxon_mann_whitney(std::span<const double> group_a,
                                 std::span<const double> group_b);

/// Normal-approximation path of wilcoxon_mann_whitney, always.
TestResult mann_whitney_normal(std::span<const double> group_a,
                               std::span<const double> group_b);

/// Exact two-sided p for U when the pooled sample has no ties.
double mann_whitney_exact_p(double u, std::size_t n_a, std::size_t n_b);

/// Sample correlation with the two-sided t test on n - 2 degrees of freedom.
TestResult pearson_correlation(std::span<const double> x, std::span<const double> y);

/// Resultant length |sum exp(i theta)|.
double resultant_length(std::span<const double> angles);

/// atan2(sum sin, sum cos).
double circular_mean(std::span<const double> angles);

/// Maximum-likelihood von Mises concentration from a mean resultant length,
/// via the usual piecewise approximation of A1^-1.
double estimate_kappa(double mean_resultant_length);

/// Watson-Williams test for equal mean directions across groups.
/// `groups[i]` labels `angles[i]`.
TestResult circular_anova(std::span<const double> angles,
                          std::span<const std::string> groups);

/// Mean resultant length below which a Watson-Williams warning is attached.
inline constexpr double kWatsonWilliamsMinConcentration = 0.7;

/// Jammalamadaka-SenGupta circular correlation with asymptotic normal test.
TestResult circular_correlation(std::span<const double> theta_a,
                                std::span<const double> theta_b);

struct CenteredCoordinates {
  std::string bank_id;
  double r_prime = 0.0;
  double theta_prime = 0.0;
};

/// Ascending r', ties by bank_id.
std::vector<CenteredCoordinates> radial_ranking(std::vector<CenteredCoordinates> coords);

struct MatchedSamples {
  std::vector<std::string> bank_ids;
  std::vector<CenteredCoordinates> a;
  std::vector<CenteredCoordinates> b;
  std::vector<std::string> only_in_a;
  std::vector<std::string> only_in_b;
};

/// Inner join on bank_id, in the order of `year_a`. Throws DegenerateInput
/// when nothing matches.
MatchedSamples match_samples(std::span<const CenteredCoordinates> year_a,
                             std::span<const CenteredCoordinates> year_b);

} // namespace hypfin::stats
