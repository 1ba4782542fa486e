#include "hypfin/errors.hpp"
#include "hypfin/stats.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <bit>
#include <complex>
#include <numbers>
#include <numeric>

using namespace hypfin;
using namespace hypfin::stats;
using hypfin::testing::von_mises;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Two-sided p by listing every split of the pooled sample into groups of the
// original sizes; assumes no ties.
double enumerated_mann_whitney_p(const std::vector<double> &a, const std::vector<double> &b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto n = static_cast<unsigned>(pooled.size());
  const auto na = static_cast<int>(a.size());
  auto u_of = [&](unsigned mask) {
    double u = 0.0;
    for (unsigned i = 0; i < n; ++i)
      if (mask & (1u << i))
        for (unsigned j = 0; j < n; ++j)
          if (!(mask & (1u << j)) && pooled[i] > pooled[j])
            u += 1.0;
    return u;
  };
  const double observed = u_of((1u << a.size()) - 1u);
  double lower = 0.0;
  double upper = 0.0;
  double total = 0.0;
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    if (std::popcount(mask) != na)
      continue;
    const double u = u_of(mask);
    total += 1.0;
    lower += u <= observed ? 1.0 : 0.0;
    upper += u >= observed ? 1.0 : 0.0;
  }
  return std::min(1.0, 2.0 * std::min(lower, upper) / total);
}

std::vector<double> uniform_sample(std::mt19937_64 &rng, std::size_t n) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> v(n);
  for (auto &x : v)
    x = unit(rng);
  return v;
}

struct GroupedAngles {
  std::vector<double> angles;
  std::vector<std::string> groups;
};

GroupedAngles von_mises_groups(std::mt19937_64 &rng, const std::vector<double> &means,
                               double kappa, int per_group) {
  GroupedAngles out;
  for (std::size_t g = 0; g < means.size(); ++g)
    for (int k = 0; k < per_group; ++k) {
      out.angles.push_back(von_mises(rng, means[g], kappa));
      out.groups.push_back("g" + std::to_string(g));
    }
  return out;
}

double anova_permutation_p(const GroupedAngles &data, int draws, std::uint64_t seed) {
  const double observed = circular_anova(data.angles, data.groups).statistic;
  std::mt19937_64 rng(seed);
  auto labels = data.groups;
  int hits = 0;
  for (int k = 0; k < draws; ++k) {
    std::shuffle(labels.begin(), labels.end(), rng);
    if (circular_anova(data.angles, labels).statistic >= observed * (1.0 - 1e-12))
      ++hits;
  }
  return (hits + 1.0) / (draws + 1.0);
}

// Jammalamadaka-SenGupta coefficient with means taken from complex sums.
double direct_circular_rho(const std::vector<double> &a, const std::vector<double> &b) {
  std::complex<double> za;
  std::complex<double> zb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    za += std::polar(1.0, a[i]);
    zb += std::polar(1.0, b[i]);
  }
  const double ma = std::arg(za);
  const double mb = std::arg(zb);
  double num = 0.0;
  double da = 0.0;
  double db = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::sin(a[i] - ma) * std::sin(b[i] - mb);
    da += std::pow(std::sin(a[i] - ma), 2);
    db += std::pow(std::sin(b[i] - mb), 2);
  }
  return num / std::sqrt(da * db);
}

double circular_permutation_p(const std::vector<double> &a, std::vector<double> b, int draws,
                              std::uint64_t seed) {
  const double observed = std::abs(direct_circular_rho(a, b));
  std::mt19937_64 rng(seed);
  int hits = 0;
  for (int k = 0; k < draws; ++k) {
    std::shuffle(b.begin(), b.end(), rng);
    if (std::abs(direct_circular_rho(a, b)) >= observed - 1e-12)
      ++hits;
  }
  return (hits + 1.0) / (draws + 1.0);
}

std::vector<CenteredCoordinates> coords(const std::vector<std::string> &ids,
                                        const std::vector<double> &r) {
  std::vector<CenteredCoordinates> out;
  for (std::size_t i = 0; i < ids.size(); ++i)
    out.push_back({ids[i], r[i], 0.1 * static_cast<double>(i)});
  return out;
}

} // namespace

TEST(MannWhitney, SeparatedTriples) {
  const std::vector<double> a{1, 2, 3};
  const std::vector<double> b{4, 5, 6};
  const auto res = wilcoxon_mann_whitney(a, b);
  EXPECT_EQ(res.statistic, 0.0);
  EXPECT_EQ(res.method, Method::MannWhitneyExact);
  EXPECT_NEAR(res.p_value, 0.1, 1e-15);
  EXPECT_NEAR(res.p_value, enumerated_mann_whitney_p(a, b), 1e-15);
  EXPECT_EQ(res.n_effective, (std::vector<std::size_t>{3, 3}));
}

TEST(MannWhitney, IdenticalGroups) {
  const std::vector<double> a{1, 2, 3, 4};
  const auto res = wilcoxon_mann_whitney(a, a);
  EXPECT_EQ(res.statistic, 8.0);
  EXPECT_EQ(res.method, Method::MannWhitneyNormal);
  EXPECT_NEAR(res.p_value, 1.0, 1e-12);
}

TEST(MannWhitney, EmptyGroupIsContractViolation) {
  const std::vector<double> a{1, 2};
  const std::vector<double> none;
  EXPECT_THROW(wilcoxon_mann_whitney(a, none), ContractViolation);
  EXPECT_THROW(wilcoxon_mann_whitney(none, a), ContractViolation);
}

TEST(MannWhitney, ExactPathMatchesEnumeration) {
  std::mt19937_64 rng(41);
  for (std::size_t na = 1; na <= 6; ++na)
    for (std::size_t nb = 1; na + nb <= 12; ++nb) {
      const auto a = uniform_sample(rng, na);
      const auto b = uniform_sample(rng, nb);
      const auto res = wilcoxon_mann_whitney(a, b);
      ASSERT_EQ(res.method, Method::MannWhitneyExact);
      EXPECT_NEAR(res.p_value, enumerated_mann_whitney_p(a, b), 1e-12)
          << "na=" << na << " nb=" << nb;
    }
}

TEST(MannWhitney, NormalApproximationEightPlusEight) {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 10; ++trial) {
    const auto a = uniform_sample(rng, 8);
    const auto b = uniform_sample(rng, 8);
    const auto normal = mann_whitney_normal(a, b);
    EXPECT_NEAR(normal.p_value, enumerated_mann_whitney_p(a, b), 0.02);
  }
}

TEST(MannWhitney, TiesUseMidranksAndNormalPath) {
  const std::vector<double> a{1, 2, 2, 3};
  const std::vector<double> b{2, 4, 5};
  const auto res = wilcoxon_mann_whitney(a, b);
  EXPECT_EQ(res.method, Method::MannWhitneyNormal);
  // Pooled ranks: 1 -> 1, the three 2s -> 3, 3 -> 5, 4 -> 6, 5 -> 7.
  EXPECT_DOUBLE_EQ(res.statistic, (1 + 3 + 3 + 5) - 10.0);
  EXPECT_GE(res.p_value, 0.0);
  EXPECT_LE(res.p_value, 1.0);
}

TEST(MannWhitney, MonotoneTransformInvariance) {
  std::mt19937_64 rng(43);
  const auto a = uniform_sample(rng, 15);
  const auto b = uniform_sample(rng, 11);
  std::vector<double> ta;
  std::vector<double> tb;
  for (double v : a)
    ta.push_back(std::exp(3.0 * v) - 7.0);
  for (double v : b)
    tb.push_back(std::exp(3.0 * v) - 7.0);
  const auto x = wilcoxon_mann_whitney(a, b);
  const auto y = wilcoxon_mann_whitney(ta, tb);
  EXPECT_EQ(x.statistic, y.statistic);
  EXPECT_EQ(x.p_value, y.p_value);
}

TEST(MannWhitney, ExactPValueTable) {
  // U = 0 with sizes (2, 2): two of six splits are as extreme.
  EXPECT_NEAR(mann_whitney_exact_p(0.0, 2, 2), 2.0 / 6.0, 1e-15);
  EXPECT_EQ(mann_whitney_exact_p(2.0, 2, 2), 1.0);
  EXPECT_NEAR(mann_whitney_exact_p(0.0, 5, 5), 2.0 / 252.0, 1e-15);
}

TEST(Pearson, Identities) {
  const std::vector<double> x{1, 2, 3, 4, 5.5};
  std::vector<double> neg;
  std::vector<double> affine;
  for (double v : x) {
    neg.push_back(-v);
    affine.push_back(3.0 * v + 2.0);
  }
  const auto self = pearson_correlation(x, x);
  EXPECT_EQ(self.statistic, 1.0);
  EXPECT_EQ(self.p_value, 0.0);
  EXPECT_EQ(pearson_correlation(x, neg).statistic, -1.0);
  EXPECT_NEAR(pearson_correlation(x, affine).statistic, 1.0, 1e-15);
}

TEST(Pearson, FixedDatasetMatchesTextbookFormula) {
  const std::vector<double> x{0.12, 0.55, 0.31, 0.97, 0.44, 0.68, 0.05, 0.83, 0.29, 0.61};
  const std::vector<double> y{0.20, 0.48, 0.41, 0.88, 0.30, 0.75, 0.18, 0.70, 0.35, 0.52};
  // r = (n sum xy - sum x sum y) / sqrt((n sum x^2 - (sum x)^2)(n sum y^2 - (sum y)^2))
  const double n = 10.0;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  const double r = (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
  const auto res = pearson_correlation(x, y);
  EXPECT_NEAR(res.statistic, r, 1e-12);
  EXPECT_EQ(res.method, Method::PearsonT);
  EXPECT_GT(res.p_value, 0.0);
  EXPECT_LT(res.p_value, 0.001);
}

TEST(Pearson, KnownPValue) {
  // r = 0.5 with n = 3: t = 1 / sqrt(3) on one degree of freedom (Cauchy),
  // so p = 1 - (2 / pi) atan(1 / sqrt(3)) = 2 / 3.
  const std::vector<double> x{1, 2, 3};
  const std::vector<double> y{1, 3, 2};
  EXPECT_NEAR(pearson_correlation(x, y).statistic, 0.5, 1e-15);
  EXPECT_NEAR(pearson_correlation(x, y).p_value, 2.0 / 3.0, 1e-12);
}

TEST(Pearson, AffineInvarianceAndSignFlip) {
  std::mt19937_64 rng(44);
  const auto x = uniform_sample(rng, 20);
  const auto y = uniform_sample(rng, 20);
  std::vector<double> tx;
  std::vector<double> ny;
  for (std::size_t i = 0; i < x.size(); ++i) {
    tx.push_back(0.3 * x[i] - 5.0);
    ny.push_back(-y[i]);
  }
  const double r = pearson_correlation(x, y).statistic;
  EXPECT_NEAR(pearson_correlation(tx, y).statistic, r, 1e-12);
  EXPECT_NEAR(pearson_correlation(x, ny).statistic, -r, 1e-12);
}

TEST(Pearson, Errors) {
  const std::vector<double> flat{2, 2, 2};
  const std::vector<double> x{1, 2, 3};
  EXPECT_THROW(pearson_correlation(flat, x), DegenerateInput);
  EXPECT_THROW(pearson_correlation(x, std::vector<double>{1, 2}), ContractViolation);
}

TEST(CircularHelpers, ResultantAndKappa) {
  const std::vector<double> same{1.0, 1.0, 1.0};
  EXPECT_NEAR(resultant_length(same), 3.0, 1e-15);
  EXPECT_NEAR(circular_mean(same), 1.0, 1e-15);
  const std::vector<double> opposite{0.0, std::numbers::pi};
  EXPECT_NEAR(resultant_length(opposite), 0.0, 1e-15);

  // Piecewise inverse of A1 (Fisher 1993) at one point per branch.
  EXPECT_NEAR(estimate_kappa(0.3), 0.6 + 0.027 + 5.0 * 0.00243 / 6.0, 1e-12);
  EXPECT_NEAR(estimate_kappa(0.7), -0.4 + 1.39 * 0.7 + 0.43 / 0.3, 1e-12);
  EXPECT_NEAR(estimate_kappa(0.9), 1.0 / (0.729 - 3.24 + 2.7), 1e-12);
  EXPECT_TRUE(std::isinf(estimate_kappa(1.0)));
}

TEST(CircularAnova, IdenticalAnglesGiveZero) {
  const std::vector<double> angles(9, 1.3);
  const std::vector<std::string> groups{"a", "a", "a", "b", "b", "b", "c", "c", "c"};
  const auto res = circular_anova(angles, groups);
  EXPECT_EQ(res.statistic, 0.0);
  EXPECT_EQ(res.p_value, 1.0);
  EXPECT_EQ(res.method, Method::WatsonWilliamsF);
  EXPECT_EQ(res.n_effective, (std::vector<std::size_t>{3, 3, 3}));
}

TEST(CircularAnova, OppositeConcentratedGroups) {
  std::mt19937_64 rng(45);
  const auto data = von_mises_groups(rng, {0.0, std::numbers::pi}, 50.0, 10);
  const auto res = circular_anova(data.angles, data.groups);
  EXPECT_LT(res.p_value, 0.001);
  EXPECT_TRUE(res.warnings.empty());
  EXPECT_LT(anova_permutation_p(data, 2000, 1), 0.001);
}

TEST(CircularAnova, ShuffledLabelsLookNull) {
  std::mt19937_64 rng(46);
  auto data = von_mises_groups(rng, {1.0}, 10.0, 30);
  for (std::size_t i = 0; i < data.groups.size(); ++i)
    data.groups[i] = "g" + std::to_string(i % 3);
  std::vector<double> ps;
  for (int k = 0; k < 100; ++k) {
    std::shuffle(data.groups.begin(), data.groups.end(), rng);
    ps.push_back(circular_anova(data.angles, data.groups).p_value);
  }
  std::nth_element(ps.begin(), ps.begin() + 50, ps.end());
  EXPECT_GE(ps[50], 0.2);
  EXPECT_LE(ps[50], 0.8);
}

TEST(CircularAnova, RotationInvariance) {
  std::mt19937_64 rng(47);
  const auto data = von_mises_groups(rng, {0.2, 0.9, 1.4}, 5.0, 8);
  auto rotated = data.angles;
  for (auto &a : rotated)
    a = std::fmod(a + 2.1, kTwoPi);
  EXPECT_NEAR(circular_anova(data.angles, data.groups).statistic,
              circular_anova(rotated, data.groups).statistic, 1e-9);
}

TEST(CircularAnova, LowConcentrationWarning) {
  std::mt19937_64 rng(48);
  const auto data = von_mises_groups(rng, {0.0, 2.0}, 0.5, 10);
  const auto res = circular_anova(data.angles, data.groups);
  ASSERT_FALSE(res.warnings.empty());
  EXPECT_NE(res.warnings.front().find("0.7"), std::string::npos);
  EXPECT_GE(res.p_value, 0.0);
  EXPECT_LE(res.p_value, 1.0);
}

TEST(CircularAnova, Contracts) {
  const std::vector<double> a{0.1, 0.2, 0.3};
  const std::vector<std::string> one{"x", "x", "x"};
  const std::vector<std::string> singleton{"x", "x", "y"};
  EXPECT_THROW(circular_anova(a, one), ContractViolation);
  EXPECT_THROW(circular_anova(a, singleton), ContractViolation);
}

TEST(CircularCorrelation, SelfAndRotation) {
  std::mt19937_64 rng(49);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::vector<double> a(15);
  for (auto &v : a)
    v = angle(rng);
  EXPECT_EQ(circular_correlation(a, a).statistic, 1.0);
  std::vector<double> shifted;
  for (double v : a)
    shifted.push_back(std::fmod(v + 4.0, kTwoPi));
  EXPECT_NEAR(circular_correlation(a, shifted).statistic, 1.0, 1e-12);
}

TEST(CircularCorrelation, IndependentRotationInvariance) {
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::vector<double> a(20);
  std::vector<double> b(20);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = angle(rng);
    b[i] = von_mises(rng, a[i], 1.0);
  }
  auto ra = a;
  auto rb = b;
  for (auto &v : ra)
    v = std::fmod(v + 1.0, kTwoPi);
  for (auto &v : rb)
    v = std::fmod(v + 5.0, kTwoPi);
  EXPECT_NEAR(circular_correlation(a, b).statistic, circular_correlation(ra, rb).statistic,
              1e-12);
}

TEST(CircularCorrelation, FixedDatasetMatchesDirectFormulaAndPermutation) {
  std::mt19937_64 rng(20261015);
  std::uniform_real_distribution<double> angle(0.0, kTwoPi);
  std::vector<double> a(12);
  std::vector<double> b(12);
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = angle(rng);
    b[i] = von_mises(rng, a[i], 2.0);
  }
  const auto res = circular_correlation(a, b);
  EXPECT_NEAR(res.statistic, direct_circular_rho(a, b), 1e-12);
  EXPECT_EQ(res.method, Method::CircularCorrelationNormal);
  const double perm = circular_permutation_p(a, b, 10000, 7);
  EXPECT_NEAR(res.p_value, perm, 0.02);
}

TEST(CircularCorrelation, DegenerateSample) {
  const std::vector<double> flat(5, 0.7);
  const std::vector<double> a{0.1, 1.0, 2.0, 3.0, 4.0};
  EXPECT_THROW(circular_correlation(flat, a), DegenerateInput);
  EXPECT_THROW(circular_correlation(a, std::vector<double>{0.1, 0.2}), ContractViolation);
}

TEST(RadialRanking, OrderAndTies) {
  const auto ranked = radial_ranking(coords({"C", "A", "B"}, {0.9, 0.1, 0.5}));
  EXPECT_EQ(ranked[0].bank_id, "A");
  EXPECT_EQ(ranked[1].bank_id, "B");
  EXPECT_EQ(ranked[2].bank_id, "C");

  const auto tied = radial_ranking(coords({"Z", "M", "A"}, {0.3, 0.3, 0.4}));
  EXPECT_EQ(tied[0].bank_id, "M");
  EXPECT_EQ(tied[1].bank_id, "Z");
}

TEST(RadialRanking, TopFiveMatchesFullSort) {
  std::mt19937_64 rng(51);
  const auto r = uniform_sample(rng, 40);
  std::vector<std::string> ids;
  for (int i = 0; i < 40; ++i)
    ids.push_back("bank" + std::to_string(i));
  const auto ranked = radial_ranking(coords(ids, r));
  auto sorted = r;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < 5; ++k)
    EXPECT_EQ(ranked[k].r_prime, sorted[k]);
}

TEST(MatchSamples, Scenarios) {
  const auto a = coords({"A", "B", "C"}, {0.1, 0.2, 0.3});
  const auto b = coords({"X", "Y"}, {0.1, 0.2});
  EXPECT_THROW(match_samples(a, b), DegenerateInput);

  const auto full = match_samples(a, a);
  EXPECT_EQ(full.bank_ids, (std::vector<std::string>{"A", "B", "C"}));
  EXPECT_TRUE(full.only_in_a.empty());
  EXPECT_TRUE(full.only_in_b.empty());
}

TEST(MatchSamples, UnequalYearSizes) {
  std::vector<std::string> ids_a;
  std::vector<std::string> ids_b;
  for (int i = 0; i < 119; ++i)
    ids_a.push_back("A" + std::to_string(i));
  for (int i = 0; i < 43; ++i)
    ids_b.push_back("A" + std::to_string(2 * i));
  for (int i = 0; i < 8; ++i)
    ids_b.push_back("NEW" + std::to_string(i));
  const auto m = match_samples(coords(ids_a, std::vector<double>(119, 0.5)),
                               coords(ids_b, std::vector<double>(51, 0.5)));
  EXPECT_EQ(m.bank_ids.size(), 43u);
  EXPECT_EQ(m.only_in_a.size(), 76u);
  EXPECT_EQ(m.only_in_b.size(), 8u);
  for (std::size_t i = 0; i < m.bank_ids.size(); ++i) {
    EXPECT_EQ(m.a[i].bank_id, m.bank_ids[i]);
    EXPECT_EQ(m.b[i].bank_id, m.bank_ids[i]);
  }
}
