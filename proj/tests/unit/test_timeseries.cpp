#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>

#include "ilsbm/synth.hpp"
#include "ilsbm/timeseries.hpp"
#include "support.hpp"

using namespace ilsbm;
using sbm::Partition;

namespace {

double oracle_nmi(const std::vector<int>& a, const std::vector<int>& b) {
  const double n = static_cast<double>(a.size());
  std::map<int, double> pa, pb;
  std::map<std::pair<int, int>, double> pab;
  for (std::size_t i = 0; i < a.size(); ++i) {
    pa[a[i]] += 1 / n;
    pb[b[i]] += 1 / n;
    pab[{a[i], b[i]}] += 1 / n;
  }
  double ha = 0, hb = 0, mi = 0;
  for (auto& [k, p] : pa) ha -= p * std::log(p);
  for (auto& [k, p] : pb) hb -= p * std::log(p);
  for (auto& [k, p] : pab) mi += p * std::log(p / (pa[k.first] * pb[k.second]));
  if (ha == 0 && hb == 0) return 1.0;
  return mi / ((ha + hb) / 2);
}

infer::FitConfig quick() {
  infer::FitConfig c;
  c.n_sweeps = 60;
  c.n_anneal = 1;
  return c;
}

}  // namespace

TEST(Nmi, IdentityRelabelAndIndependence) {
  const Partition a(std::vector<int>{0, 0, 1, 1, 2, 2});
  EXPECT_NEAR(timeseries::nmi(a, a), 1.0, 1e-12);
  EXPECT_NEAR(timeseries::nmi(a, Partition::from_labels(std::vector<int>{5, 5, 3, 3, 1, 1})), 1.0, 1e-12);
  EXPECT_NEAR(timeseries::nmi(Partition::trivial(4), Partition::trivial(4)), 1.0, 1e-12);
  const Partition x(std::vector<int>{0, 0, 1, 1}), y(std::vector<int>{0, 1, 0, 1});
  EXPECT_NEAR(timeseries::nmi(x, y), 0.0, 1e-12);
  EXPECT_THROW(timeseries::nmi(x, a), Error);
}

TEST(Nmi, MatchesOracle) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> g(0, 3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<int> a(15), b(15);
    for (auto& v : a) v = g(rng);
    for (auto& v : b) v = g(rng);
    const double got = timeseries::nmi(Partition::from_labels(a), Partition::from_labels(b));
    EXPECT_NEAR(got, oracle_nmi(a, b), 1e-12);
    EXPECT_GE(got, 0.0);
    EXPECT_LE(got, 1.0 + 1e-12);
  }
}

TEST(StrengthFilter, SmallestPrefixReachingShare) {
  // Strengths: n0 = 10 + 1, n1 = 10 + 2, n2 = 1 + 1, n3 = 2 + 1, total 2S = 28.
  const auto g = testing_support::make_graph(4, {{{0, 1, 10.0}, {2, 0, 1.0}, {1, 3, 2.0}, {3, 2, 1.0}}});
  EXPECT_EQ(timeseries::strength_filter(g, 12.0 / 28.0), (std::vector<std::string>{"n1"}));
  EXPECT_EQ(timeseries::strength_filter(g, 0.5), (std::vector<std::string>{"n1", "n0"}));
  EXPECT_EQ(timeseries::strength_filter(g, 1.0).size(), 4u);
  EXPECT_THROW(timeseries::strength_filter(g, 0.0), Error);
  EXPECT_THROW(timeseries::strength_filter(g, 1.5), Error);
}

TEST(Median, Midpoint) {
  EXPECT_EQ(timeseries::median({3, 1, 2}), 2.0);
  EXPECT_EQ(timeseries::median({4, 1, 2, 3}), 2.5);
  EXPECT_THROW(timeseries::median({}), Error);
}

TEST(OgbSizes, StrengthPerBin) {
  const auto g = testing_support::make_graph(3, {{{0, 1, 2.0}}, {{1, 2, 3.0}, {2, 0, 4.0}}, {{0, 2, 5.0}}});
  const auto bins = BinSet::from_bins({{0}, {1, 2}}, 3, BinningKind::kContiguous);
  const auto sizes = timeseries::ogb_sizes(g, bins);
  ASSERT_EQ(sizes.size(), 2u);
  EXPECT_EQ(sizes[0], 2.0);
  EXPECT_EQ(sizes[1], 12.0);
}

TEST(GroupStrengths, SplitIntoOutInAndInternal) {
  const auto g = testing_support::make_graph(3, {{{0, 1, 2.0}, {1, 2, 3.0}, {2, 0, 4.0}, {0, 0, 1.0}}});
  const Partition b(std::vector<int>{0, 0, 1});
  const auto gs = timeseries::group_strengths(g, b, BinSet::singletons(1));
  ASSERT_EQ(gs.size(), 1u);
  ASSERT_EQ(gs[0].size(), 2u);
  EXPECT_EQ(gs[0][0].s_internal, 3.0);
  EXPECT_EQ(gs[0][0].s_out, 3.0);
  EXPECT_EQ(gs[0][0].s_in, 4.0);
  EXPECT_EQ(gs[0][1].s_internal, 0.0);
  EXPECT_EQ(gs[0][1].s_out, 4.0);
  EXPECT_EQ(gs[0][1].s_in, 3.0);
}

TEST(InstrengthRatio, TopBanksPerBin) {
  const auto g = testing_support::make_graph(4, {{{0, 1, 10.0}, {2, 0, 1.0}}, {{1, 3, 2.0}, {3, 2, 1.0}}});
  const auto t = timeseries::instrength_ratio_table(g, BinSet::singletons(2), 0.5);
  ASSERT_EQ(t.size(), 2u);
  // Top two banks overall are n1 (12) and n0 (11).
  ASSERT_EQ(t[0].size(), 2u);
  for (const auto& r : t[0]) {
    if (r.id == "n0") {
      EXPECT_EQ(r.strength, 11.0);
      EXPECT_NEAR(r.ratio, 1.0 / 11.0, 1e-12);
    } else {
      EXPECT_EQ(r.id, "n1");
      EXPECT_EQ(r.ratio, 1.0);
    }
  }
  ASSERT_EQ(t[1].size(), 1u);
  EXPECT_EQ(t[1][0].id, "n1");
  EXPECT_EQ(t[1][0].ratio, 0.0);
}

TEST(YieldSummary, MediansMeansAndSpread) {
  std::vector<LoanRecord> r = {
      {"a", "b", 1, 100, MaturityClass::kUnder1d, 1.0},  {"a", "b", 1, 300, MaturityClass::kUnder1d, 2.0},
      {"a", "b", 1, 50, MaturityClass::k2To7d, 3.0},     {"a", "b", 1, 10, MaturityClass::k1To3y, 6.0},
      {"a", "b", 1, 10, MaturityClass::kOver3y, 8.0},    {"a", "b", 1, 10, MaturityClass::kOver3y, std::nullopt}};
  const auto y = timeseries::yield_summary(r);
  EXPECT_EQ(*y.median[0], 1.5);
  EXPECT_NEAR(*y.volume_weighted_mean[0], 1.75, 1e-12);
  EXPECT_EQ(y.rated[7], 1u);
  EXPECT_FALSE(y.median[2]);
  // Pooled long {6, 8} -> 7, pooled short {1, 2, 3} -> 2.
  EXPECT_EQ(*y.spread, 5.0);
  r.resize(3);
  EXPECT_FALSE(timeseries::yield_summary(r).spread);
}

TEST(RunSeries, SeedsPerMonthAndOrdering) {
  auto spec = synth::PlantedSpec::uniform_weights({8, 8}, {0, 0, 1}, {{30, 3, 3, 30}, {3, 30, 30, 3}}, 3.0, 0.5);
  spec.layer_labels = {"x", "y", "z"};
  const auto series = synth::sample_series(spec, {2, 1, 3}, 5);
  const auto s = timeseries::run_series(series.months, quick());
  ASSERT_EQ(s.fits.size(), 3u);
  EXPECT_TRUE(s.errors.empty());
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& f = s.fits[k];
    EXPECT_EQ(f.month, static_cast<int>(k) + 1);
    EXPECT_EQ(f.fit.seed, quick().seed);
    EXPECT_EQ(f.active_banks, series.months.at(f.month).num_nodes());
    EXPECT_EQ(f.b_count, f.fit.partition.num_groups());
    EXPECT_LE(f.log10_vs_differentiation, 0.0);
    EXPECT_LE(f.log10_vs_aggregation, 0.0);
  }
  auto cfg = quick();
  cfg.jobs = 2;
  const auto again = timeseries::run_series(series.months, cfg);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(again.fits[k].fit.partition, s.fits[k].fit.partition);
    EXPECT_EQ(again.fits[k].fit.dl.total, s.fits[k].fit.dl.total);
  }
}

TEST(ConsecutiveNmi, UsesFilteredCommonBanks) {
  auto spec = synth::PlantedSpec::uniform_weights({12, 12}, {0}, {{100, 2, 2, 100}}, 3.0, 0.5);
  spec.layer_labels = {"x"};
  const auto series = synth::sample_series(spec, {1, 2, 4}, 9);
  const auto s = timeseries::run_series(series.months, quick());
  const auto pts = timeseries::consecutive_nmi(series.months, s.fits, 1.0);
  ASSERT_EQ(pts.size(), 1u);  // month 3 is missing
  EXPECT_EQ(pts[0].month, 2);
  EXPECT_GT(pts[0].banks, 0u);
  EXPECT_NEAR(pts[0].nmi, 1.0, 1e-9);
}
