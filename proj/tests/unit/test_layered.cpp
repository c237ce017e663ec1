#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <random>

#include "ilsbm/layered.hpp"
#include "oracle/oracle.hpp"
#include "support.hpp"

using namespace ilsbm;
using sbm::Partition;

namespace {

LayeredMultigraph random_layers(int n, int layers, int max_edges, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> node(0, n - 1), count(0, max_edges);
  std::lognormal_distribution<double> w(2.0, 1.5);
  std::vector<testing_support::EdgeList> ls(layers);
  for (auto& l : ls) {
    const int m = count(rng);
    for (int k = 0; k < m; ++k) l.emplace_back(node(rng), node(rng), w(rng));
  }
  return testing_support::make_graph(n, ls);
}

}  // namespace

TEST(ExtensionTerm, SmallExamples) {
  const std::vector<std::int64_t> counts = {1, 1, 5};
  EXPECT_NEAR(layered::extension_term(counts, BinSet::singletons(3)), 0.0, 1e-12);
  const auto pair = BinSet::from_bins({{0, 1}, {2}}, 3, BinningKind::kContiguous);
  EXPECT_NEAR(layered::extension_term(counts, pair), 1.0 + std::log2(3.0), 1e-12);
  const std::vector<std::int64_t> none = {0, 0, 0};
  EXPECT_NEAR(layered::extension_term(none, BinSet::aggregate(3)), 0.0, 1e-12);
}

TEST(ExtensionTerm, ParallelEdgesOfOnePairAreInterchangeable) {
  const auto apart = testing_support::make_graph(3, {{{0, 1, 1.0}}, {{1, 2, 1.0}}});
  const auto together = testing_support::make_graph(3, {{{0, 1, 1.0}}, {{0, 1, 1.0}}, {{1, 2, 1.0}}});
  EXPECT_NEAR(layered::extension_term(apart, BinSet::aggregate(2)), 1.0 + std::log2(3.0), 1e-12);
  const auto pair = BinSet::from_bins({{0, 1}, {2}}, 3, BinningKind::kContiguous);
  EXPECT_NEAR(layered::extension_term(together, pair), std::log2(3.0), 1e-12);
}

TEST(ExtensionTerm, GraphFormAgainstOracleAndCountBound) {
  const auto g = random_layers(4, 4, 6, 1);
  std::vector<std::int64_t> counts;
  for (std::size_t l = 0; l < 4; ++l) counts.push_back(static_cast<std::int64_t>(g.num_edges(l)));
  for (const auto& bins : oracle::all_binnings(4)) {
    const auto bs = BinSet::from_bins(bins, 4, BinningKind::kNonContiguous);
    EXPECT_LE(layered::extension_term(g, bs), layered::extension_term(counts, bs) + 1e-12);
    EXPECT_GE(layered::extension_term(g, bs), 0.0);
    EXPECT_NEAR(layered::extension_term(g, bs), oracle::extension_bits(g, bins), 1e-9);
  }
}

TEST(ExtensionTerm, NormalisedOverDistinctLayeredGraphs) {
  // Fix a binned multigraph and spread its edges over m layers in every
  // possible way; each distinct layered graph counts once.
  const std::vector<std::pair<int, int>> edges = {{0, 1}, {0, 1}, {1, 2}, {0, 1}, {2, 0}};
  for (int m = 2; m <= 3; ++m) {
    std::set<std::vector<std::tuple<int, int, int>>> seen;
    double total = 0.0;
    std::vector<int> lab(edges.size(), 0);
    for (;;) {
      std::vector<std::tuple<int, int, int>> key;
      std::vector<testing_support::EdgeList> layers(m);
      for (std::size_t k = 0; k < edges.size(); ++k) {
        key.emplace_back(lab[k], edges[k].first, edges[k].second);
        layers[lab[k]].emplace_back(edges[k].first, edges[k].second, 1.0);
      }
      std::sort(key.begin(), key.end());
      if (seen.insert(key).second) {
        total += std::exp2(-layered::extension_term(testing_support::make_graph(3, layers), BinSet::aggregate(m)));
      }
      std::size_t k = 0;
      while (k < lab.size() && ++lab[k] == m) lab[k++] = 0;
      if (k == lab.size()) break;
    }
    EXPECT_NEAR(total, 1.0, 1e-10) << "m = " << m;
  }
}

TEST(ExtensionTerm, NormalisedOverLayerLabellings) {
  // Given E edges in one bin of m layers, summing 2^-bits over every way of
  // labelling each edge with a layer gives one.
  for (int m = 1; m <= 4; ++m) {
    for (int e = 0; e <= 5; ++e) {
      double total = 0.0;
      std::vector<int> lab(e, 0);
      for (;;) {
        std::vector<std::int64_t> counts(m, 0);
        for (int x : lab) ++counts[x];
        total += std::exp2(-layered::extension_term(counts, BinSet::aggregate(m)));
        int k = 0;
        while (k < e && ++lab[k] == m) lab[k++] = 0;
        if (k == e) break;
      }
      EXPECT_NEAR(total, 1.0, 1e-10) << "m = " << m << " e = " << e;
    }
  }
}

TEST(BinsetPrior, ValuesAndNormalisation) {
  EXPECT_EQ(layered::binset_prior(BinningKind::kContiguous, 1, 1), 0.0);
  EXPECT_NEAR(layered::binset_prior(BinningKind::kContiguous, 2, 8), 3.0 + std::log2(7.0), 1e-12);
  EXPECT_NEAR(layered::binset_prior(BinningKind::kNonContiguous, 2, 8), 3.0 + std::log2(127.0), 1e-12);
  for (int L = 1; L <= 8; ++L) {
    for (auto kind : {BinningKind::kContiguous, BinningKind::kNonContiguous}) {
      const bool contiguous = kind == BinningKind::kContiguous;
      double total = 0.0;
      for (const auto& bins : contiguous ? oracle::contiguous_binnings(L) : oracle::all_binnings(L)) {
        const auto bs = BinSet::from_bins(bins, L, kind);
        const double bits = layered::binset_prior(bs);
        EXPECT_NEAR(bits, oracle::binset_prior_bits(L, static_cast<int>(bins.size()), contiguous), 1e-9);
        total += std::exp2(-bits);
      }
      EXPECT_NEAR(total, 1.0, 1e-10) << "L = " << L;
    }
  }
}

TEST(LayeredDl, MatchesOracleForEveryBinning) {
  std::mt19937_64 rng(3);
  for (int rep = 0; rep < 4; ++rep) {
    const auto g = random_layers(7, 4, 8, 10 + rep);
    std::uniform_int_distribution<int> grp(0, 2);
    std::vector<int> labels(7);
    for (int& x : labels) x = grp(rng);
    const auto b = oracle::canonical(labels);
    for (const auto& bins : oracle::all_binnings(4)) {
      const auto bs = BinSet::from_bins(bins, 4, BinningKind::kNonContiguous);
      const auto d = layered::layered_dl(g, Partition(b), bs);
      EXPECT_NEAR(d.total, oracle::layered_total(g, b, bins, false), 1e-8);
      EXPECT_NEAR(d.total, d.data_bits() + d.model_bits(), 1e-9);
      EXPECT_EQ(d.per_bin.size(), bins.size());
      for (const auto& pb : d.per_bin) EXPECT_EQ(pb.bits_partition, 0.0);
    }
  }
}

TEST(LayeredDl, AggregateEqualsCollapsedSingleLayer) {
  const auto g = random_layers(8, 3, 10, 5);
  const Partition b(std::vector<int>{0, 0, 1, 1, 2, 2, 0, 1});
  const auto d = layered::layered_dl(g, b, BinSet::aggregate(3));
  const auto single = sbm::description_length(collapse(g), 0, b);
  EXPECT_NEAR(d.total, single.total + d.extension_bits + std::log2(3.0), 1e-9);
  EXPECT_NEAR(d.binset_prior_bits, std::log2(3.0), 1e-12);
}

TEST(LayeredDl, SingleLayerHasNoLayeringOverhead) {
  const auto g = random_layers(5, 1, 6, 8);
  const Partition b(std::vector<int>{0, 1, 0, 1, 1});
  const auto d = layered::layered_dl(g, b, BinSet::singletons(1));
  EXPECT_EQ(d.extension_bits, 0.0);
  EXPECT_EQ(d.binset_prior_bits, 0.0);
  EXPECT_NEAR(d.total, sbm::description_length(g, 0, b).total, 1e-12);
}

TEST(LayeredDl, RejectsMismatchedInputs) {
  const auto g = random_layers(4, 2, 3, 2);
  EXPECT_THROW(layered::layered_dl(g, Partition::trivial(3), BinSet::aggregate(2)), Error);
  EXPECT_THROW(layered::layered_dl(g, Partition::trivial(4), BinSet::aggregate(3)), Error);
}

TEST(LayeredDl, BinOrderDoesNotMatter) {
  const auto g = random_layers(6, 4, 6, 4);
  const Partition b(std::vector<int>{0, 1, 1, 0, 2, 2});
  const auto x = BinSet::from_bins({{0, 2}, {1, 3}}, 4, BinningKind::kNonContiguous);
  const auto y = BinSet::from_bins({{3, 1}, {2, 0}}, 4, BinningKind::kNonContiguous);
  EXPECT_NEAR(layered::layered_dl(g, b, x).total, layered::layered_dl(g, b, y).total, 1e-12);
}
