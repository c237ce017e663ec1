#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "ilsbm/block_state.hpp"
#include "ilsbm/sbm.hpp"
#include "oracle/oracle.hpp"
#include "support.hpp"

using namespace ilsbm;
using sbm::Partition;
using testing_support::make_graph;

namespace {

LayeredMultigraph graph_from_matrix(int n, const std::vector<int>& a) {
  testing_support::EdgeList edges;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < a[i * n + j]; ++k) edges.emplace_back(i, j, 1.0);
    }
  }
  return make_graph(n, {edges});
}

LayeredMultigraph random_weighted(int n, int m, int layers, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> node(0, n - 1);
  std::lognormal_distribution<double> w(1.0, 1.0);
  std::vector<testing_support::EdgeList> ls(layers);
  for (auto& l : ls) {
    for (int k = 0; k < m; ++k) l.emplace_back(node(rng), node(rng), w(rng));
  }
  return make_graph(n, ls);
}

oracle::Layer oracle_layer(const LayeredMultigraph& g, int layer) { return oracle::layer_of(g, {layer}); }

std::vector<int> random_labels(int n, int B, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> g(0, B - 1);
  std::vector<int> out(n);
  for (int i = 0; i < n; ++i) out[i] = i < B ? i : g(rng);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

}  // namespace

TEST(PartitionType, CompactsAndCanonicalises) {
  const std::vector<int> labels = {5, 2, 5, 9};
  const auto p = Partition::from_labels(labels);
  EXPECT_EQ(p.assignment(), (std::vector<int>{1, 0, 1, 2}));
  EXPECT_EQ(p.canonical().assignment(), (std::vector<int>{0, 1, 0, 2}));
  EXPECT_THROW(Partition(std::vector<int>{0, 2}), Error);
  EXPECT_THROW(Partition(std::vector<int>{-1}), Error);
}

TEST(DlPartition, SmallValues) {
  EXPECT_EQ(sbm::dl_partition(Partition::trivial(1)), 0.0);
  EXPECT_NEAR(sbm::dl_partition(Partition::trivial(2)), 1.0, 1e-12);
}

TEST(DlPartition, PriorSumsToOneOverLabelledPartitions) {
  for (int n = 1; n <= 6; ++n) {
    double total = 0.0;
    for (const auto& rgs : oracle::set_partitions(n)) {
      const int B = oracle::groups_of(rgs);
      const double p = std::exp2(-sbm::dl_partition(Partition(rgs)));
      EXPECT_NEAR(p, std::exp2(-oracle::partition_bits(rgs)), 1e-14);
      total += std::tgamma(B + 1.0) * p;  // every labelling of the same groups
    }
    EXPECT_NEAR(total, 1.0, 1e-10) << "n = " << n;
  }
}

TEST(DlEdgeMatrix, ValuesAndNormalisation) {
  EXPECT_NEAR(sbm::dl_edge_matrix(1, 3), 0.0, 1e-12);
  EXPECT_EQ(sbm::dl_edge_matrix(3, 0), 0.0);
  double total = 0.0;
  for (const auto& m : oracle::count_matrices(2, 3)) {
    std::vector<std::int64_t> e(m.begin(), m.end());
    total += std::exp2(-sbm::dl_edge_matrix(e, 2));
  }
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_THROW(sbm::dl_edge_matrix(std::vector<std::int64_t>{1, -1, 0, 0}, 2), Error);
}

TEST(DlDegrees, ForcedAndSmallCase) {
  const auto g = make_graph(2, {{{0, 1, 1.0}}});
  EXPECT_EQ(sbm::dl_degrees(sbm::BlockState::from_layer(g, 0, Partition::singletons(2))), 0.0);
  EXPECT_NEAR(sbm::dl_degrees(sbm::BlockState::from_layer(g, 0, Partition::trivial(2))), 2.0, 1e-12);
}

TEST(DlDegrees, SumsToOneOverDegreeSequences) {
  // One group of n nodes with fixed stub totals: sum over all out- and
  // in-degree sequences.
  for (int n = 1; n <= 4; ++n) {
    for (int e = 0; e <= 4; ++e) {
      double total = 0.0;
      std::vector<std::vector<int>> comps;
      std::function<void(std::vector<int>&, int, int)> rec = [&](std::vector<int>& c, int i, int left) {
        if (i + 1 == n) {
          c[i] = left;
          comps.push_back(c);
          return;
        }
        for (int k = 0; k <= left; ++k) {
          c[i] = k;
          rec(c, i + 1, left - k);
        }
      };
      std::vector<int> c(n);
      rec(c, 0, e);
      for (const auto& ko : comps) {
        for (const auto& ki : comps) {
          sbm::BlockState bs;
          bs.num_groups = 1;
          bs.e_rs = {e};
          bs.e_out = {e};
          bs.e_in = {e};
          bs.n_r = {n};
          bs.k_out.assign(ko.begin(), ko.end());
          bs.k_in.assign(ki.begin(), ki.end());
          total += std::exp2(-sbm::dl_degrees(bs));
        }
      }
      EXPECT_NEAR(total, 1.0, 1e-10) << "n = " << n << " e = " << e;
    }
  }
}

TEST(DlAdjacency, UniqueGraphAndEmpty) {
  const auto g = make_graph(2, {{{0, 1, 1.0}}});
  const auto b = Partition::trivial(2);
  EXPECT_NEAR(sbm::dl_adjacency(g, 0, b, sbm::BlockState::from_layer(g, 0, b)), 0.0, 1e-12);
  const auto e = make_graph(3, {{}});
  EXPECT_EQ(sbm::dl_adjacency(e, 0, Partition::trivial(3), sbm::BlockState::from_layer(e, 0, Partition::trivial(3))), 0.0);
}

TEST(DlAdjacency, NormalisedOverMultigraphsWithFixedDegrees) {
  // For every partition shape and E <= 4, group all multigraphs on N <= 4
  // nodes by their (k, e) signature; each class must carry probability 1.
  for (int n = 2; n <= 4; ++n) {
    for (const auto& rgs : {std::vector<int>(n, 0), [&] {
                              std::vector<int> v(n);
                              for (int i = 0; i < n; ++i) v[i] = i % 2;
                              return v;
                            }()}) {
      const Partition b(rgs);
      for (int e = 1; e <= (n == 4 ? 3 : 4); ++e) {
        std::map<std::vector<std::int64_t>, double> mass;
        for (const auto& a : oracle::count_matrices(n, e)) {
          const auto g = graph_from_matrix(n, a);
          const auto bs = sbm::BlockState::from_layer(g, 0, b);
          std::vector<std::int64_t> key = bs.e_rs;
          key.insert(key.end(), bs.k_out.begin(), bs.k_out.end());
          key.insert(key.end(), bs.k_in.begin(), bs.k_in.end());
          mass[key] += std::exp2(-sbm::dl_adjacency(g, 0, b, bs));
        }
        for (const auto& [key, m] : mass) EXPECT_NEAR(m, 1.0, 1e-10) << "n = " << n << " e = " << e;
      }
    }
  }
}

TEST(DlWeights, EmptyPairAndSingleUnitWeight) {
  EXPECT_EQ(sbm::dl_weights(make_graph(2, {{}}), 0, Partition::trivial(2)), 0.0);
  const auto g = make_graph(2, {{{0, 1, 1.0}}});
  const double bits = sbm::dl_weights(g, 0, Partition::trivial(2));
  // Student-t with one degree of freedom and scale sqrt(2), at its centre.
  EXPECT_NEAR(bits, std::log2(M_PI * std::sqrt(2.0)), 1e-12);
  EXPECT_NEAR(bits, oracle::weight_bits(oracle_layer(g, 0), {0, 0}, {}, true), 1e-6);
}

TEST(DlWeights, PermutationInvariant) {
  const auto a = make_graph(3, {{{0, 1, 2.0}, {0, 1, 7.5}, {1, 2, 0.3}}});
  const auto b = make_graph(3, {{{1, 2, 0.3}, {0, 1, 7.5}, {0, 1, 2.0}}});
  const auto p = Partition(std::vector<int>{0, 0, 1});
  EXPECT_NEAR(sbm::dl_weights(a, 0, p), sbm::dl_weights(b, 0, p), 1e-12);
}

TEST(DlWeights, MatchesQuadratureAndPredictiveOracles) {
  std::mt19937_64 rng(2);
  for (int rep = 0; rep < 6; ++rep) {
    const auto g = random_weighted(4, 4, 1, 100 + rep);
    const auto labels = random_labels(4, 2, rng);
    const Partition p(oracle::canonical(labels));
    const auto ol = oracle_layer(g, 0);
    const double lib = sbm::dl_weights(g, 0, p);
    EXPECT_NEAR(lib, oracle::weight_bits(ol, p.assignment()), 1e-9);
    EXPECT_NEAR(lib, oracle::weight_bits(ol, p.assignment(), {}, true), 1e-5);
  }
  sbm::WeightPrior prior{0.5, 2.0, 3.0, 0.7};
  const auto g = random_weighted(3, 5, 1, 9);
  const oracle::Prior op{0.5, 2.0, 3.0, 0.7};
  EXPECT_NEAR(sbm::dl_weights(g, 0, Partition::trivial(3), prior),
              oracle::weight_bits(oracle_layer(g, 0), {0, 0, 0}, op, true), 1e-5);
}

TEST(DescriptionLength, EmptySingleNodeIsZero) {
  const auto g = make_graph(1, {{}});
  EXPECT_EQ(sbm::description_length(g, 0, Partition::trivial(1)).total, 0.0);
}

TEST(DescriptionLength, MatchesOracleTermByTerm) {
  std::mt19937_64 rng(4);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 3 + rep % 6;
    const auto g = random_weighted(n, 4 + rep, 1, rep);
    const Partition p(oracle::canonical(random_labels(n, 1 + rep % 3, rng)));
    const auto d = sbm::description_length(g, 0, p);
    const auto o = oracle::layer_bits(oracle_layer(g, 0), p.assignment());
    EXPECT_NEAR(d.bits_partition, oracle::partition_bits(p.assignment()), 1e-9);
    EXPECT_NEAR(d.bits_edge_matrix, o.edge_matrix, 1e-9);
    EXPECT_NEAR(d.bits_degrees, o.degrees, 1e-9);
    EXPECT_NEAR(d.bits_adjacency, o.adjacency, 1e-9);
    EXPECT_NEAR(d.bits_weights, o.weights, 1e-9);
    EXPECT_NEAR(d.total, d.data_bits() + d.model_bits(), 1e-9);
  }
}

TEST(DescriptionLength, LabelInvariance) {
  const auto g = random_weighted(7, 20, 1, 5);
  const Partition a(std::vector<int>{0, 0, 1, 1, 2, 2, 0});
  const auto b = Partition::from_labels(std::vector<int>{2, 2, 0, 0, 1, 1, 2});
  const auto da = sbm::description_length(g, 0, a), db = sbm::description_length(g, 0, b);
  EXPECT_EQ(da.total, db.total);
  EXPECT_EQ(da.bits_weights, db.bits_weights);
}

TEST(DescriptionLength, PlantedTwoBlocksBeatOneGroup) {
  // Two dense assortative triads with a single bridge.
  testing_support::EdgeList e;
  for (int block = 0; block < 2; ++block) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        if (i != j) {
          for (int k = 0; k < 3; ++k) e.emplace_back(3 * block + i, 3 * block + j, 1.0);
        }
      }
    }
  }
  const auto g = make_graph(6, {e});
  const Partition planted(std::vector<int>{0, 0, 0, 1, 1, 1});
  const double planted_bits = sbm::description_length(g, 0, planted).total;
  EXPECT_LT(planted_bits, sbm::description_length(g, 0, Partition::trivial(6)).total);
  double best = planted_bits;
  std::vector<int> arg;
  for (const auto& rgs : oracle::set_partitions(6)) {
    const double bits = sbm::description_length(g, 0, Partition(rgs)).total;
    if (bits < best - 1e-9) {
      best = bits;
      arg = rgs;
    }
  }
  EXPECT_TRUE(arg.empty()) << "a partition beats the planted one";
}

TEST(BlockState, ConsistencyIdentities) {
  const auto g = random_weighted(9, 30, 1, 6);
  const Partition p(std::vector<int>{0, 1, 2, 0, 1, 2, 0, 1, 2});
  const auto bs = sbm::BlockState::from_layer(g, 0, p);
  EXPECT_NO_THROW(bs.check_consistency(p));
  EXPECT_EQ(bs.num_edges(), 30);
  auto broken = bs;
  broken.k_out[0] += 1;
  EXPECT_THROW(broken.check_consistency(p), Error);
}

TEST(LayeredBlockState, IncrementalMovesMatchFullRecomputation) {
  std::mt19937_64 rng(8);
  const auto g = random_weighted(12, 25, 3, 7);
  LayeredBlockState st(g, Partition(oracle::canonical(random_labels(12, 4, rng))));
  auto full = [&] {
    const auto p = st.partition();
    double s = sbm::dl_partition(p);
    for (std::size_t l = 0; l < 3; ++l) s += sbm::description_length(g, l, p).total - sbm::dl_partition(p);
    return s;
  };
  EXPECT_NEAR(st.entropy_bits(), full(), 1e-9);
  std::uniform_int_distribution<int> node(0, 11), group(0, 11);
  int checked = 0;
  for (int step = 0; step < 300; ++step) {
    const NodeIndex i = static_cast<NodeIndex>(node(rng));
    const int to = step % 3 == 0 ? group(rng) : st.group_of(static_cast<NodeIndex>(node(rng)));
    if (to == st.group_of(i)) continue;
    const double before = st.entropy_bits();
    const double delta = st.move_delta_bits(i, to);
    st.move(i, to);
    EXPECT_NEAR(st.entropy_bits() - before, delta, 1e-9);
    EXPECT_NEAR(st.entropy_bits(), full(), 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 200);
}

TEST(LayeredBlockState, MergeDeltaMatchesRecomputation) {
  std::mt19937_64 rng(9);
  const auto g = random_weighted(10, 30, 2, 3);
  const Partition p(oracle::canonical(random_labels(10, 4, rng)));
  LayeredBlockState st(g, p);
  for (int r = 0; r < 4; ++r) {
    for (int s = 0; s < 4; ++s) {
      if (r == s) continue;
      std::vector<int> merged = p.assignment();
      for (int& x : merged) {
        if (x == s) x = r;
      }
      const LayeredBlockState after(g, Partition::from_labels(merged));
      EXPECT_NEAR(st.merge_delta_bits(r, s), after.entropy_bits() - st.entropy_bits(), 1e-9);
    }
  }
}

TEST(LayeredBlockState, WeightOnlyChangesAreTracked) {
  // Moving a node between groups whose edge counts to a neighbour group are
  // unchanged still alters the weight statistics of that cell.
  const auto g = make_graph(4, {{{0, 2, 1.0}, {1, 3, 50.0}, {0, 1, 2.0}, {1, 0, 3.0}}});
  LayeredBlockState st(g, Partition(std::vector<int>{0, 1, 2, 2}));
  const double before = st.entropy_bits();
  const double delta = st.move_delta_bits(0, 1);
  st.move(0, 1);
  EXPECT_NEAR(st.entropy_bits() - before, delta, 1e-9);
  EXPECT_NEAR(st.entropy_bits(), LayeredBlockState(g, st.partition()).entropy_bits(), 1e-9);
}
