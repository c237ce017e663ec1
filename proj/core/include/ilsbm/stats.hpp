#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "ilsbm/netcore.hpp"

namespace ilsbm::stats {

// A single layer as a plain directed multigraph over local indices
// 0..num_nodes-1. `ids` maps local indices back to the source graph.
struct LayerView {
  std::size_t num_nodes = 0;
  std::vector<std::pair<NodeIndex, NodeIndex>> edges;
  std::vector<NodeIndex> ids;

  // All nodes kept, including isolated ones.
  static LayerView from_edges(std::size_t num_nodes, std::vector<std::pair<NodeIndex, NodeIndex>> edges);
};

// Restricted to the nodes with at least one edge in `layer`.
LayerView view_of(const LayeredMultigraph& g, std::size_t layer);
// All layers pooled; nodes active in any of them.
LayerView pooled_view(const LayeredMultigraph& g);

double directed_density(const LayerView& v);

struct DegreeSummary {
  std::vector<std::int64_t> in_degrees, out_degrees, total_degrees;
  // Fraction of nodes whose total degree is at least k, for k = 0 and every
  // observed total degree.
  std::map<std::int64_t, double> ccdf;
};
DegreeSummary degree_summary(const LayerView& v);
// ccdf of an arbitrary degree sequence, same convention as above.
std::map<std::int64_t, double> ccdf_of(const std::vector<std::int64_t>& degrees);

// Weibull fit p(k) ~ exp(-(lambda k)^beta).
struct StretchedExpFit {
  double lambda = 0.0;
  double beta = 0.0;
  double stderr_lambda = 0.0;
  double stderr_beta = 0.0;
  double rss = 0.0;  // on log10 ccdf over observed values
  std::size_t n = 0;
  bool fat_tail = false;  // 0 < beta <= 1
};
inline constexpr std::size_t kMinFitSamples = 50;
StretchedExpFit fit_stretched_exponential(const std::vector<double>& samples);
StretchedExpFit fit_stretched_exponential(const std::vector<std::int64_t>& degrees);

struct ClusteringReport {
  double c_observed = 0.0;
  double c_null_mean = 0.0;
  double c_null_sd = 0.0;
  double z = 0.0;  // NaN when c_null_sd == 0
  int n_null = 0;
};
// Mean local clustering of the undirected simple view over all nodes.
double clustering(const LayerView& v);
ClusteringReport clustering_with_null(const LayerView& v, int n_null, std::uint64_t seed, int jobs = 1);

struct PathLength {
  double mean = 0.0;
  std::size_t lcc_size = 0;
};
PathLength avg_shortest_path_lcc(const LayerView& v);

// Mean and sample sd of the LCC path length of G(N, E) graphs matching v.
struct NullPathLength {
  double mean = 0.0;
  double sd = 0.0;
  int n_null = 0;
};
NullPathLength null_path_length(const LayerView& v, int n_null, std::uint64_t seed, int jobs = 1);

struct ComponentStats {
  std::size_t n_weak = 0;
  std::size_t n_strong = 0;
  double lcc_weak_frac = 0.0;
  double lcc_strong_frac = 0.0;
};
ComponentStats component_stats(const LayerView& v);

double degree_assortativity(const LayerView& v);

struct KendallW {
  double w = 0.0;
  double p = 0.0;
};
// Two judges scoring the same n items (aligned by position). Scores are
// converted to midranks.
KendallW kendall_w(const std::vector<double>& a, const std::vector<double>& b);
// General form: rows are judges.
KendallW kendall_w(const std::vector<std::vector<double>>& scores);

struct ActivityReport {
  std::vector<int> activity;        // B_i per node of g
  std::map<int, std::size_t> histogram;
  double mean = 0.0;
};
ActivityReport total_activity(const LayeredMultigraph& g);

struct JointDegree {
  NodeIndex node = 0;  // index in the source graph
  std::int64_t in = 0;
  std::int64_t out = 0;
};
std::vector<JointDegree> joint_degree_table(const LayerView& v);

// G(N, M) in the undirected sense: M distinct unordered pairs without
// self-loops, each stored as one directed edge.
LayerView erdos_renyi(std::size_t n, std::size_t m, std::uint64_t seed);

// Number of distinct unordered non-loop pairs joined by at least one edge.
std::size_t undirected_edge_count(const LayerView& v);

}  // namespace ilsbm::stats
