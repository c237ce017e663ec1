#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "ilsbm/block_state.hpp"
#include "ilsbm/layered.hpp"
#include "ilsbm/netcore.hpp"
#include "ilsbm/sbm.hpp"

namespace ilsbm::infer {

inline constexpr double kGreedy = std::numeric_limits<double>::infinity();

struct FitConfig {
  std::uint64_t seed = 1;
  // Metropolis sweep budget for one granularity, spread over the
  // agglomeration levels (at least one sweep per level).
  int n_sweeps = 1000;
  // Independent restarts; the lowest description length wins.
  int n_anneal = 5;
  // Inverse temperature ramps geometrically from beta_start to beta_end over
  // the sweeps of each level; every level ends with greedy sweeps.
  double beta_start = 1.0;
  double beta_end = 10.0;
  BinningKind binning_kind = BinningKind::kContiguous;
  // Upper bound on retained trace points.
  int samples = 10000;
  // Group count shrinks by this factor per agglomeration level.
  double merge_ratio = 1.5;
  // Probability of a uniform group proposal instead of a neighbour's group.
  double proposal_mix = 0.1;
  int jobs = 1;
  sbm::WeightPrior prior;

  void validate() const;
};

struct TracePoint {
  std::int64_t step = 0;
  double bits = 0.0;
};

struct PartitionFit {
  sbm::Partition partition;
  double bits = 0.0;
  std::vector<TracePoint> trace;
};

struct FitResult {
  sbm::Partition partition;
  BinSet bins;
  layered::LayeredDl dl;
  std::vector<TracePoint> trace;
  std::uint64_t seed = 0;
  std::uint64_t graph_digest = 0;
};

// Single-node Metropolis-Hastings over partitions with a fixed number of
// groups. Proposals pick the group of a random neighbour with probability
// 1 - mix and a uniformly random group otherwise; moves that would empty a
// group are rejected. At beta = 1 the chain is reversible with respect to
// 2^-DL restricted to partitions with the initial group count.
class PartitionSampler {
 public:
  PartitionSampler(const LayeredMultigraph& g, const sbm::Partition& initial, std::uint64_t seed,
                   const sbm::WeightPrior& prior = {}, double proposal_mix = 0.1);

  // One pass over all nodes in index order. beta = kGreedy accepts only
  // strict improvements. Returns the number of accepted moves.
  std::size_t sweep(double beta);

  double bits() const noexcept { return bits_; }
  const std::vector<int>& assignment() const noexcept { return state_.assignment(); }
  sbm::Partition partition() const { return state_.partition(); }
  const LayeredBlockState& state() const noexcept { return state_; }

 private:
  double proposal_probability(NodeIndex i, int target, int group_of_i) const;

  LayeredBlockState state_;
  std::mt19937_64 rng_;
  double mix_;
  double bits_;
};

// Agglomerative search for the minimum description length partition of an
// already binned graph (every layer is one bin). Deterministic given
// config.seed.
PartitionFit fit_partition(const LayeredMultigraph& binned, const FitConfig& config);

// Fits the partition on merge_layers(g, bins) and reports the full layered
// description length on g.
FitResult fit_binning(const LayeredMultigraph& g, const BinSet& bins, const FitConfig& config);

struct GranularitySearch {
  FitResult og;
  // Accepted bin sets from complete differentiation to complete aggregation.
  std::vector<FitResult> path;
  // Every bin set that was fitted, in evaluation order.
  std::vector<FitResult> evaluated;
};

// Agglomerative bin merging from singleton bins to one bin; the bin set with
// the lowest total description length on the path is the optimal granularity.
GranularitySearch search_granularity(const LayeredMultigraph& g, const FitConfig& config);
FitResult infer_og(const LayeredMultigraph& g, const FitConfig& config);

// log10 of the posterior odds ratio of fit a over fit b; positive favours a.
double posterior_odds(const FitResult& a, const FitResult& b);

struct RejectReport {
  FitResult og;
  FitResult differentiation;
  FitResult aggregation;
  double log10_vs_differentiation = 0.0;
  double log10_vs_aggregation = 0.0;
};

RejectReport reject_report(const LayeredMultigraph& g, const FitConfig& config);
RejectReport reject_report(const GranularitySearch& search);

// splitmix64 of a combined with b; used to derive independent seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept;

}  // namespace ilsbm::infer
