#pragma once

// Description length of the directed, microcanonical, degree-corrected SBM
// with log-normal edge weights on a single layer.
//
// All quantities are returned in bits. Internally everything is accumulated as
// natural-log terms (log-gamma) and converted once.

#include <cstdint>
#include <span>
#include <vector>

#include "ilsbm/netcore.hpp"

namespace ilsbm::sbm {

inline constexpr double kLn2 = 0.69314718055994530942;

double log_factorial(double n);
// ln C(n, k)
double log_binomial(double n, double k);
// ln of the number of multisets of size k from n kinds, C(n + k - 1, k).
// By convention ((0, 0)) = 1.
double log_multiset(double n, double k);
// ln S(n, k), Stirling number of the second kind, exact for n <= 64.
double log_stirling2(int n, int k);

// Node-to-group assignment with groups 0..B-1, all nonempty.
class Partition {
 public:
  Partition() = default;
  // Throws if some label in 0..max is unused or a label is negative.
  explicit Partition(std::vector<int> assignment);
  // Accepts arbitrary non-negative labels and compacts them preserving the
  // order of label values.
  static Partition from_labels(std::span<const int> labels);
  static Partition trivial(std::size_t n) { return Partition(std::vector<int>(n, 0)); }
  static Partition singletons(std::size_t n);

  std::size_t size() const noexcept { return assignment_.size(); }
  std::size_t num_groups() const noexcept { return num_groups_; }
  int operator[](std::size_t i) const { return assignment_[i]; }
  const std::vector<int>& assignment() const noexcept { return assignment_; }
  std::vector<std::int64_t> group_sizes() const;

  // Relabelled so groups appear in order of their first member.
  Partition canonical() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<int> assignment_;
  std::size_t num_groups_ = 0;
};

// Sufficient statistics of one layer under a partition.
struct BlockState {
  std::size_t num_groups = 0;
  std::vector<std::int64_t> e_rs;  // row-major B x B
  std::vector<std::int64_t> e_out, e_in;
  std::vector<std::int64_t> k_out, k_in;
  std::vector<std::int64_t> n_r;

  static BlockState from_layer(const LayeredMultigraph& g, std::size_t layer, const Partition& b);

  std::int64_t num_edges() const noexcept;
  std::int64_t at(std::size_t r, std::size_t s) const { return e_rs[r * num_groups + s]; }
  // Throws Error describing the first violated identity.
  void check_consistency(const Partition& b) const;
};

// Normal / inverse-chi-squared prior on the log-weights of one group pair.
struct WeightPrior {
  double mu0 = 0.0;
  double kappa0 = 1.0;
  double nu0 = 1.0;
  double sigma0_sq = 1.0;
};

// ln of the marginal density of n log-weights with sums sum_z and sum_zz,
// the Normal(mu, sigma^2) parameters integrated against the prior.
// Returns 0 for n == 0.
double log_marginal_normal(std::int64_t n, double sum_z, double sum_zz, const WeightPrior& prior);

struct DlBreakdown {
  double bits_partition = 0.0;
  double bits_edge_matrix = 0.0;
  double bits_degrees = 0.0;
  double bits_adjacency = 0.0;
  double bits_weights = 0.0;
  double total = 0.0;

  // Data part (adjacency + weights) and model part (the rest).
  double data_bits() const noexcept { return bits_adjacency + bits_weights; }
  double model_bits() const noexcept { return bits_partition + bits_edge_matrix + bits_degrees; }
};

double dl_partition(const Partition& b);
// `e_rs` is a row-major B x B matrix of edge counts.
double dl_edge_matrix(std::span<const std::int64_t> e_rs, std::size_t num_groups);
double dl_edge_matrix(std::size_t num_groups, std::int64_t num_edges);
double dl_degrees(const BlockState& bs);
double dl_adjacency(const LayeredMultigraph& g, std::size_t layer, const Partition& b,
                    const BlockState& bs);
double dl_weights(const LayeredMultigraph& g, std::size_t layer, const Partition& b,
                  const WeightPrior& prior = {});

DlBreakdown description_length(const LayeredMultigraph& g, std::size_t layer, const Partition& b,
                               const WeightPrior& prior = {});

}  // namespace ilsbm::sbm
