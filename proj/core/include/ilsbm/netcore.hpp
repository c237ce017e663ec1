#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ilsbm/error.hpp"

namespace ilsbm {

// The eight loan maturity classes, ordered from short to long. The ordinal is
// the layer index used everywhere else in the library.
enum class MaturityClass : std::uint8_t {
  kUnder1d = 0,
  k2To7d = 1,
  k8To30d = 2,
  k31To90d = 3,
  k91To180d = 4,
  kHalfTo1y = 5,
  k1To3y = 6,
  kOver3y = 7,
};

inline constexpr std::size_t kMaturityClassCount = 8;

inline constexpr std::array<std::string_view, kMaturityClassCount> kMaturityCodes = {
    "<1d", "2-7d", "8-30d", "31-90d", "91-180d", "0.5-1y", "1-3y", ">3y"};

constexpr int ordinal(MaturityClass m) noexcept { return static_cast<int>(m); }
std::string_view to_code(MaturityClass m) noexcept;
std::optional<MaturityClass> parse_maturity(std::string_view code) noexcept;
MaturityClass maturity_from_ordinal(int ordinal);

struct LoanRecord {
  std::string lender;
  std::string borrower;
  int month = 0;  // 1 = January 2000
  double amount = 0.0;
  MaturityClass maturity = MaturityClass::kUnder1d;
  std::optional<double> rate;  // percent

  bool is_self_loop() const noexcept { return lender == borrower; }
};

using NodeIndex = std::uint32_t;

// One loan: a single parallel edge with its size as covariate.
struct Edge {
  NodeIndex src = 0;
  NodeIndex dst = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Directed multigraph with one edge list per layer. Parallel edges are kept as
// separate entries so per-loan weights survive. Immutable once built.
//
// The constructor checks endpoints and weights. Producers in this library
// (ingest, synth, merge_layers) additionally guarantee that every node is
// active in at least one layer; hand-built graphs may contain isolated nodes.
class LayeredMultigraph {
 public:
  LayeredMultigraph() = default;
  LayeredMultigraph(std::vector<std::string> nodes, std::vector<std::string> layer_labels,
                    std::vector<std::vector<Edge>> layers);

  std::size_t num_nodes() const noexcept { return nodes_.size(); }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  std::size_t num_edges() const noexcept;
  std::size_t num_edges(std::size_t layer) const { return layers_.at(layer).size(); }

  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const std::vector<std::string>& layer_labels() const noexcept { return layer_labels_; }
  std::span<const Edge> layer(std::size_t l) const { return layers_.at(l); }
  const std::vector<std::vector<Edge>>& layers() const noexcept { return layers_; }

  std::optional<NodeIndex> index_of(std::string_view id) const;
  const std::string& id_of(NodeIndex i) const { return nodes_.at(i); }

  std::size_t self_loop_count() const noexcept;
  // True when every node has at least one incident edge in some layer.
  bool all_nodes_active() const noexcept;

  friend bool operator==(const LayeredMultigraph& a, const LayeredMultigraph& b) {
    return a.nodes_ == b.nodes_ && a.layer_labels_ == b.layer_labels_ && a.layers_ == b.layers_;
  }

 private:
  std::vector<std::string> nodes_;
  std::vector<std::string> layer_labels_;
  std::vector<std::vector<Edge>> layers_;
  std::unordered_map<std::string, NodeIndex> index_;
};

// FNV-1a over nodes, labels and edges (weights bitwise). Used to check that two
// fits were made on the same observed graph.
std::uint64_t digest(const LayeredMultigraph& g) noexcept;

enum class BinningKind { kContiguous, kNonContiguous };

std::string_view to_string(BinningKind kind) noexcept;
std::optional<BinningKind> parse_binning_kind(std::string_view s) noexcept;

// A partition of the layer ordinals 0..L-1 into bins. Members are sorted and
// bins are ordered by their smallest member, so bin i is OGB index i+1.
class BinSet {
 public:
  static BinSet from_bins(std::vector<std::vector<int>> bins, std::size_t num_layers,
                          BinningKind kind);
  static BinSet singletons(std::size_t num_layers, BinningKind kind = BinningKind::kContiguous);
  static BinSet aggregate(std::size_t num_layers, BinningKind kind = BinningKind::kContiguous);

  std::size_t size() const noexcept { return bins_.size(); }
  std::size_t num_layers() const noexcept { return num_layers_; }
  BinningKind kind() const noexcept { return kind_; }
  const std::vector<std::vector<int>>& bins() const noexcept { return bins_; }
  const std::vector<int>& bin(std::size_t i) const { return bins_.at(i); }
  std::size_t bin_of(int layer) const;
  bool is_singletons() const noexcept { return bins_.size() == num_layers_; }

  // Bins i and j joined; the result is re-sorted by smallest member.
  BinSet merged(std::size_t i, std::size_t j) const;
  // Pairs of bin indices that may be merged under this kind (adjacent pairs
  // for contiguous binning, all pairs otherwise), in lexicographic order.
  std::vector<std::pair<std::size_t, std::size_t>> mergeable_pairs() const;

  std::string to_string(const std::vector<std::string>& layer_labels) const;

  friend bool operator==(const BinSet& a, const BinSet& b) {
    return a.num_layers_ == b.num_layers_ && a.bins_ == b.bins_;
  }

 private:
  std::vector<std::vector<int>> bins_;
  std::size_t num_layers_ = 0;
  BinningKind kind_ = BinningKind::kContiguous;
};

// Result of loan ingestion. `bank_ids` is the global, sorted id list over all
// months; month graphs index only their active banks (sorted by id), so
// `bank_ids` is what makes partitions comparable across months.
struct IngestResult {
  std::map<int, LayeredMultigraph> months;
  std::vector<std::string> bank_ids;
  std::size_t self_loops = 0;
};

// One parallel edge per loan in the layer of its maturity class. Every month
// graph carries all eight maturity layers (possibly empty). Throws IngestError
// naming the 1-based record position on invariant violations.
IngestResult ingest(std::span<const LoanRecord> records);

LayeredMultigraph collapse(const LayeredMultigraph& g);
LayeredMultigraph merge_layers(const LayeredMultigraph& g, const BinSet& bins);

struct Strength {
  double in = 0.0;
  double out = 0.0;
  double total = 0.0;
};

Strength strength(const LayeredMultigraph& g, NodeIndex node, std::span<const int> layers);
Strength strength(const LayeredMultigraph& g, NodeIndex node);
// All node strengths at once over a layer subset.
std::vector<Strength> strengths(const LayeredMultigraph& g, std::span<const int> layers);

// Sum of edge weights over the given layers, each loan counted once.
double layer_size(const LayeredMultigraph& g, std::span<const int> layers);
double network_size(const LayeredMultigraph& g);

std::vector<int> all_layers(const LayeredMultigraph& g);

}  // namespace ilsbm
