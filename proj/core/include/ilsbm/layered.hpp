#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ilsbm/netcore.hpp"
#include "ilsbm/sbm.hpp"

namespace ilsbm::layered {

// Description length of the coarse-grained layered model. Each bin layer gets
// its own edge matrix, degree, adjacency and weight terms under the shared
// partition; the partition itself is paid for once.
struct LayeredDl {
  std::vector<sbm::DlBreakdown> per_bin;  // bits_partition is 0 in each entry
  double partition_bits = 0.0;
  double extension_bits = 0.0;
  double binset_prior_bits = 0.0;
  double total = 0.0;

  double data_bits() const noexcept;
  double model_bits() const noexcept;
};

LayeredDl layered_dl(const LayeredMultigraph& g, const sbm::Partition& b, const BinSet& bins,
                     const sbm::WeightPrior& prior = {});

// Bits needed to recover the original layer of every edge from the binned
// graph: per bin, the split of the edge count over member layers followed by
// the assignment of edges to layers given that split. Assignments that only
// swap parallel edges of the same node pair between layers are counted once.
double extension_term(const LayeredMultigraph& g, const BinSet& bins);
// The count-level code alone, treating every edge as distinguishable. Equals
// the graph form when no node pair has edges in two layers of one bin.
double extension_term(std::span<const std::int64_t> layer_edge_counts, const BinSet& bins);

// Uniform prior over bin sets with `num_bins` bins out of `num_layers`
// layers, including a uniform factor over the number of bins.
double binset_prior(BinningKind kind, std::size_t num_bins, std::size_t num_layers);
double binset_prior(const BinSet& bins);

}  // namespace ilsbm::layered
