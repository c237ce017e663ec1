#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ilsbm/netcore.hpp"
#include "ilsbm/sbm.hpp"

namespace ilsbm::synth {

// Planted layered DCSBM. Layers sharing a class share every parameter; the
// classes are the planted granularity. Matrices are B x B row-major, indexed
// [class][r * B + s].
struct PlantedSpec {
  std::vector<std::size_t> group_sizes;
  // Per node (groups laid out consecutively); empty means all 1.
  std::vector<double> propensity;
  std::vector<int> layer_class;
  std::vector<std::vector<double>> expected_edges;
  std::vector<std::vector<double>> weight_mu;     // of ln(weight)
  std::vector<std::vector<double>> weight_sigma;  // > 0
  // Defaults to the maturity codes (needs at most 8 layers).
  std::vector<std::string> layer_labels;
  std::string id_prefix = "b";
  // Use round(expected) edges per group pair instead of a Poisson draw.
  bool exact_counts = false;

  std::size_t num_nodes() const noexcept;
  std::size_t num_groups() const noexcept { return group_sizes.size(); }
  std::size_t num_layers() const noexcept { return layer_class.size(); }
  std::size_t num_classes() const noexcept { return expected_edges.size(); }
  void validate() const;

  // Same (mu, sigma) for every class and group pair.
  static PlantedSpec uniform_weights(std::vector<std::size_t> group_sizes, std::vector<int> layer_class,
                                     std::vector<std::vector<double>> expected_edges, double mu = 4.0,
                                     double sigma = 1.0);
};

struct Planted {
  LayeredMultigraph graph;
  sbm::Partition partition;  // over graph nodes (inactive nodes are dropped)
  BinSet bins;
};

// Multiplicities are Poisson per ordered pair of distinct nodes with rate
// proportional to propensity products; the group-pair totals therefore have
// the spec's expectations. Weights are log-normal rounded to whole units (at
// least 1). Node ids are the prefix plus a zero-padded index.
Planted sample(const PlantedSpec& spec, std::uint64_t seed);

// Independent draws for each month with the same node ids and groups.
struct PlantedSeries {
  std::map<int, LayeredMultigraph> months;
  std::map<int, sbm::Partition> partitions;
  BinSet bins;
};
PlantedSeries sample_series(const PlantedSpec& spec, const std::vector<int>& months, std::uint64_t seed);

// Three layers A, B, C over 50 nodes: a core, lenders to it (triangles) and
// borrowers from it (squares). A is a perfect core-periphery pattern, B the
// same pattern with noise, C two assortative periphery communities without
// core-internal edges. Every node is active.
PlantedSpec fig2_spec();
LayeredMultigraph fig2_benchmark(std::uint64_t seed);
Planted fig2_planted(std::uint64_t seed);

// One record per parallel edge; ingest() of the result gives back g when g
// has the eight maturity layers and every node is active.
std::vector<LoanRecord> emit_loan_records(const LayeredMultigraph& g, int month);

}  // namespace ilsbm::synth
