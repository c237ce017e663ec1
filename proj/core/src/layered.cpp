#include "ilsbm/layered.hpp"

#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace ilsbm::layered {

using sbm::kLn2;

double LayeredDl::data_bits() const noexcept {
  double s = 0.0;
  for (const auto& d : per_bin) s += d.data_bits();
  return s;
}

double LayeredDl::model_bits() const noexcept { return total - data_bits(); }

LayeredDl layered_dl(const LayeredMultigraph& g, const sbm::Partition& b, const BinSet& bins,
                     const sbm::WeightPrior& prior) {
  if (b.size() != g.num_nodes()) throw Error("partition size does not match graph");
  const LayeredMultigraph binned = merge_layers(g, bins);
  LayeredDl out;
  out.partition_bits = sbm::dl_partition(b);
  double sum = out.partition_bits;
  for (std::size_t l = 0; l < binned.num_layers(); ++l) {
    const auto bs = sbm::BlockState::from_layer(binned, l, b);
    sbm::DlBreakdown d;
    d.bits_edge_matrix = sbm::dl_edge_matrix(bs.e_rs, bs.num_groups);
    d.bits_degrees = sbm::dl_degrees(bs);
    d.bits_adjacency = sbm::dl_adjacency(binned, l, b, bs);
    d.bits_weights = sbm::dl_weights(binned, l, b, prior);
    d.total = d.bits_edge_matrix + d.bits_degrees + d.bits_adjacency + d.bits_weights;
    sum += d.total;
    out.per_bin.push_back(d);
  }
  out.extension_bits = extension_term(g, bins);
  out.binset_prior_bits = binset_prior(bins);
  out.total = sum + out.extension_bits + out.binset_prior_bits;
  return out;
}

double extension_term(std::span<const std::int64_t> counts, const BinSet& bins) {
  if (counts.size() != bins.num_layers()) throw Error("layer count mismatch in extension term");
  double nats = 0.0;
  for (const auto& bin : bins.bins()) {
    if (bin.size() < 2) continue;
    std::int64_t total = 0;
    double log_multinomial = 0.0;
    for (int l : bin) {
      total += counts[l];
      log_multinomial -= sbm::log_factorial(static_cast<double>(counts[l]));
    }
    if (total == 0) continue;
    log_multinomial += sbm::log_factorial(static_cast<double>(total));
    const double m = static_cast<double>(bin.size());
    nats += log_multinomial + sbm::log_binomial(static_cast<double>(total) + m - 1.0, m - 1.0);
  }
  return nats / kLn2;
}

double extension_term(const LayeredMultigraph& g, const BinSet& bins) {
  if (g.num_layers() != bins.num_layers()) throw Error("layer count mismatch in extension term");
  std::vector<std::int64_t> counts(g.num_layers());
  for (std::size_t l = 0; l < g.num_layers(); ++l) counts[l] = static_cast<std::int64_t>(g.num_edges(l));
  // Parallel edges of one node pair are interchangeable, so labellings that
  // only permute them among the member layers give the same layered graph.
  double overcount = 0.0;
  std::unordered_map<std::uint64_t, std::int64_t> merged, single;
  for (const auto& bin : bins.bins()) {
    if (bin.size() < 2) continue;
    merged.clear();
    for (int l : bin) {
      single.clear();
      for (const Edge& e : g.layer(static_cast<std::size_t>(l))) {
        ++single[(static_cast<std::uint64_t>(e.src) << 32) | e.dst];
      }
      for (const auto& [key, a] : single) {
        merged[key] += a;
        overcount -= sbm::log_factorial(static_cast<double>(a));
      }
    }
    for (const auto& [key, a] : merged) overcount += sbm::log_factorial(static_cast<double>(a));
  }
  return extension_term(counts, bins) - overcount / kLn2;
}

double binset_prior(BinningKind kind, std::size_t num_bins, std::size_t num_layers) {
  if (num_bins < 1 || num_bins > num_layers) {
    throw Error("bin count " + std::to_string(num_bins) + " outside 1.." + std::to_string(num_layers));
  }
  const double L = static_cast<double>(num_layers);
  const double D = static_cast<double>(num_bins);
  const double count = kind == BinningKind::kContiguous
                           ? sbm::log_binomial(L - 1.0, D - 1.0)
                           : sbm::log_stirling2(static_cast<int>(num_layers), static_cast<int>(num_bins));
  return (std::log(L) + count) / kLn2;
}

double binset_prior(const BinSet& bins) { return binset_prior(bins.kind(), bins.size(), bins.num_layers()); }

}  // namespace ilsbm::layered
