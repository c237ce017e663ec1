#include "ilsbm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ilsbm/infer.hpp"

namespace ilsbm::synth {

namespace {

std::string padded_id(const std::string& prefix, std::size_t i, std::size_t n) {
  std::string digits = std::to_string(i);
  const std::size_t width = std::to_string(n == 0 ? 0 : n - 1).size();
  return prefix + std::string(width - digits.size(), '0') + digits;
}

BinSet planted_bins(const std::vector<int>& layer_class) {
  std::map<int, std::vector<int>> by_class;
  for (std::size_t l = 0; l < layer_class.size(); ++l) by_class[layer_class[l]].push_back(static_cast<int>(l));
  std::vector<std::vector<int>> bins;
  bool contiguous = true;
  for (auto& [c, members] : by_class) {
    contiguous = contiguous && members.back() - members.front() + 1 == static_cast<int>(members.size());
    bins.push_back(std::move(members));
  }
  return BinSet::from_bins(std::move(bins), layer_class.size(),
                           contiguous ? BinningKind::kContiguous : BinningKind::kNonContiguous);
}

// Draw on the full node set; pruning happens afterwards.
std::vector<std::vector<Edge>> draw_layers(const PlantedSpec& spec, std::mt19937_64& rng) {
  const std::size_t B = spec.num_groups();
  std::vector<std::size_t> first(B + 1, 0);
  for (std::size_t r = 0; r < B; ++r) first[r + 1] = first[r] + spec.group_sizes[r];
  std::vector<std::discrete_distribution<std::size_t>> pick(B);
  for (std::size_t r = 0; r < B; ++r) {
    std::vector<double> w(spec.group_sizes[r], 1.0);
    if (!spec.propensity.empty()) {
      std::copy(spec.propensity.begin() + static_cast<std::ptrdiff_t>(first[r]),
                spec.propensity.begin() + static_cast<std::ptrdiff_t>(first[r + 1]), w.begin());
    }
    if (!w.empty()) pick[r] = std::discrete_distribution<std::size_t>(w.begin(), w.end());
  }
  std::vector<std::vector<Edge>> layers(spec.num_layers());
  for (std::size_t l = 0; l < spec.num_layers(); ++l) {
    const int c = spec.layer_class[l];
    for (std::size_t r = 0; r < B; ++r) {
      for (std::size_t s = 0; s < B; ++s) {
        const double lambda = spec.expected_edges[c][r * B + s];
        if (lambda <= 0.0) continue;
        const auto m = spec.exact_counts ? static_cast<std::int64_t>(std::llround(lambda))
                                         : std::poisson_distribution<std::int64_t>(lambda)(rng);
        std::lognormal_distribution<double> weight(spec.weight_mu[c][r * B + s], spec.weight_sigma[c][r * B + s]);
        for (std::int64_t k = 0; k < m; ++k) {
          std::size_t i, j;
          do {
            i = first[r] + pick[r](rng);
            j = first[s] + pick[s](rng);
          } while (i == j);
          const double w = std::max(1.0, std::round(weight(rng)));
          layers[l].push_back({static_cast<NodeIndex>(i), static_cast<NodeIndex>(j), w});
        }
      }
    }
  }
  return layers;
}

Planted assemble(const PlantedSpec& spec, std::vector<std::vector<Edge>> layers, const BinSet& bins) {
  const std::size_t N = spec.num_nodes();
  std::vector<char> active(N, 0);
  for (const auto& layer : layers) {
    for (const Edge& e : layer) active[e.src] = active[e.dst] = 1;
  }
  std::vector<NodeIndex> local(N, 0);
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::size_t r = 0, next_group = spec.num_groups() ? spec.group_sizes[0] : 0;
  for (std::size_t i = 0; i < N; ++i) {
    while (i >= next_group) next_group += spec.group_sizes[++r];
    if (!active[i]) continue;
    local[i] = static_cast<NodeIndex>(ids.size());
    ids.push_back(padded_id(spec.id_prefix, i, N));
    labels.push_back(static_cast<int>(r));
  }
  for (auto& layer : layers) {
    for (Edge& e : layer) {
      e.src = local[e.src];
      e.dst = local[e.dst];
    }
  }
  std::vector<std::string> layer_labels = spec.layer_labels;
  if (layer_labels.empty()) {
    for (std::size_t l = 0; l < spec.num_layers(); ++l) layer_labels.emplace_back(kMaturityCodes[l]);
  }
  Planted out{LayeredMultigraph(std::move(ids), std::move(layer_labels), std::move(layers)),
              sbm::Partition::from_labels(labels), bins};
  return out;
}

}  // namespace

std::size_t PlantedSpec::num_nodes() const noexcept {
  std::size_t n = 0;
  for (auto s : group_sizes) n += s;
  return n;
}

void PlantedSpec::validate() const {
  const std::size_t B = num_groups();
  if (B == 0) throw Error("planted spec has no groups");
  if (layer_class.empty()) throw Error("planted spec has no layers");
  if (!propensity.empty() && propensity.size() != num_nodes()) throw Error("propensity size differs from node count");
  for (double p : propensity) {
    if (!(p > 0.0) || !std::isfinite(p)) throw Error("propensities must be positive");
  }
  const std::size_t C = num_classes();
  if (weight_mu.size() != C || weight_sigma.size() != C) throw Error("weight parameters need one matrix per class");
  for (int c : layer_class) {
    if (c < 0 || static_cast<std::size_t>(c) >= C) throw Error("layer class out of range");
  }
  if (layer_labels.empty() && num_layers() > kMaturityClassCount) throw Error("more than 8 layers need explicit labels");
  if (!layer_labels.empty() && layer_labels.size() != num_layers()) throw Error("layer label count differs");
  for (std::size_t c = 0; c < C; ++c) {
    if (expected_edges[c].size() != B * B || weight_mu[c].size() != B * B || weight_sigma[c].size() != B * B) {
      throw Error("planted matrices must be B x B");
    }
    for (std::size_t r = 0; r < B; ++r) {
      for (std::size_t s = 0; s < B; ++s) {
        const double e = expected_edges[c][r * B + s];
        if (!(e >= 0.0) || !std::isfinite(e)) throw Error("expected edge counts must be non-negative");
        if (!(weight_sigma[c][r * B + s] > 0.0)) throw Error("weight sigma must be positive");
        if (e > 0.0) {
          const auto nr = group_sizes[r], ns = group_sizes[s];
          if (nr == 0 || ns == 0 || (r == s && nr < 2)) {
            throw Error("group pair (" + std::to_string(r) + ", " + std::to_string(s) +
                        ") has expected edges but no node pairs");
          }
        }
      }
    }
  }
}

PlantedSpec PlantedSpec::uniform_weights(std::vector<std::size_t> group_sizes, std::vector<int> layer_class,
                                         std::vector<std::vector<double>> expected_edges, double mu, double sigma) {
  PlantedSpec s;
  const std::size_t B = group_sizes.size();
  s.group_sizes = std::move(group_sizes);
  s.layer_class = std::move(layer_class);
  s.weight_mu.assign(expected_edges.size(), std::vector<double>(B * B, mu));
  s.weight_sigma.assign(expected_edges.size(), std::vector<double>(B * B, sigma));
  s.expected_edges = std::move(expected_edges);
  return s;
}

Planted sample(const PlantedSpec& spec, std::uint64_t seed) {
  spec.validate();
  std::mt19937_64 rng(seed);
  return assemble(spec, draw_layers(spec, rng), planted_bins(spec.layer_class));
}

PlantedSeries sample_series(const PlantedSpec& spec, const std::vector<int>& months, std::uint64_t seed) {
  spec.validate();
  PlantedSeries out;
  out.bins = planted_bins(spec.layer_class);
  for (int m : months) {
    std::mt19937_64 rng(infer::mix_seed(seed, static_cast<std::uint64_t>(m)));
    auto p = assemble(spec, draw_layers(spec, rng), out.bins);
    out.months.emplace(m, std::move(p.graph));
    out.partitions.emplace(m, std::move(p.partition));
  }
  return out;
}

PlantedSpec fig2_spec() {
  // Groups: 0 core, 1 squares (borrow from the core), 2 triangles (lend to it).
  // Block totals are fixed so that every draw keeps B between A and C.
  PlantedSpec s;
  s.group_sizes = {11, 19, 20};
  s.layer_class = {0, 1, 2};
  s.layer_labels = {"A", "B", "C"};
  s.exact_counts = true;
  s.expected_edges = {
      {4, 68, 68,
       68, 0, 0,
       68, 0, 0},
      {3, 55, 55,
       55, 14, 2,
       55, 2, 14},
      {0, 4, 4,
       4, 20, 0,
       4, 0, 20},
  };
  const double core = 5.01624, periphery = 2.67324;
  const std::vector<double> mu = {core, core, core, core, periphery, periphery, core, periphery, periphery};
  s.weight_mu.assign(3, mu);
  s.weight_sigma.assign(3, std::vector<double>(9, 0.323383));
  s.propensity.resize(s.num_nodes());
  for (std::size_t i = 0; i < s.propensity.size(); ++i) s.propensity[i] = 0.5 + static_cast<double>(i % 5) * 0.25;
  return s;
}

Planted fig2_planted(std::uint64_t seed) {
  const PlantedSpec spec = fig2_spec();
  for (std::uint64_t attempt = 0;; ++attempt) {
    auto p = sample(spec, infer::mix_seed(seed, attempt));
    if (p.graph.num_nodes() == spec.num_nodes()) return p;
  }
}

LayeredMultigraph fig2_benchmark(std::uint64_t seed) { return fig2_planted(seed).graph; }

std::vector<LoanRecord> emit_loan_records(const LayeredMultigraph& g, int month) {
  std::vector<LoanRecord> out;
  out.reserve(g.num_edges());
  for (std::size_t l = 0; l < g.num_layers(); ++l) {
    const auto m = parse_maturity(g.layer_labels()[l]);
    if (!m) throw Error("layer label '" + g.layer_labels()[l] + "' is not a maturity class");
    for (const Edge& e : g.layer(l)) {
      out.push_back({g.id_of(e.src), g.id_of(e.dst), month, e.weight, *m, std::nullopt});
    }
  }
  return out;
}

}  // namespace ilsbm::synth
