#include "ilsbm/infer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "parallel.hpp"

namespace ilsbm::infer {

namespace {

constexpr std::size_t kAllPairsLimit = 64;
constexpr int kNeighbourCandidates = 12;
constexpr int kRandomCandidates = 4;
constexpr int kMaxGreedySweeps = 20;

std::uint64_t hash_bins(const BinSet& bins) {
  std::uint64_t h = 0x9e3779b97f4a7c15ull;
  for (const auto& bin : bins.bins()) {
    h = mix_seed(h, 0xb1);
    for (int l : bin) h = mix_seed(h, static_cast<std::uint64_t>(l));
  }
  return h;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::size_t uniform_index(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n)) % n;
}

// Group counts visited by the agglomeration, starting below N.
std::vector<std::size_t> level_targets(std::size_t n, double ratio) {
  std::vector<std::size_t> out;
  std::size_t B = n;
  while (B > 1) {
    auto next = static_cast<std::size_t>(std::floor(static_cast<double>(B) / ratio));
    next = std::clamp<std::size_t>(next, 1, B - 1);
    out.push_back(next);
    B = next;
  }
  return out;
}

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
};

// Merges groups of `state` down to `target` groups using the best merge of
// each group, applied in order of increasing description length change.
std::vector<int> merge_groups(const LayeredBlockState& state, std::size_t target, std::mt19937_64& rng) {
  const std::size_t B = state.num_groups();
  const auto& assignment = state.assignment();
  std::vector<std::vector<NodeIndex>> members(B);
  for (std::size_t i = 0; i < assignment.size(); ++i) members[assignment[i]].push_back(static_cast<NodeIndex>(i));

  struct Proposal {
    double delta;
    int r, s;
  };
  std::vector<Proposal> proposals;
  std::vector<int> candidates;
  for (std::size_t r = 0; r < B; ++r) {
    candidates.clear();
    if (B <= kAllPairsLimit) {
      for (std::size_t s = 0; s < B; ++s) {
        if (s != r) candidates.push_back(static_cast<int>(s));
      }
    } else {
      for (int k = 0; k < kNeighbourCandidates; ++k) {
        const NodeIndex v = members[r][uniform_index(rng, members[r].size())];
        const auto ends = state.neighbor_ends(v);
        if (ends.empty()) break;
        const int t = state.group_of(ends[uniform_index(rng, ends.size())]);
        if (t != static_cast<int>(r)) candidates.push_back(t);
      }
      for (int k = 0; k < kRandomCandidates; ++k) {
        const int t = static_cast<int>(uniform_index(rng, B));
        if (t != static_cast<int>(r)) candidates.push_back(t);
      }
      std::sort(candidates.begin(), candidates.end());
      candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    }
    Proposal best{std::numeric_limits<double>::infinity(), -1, -1};
    for (int s : candidates) {
      const double d = state.merge_delta_bits(static_cast<int>(r), s);
      if (d < best.delta) best = {d, std::min<int>(r, s), std::max<int>(r, s)};
    }
    if (best.r >= 0) proposals.push_back(best);
  }
  std::sort(proposals.begin(), proposals.end(), [](const Proposal& a, const Proposal& b) {
    if (a.delta != b.delta) return a.delta < b.delta;
    if (a.r != b.r) return a.r < b.r;
    return a.s < b.s;
  });

  UnionFind uf(B);
  std::size_t groups = B;
  for (const Proposal& p : proposals) {
    if (groups <= target) break;
    const int a = uf.find(p.r), b = uf.find(p.s);
    if (a == b) continue;
    uf.parent[std::max(a, b)] = std::min(a, b);
    --groups;
  }
  // Proposals may not reach the target (e.g. disconnected candidates); fall
  // back to joining the lowest remaining roots.
  for (std::size_t r = 1; groups > target && r < B; ++r) {
    const int a = uf.find(0), b = uf.find(static_cast<int>(r));
    if (a == b) continue;
    uf.parent[std::max(a, b)] = std::min(a, b);
    --groups;
  }
  std::vector<int> out(assignment.size());
  for (std::size_t i = 0; i < assignment.size(); ++i) out[i] = uf.find(assignment[i]);
  return out;
}

void push_trace(std::vector<TracePoint>& trace, std::int64_t step, double bits, int limit) {
  if (static_cast<int>(trace.size()) < limit) trace.push_back({step, bits});
}

}  // namespace

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) noexcept {
  std::uint64_t z = a + 0x9e3779b97f4a7c15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

void FitConfig::validate() const {
  if (n_sweeps < 1) throw Error("n_sweeps must be positive");
  if (n_anneal < 1) throw Error("n_anneal must be positive");
  if (samples < 1) throw Error("samples must be positive");
  if (!(beta_start > 0.0) || !(beta_end > 0.0)) throw Error("inverse temperatures must be positive");
  if (!(merge_ratio > 1.0)) throw Error("merge_ratio must exceed 1");
  if (!(proposal_mix > 0.0) || proposal_mix > 1.0) throw Error("proposal_mix must be in (0, 1]");
  if (jobs < 1) throw Error("jobs must be positive");
  if (!(prior.kappa0 > 0.0) || !(prior.nu0 > 0.0) || !(prior.sigma0_sq > 0.0)) {
    throw Error("weight prior scale parameters must be positive");
  }
}

PartitionSampler::PartitionSampler(const LayeredMultigraph& g, const sbm::Partition& initial,
                                   std::uint64_t seed, const sbm::WeightPrior& prior, double proposal_mix)
    : state_(g, initial, prior), rng_(seed), mix_(proposal_mix), bits_(state_.entropy_bits()) {}

double PartitionSampler::proposal_probability(NodeIndex i, int target, int group_of_i) const {
  const double B = static_cast<double>(state_.num_groups());
  const auto ends = state_.neighbor_ends(i);
  if (ends.empty()) return 1.0 / B;
  std::size_t hits = 0;
  for (NodeIndex j : ends) {
    const int g = j == i ? group_of_i : state_.group_of(j);
    hits += (g == target);
  }
  return mix_ / B + (1.0 - mix_) * static_cast<double>(hits) / static_cast<double>(ends.size());
}

std::size_t PartitionSampler::sweep(double beta) {
  const std::size_t N = state_.num_nodes();
  const auto B = state_.num_groups();
  std::size_t accepted = 0;
  for (std::size_t v = 0; v < N; ++v) {
    const auto i = static_cast<NodeIndex>(v);
    const int r = state_.group_of(i);
    const auto ends = state_.neighbor_ends(i);
    int t;
    if (ends.empty() || uniform01(rng_) < mix_) {
      t = static_cast<int>(uniform_index(rng_, B));
    } else {
      t = state_.group_of(ends[uniform_index(rng_, ends.size())]);
    }
    if (t == r || state_.group_size(r) == 1) continue;
    const double delta = state_.move_delta_bits(i, t);
    bool accept;
    if (std::isinf(beta)) {
      accept = delta < 0.0;
    } else {
      const double log_ratio = -beta * delta * sbm::kLn2 +
                               std::log(proposal_probability(i, r, t)) -
                               std::log(proposal_probability(i, t, r));
      accept = log_ratio >= 0.0 || uniform01(rng_) < std::exp(log_ratio);
    }
    if (accept) {
      state_.move(i, t);
      bits_ += delta;
      ++accepted;
    }
  }
  return accepted;
}

PartitionFit fit_partition(const LayeredMultigraph& binned, const FitConfig& config) {
  config.validate();
  const std::size_t N = binned.num_nodes();
  PartitionFit best;
  if (N == 0) return best;
  best.partition = sbm::Partition::trivial(N);
  best.bits = std::numeric_limits<double>::infinity();

  const auto targets = level_targets(N, config.merge_ratio);
  const int sweeps_per_level =
      targets.empty() ? 0 : std::max(1, config.n_sweeps / static_cast<int>(targets.size()));
  std::int64_t step = 0;

  for (int restart = 0; restart < config.n_anneal; ++restart) {
    std::mt19937_64 rng(mix_seed(config.seed, static_cast<std::uint64_t>(restart)));
    sbm::Partition current = sbm::Partition::singletons(N);
    {
      LayeredBlockState state(binned, current, config.prior);
      const double bits = state.entropy_bits();
      push_trace(best.trace, step++, bits, config.samples);
      if (bits < best.bits) {
        best.bits = bits;
        best.partition = current;
      }
    }
    for (std::size_t target : targets) {
      {
        LayeredBlockState state(binned, current, config.prior);
        current = sbm::Partition::from_labels(merge_groups(state, target, rng));
      }
      PartitionSampler sampler(binned, current, rng(), config.prior, config.proposal_mix);
      sbm::Partition level_best = sampler.partition();
      double level_bits = sampler.bits();
      const double ratio = config.beta_end / config.beta_start;
      for (int s = 0; s < sweeps_per_level; ++s) {
        const double frac = sweeps_per_level > 1 ? static_cast<double>(s) / (sweeps_per_level - 1) : 1.0;
        sampler.sweep(config.beta_start * std::pow(ratio, frac));
        if (sampler.bits() < level_bits) {
          level_bits = sampler.bits();
          level_best = sampler.partition();
        }
      }
      for (int s = 0; s < kMaxGreedySweeps; ++s) {
        if (sampler.sweep(kGreedy) == 0) break;
      }
      if (sampler.bits() < level_bits) {
        level_bits = sampler.bits();
        level_best = sampler.partition();
      }
      // Re-evaluate from scratch to shed accumulated rounding.
      current = level_best;
      const double exact = LayeredBlockState(binned, current, config.prior).entropy_bits();
      push_trace(best.trace, step++, exact, config.samples);
      if (exact < best.bits) {
        best.bits = exact;
        best.partition = current;
      }
    }
  }
  best.partition = best.partition.canonical();
  return best;
}

FitResult fit_binning(const LayeredMultigraph& g, const BinSet& bins, const FitConfig& config) {
  FitConfig local = config;
  local.seed = mix_seed(config.seed, hash_bins(bins));
  const LayeredMultigraph binned = merge_layers(g, bins);
  PartitionFit pf = fit_partition(binned, local);
  FitResult out;
  out.partition = std::move(pf.partition);
  out.bins = bins;
  out.dl = layered::layered_dl(g, out.partition, bins, config.prior);
  out.trace = std::move(pf.trace);
  out.seed = config.seed;
  out.graph_digest = digest(g);
  return out;
}

GranularitySearch search_granularity(const LayeredMultigraph& g, const FitConfig& config) {
  config.validate();
  GranularitySearch search;
  BinSet current = BinSet::singletons(g.num_layers(), config.binning_kind);
  search.path.push_back(fit_binning(g, current, config));
  search.evaluated.push_back(search.path.back());
  while (current.size() > 1) {
    const auto pairs = current.mergeable_pairs();
    std::vector<FitResult> fits(pairs.size());
    detail::parallel_for(pairs.size(), config.jobs, [&](std::size_t k) {
      fits[k] = fit_binning(g, current.merged(pairs[k].first, pairs[k].second), config);
    });
    std::size_t best = 0;
    for (std::size_t k = 1; k < fits.size(); ++k) {
      if (fits[k].dl.total < fits[best].dl.total) best = k;
    }
    for (auto& f : fits) search.evaluated.push_back(f);
    current = fits[best].bins;
    search.path.push_back(std::move(fits[best]));
  }
  std::size_t og = 0;
  for (std::size_t k = 1; k < search.path.size(); ++k) {
    if (search.path[k].dl.total < search.path[og].dl.total) og = k;
  }
  search.og = search.path[og];
  return search;
}

FitResult infer_og(const LayeredMultigraph& g, const FitConfig& config) {
  return search_granularity(g, config).og;
}

double posterior_odds(const FitResult& a, const FitResult& b) {
  if (a.graph_digest != b.graph_digest) throw Error("fits were made on different graphs");
  return (b.dl.total - a.dl.total) * std::log10(2.0);
}

RejectReport reject_report(const GranularitySearch& search) {
  RejectReport r;
  r.og = search.og;
  r.differentiation = search.path.front();
  r.aggregation = search.path.back();
  r.log10_vs_differentiation = posterior_odds(r.differentiation, r.og);
  r.log10_vs_aggregation = posterior_odds(r.aggregation, r.og);
  return r;
}

RejectReport reject_report(const LayeredMultigraph& g, const FitConfig& config) {
  return reject_report(search_granularity(g, config));
}

}  // namespace ilsbm::infer
