#include "ilsbm/netcore.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <set>

namespace ilsbm {

std::string_view to_code(MaturityClass m) noexcept { return kMaturityCodes[ordinal(m)]; }

std::optional<MaturityClass> parse_maturity(std::string_view code) noexcept {
  for (std::size_t i = 0; i < kMaturityCodes.size(); ++i) {
    if (kMaturityCodes[i] == code) return static_cast<MaturityClass>(i);
  }
  return std::nullopt;
}

MaturityClass maturity_from_ordinal(int ordinal) {
  if (ordinal < 0 || ordinal >= static_cast<int>(kMaturityClassCount)) {
    throw Error("maturity ordinal out of range: " + std::to_string(ordinal));
  }
  return static_cast<MaturityClass>(ordinal);
}

LayeredMultigraph::LayeredMultigraph(std::vector<std::string> nodes,
                                     std::vector<std::string> layer_labels,
                                     std::vector<std::vector<Edge>> layers)
    : nodes_(std::move(nodes)), layer_labels_(std::move(layer_labels)), layers_(std::move(layers)) {
  if (layer_labels_.size() != layers_.size()) {
    throw Error("layer label count does not match layer count");
  }
  index_.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!index_.emplace(nodes_[i], static_cast<NodeIndex>(i)).second) {
      throw Error("duplicate node id: " + nodes_[i]);
    }
  }
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    for (const Edge& e : layers_[l]) {
      if (e.src >= nodes_.size() || e.dst >= nodes_.size()) {
        throw Error("edge endpoint out of range in layer " + std::to_string(l));
      }
      if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
        throw Error("edge weight must be positive and finite in layer " + std::to_string(l));
      }
    }
  }
}

std::size_t LayeredMultigraph::num_edges() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) n += layer.size();
  return n;
}

std::optional<NodeIndex> LayeredMultigraph::index_of(std::string_view id) const {
  auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t LayeredMultigraph::self_loop_count() const noexcept {
  std::size_t n = 0;
  for (const auto& layer : layers_) {
    for (const Edge& e : layer) n += (e.src == e.dst);
  }
  return n;
}

bool LayeredMultigraph::all_nodes_active() const noexcept {
  std::vector<bool> active(nodes_.size(), false);
  for (const auto& layer : layers_) {
    for (const Edge& e : layer) active[e.src] = active[e.dst] = true;
  }
  return std::all_of(active.begin(), active.end(), [](bool b) { return b; });
}

namespace {

struct Fnv1a {
  std::uint64_t h = 14695981039346656037ull;
  void bytes(const void* p, std::size_t n) {
    const auto* c = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= c[i];
      h *= 1099511628211ull;
    }
  }
  void u64(std::uint64_t v) { bytes(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
};

}  // namespace

std::uint64_t digest(const LayeredMultigraph& g) noexcept {
  Fnv1a f;
  f.u64(g.num_nodes());
  for (const auto& n : g.nodes()) f.str(n);
  f.u64(g.num_layers());
  for (std::size_t l = 0; l < g.num_layers(); ++l) {
    f.str(g.layer_labels()[l]);
    f.u64(g.layer(l).size());
    for (const Edge& e : g.layer(l)) {
      f.u64(e.src);
      f.u64(e.dst);
      f.u64(std::bit_cast<std::uint64_t>(e.weight));
    }
  }
  return f.h;
}

std::string_view to_string(BinningKind kind) noexcept {
  return kind == BinningKind::kContiguous ? "contiguous" : "noncontiguous";
}

std::optional<BinningKind> parse_binning_kind(std::string_view s) noexcept {
  if (s == "contiguous") return BinningKind::kContiguous;
  if (s == "noncontiguous" || s == "non-contiguous") return BinningKind::kNonContiguous;
  return std::nullopt;
}

BinSet BinSet::from_bins(std::vector<std::vector<int>> bins, std::size_t num_layers,
                         BinningKind kind) {
  std::vector<int> seen(num_layers, 0);
  for (auto& b : bins) {
    if (b.empty()) throw Error("bin set contains an empty bin");
    std::sort(b.begin(), b.end());
    for (int l : b) {
      if (l < 0 || static_cast<std::size_t>(l) >= num_layers) {
        throw Error("bin member out of range: " + std::to_string(l));
      }
      if (seen[l]++) throw Error("layer " + std::to_string(l) + " appears in more than one bin");
    }
  }
  for (std::size_t l = 0; l < num_layers; ++l) {
    if (!seen[l]) throw Error("layer " + std::to_string(l) + " is not covered by any bin");
  }
  std::sort(bins.begin(), bins.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  if (kind == BinningKind::kContiguous) {
    for (const auto& b : bins) {
      if (b.back() - b.front() + 1 != static_cast<int>(b.size())) {
        throw Error("contiguous bin set contains a non-interval bin");
      }
    }
  }
  BinSet out;
  out.bins_ = std::move(bins);
  out.num_layers_ = num_layers;
  out.kind_ = kind;
  return out;
}

BinSet BinSet::singletons(std::size_t num_layers, BinningKind kind) {
  std::vector<std::vector<int>> bins;
  for (std::size_t l = 0; l < num_layers; ++l) bins.push_back({static_cast<int>(l)});
  return from_bins(std::move(bins), num_layers, kind);
}

BinSet BinSet::aggregate(std::size_t num_layers, BinningKind kind) {
  std::vector<int> all(num_layers);
  std::iota(all.begin(), all.end(), 0);
  return from_bins({all}, num_layers, kind);
}

std::size_t BinSet::bin_of(int layer) const {
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    if (std::binary_search(bins_[i].begin(), bins_[i].end(), layer)) return i;
  }
  throw Error("layer not in bin set: " + std::to_string(layer));
}

BinSet BinSet::merged(std::size_t i, std::size_t j) const {
  if (i == j || i >= bins_.size() || j >= bins_.size()) throw Error("invalid bin merge");
  std::vector<std::vector<int>> next;
  std::vector<int> joined = bins_[i];
  joined.insert(joined.end(), bins_[j].begin(), bins_[j].end());
  for (std::size_t k = 0; k < bins_.size(); ++k) {
    if (k != i && k != j) next.push_back(bins_[k]);
  }
  next.push_back(std::move(joined));
  return from_bins(std::move(next), num_layers_, kind_);
}

std::vector<std::pair<std::size_t, std::size_t>> BinSet::mergeable_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    for (std::size_t j = i + 1; j < bins_.size(); ++j) {
      if (kind_ == BinningKind::kContiguous && j != i + 1) continue;
      out.emplace_back(i, j);
    }
  }
  return out;
}

std::string BinSet::to_string(const std::vector<std::string>& layer_labels) const {
  std::string s = "{";
  for (std::size_t i = 0; i < bins_.size(); ++i) {
    if (i) s += ",";
    const bool group = bins_[i].size() > 1;
    if (group) s += "{";
    for (std::size_t k = 0; k < bins_[i].size(); ++k) {
      if (k) s += ",";
      const int l = bins_[i][k];
      s += static_cast<std::size_t>(l) < layer_labels.size() ? layer_labels[l] : std::to_string(l);
    }
    if (group) s += "}";
  }
  return s + "}";
}

IngestResult ingest(std::span<const LoanRecord> records) {
  // Global sorted bank list; per-month active sets.
  std::set<std::string> all_ids;
  std::map<int, std::set<std::string>> month_ids;
  for (std::size_t r = 0; r < records.size(); ++r) {
    const LoanRecord& rec = records[r];
    if (rec.lender.empty() || rec.borrower.empty()) throw IngestError(r + 1, "empty bank id");
    if (!(rec.amount > 0.0) || !std::isfinite(rec.amount)) {
      throw IngestError(r + 1, "amount must be positive");
    }
    if (rec.rate && (!(*rec.rate >= 0.0) || !std::isfinite(*rec.rate))) {
      throw IngestError(r + 1, "rate must be non-negative");
    }
    if (ordinal(rec.maturity) < 0 || ordinal(rec.maturity) >= static_cast<int>(kMaturityClassCount)) {
      throw IngestError(r + 1, "unknown maturity class");
    }
    all_ids.insert(rec.lender);
    all_ids.insert(rec.borrower);
    auto& ids = month_ids[rec.month];
    ids.insert(rec.lender);
    ids.insert(rec.borrower);
  }

  IngestResult out;
  out.bank_ids.assign(all_ids.begin(), all_ids.end());

  struct Builder {
    std::vector<std::string> nodes;
    std::unordered_map<std::string, NodeIndex> index;
    std::vector<std::vector<Edge>> layers = std::vector<std::vector<Edge>>(kMaturityClassCount);
  };
  std::map<int, Builder> builders;
  for (const auto& [month, ids] : month_ids) {
    Builder& b = builders[month];
    b.nodes.assign(ids.begin(), ids.end());
    for (std::size_t i = 0; i < b.nodes.size(); ++i) b.index.emplace(b.nodes[i], static_cast<NodeIndex>(i));
  }
  for (const LoanRecord& rec : records) {
    Builder& b = builders.at(rec.month);
    b.layers[ordinal(rec.maturity)].push_back(
        Edge{b.index.at(rec.lender), b.index.at(rec.borrower), rec.amount});
    out.self_loops += rec.is_self_loop();
  }
  std::vector<std::string> labels(kMaturityCodes.begin(), kMaturityCodes.end());
  for (auto& [month, b] : builders) {
    out.months.emplace(month, LayeredMultigraph(std::move(b.nodes), labels, std::move(b.layers)));
  }
  return out;
}

LayeredMultigraph collapse(const LayeredMultigraph& g) {
  return merge_layers(g, BinSet::aggregate(g.num_layers(), BinningKind::kNonContiguous));
}

LayeredMultigraph merge_layers(const LayeredMultigraph& g, const BinSet& bins) {
  if (bins.num_layers() != g.num_layers()) {
    throw Error("bin set covers " + std::to_string(bins.num_layers()) + " layers, graph has " +
                std::to_string(g.num_layers()));
  }
  std::vector<std::vector<Edge>> layers;
  std::vector<std::string> labels;
  for (const auto& bin : bins.bins()) {
    std::vector<Edge> edges;
    std::string label;
    for (int l : bin) {
      auto src = g.layer(l);
      edges.insert(edges.end(), src.begin(), src.end());
      if (!label.empty()) label += "+";
      label += g.layer_labels()[l];
    }
    layers.push_back(std::move(edges));
    labels.push_back(std::move(label));
  }
  return LayeredMultigraph(g.nodes(), std::move(labels), std::move(layers));
}

std::vector<Strength> strengths(const LayeredMultigraph& g, std::span<const int> layers) {
  std::vector<Strength> s(g.num_nodes());
  for (int l : layers) {
    for (const Edge& e : g.layer(l)) {
      s[e.src].out += e.weight;
      s[e.dst].in += e.weight;
    }
  }
  for (auto& x : s) x.total = x.in + x.out;
  return s;
}

Strength strength(const LayeredMultigraph& g, NodeIndex node, std::span<const int> layers) {
  if (node >= g.num_nodes()) throw Error("unknown node index " + std::to_string(node));
  Strength s;
  for (int l : layers) {
    for (const Edge& e : g.layer(l)) {
      if (e.src == node) s.out += e.weight;
      if (e.dst == node) s.in += e.weight;
    }
  }
  s.total = s.in + s.out;
  return s;
}

Strength strength(const LayeredMultigraph& g, NodeIndex node) {
  const auto layers = all_layers(g);
  return strength(g, node, layers);
}

double layer_size(const LayeredMultigraph& g, std::span<const int> layers) {
  double total = 0.0;
  for (int l : layers) {
    for (const Edge& e : g.layer(l)) total += e.weight;
  }
  return total;
}

double network_size(const LayeredMultigraph& g) {
  const auto layers = all_layers(g);
  return layer_size(g, layers);
}

std::vector<int> all_layers(const LayeredMultigraph& g) {
  std::vector<int> v(g.num_layers());
  std::iota(v.begin(), v.end(), 0);
  return v;
}

}  // namespace ilsbm
