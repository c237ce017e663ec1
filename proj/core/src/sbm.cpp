#include "ilsbm/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

namespace ilsbm::sbm {

namespace {

// Sum in a canonical order so that results do not depend on group labels.
double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

}  // namespace

double log_factorial(double n) { return std::lgamma(n + 1.0); }

double log_binomial(double n, double k) {
  if (k < 0 || k > n) return -INFINITY;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double log_multiset(double n, double k) {
  if (k == 0) return 0.0;
  if (n <= 0) return -INFINITY;
  return log_binomial(n + k - 1.0, k);
}

double log_stirling2(int n, int k) {
  if (n < 0 || k < 0 || k > n) return -INFINITY;
  if (n == 0) return 0.0;
  if (k == 0) return -INFINITY;
  // S(n, k) = k S(n-1, k) + S(n-1, k-1), carried in log space.
  std::vector<double> row(k + 1, -INFINITY);
  row[0] = 0.0;
  for (int m = 1; m <= n; ++m) {
    for (int j = std::min(m, k); j >= 1; --j) {
      const double a = row[j] == -INFINITY ? -INFINITY : std::log(static_cast<double>(j)) + row[j];
      const double b = row[j - 1];
      const double hi = std::max(a, b);
      row[j] = hi == -INFINITY ? -INFINITY : hi + std::log(std::exp(a - hi) + std::exp(b - hi));
    }
    row[0] = -INFINITY;
  }
  return row[k];
}

Partition::Partition(std::vector<int> assignment) : assignment_(std::move(assignment)) {
  int max_label = -1;
  for (int b : assignment_) {
    if (b < 0) throw Error("negative group label");
    max_label = std::max(max_label, b);
  }
  std::vector<char> used(max_label + 1, 0);
  for (int b : assignment_) used[b] = 1;
  for (int r = 0; r <= max_label; ++r) {
    if (!used[r]) throw Error("partition has empty group " + std::to_string(r));
  }
  num_groups_ = static_cast<std::size_t>(max_label + 1);
}

Partition Partition::from_labels(std::span<const int> labels) {
  std::map<int, int> remap;
  for (int l : labels) {
    if (l < 0) throw Error("negative group label");
    remap.emplace(l, 0);
  }
  int next = 0;
  for (auto& [label, idx] : remap) idx = next++;
  std::vector<int> a;
  a.reserve(labels.size());
  for (int l : labels) a.push_back(remap.at(l));
  return Partition(std::move(a));
}

Partition Partition::singletons(std::size_t n) {
  std::vector<int> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = static_cast<int>(i);
  return Partition(std::move(a));
}

std::vector<std::int64_t> Partition::group_sizes() const {
  std::vector<std::int64_t> n(num_groups_, 0);
  for (int b : assignment_) ++n[b];
  return n;
}

Partition Partition::canonical() const {
  std::vector<int> remap(num_groups_, -1);
  int next = 0;
  std::vector<int> a;
  a.reserve(assignment_.size());
  for (int b : assignment_) {
    if (remap[b] < 0) remap[b] = next++;
    a.push_back(remap[b]);
  }
  return Partition(std::move(a));
}

BlockState BlockState::from_layer(const LayeredMultigraph& g, std::size_t layer, const Partition& b) {
  if (b.size() != g.num_nodes()) throw Error("partition size does not match graph");
  BlockState bs;
  const std::size_t B = b.num_groups();
  bs.num_groups = B;
  bs.e_rs.assign(B * B, 0);
  bs.e_out.assign(B, 0);
  bs.e_in.assign(B, 0);
  bs.k_out.assign(g.num_nodes(), 0);
  bs.k_in.assign(g.num_nodes(), 0);
  bs.n_r = b.group_sizes();
  for (const Edge& e : g.layer(layer)) {
    const int r = b[e.src], s = b[e.dst];
    ++bs.e_rs[r * B + s];
    ++bs.e_out[r];
    ++bs.e_in[s];
    ++bs.k_out[e.src];
    ++bs.k_in[e.dst];
  }
  return bs;
}

std::int64_t BlockState::num_edges() const noexcept {
  std::int64_t E = 0;
  for (auto x : e_rs) E += x;
  return E;
}

void BlockState::check_consistency(const Partition& b) const {
  const std::size_t B = num_groups;
  if (e_rs.size() != B * B || e_out.size() != B || e_in.size() != B || n_r.size() != B) {
    throw Error("block state dimensions inconsistent with group count");
  }
  if (b.num_groups() != B || k_out.size() != b.size() || k_in.size() != b.size()) {
    throw Error("block state does not match partition");
  }
  std::vector<std::int64_t> row(B, 0), col(B, 0), kout(B, 0), kin(B, 0), n(B, 0);
  for (std::size_t r = 0; r < B; ++r) {
    for (std::size_t s = 0; s < B; ++s) {
      if (at(r, s) < 0) throw Error("negative edge count");
      row[r] += at(r, s);
      col[s] += at(r, s);
    }
  }
  for (std::size_t i = 0; i < b.size(); ++i) {
    kout[b[i]] += k_out[i];
    kin[b[i]] += k_in[i];
    ++n[b[i]];
  }
  for (std::size_t r = 0; r < B; ++r) {
    if (row[r] != e_out[r] || col[r] != e_in[r]) throw Error("e_out/e_in do not match e_rs");
    if (kout[r] != e_out[r] || kin[r] != e_in[r]) throw Error("node degrees do not sum to group stubs");
    if (n[r] != n_r[r]) throw Error("group sizes do not match partition");
  }
}

double log_marginal_normal(std::int64_t n, double sum_z, double sum_zz, const WeightPrior& p) {
  if (n <= 0) return 0.0;
  const double dn = static_cast<double>(n);
  const double mean = sum_z / dn;
  const double ss = std::max(0.0, sum_zz - sum_z * mean);
  const double kappa_n = p.kappa0 + dn;
  const double nu_n = p.nu0 + dn;
  const double scatter = p.nu0 * p.sigma0_sq + ss + p.kappa0 * dn / kappa_n * (mean - p.mu0) * (mean - p.mu0);
  return std::lgamma(nu_n / 2.0) - std::lgamma(p.nu0 / 2.0) + 0.5 * std::log(p.kappa0 / kappa_n) +
         (p.nu0 / 2.0) * std::log(p.nu0 * p.sigma0_sq) - (nu_n / 2.0) * std::log(scatter) -
         (dn / 2.0) * std::log(std::numbers::pi);
}

double dl_partition(const Partition& b) {
  const double N = static_cast<double>(b.size());
  if (b.size() == 0) return 0.0;
  const double B = static_cast<double>(b.num_groups());
  std::vector<double> terms;
  for (auto n : b.group_sizes()) terms.push_back(log_factorial(static_cast<double>(n)));
  const double nats = log_factorial(N) + log_binomial(N - 1, B - 1) + std::log(N) - sorted_sum(terms);
  return nats / kLn2;
}

double dl_edge_matrix(std::size_t num_groups, std::int64_t num_edges) {
  if (num_edges < 0) throw Error("negative edge count");
  const double B = static_cast<double>(num_groups);
  return log_multiset(B * B, static_cast<double>(num_edges)) / kLn2;
}

double dl_edge_matrix(std::span<const std::int64_t> e_rs, std::size_t num_groups) {
  if (e_rs.size() != num_groups * num_groups) throw Error("edge matrix is not B x B");
  std::int64_t E = 0;
  for (auto x : e_rs) {
    if (x < 0) throw Error("negative entry in edge count matrix");
    E += x;
  }
  return dl_edge_matrix(num_groups, E);
}

double dl_degrees(const BlockState& bs) {
  std::vector<double> terms;
  for (std::size_t r = 0; r < bs.num_groups; ++r) {
    const double n = static_cast<double>(bs.n_r[r]);
    terms.push_back(log_multiset(n, static_cast<double>(bs.e_out[r])) +
                    log_multiset(n, static_cast<double>(bs.e_in[r])));
  }
  return sorted_sum(terms) / kLn2;
}

double dl_adjacency(const LayeredMultigraph& g, std::size_t layer, const Partition& b,
                    const BlockState& bs) {
  bs.check_consistency(b);
  if (bs.num_edges() != static_cast<std::int64_t>(g.num_edges(layer))) {
    throw Error("block state edge count does not match layer");
  }
  // ln P = sum ln e_rs! + sum ln k! - sum ln e_r! - sum ln A_ij!
  std::vector<double> cell_terms, group_terms;
  for (auto x : bs.e_rs) {
    if (x > 1) cell_terms.push_back(log_factorial(static_cast<double>(x)));
  }
  for (std::size_t r = 0; r < bs.num_groups; ++r) {
    group_terms.push_back(log_factorial(static_cast<double>(bs.e_out[r])) +
                          log_factorial(static_cast<double>(bs.e_in[r])));
  }
  double log_p = sorted_sum(cell_terms) - sorted_sum(group_terms);
  for (std::size_t i = 0; i < bs.k_out.size(); ++i) {
    log_p += log_factorial(static_cast<double>(bs.k_out[i])) + log_factorial(static_cast<double>(bs.k_in[i]));
  }
  std::map<std::pair<NodeIndex, NodeIndex>, std::int64_t> multiplicity;
  for (const Edge& e : g.layer(layer)) ++multiplicity[{e.src, e.dst}];
  for (const auto& [pair, m] : multiplicity) log_p -= log_factorial(static_cast<double>(m));
  return -log_p / kLn2;
}

double dl_weights(const LayeredMultigraph& g, std::size_t layer, const Partition& b,
                  const WeightPrior& prior) {
  if (b.size() != g.num_nodes()) throw Error("partition size does not match graph");
  struct Stats {
    std::int64_t n = 0;
    double sum_z = 0.0, sum_zz = 0.0;
  };
  std::map<std::pair<int, int>, Stats> cells;
  double jacobian = 0.0;
  for (const Edge& e : g.layer(layer)) {
    if (!(e.weight > 0.0)) throw Error("non-positive edge weight");
    const double z = std::log(e.weight);
    Stats& c = cells[{b[e.src], b[e.dst]}];
    ++c.n;
    c.sum_z += z;
    c.sum_zz += z * z;
    jacobian += z;
  }
  std::vector<double> terms;
  for (const auto& [rs, c] : cells) terms.push_back(log_marginal_normal(c.n, c.sum_z, c.sum_zz, prior));
  return (jacobian - sorted_sum(terms)) / kLn2;
}

DlBreakdown description_length(const LayeredMultigraph& g, std::size_t layer, const Partition& b,
                               const WeightPrior& prior) {
  const BlockState bs = BlockState::from_layer(g, layer, b);
  DlBreakdown d;
  d.bits_partition = dl_partition(b);
  d.bits_edge_matrix = dl_edge_matrix(bs.e_rs, bs.num_groups);
  d.bits_degrees = dl_degrees(bs);
  d.bits_adjacency = dl_adjacency(g, layer, b, bs);
  d.bits_weights = dl_weights(g, layer, b, prior);
  d.total = d.bits_partition + (d.bits_edge_matrix + d.bits_degrees + d.bits_adjacency + d.bits_weights);
  return d;
}

}  // namespace ilsbm::sbm
