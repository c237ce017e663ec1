#include "ilsbm/block_state.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace ilsbm {

using sbm::kLn2;
using sbm::log_binomial;
using sbm::log_factorial;
using sbm::log_multiset;

LayeredBlockState::LayeredBlockState(const LayeredMultigraph& g, const sbm::Partition& b,
                                     const sbm::WeightPrior& prior)
    : graph_(&g), prior_(prior), assignment_(b.assignment()) {
  const std::size_t N = g.num_nodes();
  if (b.size() != N) throw Error("partition size does not match graph");
  group_size_.assign(N, 0);
  for (int r : assignment_) ++group_size_[r];
  num_groups_ = b.num_groups();
  neighbor_ends_.assign(N, {});

  layers_.resize(g.num_layers());
  for (std::size_t l = 0; l < g.num_layers(); ++l) {
    Layer& layer = layers_[l];
    layer.num_edges = static_cast<std::int64_t>(g.num_edges(l));
    layer.e_out.assign(N, 0);
    layer.e_in.assign(N, 0);
    layer.rows.assign(N, {});
    layer.cols.assign(N, {});
    layer.k_out.assign(N, 0);
    layer.k_in.assign(N, 0);
    layer.out_adj.assign(N, {});
    layer.in_adj.assign(N, {});

    std::map<std::pair<NodeIndex, NodeIndex>, Cell> pairs;
    for (const Edge& e : g.layer(l)) {
      const double z = std::log(e.weight);
      const Cell c{1, z, z * z};
      pairs[{e.src, e.dst}] += c;
      ++layer.k_out[e.src];
      ++layer.k_in[e.dst];
      const int r = assignment_[e.src], s = assignment_[e.dst];
      layer.rows[r][s] += c;
      layer.cols[s][r] += c;
      ++layer.e_out[r];
      ++layer.e_in[s];
      neighbor_ends_[e.src].push_back(e.dst);
      neighbor_ends_[e.dst].push_back(e.src);
      constant_nats_ += z;
    }
    for (const auto& [ij, c] : pairs) {
      layer.out_adj[ij.first].push_back({ij.second, c});
      if (ij.first != ij.second) layer.in_adj[ij.second].push_back({ij.first, c});
      constant_nats_ += log_factorial(static_cast<double>(c.count));
    }
    for (std::size_t i = 0; i < N; ++i) {
      constant_nats_ -= log_factorial(static_cast<double>(layer.k_out[i])) +
                        log_factorial(static_cast<double>(layer.k_in[i]));
    }
  }
}

sbm::Partition LayeredBlockState::partition() const { return sbm::Partition::from_labels(assignment_); }

double LayeredBlockState::cell_nats(const Cell& c) const {
  if (c.count <= 0) return 0.0;
  return -log_factorial(static_cast<double>(c.count)) -
         sbm::log_marginal_normal(c.count, c.sum_z, c.sum_zz, prior_);
}

double LayeredBlockState::group_nats(double n, std::int64_t e_out, std::int64_t e_in) const {
  const double eo = static_cast<double>(e_out), ei = static_cast<double>(e_in);
  return log_multiset(n, eo) + log_multiset(n, ei) + log_factorial(eo) + log_factorial(ei);
}

double LayeredBlockState::edge_matrix_nats(std::int64_t num_groups) const {
  const double B = static_cast<double>(num_groups);
  double nats = 0.0;
  for (const Layer& layer : layers_) nats += log_multiset(B * B, static_cast<double>(layer.num_edges));
  return nats;
}

double LayeredBlockState::entropy_bits() const {
  const double N = static_cast<double>(num_nodes());
  if (num_nodes() == 0) return 0.0;
  const double B = static_cast<double>(num_groups_);
  double nats = log_factorial(N) + log_binomial(N - 1, B - 1) + std::log(N);
  for (std::size_t r = 0; r < group_size_.size(); ++r) {
    nats -= log_factorial(static_cast<double>(group_size_[r]));
  }
  nats += edge_matrix_nats(static_cast<std::int64_t>(num_groups_));
  for (const Layer& layer : layers_) {
    for (std::size_t r = 0; r < group_size_.size(); ++r) {
      if (group_size_[r] == 0) continue;
      nats += group_nats(static_cast<double>(group_size_[r]), layer.e_out[r], layer.e_in[r]);
      for (const auto& [s, c] : layer.rows[r]) nats += cell_nats(c);
    }
  }
  return (nats + constant_nats_) / kLn2;
}

LayeredBlockState::Cell LayeredBlockState::cell_at(const Layer& layer, int r, int s) const {
  const auto& row = layer.rows[r];
  auto it = row.find(s);
  return it == row.end() ? Cell{} : it->second;
}

void LayeredBlockState::apply_cell(Layer& layer, int r, int s, const Cell& delta) {
  Cell& c = layer.rows[r][s];
  c += delta;
  if (c.count == 0) {
    layer.rows[r].erase(s);
    layer.cols[s].erase(r);
  } else {
    layer.cols[s][r] = c;
  }
}

void LayeredBlockState::collect_move_deltas(const Layer& layer, NodeIndex i, int r, int s,
                                            std::vector<CellDelta>& out) const {
  out.clear();
  auto add = [&out](int a, int b, const Cell& c, bool negate) {
    for (auto& d : out) {
      if (d.r == a && d.s == b) {
        if (negate) d.delta -= c; else d.delta += c;
        return;
      }
    }
    CellDelta d{a, b, {}};
    if (negate) d.delta -= c; else d.delta += c;
    out.push_back(d);
  };
  for (const Neighbor& nb : layer.out_adj[i]) {
    if (nb.node == i) {
      add(r, r, nb.stats, true);
      add(s, s, nb.stats, false);
    } else {
      const int t = assignment_[nb.node];
      add(r, t, nb.stats, true);
      add(s, t, nb.stats, false);
    }
  }
  for (const Neighbor& nb : layer.in_adj[i]) {
    const int t = assignment_[nb.node];
    add(t, r, nb.stats, true);
    add(t, s, nb.stats, false);
  }
}

double LayeredBlockState::move_delta_bits(NodeIndex i, int to) const {
  const int r = assignment_[i];
  if (r == to) return 0.0;
  if (to < 0 || static_cast<std::size_t>(to) >= num_nodes()) throw Error("group label out of range");
  const std::int64_t n_r = group_size_[r], n_s = group_size_[to];
  std::int64_t B_new = static_cast<std::int64_t>(num_groups_);
  if (n_r == 1) --B_new;
  if (n_s == 0) ++B_new;

  const double N = static_cast<double>(num_nodes());
  double nats = -(log_factorial(static_cast<double>(n_r - 1)) + log_factorial(static_cast<double>(n_s + 1)) -
                  log_factorial(static_cast<double>(n_r)) - log_factorial(static_cast<double>(n_s)));
  if (B_new != static_cast<std::int64_t>(num_groups_)) {
    nats += log_binomial(N - 1, static_cast<double>(B_new - 1)) -
            log_binomial(N - 1, static_cast<double>(num_groups_) - 1);
    nats += edge_matrix_nats(B_new) - edge_matrix_nats(static_cast<std::int64_t>(num_groups_));
  }

  std::vector<CellDelta> deltas;
  for (const Layer& layer : layers_) {
    const std::int64_t ko = layer.k_out[i], ki = layer.k_in[i];
    nats += group_nats(static_cast<double>(n_r - 1), layer.e_out[r] - ko, layer.e_in[r] - ki) +
            group_nats(static_cast<double>(n_s + 1), layer.e_out[to] + ko, layer.e_in[to] + ki) -
            group_nats(static_cast<double>(n_r), layer.e_out[r], layer.e_in[r]) -
            group_nats(static_cast<double>(n_s), layer.e_out[to], layer.e_in[to]);
    collect_move_deltas(layer, i, r, to, deltas);
    for (const CellDelta& d : deltas) {
      if (d.delta.count == 0 && d.delta.sum_z == 0.0 && d.delta.sum_zz == 0.0) continue;
      Cell c = cell_at(layer, d.r, d.s);
      const double before = cell_nats(c);
      c += d.delta;
      nats += cell_nats(c) - before;
    }
  }
  return nats / kLn2;
}

void LayeredBlockState::move(NodeIndex i, int to) {
  const int r = assignment_[i];
  if (r == to) return;
  if (to < 0 || static_cast<std::size_t>(to) >= num_nodes()) throw Error("group label out of range");
  std::vector<CellDelta> deltas;
  for (Layer& layer : layers_) {
    collect_move_deltas(layer, i, r, to, deltas);
    for (const CellDelta& d : deltas) {
      if (d.delta.count == 0 && d.delta.sum_z == 0.0 && d.delta.sum_zz == 0.0) continue;
      apply_cell(layer, d.r, d.s, d.delta);
    }
    layer.e_out[r] -= layer.k_out[i];
    layer.e_in[r] -= layer.k_in[i];
    layer.e_out[to] += layer.k_out[i];
    layer.e_in[to] += layer.k_in[i];
  }
  if (group_size_[r] == 1) --num_groups_;
  if (group_size_[to] == 0) ++num_groups_;
  --group_size_[r];
  ++group_size_[to];
  assignment_[i] = to;
}

double LayeredBlockState::merge_delta_bits(int r, int s) const {
  if (r == s) return 0.0;
  const std::int64_t n_r = group_size_[r], n_s = group_size_[s];
  if (n_r == 0 || n_s == 0) throw Error("cannot merge an empty group");
  const double N = static_cast<double>(num_nodes());
  const auto B = static_cast<std::int64_t>(num_groups_);
  double nats = -(log_factorial(static_cast<double>(n_r + n_s)) - log_factorial(static_cast<double>(n_r)) -
                  log_factorial(static_cast<double>(n_s)));
  nats += log_binomial(N - 1, static_cast<double>(B - 2)) - log_binomial(N - 1, static_cast<double>(B - 1));
  nats += edge_matrix_nats(B - 1) - edge_matrix_nats(B);

  std::unordered_map<int, Cell> row, col;
  for (const Layer& layer : layers_) {
    nats += group_nats(static_cast<double>(n_r + n_s), layer.e_out[r] + layer.e_out[s],
                       layer.e_in[r] + layer.e_in[s]) -
            group_nats(static_cast<double>(n_r), layer.e_out[r], layer.e_in[r]) -
            group_nats(static_cast<double>(n_s), layer.e_out[s], layer.e_in[s]);
    row.clear();
    col.clear();
    for (int g : {r, s}) {
      for (const auto& [t, c] : layer.rows[g]) {
        nats -= cell_nats(c);
        row[t == s ? r : t] += c;
      }
      for (const auto& [t, c] : layer.cols[g]) {
        if (t == r || t == s) continue;
        nats -= cell_nats(c);
        col[t] += c;
      }
    }
    for (const auto& [t, c] : row) nats += cell_nats(c);
    for (const auto& [t, c] : col) nats += cell_nats(c);
  }
  return nats / kLn2;
}

}  // namespace ilsbm
