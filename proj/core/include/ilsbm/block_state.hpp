#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "ilsbm/netcore.hpp"
#include "ilsbm/sbm.hpp"

namespace ilsbm {

// Incrementally updatable sufficient statistics of a shared partition over all
// layers of a (binned) graph. Evaluates
//
//   dl_partition + sum over layers of (edge matrix + degrees + adjacency + weights)
//
// and the exact change of that quantity under single-node moves and group
// merges. Group labels range over 0..num_nodes-1 and may be sparse after
// moves; partition() returns the compacted form.
//
// Single writer. The graph must outlive the state.
class LayeredBlockState {
 public:
  LayeredBlockState(const LayeredMultigraph& g, const sbm::Partition& b,
                    const sbm::WeightPrior& prior = {});

  std::size_t num_nodes() const noexcept { return assignment_.size(); }
  std::size_t num_layers() const noexcept { return layers_.size(); }
  std::size_t num_groups() const noexcept { return num_groups_; }
  int group_of(NodeIndex i) const { return assignment_[i]; }
  std::int64_t group_size(int r) const { return group_size_[r]; }
  const std::vector<int>& assignment() const noexcept { return assignment_; }
  sbm::Partition partition() const;

  // Recomputed from the stored statistics, not from the graph.
  double entropy_bits() const;

  double move_delta_bits(NodeIndex i, int to) const;
  void move(NodeIndex i, int to);

  // Change when group s is merged into group r.
  double merge_delta_bits(int r, int s) const;

  // Every edge end incident to i over all layers, one entry per edge end,
  // listing the node at the other end (i itself for self-loops).
  std::span<const NodeIndex> neighbor_ends(NodeIndex i) const { return neighbor_ends_[i]; }

 private:
  struct Cell {
    std::int64_t count = 0;
    double sum_z = 0.0;
    double sum_zz = 0.0;

    Cell& operator+=(const Cell& o) {
      count += o.count;
      sum_z += o.sum_z;
      sum_zz += o.sum_zz;
      return *this;
    }
    Cell& operator-=(const Cell& o) {
      count -= o.count;
      sum_z -= o.sum_z;
      sum_zz -= o.sum_zz;
      return *this;
    }
  };
  struct Neighbor {
    NodeIndex node;
    Cell stats;
  };
  struct Layer {
    std::int64_t num_edges = 0;
    std::vector<std::int64_t> e_out, e_in;
    std::vector<std::unordered_map<int, Cell>> rows;  // rows[r][s]
    std::vector<std::unordered_map<int, Cell>> cols;  // cols[s][r], mirror of rows
    std::vector<std::int64_t> k_out, k_in;
    std::vector<std::vector<Neighbor>> out_adj, in_adj;
  };
  struct CellDelta {
    int r, s;
    Cell delta;
  };

  double cell_nats(const Cell& c) const;
  double group_nats(double n, std::int64_t e_out, std::int64_t e_in) const;
  double edge_matrix_nats(std::int64_t num_groups) const;
  Cell cell_at(const Layer& layer, int r, int s) const;
  void apply_cell(Layer& layer, int r, int s, const Cell& delta);
  void collect_move_deltas(const Layer& layer, NodeIndex i, int r, int s,
                           std::vector<CellDelta>& out) const;

  const LayeredMultigraph* graph_;
  sbm::WeightPrior prior_;
  std::vector<int> assignment_;
  std::vector<std::int64_t> group_size_;
  std::size_t num_groups_ = 0;
  std::vector<Layer> layers_;
  std::vector<std::vector<NodeIndex>> neighbor_ends_;
  double constant_nats_ = 0.0;
};

}  // namespace ilsbm
