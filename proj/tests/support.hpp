#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "ilsbm/netcore.hpp"

namespace testing_support {

using EdgeList = std::vector<std::tuple<int, int, double>>;

// Nodes are named n0, n1, ... ; layer labels L0, L1, ... unless given.
inline ilsbm::LayeredMultigraph make_graph(std::size_t n, const std::vector<EdgeList>& layers,
                                           std::vector<std::string> labels = {}) {
  std::vector<std::string> nodes;
  for (std::size_t i = 0; i < n; ++i) nodes.push_back("n" + std::to_string(i));
  if (labels.empty()) {
    for (std::size_t l = 0; l < layers.size(); ++l) labels.push_back("L" + std::to_string(l));
  }
  std::vector<std::vector<ilsbm::Edge>> out(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    for (const auto& [s, d, w] : layers[l]) {
      out[l].push_back({static_cast<ilsbm::NodeIndex>(s), static_cast<ilsbm::NodeIndex>(d), w});
    }
  }
  return ilsbm::LayeredMultigraph(std::move(nodes), std::move(labels), std::move(out));
}

}  // namespace testing_support
