#pragma once

#include <algorithm>
#include <cstddef>
#include <set>
#include <utility>

#include "nisqsim/program.hpp"

namespace nisqsim {

/// Undirected qubit connectivity of a device.
class CouplingGraph {
 public:
  using Edge = std::pair<QubitIndex, QubitIndex>;

  CouplingGraph() = default;
  explicit CouplingGraph(std::size_t qubit_count) : qubit_count_(qubit_count) {}

  static Edge normalize(QubitIndex a, QubitIndex b) { return {std::min(a, b), std::max(a, b)}; }

  void add_edge(QubitIndex a, QubitIndex b) { edges_.insert(normalize(a, b)); }
  bool connected(QubitIndex a, QubitIndex b) const { return edges_.count(normalize(a, b)) != 0; }

  std::size_t qubit_count() const { return qubit_count_; }
  const std::set<Edge>& edges() const { return edges_; }

 private:
  std::size_t qubit_count_ = 0;
  std::set<Edge> edges_;
};

}  // namespace nisqsim
