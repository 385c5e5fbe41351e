#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "trajcc/bigraph.hpp"

namespace trajcc {

// Node -> cluster assignment with dense cluster ids in [0, k).
class Partition {
 public:
  Partition() = default;
  // Relabels `labels` densely in order of first appearance.
  explicit Partition(std::span<const int> labels);
  static Partition singletons(std::size_t n);
  static Partition single_cluster(std::size_t n);

  std::size_t size() const { return assignment_.size(); }
  int cluster_count() const { return cluster_count_; }
  int operator[](std::size_t node) const { return assignment_[node]; }
  std::span<const int> assignment() const { return assignment_; }
  std::vector<std::vector<std::size_t>> members() const;

  bool operator==(const Partition&) const = default;

 private:
  std::vector<int> assignment_;
  int cluster_count_ = 0;
};

// Q = sum_c [ W_c / W - (d_c / 2W)^2 ]. Throws DataError when the partition does not
// cover the graph's nodes or the graph has no edge weight.
double modularity(const SimilarityGraph& g, const Partition& p);

struct Merge {
  // Dendrogram cluster ids: 0..n-1 are the singletons, merge t creates id n + t.
  std::size_t a = 0;
  std::size_t b = 0;
  double delta_q = 0.0;
  double q = 0.0;  // modularity after this merge
  bool forced = false;  // delta_q <= 0
};

// Nested merge hierarchy. One tree per connected component: nodes in different
// components are never merged.
struct Dendrogram {
  std::size_t node_count = 0;
  double initial_q = 0.0;
  std::vector<Merge> merges;

  std::size_t component_count() const { return node_count - merges.size(); }
  // Partition after the first `prefix` merges.
  Partition partition_after(std::size_t prefix) const;
};

// Greedy agglomeration: repeatedly merges the adjacent cluster pair with the largest
// modularity gain (ties: smallest cluster pair), continuing through negative gains
// until every connected component is one cluster.
Dendrogram agglomerate(const SimilarityGraph& g);

// Single-node moves to the neighboring cluster with the largest positive gain, in
// node order, until a pass makes no move or `max_passes` passes ran.
Partition refine(const SimilarityGraph& g, const Partition& p,
                 int max_passes = std::numeric_limits<int>::max());

// Partition with exactly `clusters` clusters. Valid range is
// [component_count, node_count]; DataError otherwise.
Partition cut(const Dendrogram& d, std::size_t clusters);
// Prefix with the largest recorded modularity; ties go to fewer clusters.
Partition cut_best(const Dendrogram& d);
std::size_t best_prefix(const Dendrogram& d);

}  // namespace trajcc
