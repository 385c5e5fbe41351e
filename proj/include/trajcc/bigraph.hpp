#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajcc/dataset.hpp"
#include "trajcc/network.hpp"

namespace trajcc {

// One traversal count in a sparse row or column: (index on the other axis, n_{s,T}).
struct CountEntry {
  std::size_t index = 0;
  std::int64_t count = 0;

  bool operator==(const CountEntry&) const = default;
};

struct Traversal {
  TrajectoryId trajectory = 0;
  SegmentId segment = 0;
  std::int64_t count = 0;
};

// Trajectory x segment traversal counts. Rows follow the order in which trajectories
// were given, columns are the visited segments in increasing id order. Every row and
// every column holds at least one positive count.
class TraversalMatrix {
 public:
  TraversalMatrix() = default;
  // Zero counts are dropped; duplicate (trajectory, segment) entries are summed.
  // A trajectory listed in `row_ids` with no positive count is a DataError.
  TraversalMatrix(std::vector<TrajectoryId> row_ids, std::span<const Traversal> traversals);

  std::size_t rows() const { return row_ids_.size(); }
  std::size_t cols() const { return col_ids_.size(); }
  std::int64_t total() const { return total_; }
  std::size_t nonzeros() const { return nonzeros_; }

  std::span<const TrajectoryId> row_ids() const { return row_ids_; }
  std::span<const SegmentId> col_ids() const { return col_ids_; }
  std::optional<std::size_t> row_index(TrajectoryId id) const;
  std::optional<std::size_t> col_index(SegmentId id) const;

  std::span<const CountEntry> row(std::size_t r) const { return rows_[r]; }
  std::span<const CountEntry> col(std::size_t c) const { return cols_[c]; }
  std::int64_t row_total(std::size_t r) const { return row_totals_[r]; }
  std::int64_t col_total(std::size_t c) const { return col_totals_[c]; }
  std::int64_t count(std::size_t r, std::size_t c) const;

  bool operator==(const TraversalMatrix& other) const {
    return row_ids_ == other.row_ids_ && col_ids_ == other.col_ids_ && rows_ == other.rows_;
  }

 private:
  std::vector<TrajectoryId> row_ids_;
  std::vector<SegmentId> col_ids_;
  std::vector<std::vector<CountEntry>> rows_;
  std::vector<std::vector<CountEntry>> cols_;
  std::vector<std::int64_t> row_totals_;
  std::vector<std::int64_t> col_totals_;
  std::int64_t total_ = 0;
  std::size_t nonzeros_ = 0;
};

// n_{s,T} = occurrences of s in T. Throws DataError on an empty dataset.
TraversalMatrix build_traversal_matrix(const TrajectoryDataset& ds);

// CSV `trajectory_id,segment_id,count`, one line per positive count.
void write_matrix(std::ostream& out, const TraversalMatrix& m);
TraversalMatrix read_matrix(std::istream& in);
void save_matrix(const std::string& path, const TraversalMatrix& m);
TraversalMatrix load_matrix(const std::string& path);

// Per-column segment lengths looked up in the network; DataError if a visited
// segment is missing.
std::vector<double> segment_lengths(const TraversalMatrix& m, const RoadNetwork& net);

// Length-weighted tf-idf contribution w_{s,T} of segment column `seg` to trajectory
// row `traj`:
//   n_{s,T} length(s) / sum_{s' in T} n_{s',T} length(s')  *  ln(|T| / |{T_i : s in T_i}|)
// Requires n_{s,T} > 0.
double segment_contribution(const TraversalMatrix& m, std::span<const double> lengths,
                            std::size_t traj, std::size_t seg);
double segment_contribution(const TraversalMatrix& m, const RoadNetwork& net,
                            std::size_t traj, std::size_t seg);

// Relevance w_{T,s} of trajectory row `traj` to segment column `seg`:
//   n_{s,T} / sum_{T'} n_{s,T'}  *  ln(|S| / |{distinct segments of T}|)
// Requires n_{s,T} > 0.
double trajectory_relevance(const TraversalMatrix& m, std::size_t traj, std::size_t seg);

enum class NodeKind { Trajectory, Segment };

std::string to_string(NodeKind kind);
NodeKind node_kind_from_string(const std::string& s);

struct WeightedEdge {
  std::size_t a = 0;
  std::size_t b = 0;
  double weight = 0.0;
};

struct Neighbor {
  std::size_t node = 0;
  double weight = 0.0;
};

// Undirected weighted graph without self-loops; all weights strictly positive.
class SimilarityGraph {
 public:
  SimilarityGraph() = default;
  // Edges are given once per unordered pair (either orientation). Throws DataError on
  // self-loops, duplicate pairs, out-of-range nodes or non-positive weights.
  SimilarityGraph(NodeKind kind, std::vector<std::int64_t> node_ids, std::vector<WeightedEdge> edges);

  NodeKind kind() const { return kind_; }
  std::size_t node_count() const { return node_ids_.size(); }
  std::span<const std::int64_t> node_ids() const { return node_ids_; }
  // Edges with a < b, sorted by (a, b).
  std::span<const WeightedEdge> edges() const { return edges_; }
  // Neighbors sorted by node index.
  std::span<const Neighbor> neighbors(std::size_t node) const { return adjacency_[node]; }
  double degree(std::size_t node) const { return degrees_[node]; }
  double total_weight() const { return total_weight_; }
  // 0 when there is no edge.
  double weight(std::size_t a, std::size_t b) const;

 private:
  NodeKind kind_ = NodeKind::Trajectory;
  std::vector<std::int64_t> node_ids_;
  std::vector<WeightedEdge> edges_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<double> degrees_;
  double total_weight_ = 0.0;
};

struct Projection {
  SimilarityGraph graph;
  // Nodes whose weight vector is identically zero; they get no edges.
  std::vector<std::size_t> zero_vector_nodes;
  std::vector<std::string> warnings;
};

// Cosine similarities of the w_{s,T} vectors; an edge for every pair with positive
// similarity. Pairs are found through the segment -> trajectories inverted index.
Projection project_trajectories(const TraversalMatrix& m, const RoadNetwork& net);
Projection project_trajectories(const TraversalMatrix& m, std::span<const double> lengths);

// Cosine similarities of the w_{T,s} vectors over trajectories.
Projection project_segments(const TraversalMatrix& m);

// Edge list CSV `node_a,node_b,weight` (node ids, not indices).
void write_graph_csv(std::ostream& out, const SimilarityGraph& g);
// Rebuilds the graph from the CSV plus the node list and kind of the JSON sidecar.
SimilarityGraph read_graph_csv(std::istream& in, NodeKind kind, std::vector<std::int64_t> node_ids);

}  // namespace trajcc
