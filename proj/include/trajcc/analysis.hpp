#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "trajcc/bigraph.hpp"
#include "trajcc/cocluster.hpp"
#include "trajcc/community.hpp"

namespace trajcc {

// Counts of elements per (row label, column label) pair.
struct ContingencyReport {
  std::vector<int> row_labels;
  std::vector<int> col_labels;
  std::vector<std::vector<std::int64_t>> counts;
  std::vector<std::int64_t> row_totals;
  std::vector<std::int64_t> col_totals;
  std::int64_t total = 0;
  // Per row: share of the row held by its majority column label.
  std::vector<double> purity;

  std::size_t pure_rows(double threshold = 1.0) const;
};

// Rows are predicted clusters, columns are ground-truth classes, both sorted by label.
// Throws DataError when the inputs differ in length.
ContingencyReport confusion(std::span<const int> predicted, std::span<const int> truth);

// Pair-counting adjusted Rand index. Equals 1 when both partitions are trivial
// in the same way (the expected index is then undefined).
double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

struct MICell {
  int trajectory_cluster = 0;
  int segment_cluster = 0;
  std::int64_t count = 0;
  double joint = 0.0;              // P(c_S, c_T) = N_cd / N
  double trajectory_share = 0.0;   // P(c_T) = N_c / N
  double segment_share = 0.0;      // P(c_S) = M_d / N
  double expected = 0.0;           // P(c_S) P(c_T)
  double mi = 0.0;                 // P(c_S,c_T) log(P(c_S,c_T) / (P(c_S) P(c_T))), 0 if N_cd = 0
};

struct MIReport {
  std::vector<MICell> cells;  // row-major over (trajectory cluster, segment cluster)
  std::size_t trajectory_clusters = 0;
  std::size_t segment_clusters = 0;
  double total = 0.0;
  bool bits = false;
};

// Per-co-cluster mutual information contributions of a trajectory-cluster x
// segment-cluster count table. Throws DataError when the table is empty or all zero.
MIReport mutual_information(const std::vector<std::vector<std::int64_t>>& table, bool bits = false);
MIReport mutual_information(const CoClusterModel& model, bool bits = false);

// Standard mutual information of a count table, sum_{c,d} p log(p / (p_c p_d)).
double contingency_mutual_information(const std::vector<std::vector<std::int64_t>>& table);

// The traversal matrix reordered so that clusters are contiguous.
struct CrossedMatrix {
  std::vector<std::size_t> row_order;  // matrix rows (trajectories), grouped by cluster
  std::vector<std::size_t> col_order;  // matrix columns (segments), grouped by cluster
  std::vector<std::size_t> row_bounds;  // cluster c spans [row_bounds[c], row_bounds[c+1])
  std::vector<std::size_t> col_bounds;
  std::vector<std::vector<std::int64_t>> block_counts;
  std::vector<std::vector<double>> block_density;  // traversals / (rows x cols)
};

// Throws DataError unless the partitions cover the matrix rows and columns.
CrossedMatrix crossed_matrix(const TraversalMatrix& m, std::span<const int> trajectory_clusters,
                             std::span<const int> segment_clusters);
CrossedMatrix crossed_matrix(const CoClusterModel& model);

// Grayscale (binary PGM) picture of the reordered matrix: darker = more traversals,
// block boundaries drawn in mid gray.
void write_density_pgm(std::ostream& out, const TraversalMatrix& m, const CrossedMatrix& crossed);

}  // namespace trajcc
