#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "trajcc/bigraph.hpp"

namespace trajcc {

enum class Side : int { Trajectory = 0, Segment = 1 };

constexpr Side other(Side s) { return s == Side::Trajectory ? Side::Segment : Side::Trajectory; }

// ln n! via a lazily grown table.
double log_factorial(std::int64_t n);
// ln C(n, k).
double log_binomial(std::int64_t n, std::int64_t k);

// ln B(n, k) for all k in [0, n], where B(n, k) = sum_{j <= k} S(n, j) counts the
// partitions of n items into at most k non-empty parts (S = Stirling numbers of the
// second kind). Built in O(n^2) by a log-domain recurrence.
class LogBellTable {
 public:
  explicit LogBellTable(std::size_t n);
  std::size_t n() const { return n_; }
  // k is clamped to n; ln B(n, 0) = -inf for n > 0.
  double operator()(std::size_t k) const;

 private:
  std::size_t n_;
  std::vector<double> values_;
};

// The terms of the MAP cost, in nats.
struct CostBreakdown {
  double model_size = 0.0;          // ln n + ln m
  double partition_prior = 0.0;     // ln B(n, kT) + ln B(m, kS)
  double cell_prior = 0.0;          // ln C(N + kT kS - 1, kT kS - 1)
  double cluster_prior = 0.0;       // sum_c ln C(N_c + n_c - 1, n_c - 1) + same over d
  double grid_likelihood = 0.0;     // ln N! - sum_{c,d} ln N_cd!
  double cluster_likelihood = 0.0;  // sum_c (ln N_c! - sum_{i in c} ln n_i!) + same over d

  double prior() const { return model_size + partition_prior + cell_prior + cluster_prior; }
  double likelihood() const { return grid_likelihood + cluster_likelihood; }
  double total() const { return prior() + likelihood(); }
};

// A co-clustering of a TraversalMatrix: a partition of its rows (trajectories) and of
// its columns (segments), with the co-cluster counts N_cd and marginals kept in sync.
// Cluster ids are dense and canonical (numbered by first appearance in item order)
// whenever control returns to the caller.
class CoClusterModel {
 public:
  using Cell = std::pair<int, std::int64_t>;  // (cluster on the other side, count)

  CoClusterModel(std::shared_ptr<const TraversalMatrix> matrix, std::span<const int> trajectory_labels,
                 std::span<const int> segment_labels);

  // One item per cluster on both sides.
  static CoClusterModel finest(std::shared_ptr<const TraversalMatrix> matrix);
  // One cluster per side.
  static CoClusterModel coarsest(std::shared_ptr<const TraversalMatrix> matrix);

  const TraversalMatrix& matrix() const { return *matrix_; }
  std::shared_ptr<const TraversalMatrix> matrix_ptr() const { return matrix_; }

  std::size_t item_count(Side s) const { return state(s).item_cluster.size(); }
  int cluster_count(Side s) const { return state(s).alive_count; }
  std::span<const int> assignment(Side s) const { return state(s).item_cluster; }
  std::int64_t cluster_total(Side s, int c) const;
  int cluster_size(Side s, int c) const;
  std::int64_t cell(int trajectory_cluster, int segment_cluster) const;
  // Dense kT x kS table of N_cd.
  std::vector<std::vector<std::int64_t>> contingency() const;

  CostBreakdown cost_breakdown() const;
  double cost() const { return cost_breakdown().total(); }

  // cost(after merging c1 and c2 on side s) - cost(now), touching only affected terms.
  double merge_delta(Side s, int c1, int c2) const;
  void merge(Side s, int c1, int c2);

  // cost(after moving item to cluster `target`) - cost(now); target == -1 moves the
  // item to a fresh singleton cluster.
  double move_delta(Side s, std::size_t item, int target) const;
  void move(Side s, std::size_t item, int target);

  // Recomputes counts and marginals from the matrix; throws AuditError on mismatch.
  void audit() const;

  // Best-merge agglomeration down to one cluster per side; the cheapest model on that
  // path is kept.
  void greedy_merge();
  // Randomized passes of single-item moves (including to a fresh singleton) until a
  // full pass makes no improving move or `max_passes` passes ran.
  void post_optimize(std::uint64_t seed, int max_passes);

 private:
  struct SideState {
    std::vector<int> item_cluster;
    std::vector<std::int64_t> item_total;
    // Per cluster slot; dead slots have size 0.
    std::vector<int> size;
    std::vector<std::int64_t> total;
    std::vector<std::vector<Cell>> cells;  // sorted by other-side cluster
    std::vector<int> free_slots;
    int alive_count = 0;
    std::shared_ptr<const LogBellTable> log_bell;
  };

  CoClusterModel() = default;
  SideState& state(Side s) { return sides_[static_cast<std::size_t>(s)]; }
  const SideState& state(Side s) const { return sides_[static_cast<std::size_t>(s)]; }
  std::span<const CountEntry> item_entries(Side s, std::size_t item) const;
  void build(std::span<const int> trajectory_labels, std::span<const int> segment_labels);
  void check_cluster(Side s, int c) const;

  double global_merge_delta(Side s) const;
  double local_merge_delta(Side s, int a, int b) const;
  void merge_slots(Side s, int keep, int drop);
  std::vector<Cell> item_profile(Side s, std::size_t item) const;
  double move_delta_with_profile(Side s, std::size_t item, int target, std::span<const Cell> profile) const;
  void move_with_profile(Side s, std::size_t item, int target, std::span<const Cell> profile);
  void add_to_cell(Side s, int c, int d, std::int64_t delta);
  void canonicalize();

  std::shared_ptr<const TraversalMatrix> matrix_;
  std::array<SideState, 2> sides_;
};

CoClusterModel greedy(CoClusterModel start);
CoClusterModel post_optimize(CoClusterModel model, std::uint64_t seed,
                             int max_passes = std::numeric_limits<int>::max());

struct SearchOptions {
  int restarts = 0;
  std::uint64_t seed = 0;
  int jobs = 1;
  int max_passes = std::numeric_limits<int>::max();
};

struct SearchRun {
  double cost = 0.0;
  int trajectory_clusters = 0;
  int segment_clusters = 0;
};

struct SearchResult {
  CoClusterModel model;
  int best_run = 0;  // 0 = finest start, r = restart r
  std::vector<SearchRun> runs;
};

// Seed derivation for VNS run r (0 = finest start): every run owns an independent
// substream of `seed`.
std::uint64_t run_seed(std::uint64_t seed, int run);
std::uint64_t post_optimize_seed(std::uint64_t seed, int run);

// Random start for restart `restart` of `seed`: per side k = ceil(exp(U ln n)) clusters
// and uniform assignments. With an anchor, the random partition is intersected with
// the anchor's, giving a random refinement of it.
CoClusterModel random_start(std::shared_ptr<const TraversalMatrix> matrix, std::uint64_t seed, int restart,
                            const CoClusterModel* anchor = nullptr);

// greedy + post_optimize from the finest model (run 0), then from `restarts` random
// refinements of run 0's result; returns the cheapest (ties: lowest run index).
// Identical for any `jobs`.
SearchResult vns_search(std::shared_ptr<const TraversalMatrix> matrix, const SearchOptions& options);

}  // namespace trajcc
