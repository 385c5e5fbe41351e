#include "trajcc/cocluster.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <thread>
#include <unordered_map>

#include "trajcc/error.hpp"
#include "trajcc/rng.hpp"

namespace trajcc {

namespace {

constexpr std::int64_t kTableLimit = std::int64_t{1} << 20;

double lgamma_threadsafe(double x) {
#if defined(__GLIBC__)
  int sign = 0;
  return ::lgamma_r(x, &sign);
#else
  return std::lgamma(x);
#endif
}

double log_add(double a, double b) {
  if (a == -INFINITY) return b;
  if (b == -INFINITY) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// Sum in ascending order so the result does not depend on the order terms were
// produced in (cluster labels).
double ordered_sum(std::vector<double>& values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum;
}

std::shared_ptr<const LogBellTable> log_bell_for(std::size_t n) {
  static std::mutex mutex;
  static std::map<std::size_t, std::shared_ptr<const LogBellTable>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_shared<const LogBellTable>(n);
  return slot;
}

}  // namespace

double log_factorial(std::int64_t n) {
  if (n < 0) throw std::invalid_argument("log_factorial of a negative number");
  if (n >= kTableLimit) return lgamma_threadsafe(static_cast<double>(n) + 1.0);
  thread_local std::vector<double> table{0.0, 0.0};
  while (static_cast<std::int64_t>(table.size()) <= n) {
    table.push_back(lgamma_threadsafe(static_cast<double>(table.size()) + 1.0));
  }
  return table[static_cast<std::size_t>(n)];
}

double log_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) throw std::invalid_argument("log_binomial out of range");
  if (k == 0 || k == n) return 0.0;
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

LogBellTable::LogBellTable(std::size_t n) : n_(n), values_(n + 1, -INFINITY) {
  // stirling[j] = ln S(i, j) for the current row i.
  std::vector<double> stirling(n + 1, -INFINITY);
  stirling[0] = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = i; j >= 1; --j) {
      const double stay = stirling[j] == -INFINITY ? -INFINITY : std::log(static_cast<double>(j)) + stirling[j];
      stirling[j] = log_add(stay, stirling[j - 1]);
    }
    stirling[0] = -INFINITY;
  }
  double running = -INFINITY;
  for (std::size_t k = 0; k <= n; ++k) {
    running = log_add(running, stirling[k]);
    values_[k] = running;
  }
}

double LogBellTable::operator()(std::size_t k) const { return values_[std::min(k, n_)]; }

// ---------------------------------------------------------------------------
// Model construction and bookkeeping
// ---------------------------------------------------------------------------

CoClusterModel::CoClusterModel(std::shared_ptr<const TraversalMatrix> matrix,
                               std::span<const int> trajectory_labels, std::span<const int> segment_labels)
    : matrix_(std::move(matrix)) {
  if (!matrix_ || matrix_->rows() == 0) throw DataError("co-clustering needs a non-empty matrix");
  build(trajectory_labels, segment_labels);
}

CoClusterModel CoClusterModel::finest(std::shared_ptr<const TraversalMatrix> matrix) {
  std::vector<int> rows(matrix->rows());
  std::vector<int> cols(matrix->cols());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = static_cast<int>(i);
  for (std::size_t j = 0; j < cols.size(); ++j) cols[j] = static_cast<int>(j);
  return CoClusterModel(std::move(matrix), rows, cols);
}

CoClusterModel CoClusterModel::coarsest(std::shared_ptr<const TraversalMatrix> matrix) {
  const std::vector<int> rows(matrix->rows(), 0);
  const std::vector<int> cols(matrix->cols(), 0);
  return CoClusterModel(std::move(matrix), rows, cols);
}

std::span<const CountEntry> CoClusterModel::item_entries(Side s, std::size_t item) const {
  return s == Side::Trajectory ? matrix_->row(item) : matrix_->col(item);
}

void CoClusterModel::build(std::span<const int> trajectory_labels, std::span<const int> segment_labels) {
  if (trajectory_labels.size() != matrix_->rows() || segment_labels.size() != matrix_->cols()) {
    throw DataError("partition sizes do not match the traversal matrix");
  }
  for (Side s : {Side::Trajectory, Side::Segment}) {
    const auto labels = s == Side::Trajectory ? trajectory_labels : segment_labels;
    SideState& st = state(s);
    std::unordered_map<int, int> dense;
    st.item_cluster.clear();
    for (int label : labels) {
      const auto [it, inserted] = dense.emplace(label, static_cast<int>(dense.size()));
      st.item_cluster.push_back(it->second);
    }
    const std::size_t k = dense.size();
    st.alive_count = static_cast<int>(k);
    st.size.assign(k, 0);
    st.total.assign(k, 0);
    st.cells.assign(k, {});
    st.free_slots.clear();
    st.item_total.resize(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
      st.item_total[i] = s == Side::Trajectory ? matrix_->row_total(i) : matrix_->col_total(i);
      const auto c = static_cast<std::size_t>(st.item_cluster[i]);
      ++st.size[c];
      st.total[c] += st.item_total[i];
    }
    st.log_bell = log_bell_for(labels.size());
  }
  std::map<std::pair<int, int>, std::int64_t> cells;
  for (std::size_t i = 0; i < matrix_->rows(); ++i) {
    const int c = state(Side::Trajectory).item_cluster[i];
    for (const CountEntry& e : matrix_->row(i)) {
      cells[{c, state(Side::Segment).item_cluster[e.index]}] += e.count;
    }
  }
  for (const auto& [key, count] : cells) {
    state(Side::Trajectory).cells[static_cast<std::size_t>(key.first)].emplace_back(key.second, count);
    state(Side::Segment).cells[static_cast<std::size_t>(key.second)].emplace_back(key.first, count);
  }
  for (auto& list : state(Side::Segment).cells) std::sort(list.begin(), list.end());
}

void CoClusterModel::check_cluster(Side s, int c) const {
  const SideState& st = state(s);
  if (c < 0 || static_cast<std::size_t>(c) >= st.size.size() || st.size[static_cast<std::size_t>(c)] == 0) {
    throw DataError("unknown cluster id " + std::to_string(c));
  }
}

std::int64_t CoClusterModel::cluster_total(Side s, int c) const {
  check_cluster(s, c);
  return state(s).total[static_cast<std::size_t>(c)];
}

int CoClusterModel::cluster_size(Side s, int c) const {
  check_cluster(s, c);
  return state(s).size[static_cast<std::size_t>(c)];
}

namespace {

std::int64_t find_cell(const std::vector<CoClusterModel::Cell>& cells, int other) {
  const auto it = std::lower_bound(cells.begin(), cells.end(), other,
                                   [](const CoClusterModel::Cell& x, int v) { return x.first < v; });
  return (it != cells.end() && it->first == other) ? it->second : 0;
}

}  // namespace

std::int64_t CoClusterModel::cell(int trajectory_cluster, int segment_cluster) const {
  check_cluster(Side::Trajectory, trajectory_cluster);
  check_cluster(Side::Segment, segment_cluster);
  return find_cell(state(Side::Trajectory).cells[static_cast<std::size_t>(trajectory_cluster)], segment_cluster);
}

std::vector<std::vector<std::int64_t>> CoClusterModel::contingency() const {
  const SideState& rows = state(Side::Trajectory);
  std::vector<std::vector<std::int64_t>> table(rows.size.size(),
                                               std::vector<std::int64_t>(state(Side::Segment).size.size(), 0));
  for (std::size_t c = 0; c < rows.cells.size(); ++c) {
    for (const auto& [d, count] : rows.cells[c]) table[c][static_cast<std::size_t>(d)] = count;
  }
  return table;
}

void CoClusterModel::add_to_cell(Side s, int c, int d, std::int64_t delta) {
  const auto update = [delta](std::vector<Cell>& cells, int key) {
    auto it = std::lower_bound(cells.begin(), cells.end(), key,
                               [](const Cell& x, int v) { return x.first < v; });
    if (it != cells.end() && it->first == key) {
      it->second += delta;
      if (it->second == 0) cells.erase(it);
    } else {
      cells.insert(it, {key, delta});
    }
  };
  update(state(s).cells[static_cast<std::size_t>(c)], d);
  update(state(other(s)).cells[static_cast<std::size_t>(d)], c);
}

void CoClusterModel::canonicalize() {
  std::array<std::vector<int>, 2> remap;
  for (Side s : {Side::Trajectory, Side::Segment}) {
    SideState& st = state(s);
    auto& map = remap[static_cast<std::size_t>(s)];
    map.assign(st.size.size(), -1);
    int next = 0;
    for (int& c : st.item_cluster) {
      auto& target = map[static_cast<std::size_t>(c)];
      if (target < 0) target = next++;
      c = target;
    }
  }
  for (Side s : {Side::Trajectory, Side::Segment}) {
    SideState& st = state(s);
    const auto& map = remap[static_cast<std::size_t>(s)];
    const auto& other_map = remap[static_cast<std::size_t>(other(s))];
    const std::size_t k = static_cast<std::size_t>(st.alive_count);
    std::vector<int> size(k, 0);
    std::vector<std::int64_t> total(k, 0);
    std::vector<std::vector<Cell>> cells(k);
    for (std::size_t slot = 0; slot < st.size.size(); ++slot) {
      if (st.size[slot] == 0) continue;
      const auto c = static_cast<std::size_t>(map[slot]);
      size[c] = st.size[slot];
      total[c] = st.total[slot];
      cells[c].reserve(st.cells[slot].size());
      for (const auto& [d, count] : st.cells[slot]) cells[c].emplace_back(other_map[static_cast<std::size_t>(d)], count);
      std::sort(cells[c].begin(), cells[c].end());
    }
    st.size = std::move(size);
    st.total = std::move(total);
    st.cells = std::move(cells);
    st.free_slots.clear();
  }
}

void CoClusterModel::audit() const {
  const std::size_t kt = state(Side::Trajectory).size.size();
  const std::size_t ks = state(Side::Segment).size.size();
  std::array<std::vector<int>, 2> size{std::vector<int>(kt, 0), std::vector<int>(ks, 0)};
  std::array<std::vector<std::int64_t>, 2> total{std::vector<std::int64_t>(kt, 0), std::vector<std::int64_t>(ks, 0)};
  std::map<std::pair<int, int>, std::int64_t> cells;
  for (Side s : {Side::Trajectory, Side::Segment}) {
    const SideState& st = state(s);
    const auto side = static_cast<std::size_t>(s);
    int alive = 0;
    for (std::size_t i = 0; i < st.item_cluster.size(); ++i) {
      const int c = st.item_cluster[i];
      if (c < 0 || static_cast<std::size_t>(c) >= st.size.size()) throw AuditError("item assigned to invalid cluster");
      const std::int64_t expected = s == Side::Trajectory ? matrix_->row_total(i) : matrix_->col_total(i);
      if (st.item_total[i] != expected) throw AuditError("item total mismatch");
      ++size[side][static_cast<std::size_t>(c)];
      total[side][static_cast<std::size_t>(c)] += expected;
    }
    for (std::size_t c = 0; c < st.size.size(); ++c) {
      if (size[side][c] != st.size[c]) throw AuditError("cluster size mismatch");
      if (total[side][c] != st.total[c]) throw AuditError("cluster total mismatch");
      if (st.size[c] > 0) ++alive;
    }
    if (alive != st.alive_count) throw AuditError("cluster count mismatch");
  }
  for (std::size_t i = 0; i < matrix_->rows(); ++i) {
    const int c = state(Side::Trajectory).item_cluster[i];
    for (const CountEntry& e : matrix_->row(i)) cells[{c, state(Side::Segment).item_cluster[e.index]}] += e.count;
  }
  std::int64_t grand = 0;
  std::size_t stored = 0;
  for (std::size_t c = 0; c < kt; ++c) {
    const auto& list = state(Side::Trajectory).cells[c];
    for (std::size_t x = 0; x < list.size(); ++x) {
      const auto& [d, count] = list[x];
      if (x > 0 && list[x - 1].first >= d) throw AuditError("cells not sorted");
      const auto it = cells.find({static_cast<int>(c), d});
      if (it == cells.end() || it->second != count) throw AuditError("co-cluster count mismatch");
      if (find_cell(state(Side::Segment).cells[static_cast<std::size_t>(d)], static_cast<int>(c)) != count) {
        throw AuditError("co-cluster count asymmetric");
      }
      grand += count;
      ++stored;
    }
  }
  std::size_t stored_other = 0;
  for (const auto& list : state(Side::Segment).cells) stored_other += list.size();
  if (stored != cells.size() || stored_other != cells.size()) throw AuditError("co-cluster support mismatch");
  if (grand != matrix_->total()) throw AuditError("co-cluster counts do not sum to N");
}

// ---------------------------------------------------------------------------
// Cost
// ---------------------------------------------------------------------------

CostBreakdown CoClusterModel::cost_breakdown() const {
  const SideState& t = state(Side::Trajectory);
  const SideState& s = state(Side::Segment);
  const std::int64_t total = matrix_->total();
  const std::int64_t cells = static_cast<std::int64_t>(t.alive_count) * s.alive_count;

  CostBreakdown out;
  out.model_size = std::log(static_cast<double>(t.item_cluster.size())) +
                   std::log(static_cast<double>(s.item_cluster.size()));
  out.partition_prior = (*t.log_bell)(static_cast<std::size_t>(t.alive_count)) +
                        (*s.log_bell)(static_cast<std::size_t>(s.alive_count));
  out.cell_prior = log_binomial(total + cells - 1, cells - 1);

  std::vector<double> prior_terms;
  std::vector<double> cluster_terms;
  std::vector<double> item_terms;
  for (const SideState* st : {&t, &s}) {
    for (std::size_t c = 0; c < st->size.size(); ++c) {
      if (st->size[c] == 0) continue;
      prior_terms.push_back(log_binomial(st->total[c] + st->size[c] - 1, st->size[c] - 1));
      cluster_terms.push_back(log_factorial(st->total[c]));
    }
    for (std::int64_t n : st->item_total) item_terms.push_back(log_factorial(n));
  }
  std::vector<double> cell_terms;
  for (const auto& list : t.cells) {
    for (const auto& [d, count] : list) cell_terms.push_back(log_factorial(count));
  }
  out.cluster_prior = ordered_sum(prior_terms);
  out.grid_likelihood = log_factorial(total) - ordered_sum(cell_terms);
  out.cluster_likelihood = ordered_sum(cluster_terms) - ordered_sum(item_terms);
  return out;
}

double CoClusterModel::global_merge_delta(Side s) const {
  const std::int64_t total = matrix_->total();
  const std::int64_t k = state(s).alive_count;
  const std::int64_t ko = state(other(s)).alive_count;
  const LogBellTable& bell = *state(s).log_bell;
  return bell(static_cast<std::size_t>(k - 1)) - bell(static_cast<std::size_t>(k)) +
         log_binomial(total + (k - 1) * ko - 1, (k - 1) * ko - 1) - log_binomial(total + k * ko - 1, k * ko - 1);
}

double CoClusterModel::local_merge_delta(Side s, int a, int b) const {
  const SideState& st = state(s);
  const auto ia = static_cast<std::size_t>(a);
  const auto ib = static_cast<std::size_t>(b);
  const std::int64_t na = st.size[ia], nb = st.size[ib];
  const std::int64_t ta = st.total[ia], tb = st.total[ib];
  double delta = log_binomial(ta + tb + na + nb - 1, na + nb - 1) - log_binomial(ta + na - 1, na - 1) -
                 log_binomial(tb + nb - 1, nb - 1);
  delta += log_factorial(ta + tb) - log_factorial(ta) - log_factorial(tb);
  // Only other-side clusters populated in both rows change the grid term.
  const auto& ca = st.cells[ia];
  const auto& cb = st.cells[ib];
  auto x = ca.begin();
  auto y = cb.begin();
  while (x != ca.end() && y != cb.end()) {
    if (x->first < y->first) {
      ++x;
    } else if (y->first < x->first) {
      ++y;
    } else {
      delta -= log_factorial(x->second + y->second) - log_factorial(x->second) - log_factorial(y->second);
      ++x;
      ++y;
    }
  }
  return delta;
}

double CoClusterModel::merge_delta(Side s, int c1, int c2) const {
  check_cluster(s, c1);
  check_cluster(s, c2);
  if (c1 == c2) throw DataError("cannot merge a cluster with itself");
  return global_merge_delta(s) + local_merge_delta(s, std::min(c1, c2), std::max(c1, c2));
}

void CoClusterModel::merge_slots(Side s, int keep, int drop) {
  SideState& st = state(s);
  const auto ik = static_cast<std::size_t>(keep);
  const auto id = static_cast<std::size_t>(drop);
  const std::vector<Cell> moved = std::move(st.cells[id]);
  st.cells[id].clear();
  for (const auto& [d, count] : moved) {
    auto& reverse = state(other(s)).cells[static_cast<std::size_t>(d)];
    const auto it = std::lower_bound(reverse.begin(), reverse.end(), drop,
                                     [](const Cell& x, int v) { return x.first < v; });
    reverse.erase(it);
    add_to_cell(s, keep, d, count);
  }
  for (int& c : st.item_cluster) {
    if (c == drop) c = keep;
  }
  st.size[ik] += st.size[id];
  st.total[ik] += st.total[id];
  st.size[id] = 0;
  st.total[id] = 0;
  st.free_slots.push_back(drop);
  --st.alive_count;
}

void CoClusterModel::merge(Side s, int c1, int c2) {
  check_cluster(s, c1);
  check_cluster(s, c2);
  if (c1 == c2) throw DataError("cannot merge a cluster with itself");
  merge_slots(s, std::min(c1, c2), std::max(c1, c2));
  canonicalize();
}

std::vector<CoClusterModel::Cell> CoClusterModel::item_profile(Side s, std::size_t item) const {
  const auto& other_clusters = state(other(s)).item_cluster;
  std::vector<Cell> profile;
  for (const CountEntry& e : item_entries(s, item)) profile.emplace_back(other_clusters[e.index], e.count);
  std::sort(profile.begin(), profile.end());
  std::size_t out = 0;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (out > 0 && profile[out - 1].first == profile[i].first) {
      profile[out - 1].second += profile[i].second;
    } else {
      profile[out++] = profile[i];
    }
  }
  profile.resize(out);
  return profile;
}

double CoClusterModel::move_delta_with_profile(Side s, std::size_t item, int target,
                                               std::span<const Cell> profile) const {
  const SideState& st = state(s);
  const int from = st.item_cluster[item];
  if (target == from) return 0.0;
  const auto ia = static_cast<std::size_t>(from);
  const std::int64_t na = st.size[ia];
  if (target < 0 && na == 1) return 0.0;

  const std::int64_t ni = st.item_total[item];
  const std::int64_t ta = st.total[ia];
  const std::int64_t nb = target < 0 ? 0 : st.size[static_cast<std::size_t>(target)];
  const std::int64_t tb = target < 0 ? 0 : st.total[static_cast<std::size_t>(target)];

  const std::int64_t k = st.alive_count;
  const std::int64_t k_after = k - (na == 1 ? 1 : 0) + (target < 0 ? 1 : 0);
  double delta = 0.0;
  if (k_after != k) {
    const std::int64_t ko = state(other(s)).alive_count;
    const std::int64_t total = matrix_->total();
    delta += (*st.log_bell)(static_cast<std::size_t>(k_after)) - (*st.log_bell)(static_cast<std::size_t>(k));
    delta += log_binomial(total + k_after * ko - 1, k_after * ko - 1) - log_binomial(total + k * ko - 1, k * ko - 1);
  }
  delta -= log_binomial(ta + na - 1, na - 1);
  if (na > 1) delta += log_binomial(ta - ni + na - 2, na - 2);
  if (nb > 0) delta -= log_binomial(tb + nb - 1, nb - 1);
  delta += log_binomial(tb + ni + nb, nb);
  delta += log_factorial(ta - ni) - log_factorial(ta) + log_factorial(tb + ni) - log_factorial(tb);

  const std::vector<Cell>* target_cells = target < 0 ? nullptr : &st.cells[static_cast<std::size_t>(target)];
  for (const auto& [d, r] : profile) {
    const std::int64_t source = find_cell(st.cells[ia], d);
    const std::int64_t dest = target_cells ? find_cell(*target_cells, d) : 0;
    delta -= log_factorial(source - r) - log_factorial(source) + log_factorial(dest + r) - log_factorial(dest);
  }
  return delta;
}

void CoClusterModel::move_with_profile(Side s, std::size_t item, int target, std::span<const Cell> profile) {
  SideState& st = state(s);
  const int from = st.item_cluster[item];
  if (target == from || (target < 0 && st.size[static_cast<std::size_t>(from)] == 1)) return;
  if (target < 0) {
    if (!st.free_slots.empty()) {
      target = st.free_slots.back();
      st.free_slots.pop_back();
    } else {
      target = static_cast<int>(st.size.size());
      st.size.push_back(0);
      st.total.push_back(0);
      st.cells.emplace_back();
    }
    ++st.alive_count;
  }
  const std::int64_t ni = st.item_total[item];
  for (const auto& [d, r] : profile) {
    add_to_cell(s, from, d, -r);
    add_to_cell(s, target, d, r);
  }
  st.item_cluster[item] = target;
  ++st.size[static_cast<std::size_t>(target)];
  st.total[static_cast<std::size_t>(target)] += ni;
  --st.size[static_cast<std::size_t>(from)];
  st.total[static_cast<std::size_t>(from)] -= ni;
  if (st.size[static_cast<std::size_t>(from)] == 0) {
    --st.alive_count;
    st.free_slots.push_back(from);
  }
}

double CoClusterModel::move_delta(Side s, std::size_t item, int target) const {
  if (item >= item_count(s)) throw DataError("item index out of range");
  if (target >= 0) check_cluster(s, target);
  return move_delta_with_profile(s, item, target, item_profile(s, item));
}

void CoClusterModel::move(Side s, std::size_t item, int target) {
  if (item >= item_count(s)) throw DataError("item index out of range");
  if (target >= 0) check_cluster(s, target);
  const auto profile = item_profile(s, item);
  move_with_profile(s, item, target, profile);
  canonicalize();
}

// ---------------------------------------------------------------------------
// Optimization
// ---------------------------------------------------------------------------

namespace {

struct MergeCandidate {
  double local;
  int a;
  int b;
};

// Min-heap on the local delta; equal deltas pop the smallest (a, b) first.
struct MergeOrder {
  bool operator()(const MergeCandidate& x, const MergeCandidate& y) const {
    if (x.local != y.local) return x.local > y.local;
    if (x.a != y.a) return x.a > y.a;
    return x.b > y.b;
  }
};

constexpr double kImprovement = 1e-10;

}  // namespace

void CoClusterModel::greedy_merge() {
  // A pair's merge delta splits into a part shared by every merge on its side (cluster
  // counts only) and a local part. The heaps hold local parts. After a merge the
  // local parts that can change are the pairs containing the merged cluster and, on
  // the other side, pairs of clusters that both touch it; those are pushed afresh.
  // Entries are re-validated on pop, so every live pair keeps one exact entry.
  std::array<std::vector<MergeCandidate>, 2> heaps;
  const auto alive_slots = [this](Side s) {
    std::vector<int> out;
    const SideState& st = state(s);
    for (std::size_t c = 0; c < st.size.size(); ++c) {
      if (st.size[c] > 0) out.push_back(static_cast<int>(c));
    }
    return out;
  };
  const auto rebuild = [&](Side s) {
    auto& heap = heaps[static_cast<std::size_t>(s)];
    heap.clear();
    const auto slots = alive_slots(s);
    for (std::size_t x = 0; x < slots.size(); ++x) {
      for (std::size_t y = x + 1; y < slots.size(); ++y) {
        heap.push_back({local_merge_delta(s, slots[x], slots[y]), slots[x], slots[y]});
      }
    }
    std::make_heap(heap.begin(), heap.end(), MergeOrder{});
  };
  const auto push = [&](Side s, int a, int b) {
    auto& heap = heaps[static_cast<std::size_t>(s)];
    if (a > b) std::swap(a, b);
    heap.push_back({local_merge_delta(s, a, b), a, b});
    std::push_heap(heap.begin(), heap.end(), MergeOrder{});
  };
  // Leaves an exact, live entry on top (or empties the heap).
  const auto settle = [&](Side s) {
    auto& heap = heaps[static_cast<std::size_t>(s)];
    const SideState& st = state(s);
    while (!heap.empty()) {
      const MergeCandidate top = heap.front();
      std::pop_heap(heap.begin(), heap.end(), MergeOrder{});
      heap.pop_back();
      if (st.size[static_cast<std::size_t>(top.a)] == 0 || st.size[static_cast<std::size_t>(top.b)] == 0) continue;
      const double current = local_merge_delta(s, top.a, top.b);
      heap.push_back({current, top.a, top.b});
      std::push_heap(heap.begin(), heap.end(), MergeOrder{});
      if (current == top.local) return;
    }
  };

  // Initial slot of every item; merges only ever retire slots, so a merge history over
  // slots replays onto items with a union-find.
  std::array<std::vector<int>, 2> start_slot{state(Side::Trajectory).item_cluster, state(Side::Segment).item_cluster};
  struct Step {
    Side side;
    int keep;
    int drop;
  };
  std::vector<Step> history;
  double path_delta = 0.0;
  double best_path_delta = 0.0;
  std::size_t best_steps = 0;

  rebuild(Side::Trajectory);
  rebuild(Side::Segment);
  while (true) {
    bool found = false;
    Side best_side = Side::Trajectory;
    MergeCandidate best{0.0, 0, 0};
    double best_delta = 0.0;
    for (Side s : {Side::Trajectory, Side::Segment}) {
      if (state(s).alive_count < 2) continue;
      settle(s);
      const auto& heap = heaps[static_cast<std::size_t>(s)];
      if (heap.empty()) continue;
      const double delta = global_merge_delta(s) + heap.front().local;
      if (!found || delta < best_delta) {
        found = true;
        best_side = s;
        best = heap.front();
        best_delta = delta;
      }
    }
    if (!found) break;

    const Side s = best_side;
    merge_slots(s, best.a, best.b);
    history.push_back({s, best.a, best.b});
    path_delta += best_delta;
    if (path_delta < best_path_delta - kImprovement) {
      best_path_delta = path_delta;
      best_steps = history.size();
    }
    for (int c : alive_slots(s)) {
      if (c != best.a) push(s, best.a, c);
    }
    std::vector<int> touched;
    for (const auto& [d, count] : state(s).cells[static_cast<std::size_t>(best.a)]) touched.push_back(d);
    for (std::size_t x = 0; x < touched.size(); ++x) {
      for (std::size_t y = x + 1; y < touched.size(); ++y) push(other(s), touched[x], touched[y]);
    }
    for (Side side : {Side::Trajectory, Side::Segment}) {
      const auto k = static_cast<std::size_t>(state(side).alive_count);
      if (heaps[static_cast<std::size_t>(side)].size() > 4 * k * k + 64) rebuild(side);
    }
  }

  if (best_steps < history.size()) {
    std::array<std::vector<int>, 2> parent;
    for (std::size_t side = 0; side < 2; ++side) {
      parent[side].resize(sides_[side].size.size());
      std::iota(parent[side].begin(), parent[side].end(), 0);
    }
    const auto find = [&parent](std::size_t side, int c) {
      while (parent[side][static_cast<std::size_t>(c)] != c) c = parent[side][static_cast<std::size_t>(c)];
      return c;
    };
    for (std::size_t t = 0; t < best_steps; ++t) {
      const auto side = static_cast<std::size_t>(history[t].side);
      parent[side][static_cast<std::size_t>(find(side, history[t].drop))] = find(side, history[t].keep);
    }
    std::array<std::vector<int>, 2> labels;
    for (std::size_t side = 0; side < 2; ++side) {
      for (int slot : start_slot[side]) labels[side].push_back(find(side, slot));
    }
    *this = CoClusterModel(matrix_, labels[0], labels[1]);
  }
  canonicalize();
}

void CoClusterModel::post_optimize(std::uint64_t seed, int max_passes) {
  Rng rng(seed);
  std::vector<std::pair<Side, std::size_t>> order;
  for (Side s : {Side::Trajectory, Side::Segment}) {
    for (std::size_t i = 0; i < item_count(s); ++i) order.emplace_back(s, i);
  }
  for (int pass = 0; pass < max_passes; ++pass) {
    rng.shuffle(std::span(order));
    bool moved = false;
    for (const auto& [s, item] : order) {
      const SideState& st = state(s);
      const auto profile = item_profile(s, item);
      const int from = st.item_cluster[item];
      int best_target = from;
      double best_delta = -kImprovement;
      for (std::size_t c = 0; c < st.size.size(); ++c) {
        if (st.size[c] == 0 || static_cast<int>(c) == from) continue;
        const double delta = move_delta_with_profile(s, item, static_cast<int>(c), profile);
        if (delta < best_delta) {
          best_delta = delta;
          best_target = static_cast<int>(c);
        }
      }
      if (st.size[static_cast<std::size_t>(from)] > 1) {
        const double delta = move_delta_with_profile(s, item, -1, profile);
        if (delta < best_delta) {
          best_delta = delta;
          best_target = -1;
        }
      }
      if (best_target != from) {
        move_with_profile(s, item, best_target, profile);
        moved = true;
      }
    }
    if (!moved) break;
  }
  canonicalize();
}

CoClusterModel greedy(CoClusterModel start) {
  start.greedy_merge();
  return start;
}

CoClusterModel post_optimize(CoClusterModel model, std::uint64_t seed, int max_passes) {
  model.post_optimize(seed, max_passes);
  return model;
}

std::uint64_t run_seed(std::uint64_t seed, int run) {
  return derive_seed(derive_seed(seed, stream_tag::vns), static_cast<std::uint64_t>(run));
}

std::uint64_t post_optimize_seed(std::uint64_t seed, int run) { return derive_seed(run_seed(seed, run), 1); }

CoClusterModel random_start(std::shared_ptr<const TraversalMatrix> matrix, std::uint64_t seed, int restart,
                            const CoClusterModel* anchor) {
  if (anchor != nullptr && &anchor->matrix() != matrix.get()) throw DataError("anchor model is over another matrix");
  Rng rng(derive_seed(run_seed(seed, restart), 0));
  const auto draw = [&](Side side, std::size_t n) {
    const double u = rng.uniform();
    auto k = static_cast<std::uint64_t>(std::ceil(std::exp(u * std::log(static_cast<double>(n)))));
    k = std::clamp<std::uint64_t>(k, 1, n);
    std::vector<int> labels(n);
    for (int& label : labels) label = static_cast<int>(rng.below(k));
    if (anchor != nullptr) {
      // Product with the anchor partition: every random cluster splits an anchor cluster.
      const auto base = anchor->assignment(side);
      for (std::size_t i = 0; i < n; ++i) labels[i] += base[i] * static_cast<int>(k);
    }
    return labels;
  };
  const auto rows = draw(Side::Trajectory, matrix->rows());
  const auto cols = draw(Side::Segment, matrix->cols());
  return CoClusterModel(std::move(matrix), rows, cols);
}

SearchResult vns_search(std::shared_ptr<const TraversalMatrix> matrix, const SearchOptions& options) {
  if (options.restarts < 0) throw DataError("restart count must be non-negative");
  const int runs = options.restarts + 1;
  std::vector<std::optional<CoClusterModel>> results(static_cast<std::size_t>(runs));
  const auto run_one = [&](int r) {
    CoClusterModel start = r == 0 ? CoClusterModel::finest(matrix) : random_start(matrix, options.seed, r, &*results[0]);
    start.greedy_merge();
    start.post_optimize(post_optimize_seed(options.seed, r), options.max_passes);
    results[static_cast<std::size_t>(r)] = std::move(start);
  };
  run_one(0);
  // Restarts only read run 0, so they are independent of each other.
  const int jobs = std::clamp(options.jobs, 1, std::max(1, runs - 1));
  if (jobs == 1) {
    for (int r = 1; r < runs; ++r) run_one(r);
  } else {
    std::atomic<int> next{1};
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) {
      pool.emplace_back([&] {
        for (int r = next++; r < runs; r = next++) run_one(r);
      });
    }
    for (auto& t : pool) t.join();
  }

  SearchResult out{*results[0], 0, {}};
  double best = results[0]->cost();
  for (int r = 0; r < runs; ++r) {
    const CoClusterModel& model = *results[static_cast<std::size_t>(r)];
    const double cost = model.cost();
    out.runs.push_back({cost, model.cluster_count(Side::Trajectory), model.cluster_count(Side::Segment)});
    if (cost < best) {
      best = cost;
      out.best_run = r;
    }
  }
  out.model = *results[static_cast<std::size_t>(out.best_run)];
  return out;
}

}  // namespace trajcc
