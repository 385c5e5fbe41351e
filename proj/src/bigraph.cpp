#include "trajcc/bigraph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <unordered_map>

#include "trajcc/error.hpp"
#include "trajcc/text.hpp"

namespace trajcc {

TraversalMatrix::TraversalMatrix(std::vector<TrajectoryId> row_ids, std::span<const Traversal> traversals)
    : row_ids_(std::move(row_ids)) {
  std::unordered_map<TrajectoryId, std::size_t> row_lookup;
  for (std::size_t r = 0; r < row_ids_.size(); ++r) {
    if (!row_lookup.emplace(row_ids_[r], r).second) {
      throw DataError("duplicate trajectory id " + std::to_string(row_ids_[r]));
    }
  }
  std::map<SegmentId, std::size_t> segment_order;
  std::vector<std::map<SegmentId, std::int64_t>> counts(row_ids_.size());
  for (const Traversal& t : traversals) {
    if (t.count < 0) throw DataError("negative traversal count");
    if (t.count == 0) continue;
    const auto row = row_lookup.find(t.trajectory);
    if (row == row_lookup.end()) throw DataError("unknown trajectory id " + std::to_string(t.trajectory));
    counts[row->second][t.segment] += t.count;
    segment_order.emplace(t.segment, 0);
  }
  for (auto& [id, index] : segment_order) {
    index = col_ids_.size();
    col_ids_.push_back(id);
  }
  rows_.resize(row_ids_.size());
  cols_.resize(col_ids_.size());
  row_totals_.assign(row_ids_.size(), 0);
  col_totals_.assign(col_ids_.size(), 0);
  for (std::size_t r = 0; r < row_ids_.size(); ++r) {
    if (counts[r].empty()) {
      throw DataError("trajectory " + std::to_string(row_ids_[r]) + " has no traversal");
    }
    for (const auto& [segment, count] : counts[r]) {
      const std::size_t c = segment_order.at(segment);
      rows_[r].push_back({c, count});
      cols_[c].push_back({r, count});
      row_totals_[r] += count;
      col_totals_[c] += count;
      total_ += count;
      ++nonzeros_;
    }
  }
}

std::optional<std::size_t> TraversalMatrix::row_index(TrajectoryId id) const {
  const auto it = std::find(row_ids_.begin(), row_ids_.end(), id);
  if (it == row_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - row_ids_.begin());
}

std::optional<std::size_t> TraversalMatrix::col_index(SegmentId id) const {
  const auto it = std::lower_bound(col_ids_.begin(), col_ids_.end(), id);
  if (it == col_ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - col_ids_.begin());
}

std::int64_t TraversalMatrix::count(std::size_t r, std::size_t c) const {
  const auto& row = rows_[r];
  const auto it = std::lower_bound(row.begin(), row.end(), c,
                                   [](const CountEntry& e, std::size_t v) { return e.index < v; });
  return (it != row.end() && it->index == c) ? it->count : 0;
}

TraversalMatrix build_traversal_matrix(const TrajectoryDataset& ds) {
  if (ds.empty()) throw DataError("cannot build a traversal matrix from an empty dataset");
  std::vector<TrajectoryId> ids;
  std::vector<Traversal> traversals;
  for (const Trajectory& t : ds.trajectories) {
    ids.push_back(t.id);
    for (SegmentId s : t.segments) traversals.push_back({t.id, s, 1});
  }
  return TraversalMatrix(std::move(ids), traversals);
}

void write_matrix(std::ostream& out, const TraversalMatrix& m) {
  out << "trajectory_id,segment_id,count\n";
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (const CountEntry& e : m.row(r)) {
      out << m.row_ids()[r] << ',' << m.col_ids()[e.index] << ',' << e.count << '\n';
    }
  }
}

TraversalMatrix read_matrix(std::istream& in) {
  std::vector<TrajectoryId> ids;
  std::unordered_map<TrajectoryId, bool> seen;
  std::vector<Traversal> traversals;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = text::trim(line);
    if (view.empty()) continue;
    if (!header) {
      if (view != "trajectory_id,segment_id,count") throw ParseError(line_no, "bad matrix header");
      header = true;
      continue;
    }
    const auto fields = text::split(view, ',');
    if (fields.size() != 3) throw ParseError(line_no, "expected 3 comma-separated fields");
    const auto t = text::parse_int(fields[0]);
    const auto s = text::parse_int(fields[1]);
    const auto n = text::parse_int(fields[2]);
    if (!t || !s || !n || *t < 0 || *s < 0 || *n <= 0) throw ParseError(line_no, "bad matrix entry");
    if (seen.emplace(*t, true).second) ids.push_back(*t);
    traversals.push_back({*t, *s, *n});
  }
  if (!header) throw ParseError(line_no, "missing header");
  if (ids.empty()) throw DataError("empty traversal matrix");
  return TraversalMatrix(std::move(ids), traversals);
}

void save_matrix(const std::string& path, const TraversalMatrix& m) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write matrix file " + path);
  write_matrix(out, m);
}

TraversalMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open matrix file " + path);
  return read_matrix(in);
}

std::vector<double> segment_lengths(const TraversalMatrix& m, const RoadNetwork& net) {
  std::vector<double> lengths;
  lengths.reserve(m.cols());
  for (SegmentId id : m.col_ids()) {
    const Segment* s = net.find_segment(id);
    if (s == nullptr) throw DataError("segment " + std::to_string(id) + " is not in the network");
    lengths.push_back(s->length);
  }
  return lengths;
}

namespace {

double row_length_mass(const TraversalMatrix& m, std::span<const double> lengths, std::size_t traj) {
  double mass = 0.0;
  for (const CountEntry& e : m.row(traj)) mass += static_cast<double>(e.count) * lengths[e.index];
  return mass;
}

double segment_idf(const TraversalMatrix& m, std::size_t seg) {
  return std::log(static_cast<double>(m.rows()) / static_cast<double>(m.col(seg).size()));
}

double trajectory_idf(const TraversalMatrix& m, std::size_t traj) {
  return std::log(static_cast<double>(m.cols()) / static_cast<double>(m.row(traj).size()));
}

void require_visit(const TraversalMatrix& m, std::size_t traj, std::size_t seg) {
  if (traj >= m.rows() || seg >= m.cols() || m.count(traj, seg) <= 0) {
    throw DataError("trajectory does not visit the segment");
  }
}

}  // namespace

double segment_contribution(const TraversalMatrix& m, std::span<const double> lengths,
                            std::size_t traj, std::size_t seg) {
  require_visit(m, traj, seg);
  const double tf = static_cast<double>(m.count(traj, seg)) * lengths[seg] / row_length_mass(m, lengths, traj);
  return tf * segment_idf(m, seg);
}

double segment_contribution(const TraversalMatrix& m, const RoadNetwork& net, std::size_t traj,
                            std::size_t seg) {
  require_visit(m, traj, seg);
  return segment_contribution(m, segment_lengths(m, net), traj, seg);
}

double trajectory_relevance(const TraversalMatrix& m, std::size_t traj, std::size_t seg) {
  require_visit(m, traj, seg);
  const double share = static_cast<double>(m.count(traj, seg)) / static_cast<double>(m.col_total(seg));
  return share * trajectory_idf(m, traj);
}

std::string to_string(NodeKind kind) { return kind == NodeKind::Trajectory ? "trajectory" : "segment"; }

NodeKind node_kind_from_string(const std::string& s) {
  if (s == "trajectory") return NodeKind::Trajectory;
  if (s == "segment") return NodeKind::Segment;
  throw DataError("unknown node kind '" + s + "'");
}

SimilarityGraph::SimilarityGraph(NodeKind kind, std::vector<std::int64_t> node_ids,
                                 std::vector<WeightedEdge> edges)
    : kind_(kind), node_ids_(std::move(node_ids)), edges_(std::move(edges)) {
  const std::size_t n = node_ids_.size();
  for (WeightedEdge& e : edges_) {
    if (e.a >= n || e.b >= n) throw DataError("edge endpoint out of range");
    if (e.a == e.b) throw DataError("self-loop on node " + std::to_string(node_ids_[e.a]));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) throw DataError("edge weight must be positive");
    if (e.a > e.b) std::swap(e.a, e.b);
  }
  std::sort(edges_.begin(), edges_.end(), [](const WeightedEdge& x, const WeightedEdge& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].a == edges_[i - 1].a && edges_[i].b == edges_[i - 1].b) {
      throw DataError("duplicate edge");
    }
  }
  adjacency_.resize(n);
  degrees_.assign(n, 0.0);
  for (const WeightedEdge& e : edges_) {
    adjacency_[e.a].push_back({e.b, e.weight});
    adjacency_[e.b].push_back({e.a, e.weight});
    degrees_[e.a] += e.weight;
    degrees_[e.b] += e.weight;
    total_weight_ += e.weight;
  }
  for (auto& list : adjacency_) {
    std::sort(list.begin(), list.end(), [](const Neighbor& x, const Neighbor& y) { return x.node < y.node; });
  }
}

double SimilarityGraph::weight(std::size_t a, std::size_t b) const {
  const auto& list = adjacency_[a];
  const auto it = std::lower_bound(list.begin(), list.end(), b,
                                   [](const Neighbor& x, std::size_t v) { return x.node < v; });
  return (it != list.end() && it->node == b) ? it->weight : 0.0;
}

namespace {

// Cosine projection of sparse non-negative vectors. `vectors[i]` lists the non-zero
// coordinates of node i; `index[k]` lists the nodes with a non-zero at coordinate k.
// Both carry the same weights.
Projection cosine_projection(NodeKind kind, std::vector<std::int64_t> node_ids,
                             const std::vector<std::vector<Neighbor>>& vectors,
                             const std::vector<std::vector<Neighbor>>& index) {
  const std::size_t n = node_ids.size();
  std::vector<double> norms(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (const Neighbor& x : vectors[i]) norms[i] += x.weight * x.weight;
    norms[i] = std::sqrt(norms[i]);
  }
  std::unordered_map<std::uint64_t, double> dots;
  for (const auto& postings : index) {
    for (std::size_t p = 0; p < postings.size(); ++p) {
      if (postings[p].weight == 0.0) continue;
      for (std::size_t q = p + 1; q < postings.size(); ++q) {
        if (postings[q].weight == 0.0) continue;
        const std::uint64_t key = static_cast<std::uint64_t>(postings[p].node) * n + postings[q].node;
        dots[key] += postings[p].weight * postings[q].weight;
      }
    }
  }
  std::vector<WeightedEdge> edges;
  edges.reserve(dots.size());
  for (const auto& [key, dot] : dots) {
    const std::size_t a = key / n;
    const std::size_t b = key % n;
    const double w = dot / (norms[a] * norms[b]);
    if (w > 0.0) edges.push_back({a, b, w});
  }
  Projection out;
  for (std::size_t i = 0; i < n; ++i) {
    if (norms[i] == 0.0) {
      out.zero_vector_nodes.push_back(i);
      out.warnings.push_back(to_string(kind) + " " + std::to_string(node_ids[i]) +
                             " has an all-zero weight vector and gets no edges");
    }
  }
  out.graph = SimilarityGraph(kind, std::move(node_ids), std::move(edges));
  return out;
}

}  // namespace

Projection project_trajectories(const TraversalMatrix& m, std::span<const double> lengths) {
  std::vector<std::vector<Neighbor>> vectors(m.rows());
  std::vector<std::vector<Neighbor>> index(m.cols());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double mass = row_length_mass(m, lengths, r);
    for (const CountEntry& e : m.row(r)) {
      const double w = static_cast<double>(e.count) * lengths[e.index] / mass * segment_idf(m, e.index);
      vectors[r].push_back({e.index, w});
      index[e.index].push_back({r, w});
    }
  }
  return cosine_projection(NodeKind::Trajectory, {m.row_ids().begin(), m.row_ids().end()}, vectors, index);
}

Projection project_trajectories(const TraversalMatrix& m, const RoadNetwork& net) {
  return project_trajectories(m, segment_lengths(m, net));
}

Projection project_segments(const TraversalMatrix& m) {
  std::vector<std::vector<Neighbor>> vectors(m.cols());
  std::vector<std::vector<Neighbor>> index(m.rows());
  for (std::size_t c = 0; c < m.cols(); ++c) {
    const double visits = static_cast<double>(m.col_total(c));
    for (const CountEntry& e : m.col(c)) {
      const double w = static_cast<double>(e.count) / visits * trajectory_idf(m, e.index);
      vectors[c].push_back({e.index, w});
      index[e.index].push_back({c, w});
    }
  }
  return cosine_projection(NodeKind::Segment, {m.col_ids().begin(), m.col_ids().end()}, vectors, index);
}

void write_graph_csv(std::ostream& out, const SimilarityGraph& g) {
  out << "node_a,node_b,weight\n";
  for (const WeightedEdge& e : g.edges()) {
    out << g.node_ids()[e.a] << ',' << g.node_ids()[e.b] << ',' << text::format_double(e.weight) << '\n';
  }
}

SimilarityGraph read_graph_csv(std::istream& in, NodeKind kind, std::vector<std::int64_t> node_ids) {
  std::unordered_map<std::int64_t, std::size_t> lookup;
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    if (!lookup.emplace(node_ids[i], i).second) throw DataError("duplicate node id");
  }
  std::vector<WeightedEdge> edges;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = text::trim(line);
    if (view.empty()) continue;
    if (!header) {
      if (view != "node_a,node_b,weight") throw ParseError(line_no, "bad graph header");
      header = true;
      continue;
    }
    const auto fields = text::split(view, ',');
    if (fields.size() != 3) throw ParseError(line_no, "expected 3 comma-separated fields");
    const auto a = text::parse_int(fields[0]);
    const auto b = text::parse_int(fields[1]);
    const auto w = text::parse_double(fields[2]);
    if (!a || !b || !w) throw ParseError(line_no, "bad edge");
    const auto ia = lookup.find(*a);
    const auto ib = lookup.find(*b);
    if (ia == lookup.end() || ib == lookup.end()) throw ParseError(line_no, "edge references unknown node");
    edges.push_back({ia->second, ib->second, *w});
  }
  if (!header) throw ParseError(line_no, "missing header");
  return SimilarityGraph(kind, std::move(node_ids), std::move(edges));
}

}  // namespace trajcc
