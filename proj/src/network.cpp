#include "trajcc/network.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <string>

#include "trajcc/error.hpp"
#include "trajcc/rng.hpp"
#include "trajcc/text.hpp"

namespace trajcc {

RoadNetwork::RoadNetwork(std::vector<Vertex> vertices, std::vector<Segment> segments)
    : vertices_(std::move(vertices)), segments_(std::move(segments)) {
  vertex_lookup_.reserve(vertices_.size());
  for (std::size_t i = 0; i < vertices_.size(); ++i) {
    if (!vertex_lookup_.emplace(vertices_[i].id, i).second) {
      throw DataError("duplicate vertex id " + std::to_string(vertices_[i].id));
    }
  }
  outgoing_.resize(vertices_.size());
  incoming_.resize(vertices_.size());
  segment_lookup_.reserve(segments_.size());
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    const Segment& s = segments_[i];
    if (!segment_lookup_.emplace(s.id, i).second) {
      throw DataError("duplicate segment id " + std::to_string(s.id));
    }
    const auto from = vertex_lookup_.find(s.from);
    const auto to = vertex_lookup_.find(s.to);
    if (from == vertex_lookup_.end() || to == vertex_lookup_.end()) {
      throw DataError("segment " + std::to_string(s.id) + " has dangling endpoint " +
                      std::to_string(from == vertex_lookup_.end() ? s.from : s.to));
    }
    if (!(s.length > 0.0) || !(s.speed > 0.0)) {
      throw DataError("segment " + std::to_string(s.id) + " has non-positive length or speed");
    }
    outgoing_[from->second].push_back(i);
    incoming_[to->second].push_back(i);
  }
  const auto by_id = [this](std::size_t a, std::size_t b) {
    return segments_[a].id < segments_[b].id;
  };
  for (auto& list : outgoing_) std::sort(list.begin(), list.end(), by_id);
  for (auto& list : incoming_) std::sort(list.begin(), list.end(), by_id);
}

std::optional<std::size_t> RoadNetwork::vertex_index(VertexId id) const {
  const auto it = vertex_lookup_.find(id);
  if (it == vertex_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> RoadNetwork::segment_index(SegmentId id) const {
  const auto it = segment_lookup_.find(id);
  if (it == segment_lookup_.end()) return std::nullopt;
  return it->second;
}

const Segment* RoadNetwork::find_segment(SegmentId id) const {
  const auto index = segment_index(id);
  return index ? &segments_[*index] : nullptr;
}

RoadNetwork read_network(std::istream& in) {
  std::vector<Vertex> vertices;
  std::vector<Segment> segments;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    const auto tokens = text::split_whitespace(view);
    if (tokens.empty()) continue;
    if (tokens[0] == "N") {
      if (tokens.size() != 4) throw ParseError(line_no, "expected `N <id> <x> <y>`");
      const auto id = text::parse_int(tokens[1]);
      const auto x = text::parse_double(tokens[2]);
      const auto y = text::parse_double(tokens[3]);
      if (!id || *id < 0) throw ParseError(line_no, "bad vertex id");
      if (!x || !y) throw ParseError(line_no, "bad coordinate");
      vertices.push_back({*id, *x, *y});
    } else if (tokens[0] == "E") {
      if (tokens.size() != 6) {
        throw ParseError(line_no, "expected `E <id> <from> <to> <length> <speed>`");
      }
      const auto id = text::parse_int(tokens[1]);
      const auto from = text::parse_int(tokens[2]);
      const auto to = text::parse_int(tokens[3]);
      const auto length = text::parse_double(tokens[4]);
      const auto speed = text::parse_double(tokens[5]);
      if (!id || *id < 0) throw ParseError(line_no, "bad segment id");
      if (!from || !to || *from < 0 || *to < 0) throw ParseError(line_no, "bad vertex reference");
      if (!length || !speed) throw ParseError(line_no, "bad length or speed");
      segments.push_back({*id, *from, *to, *length, *speed});
    } else {
      throw ParseError(line_no, "unknown record type '" + std::string(tokens[0]) + "'");
    }
  }
  return RoadNetwork(std::move(vertices), std::move(segments));
}

RoadNetwork load_network(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open network file " + path);
  return read_network(in);
}

void write_network(std::ostream& out, const RoadNetwork& net) {
  out << "# vertices " << net.vertices().size() << ", segments " << net.segments().size() << '\n';
  for (const Vertex& v : net.vertices()) {
    out << "N " << v.id << ' ' << text::format_double(v.x) << ' ' << text::format_double(v.y)
        << '\n';
  }
  for (const Segment& s : net.segments()) {
    out << "E " << s.id << ' ' << s.from << ' ' << s.to << ' ' << text::format_double(s.length)
        << ' ' << text::format_double(s.speed) << '\n';
  }
}

std::vector<double> travel_times(const RoadNetwork& net, std::size_t source, bool reverse) {
  const std::size_t n = net.vertices().size();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (std::size_t e : reverse ? net.incoming(u) : net.outgoing(u)) {
      const Segment& s = net.segments()[e];
      const std::size_t v = *net.vertex_index(reverse ? s.from : s.to);
      const double candidate = d + s.travel_time();
      if (candidate < dist[v]) {
        dist[v] = candidate;
        queue.emplace(candidate, v);
      }
    }
  }
  return dist;
}

std::optional<Path> shortest_path(const RoadNetwork& net, VertexId from, VertexId to) {
  const auto source = net.vertex_index(from);
  const auto target = net.vertex_index(to);
  if (!source) throw DataError("unknown vertex id " + std::to_string(from));
  if (!target) throw DataError("unknown vertex id " + std::to_string(to));
  if (*source == *target) return Path{};

  const std::vector<double> forward = travel_times(net, *source);
  const double best = forward[*target];
  if (!std::isfinite(best)) return std::nullopt;
  const std::vector<double> backward = travel_times(net, *target, true);

  // Walk from the source along the smallest-id segment that still lies on some
  // optimal path; this yields the lexicographically smallest optimal sequence.
  const double tolerance = 1e-12 * best;
  Path path;
  std::size_t u = *source;
  while (u != *target) {
    bool advanced = false;
    for (std::size_t e : net.outgoing(u)) {
      const Segment& s = net.segments()[e];
      const std::size_t v = *net.vertex_index(s.to);
      if (forward[u] + s.travel_time() + backward[v] <= best + tolerance) {
        path.segments.push_back(s.id);
        path.travel_time += s.travel_time();
        u = v;
        advanced = true;
        break;
      }
    }
    if (!advanced || path.segments.size() > net.vertices().size()) {
      throw std::logic_error("shortest path reconstruction failed");
    }
  }
  return path;
}

ZoneGrid::ZoneGrid(const RoadNetwork& net, int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 1 || cols < 1) throw DataError("grid dimensions must be positive");
  if (net.empty()) throw DataError("cannot build a zone grid over an empty network");
  min_x_ = max_x_ = net.vertices().front().x;
  min_y_ = max_y_ = net.vertices().front().y;
  for (const Vertex& v : net.vertices()) {
    min_x_ = std::min(min_x_, v.x);
    max_x_ = std::max(max_x_, v.x);
    min_y_ = std::min(min_y_, v.y);
    max_y_ = std::max(max_y_, v.y);
  }
  cells_.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
  for (const Vertex& v : net.vertices()) cells_[cell_of(v.x, v.y)].push_back(v.id);
}

namespace {

// Index of the first interval [b_k, b_{k+1}] containing value; a value equal to an
// inner boundary belongs to the lower interval.
int interval_of(double value, double lo, double hi, int count) {
  for (int k = 0; k + 1 < count; ++k) {
    const double upper = lo + (hi - lo) * static_cast<double>(k + 1) / count;
    if (value <= upper) return k;
  }
  return count - 1;
}

}  // namespace

std::size_t ZoneGrid::cell_of(double x, double y) const {
  const int row = interval_of(y, min_y_, max_y_, rows_);
  const int col = interval_of(x, min_x_, max_x_, cols_);
  return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) +
         static_cast<std::size_t>(col);
}

ZoneGrid build_grid(const RoadNetwork& net, int rows, int cols) { return ZoneGrid(net, rows, cols); }

RoadNetwork synthetic_city(const CityConfig& cfg) {
  if (cfg.rows < 2 || cfg.cols < 2) throw DataError("city needs at least 2x2 intersections");
  Rng rng(derive_seed(cfg.seed, 0));
  std::vector<Vertex> vertices;
  vertices.reserve(static_cast<std::size_t>(cfg.rows * cfg.cols));
  for (int r = 0; r < cfg.rows; ++r) {
    for (int c = 0; c < cfg.cols; ++c) {
      const double dx = (rng.uniform() - 0.5) * 2.0 * cfg.jitter * cfg.spacing;
      const double dy = (rng.uniform() - 0.5) * 2.0 * cfg.jitter * cfg.spacing;
      vertices.push_back({r * cfg.cols + c, c * cfg.spacing + dx, r * cfg.spacing + dy});
    }
  }
  std::vector<Segment> segments;
  SegmentId next_id = 0;
  const auto add_two_way = [&](int a, int b, bool arterial) {
    const Vertex& va = vertices[static_cast<std::size_t>(a)];
    const Vertex& vb = vertices[static_cast<std::size_t>(b)];
    // Streets are slightly longer than the straight line between their ends.
    const double length = std::hypot(va.x - vb.x, va.y - vb.y) * (1.0 + 0.1 * rng.uniform());
    const double speed = arterial ? cfg.arterial_speed : cfg.local_speed;
    segments.push_back({next_id++, va.id, vb.id, length, speed});
    segments.push_back({next_id++, vb.id, va.id, length, speed});
  };
  for (int r = 0; r < cfg.rows; ++r) {
    for (int c = 0; c < cfg.cols; ++c) {
      const int v = r * cfg.cols + c;
      if (c + 1 < cfg.cols) add_two_way(v, v + 1, r % cfg.arterial_every == 0);
      if (r + 1 < cfg.rows) add_two_way(v, v + cfg.cols, c % cfg.arterial_every == 0);
    }
  }
  return RoadNetwork(std::move(vertices), std::move(segments));
}

}  // namespace trajcc
