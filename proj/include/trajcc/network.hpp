#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace trajcc {

using VertexId = std::int64_t;
using SegmentId = std::int64_t;

struct Vertex {
  VertexId id = 0;
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Vertex&) const = default;
};

// A directed road segment. Length in meters, speed limit in km/h.
struct Segment {
  SegmentId id = 0;
  VertexId from = 0;
  VertexId to = 0;
  double length = 0.0;
  double speed = 0.0;

  double travel_time() const { return length / speed; }

  bool operator==(const Segment&) const = default;
};

// Immutable directed geometric graph. Construction validates every invariant
// (unique ids, existing endpoints, positive length and speed) and throws DataError.
class RoadNetwork {
 public:
  RoadNetwork() = default;
  RoadNetwork(std::vector<Vertex> vertices, std::vector<Segment> segments);

  std::span<const Vertex> vertices() const { return vertices_; }
  std::span<const Segment> segments() const { return segments_; }
  bool empty() const { return vertices_.empty(); }

  std::optional<std::size_t> vertex_index(VertexId id) const;
  std::optional<std::size_t> segment_index(SegmentId id) const;
  const Segment* find_segment(SegmentId id) const;

  // Indices into segments() of the segments leaving / entering vertex index v,
  // ordered by segment id.
  std::span<const std::size_t> outgoing(std::size_t v) const { return outgoing_[v]; }
  std::span<const std::size_t> incoming(std::size_t v) const { return incoming_[v]; }

 private:
  std::vector<Vertex> vertices_;
  std::vector<Segment> segments_;
  std::unordered_map<VertexId, std::size_t> vertex_lookup_;
  std::unordered_map<SegmentId, std::size_t> segment_lookup_;
  std::vector<std::vector<std::size_t>> outgoing_;
  std::vector<std::vector<std::size_t>> incoming_;
};

// Network text format: `N <id> <x> <y>` and `E <id> <from> <to> <length> <speed>`
// lines, `#` starts a comment.
RoadNetwork read_network(std::istream& in);
RoadNetwork load_network(const std::string& path);
void write_network(std::ostream& out, const RoadNetwork& net);

struct Path {
  std::vector<SegmentId> segments;
  double travel_time = 0.0;
};

// Minimum travel-time path from `from` to `to`, std::nullopt when unreachable.
// Among equally fast paths the lexicographically smallest segment-id sequence wins.
// Throws DataError on unknown vertex ids.
std::optional<Path> shortest_path(const RoadNetwork& net, VertexId from, VertexId to);

// Single-source travel times from vertex index `source` (forward) or to it (reverse).
// Unreachable vertices hold +infinity.
std::vector<double> travel_times(const RoadNetwork& net, std::size_t source, bool reverse = false);

// Equally sized rectangular zones over the vertices' bounding box.
// Cell index = row * cols + col; row grows with y, col with x.
class ZoneGrid {
 public:
  ZoneGrid(const RoadNetwork& net, int rows, int cols);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t cell_count() const { return cells_.size(); }
  double min_x() const { return min_x_; }
  double max_x() const { return max_x_; }
  double min_y() const { return min_y_; }
  double max_y() const { return max_y_; }

  std::span<const VertexId> cell(std::size_t index) const { return cells_[index]; }
  std::size_t cell_of(double x, double y) const;

 private:
  int rows_;
  int cols_;
  double min_x_ = 0, max_x_ = 0, min_y_ = 0, max_y_ = 0;
  std::vector<std::vector<VertexId>> cells_;
};

// Vertices on an exact cell border go to the lower-index cell.
ZoneGrid build_grid(const RoadNetwork& net, int rows, int cols);

// Synthetic city: a jittered rows x cols lattice of two-way local streets with
// faster two-way arterials every `arterial_every` lines. Used for the bundled test
// network and for experiments.
struct CityConfig {
  int rows = 40;
  int cols = 40;
  double spacing = 100.0;
  double jitter = 0.2;
  int arterial_every = 8;
  double local_speed = 30.0;
  double arterial_speed = 70.0;
  std::uint64_t seed = 1;
};
RoadNetwork synthetic_city(const CityConfig& cfg);

}  // namespace trajcc
