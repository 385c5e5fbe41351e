#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "trajcc/network.hpp"

namespace trajcc {

using TrajectoryId = std::int64_t;

// A network-constrained trajectory: the ordered road segments it traversed.
struct Trajectory {
  TrajectoryId id = 0;
  std::optional<int> label;
  std::vector<SegmentId> segments;

  bool operator==(const Trajectory&) const = default;
};

struct TrajectoryDataset {
  std::vector<Trajectory> trajectories;

  std::size_t size() const { return trajectories.size(); }
  bool empty() const { return trajectories.empty(); }
  bool operator==(const TrajectoryDataset&) const = default;
};

// CSV: header `trajectory_id,class,segments`, then `<id>,<label or ->,<s1>;<s2>;...`.
void write_dataset(std::ostream& out, const TrajectoryDataset& ds);
void save_dataset(const std::string& path, const TrajectoryDataset& ds);

// When `net` is given every segment id is checked against it.
TrajectoryDataset read_dataset(std::istream& in, const RoadNetwork* net = nullptr);
TrajectoryDataset load_dataset(const std::string& path, const RoadNetwork* net = nullptr);

// Throws DataError unless every trajectory is a non-empty, head-to-tail connected
// path of segments of `net`.
void validate_paths(const TrajectoryDataset& ds, const RoadNetwork& net);

}  // namespace trajcc
