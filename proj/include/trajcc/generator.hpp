#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "trajcc/dataset.hpp"
#include "trajcc/network.hpp"

namespace trajcc {

struct ZonePair {
  std::size_t departure = 0;
  std::size_t arrival = 0;

  bool operator==(const ZonePair&) const = default;
};

struct GeneratorConfig {
  int classes = 5;
  int rows = 10;
  int cols = 10;
  int min_size = 12;
  int max_size = 20;
  std::uint64_t seed = 0;
  int max_attempts = 1000;
  // Optional per-class zone pairs (cell indices), overriding the random zone draw.
  // Used to stage deliberate interactions such as shared departure zones.
  std::vector<ZonePair> zone_pairs;
};

// Throws DataError when the configuration is inconsistent.
void validate(const GeneratorConfig& cfg);

struct ClassPlan {
  int label = 0;
  ZonePair zones;
  int size = 0;
};

struct GeneratedData {
  TrajectoryDataset dataset;
  std::vector<ClassPlan> classes;
};

// Zone-grid generator. For each class a departure zone and a different arrival zone
// holding at least one vertex are drawn, then a class size in [min_size, max_size],
// then that many shortest paths between uniformly drawn departure and arrival
// vertices. Class c (labels start at 1) draws only from substream c of the seed.
GeneratedData generate_detailed(const RoadNetwork& net, const GeneratorConfig& cfg);
TrajectoryDataset generate(const RoadNetwork& net, const GeneratorConfig& cfg);

}  // namespace trajcc
