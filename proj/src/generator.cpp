#include "trajcc/generator.hpp"

#include <string>

#include "trajcc/error.hpp"
#include "trajcc/rng.hpp"

namespace trajcc {

void validate(const GeneratorConfig& cfg) {
  if (cfg.classes < 1) throw DataError("class count must be at least 1");
  if (cfg.rows < 1 || cfg.cols < 1) throw DataError("grid dimensions must be positive");
  if (cfg.min_size < 1 || cfg.min_size > cfg.max_size) {
    throw DataError("class sizes must satisfy 1 <= min-size <= max-size");
  }
  if (cfg.max_attempts < 1) throw DataError("max attempts must be positive");
  const long long cells = static_cast<long long>(cfg.rows) * cfg.cols;
  if (cfg.classes > cells * (cells - 1)) {
    throw DataError("more classes than distinct zone pairs");
  }
  if (!cfg.zone_pairs.empty() && cfg.zone_pairs.size() != static_cast<std::size_t>(cfg.classes)) {
    throw DataError("explicit zone pairs must be given for every class");
  }
}

namespace {

ZonePair draw_zone_pair(const ZoneGrid& grid, Rng& rng, int max_attempts) {
  const std::size_t cells = grid.cell_count();
  ZonePair pair;
  int attempts = 0;
  do {
    if (attempts++ >= max_attempts) throw DataError("zone resampling exhausted: no non-empty departure zone");
    pair.departure = rng.below(cells);
  } while (grid.cell(pair.departure).empty());
  attempts = 0;
  do {
    if (attempts++ >= max_attempts) throw DataError("zone resampling exhausted: no non-empty arrival zone");
    pair.arrival = rng.below(cells);
  } while (pair.arrival == pair.departure || grid.cell(pair.arrival).empty());
  return pair;
}

void check_zone_pair(const ZoneGrid& grid, const ZonePair& pair) {
  if (pair.departure >= grid.cell_count() || pair.arrival >= grid.cell_count()) {
    throw DataError("zone index out of range");
  }
  if (pair.departure == pair.arrival) throw DataError("departure and arrival zones must differ");
  if (grid.cell(pair.departure).empty() || grid.cell(pair.arrival).empty()) {
    throw DataError("zone " + std::to_string(grid.cell(pair.departure).empty() ? pair.departure : pair.arrival) +
                    " contains no vertex");
  }
}

}  // namespace

GeneratedData generate_detailed(const RoadNetwork& net, const GeneratorConfig& cfg) {
  validate(cfg);
  if (net.empty()) throw DataError("cannot generate trajectories on an empty network");
  const ZoneGrid grid = build_grid(net, cfg.rows, cfg.cols);
  const std::uint64_t base = derive_seed(cfg.seed, stream_tag::generator);

  GeneratedData out;
  TrajectoryId next_id = 0;
  for (int label = 1; label <= cfg.classes; ++label) {
    Rng rng(derive_seed(base, static_cast<std::uint64_t>(label)));
    ClassPlan plan;
    plan.label = label;
    if (cfg.zone_pairs.empty()) {
      plan.zones = draw_zone_pair(grid, rng, cfg.max_attempts);
    } else {
      plan.zones = cfg.zone_pairs[static_cast<std::size_t>(label - 1)];
      check_zone_pair(grid, plan.zones);
    }
    plan.size = static_cast<int>(rng.between(cfg.min_size, cfg.max_size));

    const auto departures = grid.cell(plan.zones.departure);
    const auto arrivals = grid.cell(plan.zones.arrival);
    for (int i = 0; i < plan.size; ++i) {
      std::optional<Path> path;
      for (int attempt = 0; attempt < cfg.max_attempts && !path; ++attempt) {
        const VertexId from = departures[rng.below(departures.size())];
        const VertexId to = arrivals[rng.below(arrivals.size())];
        path = shortest_path(net, from, to);
      }
      if (!path) {
        throw DataError("class " + std::to_string(label) + ": no reachable vertex pair after " +
                        std::to_string(cfg.max_attempts) + " attempts");
      }
      out.dataset.trajectories.push_back({next_id++, label, std::move(path->segments)});
    }
    out.classes.push_back(plan);
  }
  return out;
}

TrajectoryDataset generate(const RoadNetwork& net, const GeneratorConfig& cfg) {
  return generate_detailed(net, cfg).dataset;
}

}  // namespace trajcc
