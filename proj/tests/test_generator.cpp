#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "trajcc/error.hpp"
#include "trajcc/generator.hpp"

using namespace trajcc;

namespace {

const RoadNetwork& city() {
  static const RoadNetwork net = synthetic_city({});
  return net;
}

std::string serialize(const TrajectoryDataset& ds) {
  std::ostringstream out;
  write_dataset(out, ds);
  return out.str();
}

TrajectoryDataset parse(const std::string& text, const RoadNetwork* net = nullptr) {
  std::istringstream in(text);
  return read_dataset(in, net);
}

}  // namespace

TEST(Generator, EightyFiveTrajectoriesInFiveClasses) {
  // This seed draws class sizes 14, 19, 20, 20, 12 within [12, 20].
  GeneratorConfig cfg;
  cfg.seed = 154769;
  const GeneratedData data = generate_detailed(city(), cfg);
  ASSERT_EQ(data.classes.size(), 5u);
  std::vector<int> sizes;
  for (const ClassPlan& plan : data.classes) sizes.push_back(plan.size);
  EXPECT_EQ(sizes, (std::vector<int>{14, 19, 20, 20, 12}));
  EXPECT_EQ(data.dataset.size(), 85u);
  std::vector<int> per_label(6, 0);
  for (const Trajectory& t : data.dataset.trajectories) {
    ASSERT_TRUE(t.label);
    ++per_label[static_cast<std::size_t>(*t.label)];
  }
  EXPECT_EQ(per_label, (std::vector<int>{0, 14, 19, 20, 20, 12}));
}

TEST(Generator, DegenerateSingleTrajectory) {
  GeneratorConfig cfg;
  cfg.classes = 1;
  cfg.min_size = cfg.max_size = 1;
  cfg.seed = 9;
  const TrajectoryDataset ds = generate(city(), cfg);
  ASSERT_EQ(ds.size(), 1u);
  EXPECT_EQ(ds.trajectories[0].label, 1);
  EXPECT_FALSE(ds.trajectories[0].segments.empty());
}

TEST(Generator, SameSeedSameDataDifferentSeedDifferentData) {
  GeneratorConfig cfg;
  cfg.seed = 42;
  const std::string a = serialize(generate(city(), cfg));
  const std::string b = serialize(generate(city(), cfg));
  EXPECT_EQ(a, b);
  int differing = 0;
  for (std::uint64_t seed = 43; seed < 48; ++seed) {
    cfg.seed = seed;
    differing += serialize(generate(city(), cfg)) != a ? 1 : 0;
  }
  EXPECT_EQ(differing, 5);
}

TEST(Generator, AddingAClassKeepsEarlierClasses) {
  GeneratorConfig cfg;
  cfg.seed = 5;
  cfg.classes = 3;
  const GeneratedData three = generate_detailed(city(), cfg);
  cfg.classes = 4;
  const GeneratedData four = generate_detailed(city(), cfg);
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_EQ(three.classes[c].zones, four.classes[c].zones);
    EXPECT_EQ(three.classes[c].size, four.classes[c].size);
  }
  for (std::size_t i = 0; i < three.dataset.size(); ++i) {
    EXPECT_EQ(three.dataset.trajectories[i], four.dataset.trajectories[i]);
  }
}

TEST(Generator, PropertiesHoldAcrossSeeds) {
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    GeneratorConfig cfg;
    cfg.seed = seed;
    cfg.min_size = 2;
    cfg.max_size = 6;
    const GeneratedData data = generate_detailed(city(), cfg);
    const ZoneGrid grid = build_grid(city(), cfg.rows, cfg.cols);
    EXPECT_NO_THROW(validate_paths(data.dataset, city()));
    std::size_t t = 0;
    for (const ClassPlan& plan : data.classes) {
      EXPECT_GE(plan.size, cfg.min_size);
      EXPECT_LE(plan.size, cfg.max_size);
      EXPECT_NE(plan.zones.departure, plan.zones.arrival);
      for (int i = 0; i < plan.size; ++i, ++t) {
        const Trajectory& traj = data.dataset.trajectories[t];
        EXPECT_EQ(traj.label, plan.label);
        const VertexId from = city().find_segment(traj.segments.front())->from;
        const VertexId to = city().find_segment(traj.segments.back())->to;
        const auto from_index = *city().vertex_index(from);
        const auto to_index = *city().vertex_index(to);
        const auto& fv = city().vertices()[from_index];
        const auto& tv = city().vertices()[to_index];
        EXPECT_EQ(grid.cell_of(fv.x, fv.y), plan.zones.departure);
        EXPECT_EQ(grid.cell_of(tv.x, tv.y), plan.zones.arrival);
        // Each trajectory is a shortest path between its endpoints.
        double time = 0.0;
        for (SegmentId s : traj.segments) time += city().find_segment(s)->travel_time();
        const auto best = shortest_path(city(), from, to);
        ASSERT_TRUE(best);
        EXPECT_NEAR(time, best->travel_time, 1e-9);
      }
    }
    EXPECT_EQ(t, data.dataset.size());
  }
}

TEST(Generator, ExplicitZonePairs) {
  GeneratorConfig cfg;
  cfg.classes = 2;
  cfg.zone_pairs = {{0, 99}, {9, 90}};
  const GeneratedData data = generate_detailed(city(), cfg);
  EXPECT_EQ(data.classes[0].zones, (ZonePair{0, 99}));
  EXPECT_EQ(data.classes[1].zones, (ZonePair{9, 90}));
  cfg.zone_pairs = {{0, 0}, {1, 2}};
  EXPECT_THROW(generate(city(), cfg), DataError);
  cfg.zone_pairs = {{0, 1}};
  EXPECT_THROW(generate(city(), cfg), DataError);
}

TEST(Generator, InvalidConfigurations) {
  GeneratorConfig cfg;
  cfg.min_size = 5;
  cfg.max_size = 4;
  EXPECT_THROW(validate(cfg), DataError);
  cfg = {};
  cfg.classes = 0;
  EXPECT_THROW(validate(cfg), DataError);
  cfg = {};
  cfg.rows = cfg.cols = 1;  // a single cell has no distinct zone pair
  EXPECT_THROW(validate(cfg), DataError);
  EXPECT_THROW(generate(RoadNetwork{}, GeneratorConfig{}), DataError);
}

TEST(Generator, UnreachablePairsExhaustAttempts) {
  // Two one-way islands: nothing in the right half is reachable from the left half.
  std::istringstream in("N 0 0 0\nN 1 1 0\nN 2 10 0\nN 3 11 0\nE 0 0 1 1 1\nE 1 2 3 1 1\n");
  const RoadNetwork net = read_network(in);
  GeneratorConfig cfg;
  cfg.classes = 1;
  cfg.rows = 1;
  cfg.cols = 2;
  cfg.zone_pairs = {{0, 1}};
  cfg.max_attempts = 20;
  EXPECT_THROW(generate(net, cfg), DataError);
}

TEST(DatasetFormat, EmptyDatasetRoundTrip) {
  const std::string text = serialize(TrajectoryDataset{});
  EXPECT_EQ(text, "trajectory_id,class,segments\n");
  EXPECT_EQ(parse(text), TrajectoryDataset{});
}

TEST(DatasetFormat, GeneratedDatasetRoundTrip) {
  GeneratorConfig cfg;
  cfg.seed = 154769;
  TrajectoryDataset ds = generate(city(), cfg);
  ds.trajectories[3].label.reset();
  EXPECT_EQ(parse(serialize(ds), &city()), ds);

  const auto path = std::filesystem::temp_directory_path() / "trajcc_roundtrip.csv";
  save_dataset(path.string(), ds);
  EXPECT_EQ(load_dataset(path.string(), &city()), ds);
  std::filesystem::remove(path);
}

TEST(DatasetFormat, UnknownSegmentIsNamed) {
  const std::string text = "trajectory_id,class,segments\n0,1,0;999999\n";
  EXPECT_NO_THROW(parse(text));
  try {
    parse(text, &city());
    FAIL() << "expected an error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("999999"), std::string::npos);
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(DatasetFormat, MalformedInput) {
  EXPECT_THROW(parse("id,label\n"), ParseError);
  EXPECT_THROW(parse("trajectory_id,class,segments\n0,1\n"), ParseError);
  EXPECT_THROW(parse("trajectory_id,class,segments\n0,1,\n"), ParseError);
  EXPECT_THROW(parse("trajectory_id,class,segments\n0,1,4\n0,1,5\n"), ParseError);
  EXPECT_THROW(parse("trajectory_id,class,segments\n0,x,4\n"), ParseError);
  EXPECT_THROW(parse("trajectory_id,class,segments\n0,1,4;;5\n"), ParseError);
  const TrajectoryDataset unlabeled = parse("trajectory_id,class,segments\n7,-,4;5\n");
  EXPECT_FALSE(unlabeled.trajectories[0].label);
  EXPECT_EQ(unlabeled.trajectories[0].segments, (std::vector<SegmentId>{4, 5}));
}

TEST(DatasetFormat, ValidatePathsRejectsDisconnectedSequences) {
  // Segment ids in the synthetic city are not guaranteed adjacent; pick two that are not.
  const Segment& first = city().segments()[0];
  SegmentId far = -1;
  for (const Segment& s : city().segments()) {
    if (s.from != first.to) {
      far = s.id;
      break;
    }
  }
  TrajectoryDataset ds;
  ds.trajectories.push_back({0, 1, {first.id, far}});
  EXPECT_THROW(validate_paths(ds, city()), DataError);
}
