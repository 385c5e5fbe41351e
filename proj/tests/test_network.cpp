#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "trajcc/error.hpp"
#include "trajcc/network.hpp"
#include "trajcc/rng.hpp"

using namespace trajcc;

namespace {

RoadNetwork parse(const std::string& text) {
  std::istringstream in(text);
  return read_network(in);
}

// 0 -> 3 two ways: via 1 (short, slow) or via 2 (long, fast).
RoadNetwork diamond() {
  return parse(
      "N 0 0 0\nN 1 1 1\nN 2 1 -1\nN 3 2 0\n"
      "E 10 0 1 100 10\nE 11 1 3 100 10\n"   // 2 x 10 = 20
      "E 20 0 2 300 60\nE 21 2 3 300 60\n");  // 2 x 5 = 10
}

RoadNetwork random_network(Rng& rng, int vertices, int segments) {
  std::vector<Vertex> vs;
  for (int v = 0; v < vertices; ++v) vs.push_back({v, rng.uniform(), rng.uniform()});
  std::vector<Segment> ss;
  for (int s = 0; s < segments; ++s) {
    const auto from = rng.between(0, vertices - 1);
    auto to = rng.between(0, vertices - 2);
    if (to >= from) ++to;
    ss.push_back({s, from, to, 1.0 + 99.0 * rng.uniform(), 10.0 + 60.0 * rng.uniform()});
  }
  return RoadNetwork(vs, ss);
}

void expect_valid_path(const RoadNetwork& net, const Path& p, VertexId from, VertexId to) {
  if (p.segments.empty()) {
    EXPECT_EQ(from, to);
    return;
  }
  EXPECT_EQ(net.find_segment(p.segments.front())->from, from);
  EXPECT_EQ(net.find_segment(p.segments.back())->to, to);
  double time = 0.0;
  for (std::size_t i = 0; i < p.segments.size(); ++i) {
    time += net.find_segment(p.segments[i])->travel_time();
    if (i > 0) EXPECT_EQ(net.find_segment(p.segments[i - 1])->to, net.find_segment(p.segments[i])->from);
  }
  EXPECT_NEAR(time, p.travel_time, 1e-9 * std::max(1.0, time));
}

}  // namespace

TEST(NetworkFormat, ParsesVerticesSegmentsAndComments) {
  const RoadNetwork net = parse("# a comment\nN 1 0.5 2\n\nN 2 3 4  # trailing\nE 7 1 2 120.5 50\n");
  ASSERT_EQ(net.vertices().size(), 2u);
  ASSERT_EQ(net.segments().size(), 1u);
  EXPECT_EQ(net.segments()[0], (Segment{7, 1, 2, 120.5, 50.0}));
  EXPECT_DOUBLE_EQ(net.vertices()[0].x, 0.5);
}

TEST(NetworkFormat, ZeroSegmentsIsValid) {
  const RoadNetwork net = parse("N 0 0 0\nN 1 1 1\n");
  EXPECT_EQ(net.vertices().size(), 2u);
  EXPECT_TRUE(net.segments().empty());
}

TEST(NetworkFormat, ParseErrorsCarryLineNumbers) {
  try {
    parse("N 0 0 0\nN 1 1\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse("N 0 0 0\nX 1 2\n"), ParseError);
  EXPECT_THROW(parse("N 0 0 zero\n"), ParseError);
  EXPECT_THROW(parse("N 0 0 0\nN 1 0 0\nE 0 0 1 10 abc\n"), ParseError);
}

TEST(NetworkFormat, InvariantViolationsAreRejected) {
  EXPECT_THROW(parse("N 0 0 0\nE 0 0 9 10 10\n"), DataError);                    // dangling endpoint
  EXPECT_THROW(parse("N 0 0 0\nN 0 1 1\n"), DataError);                          // duplicate vertex
  EXPECT_THROW(parse("N 0 0 0\nN 1 1 1\nE 0 0 1 1 1\nE 0 1 0 1 1\n"), DataError);  // duplicate segment
  EXPECT_THROW(parse("N 0 0 0\nN 1 1 1\nE 0 0 1 0 1\n"), DataError);
  EXPECT_THROW(parse("N 0 0 0\nN 1 1 1\nE 0 0 1 1 -5\n"), DataError);
}

TEST(NetworkFormat, WriteReadRoundTrip) {
  const RoadNetwork net = synthetic_city({.rows = 6, .cols = 5, .seed = 11});
  std::ostringstream out;
  write_network(out, net);
  const RoadNetwork back = parse(out.str());
  ASSERT_EQ(back.vertices().size(), net.vertices().size());
  ASSERT_EQ(back.segments().size(), net.segments().size());
  for (std::size_t i = 0; i < net.vertices().size(); ++i) EXPECT_EQ(back.vertices()[i], net.vertices()[i]);
  for (std::size_t i = 0; i < net.segments().size(); ++i) EXPECT_EQ(back.segments()[i], net.segments()[i]);
}

TEST(ShortestPath, IdentityIsEmpty) {
  const auto p = shortest_path(diamond(), 2, 2);
  ASSERT_TRUE(p);
  EXPECT_TRUE(p->segments.empty());
  EXPECT_EQ(p->travel_time, 0.0);
}

TEST(ShortestPath, DiamondPrefersSmallerTravelTime) {
  const auto p = shortest_path(diamond(), 0, 3);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->segments, (std::vector<SegmentId>{20, 21}));
  EXPECT_DOUBLE_EQ(p->travel_time, oracle::brute_force_path_time(diamond(), 0, 3));
}

TEST(ShortestPath, UnreachableAndUnknown) {
  const RoadNetwork net = parse("N 0 0 0\nN 1 1 0\nN 2 5 5\nN 3 6 5\nE 0 0 1 1 1\nE 1 2 3 1 1\n");
  EXPECT_FALSE(shortest_path(net, 0, 3));
  EXPECT_FALSE(shortest_path(net, 1, 0));  // directed
  EXPECT_THROW(shortest_path(net, 0, 42), DataError);
  EXPECT_THROW(shortest_path(net, 42, 0), DataError);
}

TEST(ShortestPath, TiesGoToSmallestSegmentSequence) {
  // Two equally fast arms; the arm starting with segment 3 must win over 5.
  const RoadNetwork net = parse(
      "N 0 0 0\nN 1 1 1\nN 2 1 -1\nN 3 2 0\n"
      "E 5 0 1 10 10\nE 6 1 3 10 10\nE 3 0 2 10 10\nE 9 2 3 10 10\n");
  const auto p = shortest_path(net, 0, 3);
  ASSERT_TRUE(p);
  EXPECT_EQ(p->segments, (std::vector<SegmentId>{3, 9}));
}

TEST(ShortestPath, MatchesExhaustiveEnumerationOnSmallNetworks) {
  Rng rng(2024);
  int compared = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const int vertices = static_cast<int>(rng.between(2, 8));
    const RoadNetwork net = random_network(rng, vertices, static_cast<int>(rng.between(1, 3 * vertices)));
    for (int from = 0; from < vertices; ++from) {
      for (int to = 0; to < vertices; ++to) {
        const double expected = oracle::brute_force_path_time(net, from, to);
        const auto p = shortest_path(net, from, to);
        if (std::isinf(expected)) {
          EXPECT_FALSE(p);
          continue;
        }
        ASSERT_TRUE(p);
        EXPECT_NEAR(p->travel_time, expected, 1e-9 * std::max(1.0, expected));
        expect_valid_path(net, *p, from, to);
        ++compared;
      }
    }
  }
  EXPECT_GT(compared, 500);
}

TEST(ShortestPath, TravelTimesAgreeWithPaths) {
  const RoadNetwork net = synthetic_city({.rows = 8, .cols = 8, .seed = 5});
  const auto forward = travel_times(net, 0);
  const auto backward = travel_times(net, 10, true);
  for (std::size_t v = 0; v < net.vertices().size(); v += 7) {
    const auto p = shortest_path(net, net.vertices()[0].id, net.vertices()[v].id);
    ASSERT_TRUE(p);
    EXPECT_NEAR(p->travel_time, forward[v], 1e-9);
    const auto q = shortest_path(net, net.vertices()[v].id, net.vertices()[10].id);
    ASSERT_TRUE(q);
    EXPECT_NEAR(q->travel_time, backward[v], 1e-9);
  }
}

TEST(ZoneGrid, SingleCellHoldsEverything) {
  const RoadNetwork net = diamond();
  const ZoneGrid grid = build_grid(net, 1, 1);
  ASSERT_EQ(grid.cell_count(), 1u);
  EXPECT_EQ(grid.cell(0).size(), 4u);
}

TEST(ZoneGrid, RectangleCornersOnePerCell) {
  const RoadNetwork net = parse("N 0 0 0\nN 1 10 0\nN 2 0 4\nN 3 10 4\n");
  const ZoneGrid grid = build_grid(net, 2, 2);
  EXPECT_EQ(grid.min_x(), 0.0);
  EXPECT_EQ(grid.max_x(), 10.0);
  EXPECT_EQ(grid.min_y(), 0.0);
  EXPECT_EQ(grid.max_y(), 4.0);
  // Cell = row * cols + col, row from y, col from x.
  EXPECT_EQ(std::vector<VertexId>(grid.cell(0).begin(), grid.cell(0).end()), std::vector<VertexId>{0});
  EXPECT_EQ(std::vector<VertexId>(grid.cell(1).begin(), grid.cell(1).end()), std::vector<VertexId>{1});
  EXPECT_EQ(std::vector<VertexId>(grid.cell(2).begin(), grid.cell(2).end()), std::vector<VertexId>{2});
  EXPECT_EQ(std::vector<VertexId>(grid.cell(3).begin(), grid.cell(3).end()), std::vector<VertexId>{3});
}

TEST(ZoneGrid, BorderVertexGoesToLowerCell) {
  // x = 5 is exactly the border between the two columns.
  const RoadNetwork net = parse("N 0 0 0\nN 1 10 0\nN 2 5 0\n");
  const ZoneGrid grid = build_grid(net, 1, 2);
  EXPECT_EQ(grid.cell(0).size(), 2u);
  EXPECT_EQ(grid.cell(1).size(), 1u);
  EXPECT_EQ(grid.cell_of(5.0, 0.0), 0u);
}

TEST(ZoneGrid, PartitionsVertices) {
  const RoadNetwork net = synthetic_city({.rows = 13, .cols = 9, .seed = 3});
  for (const auto [rows, cols] : {std::pair{1, 1}, std::pair{3, 7}, std::pair{10, 10}, std::pair{20, 3}}) {
    const ZoneGrid grid = build_grid(net, rows, cols);
    std::set<VertexId> seen;
    std::size_t total = 0;
    for (std::size_t c = 0; c < grid.cell_count(); ++c) {
      total += grid.cell(c).size();
      seen.insert(grid.cell(c).begin(), grid.cell(c).end());
    }
    EXPECT_EQ(total, net.vertices().size());
    EXPECT_EQ(seen.size(), net.vertices().size());
  }
}

TEST(ZoneGrid, RejectsBadInput) {
  EXPECT_THROW(build_grid(RoadNetwork{}, 2, 2), DataError);
  EXPECT_THROW(build_grid(diamond(), 0, 2), DataError);
  EXPECT_THROW(build_grid(diamond(), 2, -1), DataError);
}

TEST(SyntheticCity, ShapeAndDeterminism) {
  const RoadNetwork a = synthetic_city({});
  const RoadNetwork b = synthetic_city({});
  EXPECT_EQ(a.vertices().size(), 1600u);
  ASSERT_EQ(a.segments().size(), b.segments().size());
  for (std::size_t i = 0; i < a.segments().size(); ++i) EXPECT_EQ(a.segments()[i], b.segments()[i]);
  for (const Segment& s : a.segments()) {
    EXPECT_GT(s.length, 0.0);
    EXPECT_GT(s.speed, 0.0);
  }
  // Every vertex reaches every other on a two-way lattice.
  const auto times = travel_times(a, 0);
  for (double t : times) EXPECT_TRUE(std::isfinite(t));
}

TEST(SyntheticCity, BundledFileMatchesDefaultCity) {
  const RoadNetwork bundled = load_network(TRAJCC_DATA_DIR "/city.net");
  const RoadNetwork city = synthetic_city({});
  ASSERT_EQ(bundled.vertices().size(), city.vertices().size());
  ASSERT_EQ(bundled.segments().size(), city.segments().size());
  for (std::size_t i = 0; i < city.vertices().size(); ++i) EXPECT_EQ(bundled.vertices()[i], city.vertices()[i]);
  for (std::size_t i = 0; i < city.segments().size(); ++i) EXPECT_EQ(bundled.segments()[i], city.segments()[i]);
}
