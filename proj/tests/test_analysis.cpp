#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "trajcc/analysis.hpp"
#include "trajcc/error.hpp"
#include "trajcc/generator.hpp"
#include "trajcc/rng.hpp"

using namespace trajcc;

namespace {

std::vector<int> random_labels(Rng& rng, std::size_t n, int k) {
  std::vector<int> out(n);
  for (int& x : out) x = static_cast<int>(rng.below(static_cast<std::uint64_t>(k)));
  return out;
}

}  // namespace

TEST(Confusion, IdenticalPartitionsAreDiagonal) {
  const std::vector<int> labels{1, 1, 2, 3, 3, 3};
  const ContingencyReport r = confusion(labels, labels);
  ASSERT_EQ(r.counts.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(r.counts[i][j] > 0, i == j);
  }
  EXPECT_EQ(r.pure_rows(), 3u);
}

TEST(Confusion, SingleClusterRowIsClassSizes) {
  const std::vector<int> truth{1, 2, 2, 3, 3, 3};
  const ContingencyReport r = confusion(std::vector<int>(6, 0), truth);
  ASSERT_EQ(r.counts.size(), 1u);
  EXPECT_EQ(r.counts[0], (std::vector<std::int64_t>{1, 2, 3}));
  EXPECT_DOUBLE_EQ(r.purity[0], 0.5);
  EXPECT_EQ(r.total, 6);
}

TEST(Confusion, OverPartitionedButPure) {
  // Class 1 split three ways, class 3 two ways, classes 2, 4, 5 whole: 8 pure clusters.
  std::vector<int> truth, pred;
  const std::vector<std::pair<int, int>> layout{{1, 0}, {1, 1}, {1, 2}, {2, 3}, {3, 4}, {3, 5}, {4, 6}, {5, 7}};
  for (const auto& [cls, cluster] : layout) {
    for (int i = 0; i < 4; ++i) {
      truth.push_back(cls);
      pred.push_back(cluster);
    }
  }
  const ContingencyReport r = confusion(pred, truth);
  EXPECT_EQ(r.counts.size(), 8u);
  EXPECT_EQ(r.pure_rows(), 8u);
  EXPECT_THROW(confusion(pred, std::vector<int>{1}), DataError);
}

TEST(Confusion, MarginalsAddUp) {
  Rng rng(3);
  const auto a = random_labels(rng, 200, 6);
  const auto b = random_labels(rng, 200, 4);
  const ContingencyReport r = confusion(a, b);
  std::int64_t total = 0;
  for (std::size_t i = 0; i < r.counts.size(); ++i) {
    std::int64_t row = 0;
    for (auto x : r.counts[i]) row += x;
    EXPECT_EQ(row, r.row_totals[i]);
    total += row;
  }
  for (std::size_t j = 0; j < r.col_totals.size(); ++j) {
    std::int64_t col = 0;
    for (const auto& row : r.counts) col += row[j];
    EXPECT_EQ(col, r.col_totals[j]);
  }
  EXPECT_EQ(total, 200);
}

TEST(ARI, KnownValues) {
  const std::vector<int> a{0, 0, 1, 1};
  const std::vector<int> crossed{0, 1, 0, 1};
  EXPECT_EQ(adjusted_rand_index(a, a), 1.0);
  EXPECT_NEAR(adjusted_rand_index(a, crossed), oracle::pair_counting_ari(a, crossed), 1e-12);
  EXPECT_LE(adjusted_rand_index(a, crossed), 0.0);
  EXPECT_NEAR(adjusted_rand_index(a, crossed), -0.5, 1e-12);
  const std::vector<int> singletons{0, 1, 2, 3};
  EXPECT_NEAR(adjusted_rand_index(singletons, a), 0.0, 1e-12);
  EXPECT_NEAR(oracle::pair_counting_ari(singletons, a), 0.0, 1e-12);
  EXPECT_THROW(adjusted_rand_index(a, std::vector<int>{0}), DataError);
}

TEST(ARI, MatchesPairCountingSymmetricAndLabelInvariant) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = static_cast<std::size_t>(rng.between(2, 60));
    const auto a = random_labels(rng, n, static_cast<int>(rng.between(1, 6)));
    const auto b = random_labels(rng, n, static_cast<int>(rng.between(1, 6)));
    const double ari = adjusted_rand_index(a, b);
    EXPECT_NEAR(ari, oracle::pair_counting_ari(a, b), 1e-12);
    EXPECT_NEAR(ari, adjusted_rand_index(b, a), 1e-15);
    std::vector<int> relabeled(a);
    for (int& x : relabeled) x = 100 - 7 * x;
    EXPECT_NEAR(ari, adjusted_rand_index(relabeled, b), 1e-15);
    EXPECT_GE(ari, -1.0);
    EXPECT_LE(ari, 1.0);
  }
}

TEST(MutualInformation, SingleCellIsZero) {
  const MIReport r = mutual_information({{17}});
  ASSERT_EQ(r.cells.size(), 1u);
  EXPECT_EQ(r.cells[0].mi, 0.0);
  EXPECT_EQ(r.total, 0.0);
  EXPECT_EQ(r.cells[0].joint, 1.0);
}

TEST(MutualInformation, DiagonalHalvesGiveLogTwo) {
  const MIReport nats = mutual_information({{5, 0}, {0, 5}});
  EXPECT_NEAR(nats.total, std::log(2.0), 1e-15);
  EXPECT_EQ(nats.cells[1].mi, 0.0);  // 0 log 0 = 0
  EXPECT_NEAR(nats.cells[0].mi, 0.5 * std::log(2.0), 1e-15);
  const MIReport bits = mutual_information({{5, 0}, {0, 5}}, true);
  EXPECT_NEAR(bits.total, 1.0, 1e-15);
  EXPECT_TRUE(bits.bits);
}

TEST(MutualInformation, ExpectedMassOfAHubCell) {
  // A trajectory cluster holding 21.6% of the traversals and a segment cluster holding
  // 17.3%, all of it from that trajectory cluster.
  const MIReport r = mutual_information({{173, 43}, {0, 784}});
  const MICell& hub = r.cells[0];
  EXPECT_NEAR(hub.trajectory_share, 0.216, 1e-12);
  EXPECT_NEAR(hub.segment_share, 0.173, 1e-12);
  EXPECT_NEAR(hub.joint, 0.173, 1e-12);
  EXPECT_NEAR(hub.expected, 0.037, 0.0005);
  EXPECT_GT(hub.mi, 0.0);
}

TEST(MutualInformation, IdentitiesOnRandomTables) {
  Rng rng(101);
  for (int trial = 0; trial < 40; ++trial) {
    const auto kt = static_cast<std::size_t>(rng.between(1, 6));
    const auto ks = static_cast<std::size_t>(rng.between(1, 6));
    oracle::Dense table(kt, std::vector<std::int64_t>(ks));
    for (auto& row : table) {
      for (auto& x : row) x = rng.uniform() < 0.3 ? 0 : rng.between(1, 50);
    }
    table[0][0] += 1;
    const MIReport r = mutual_information(table);
    double joint = 0.0, sum = 0.0;
    for (const MICell& c : r.cells) {
      joint += c.joint;
      sum += c.mi;
      if (c.count == 0) EXPECT_EQ(c.mi, 0.0);
      else if (c.joint > c.expected * (1 + 1e-12)) EXPECT_GT(c.mi, 0.0);
      else if (c.joint < c.expected * (1 - 1e-12)) EXPECT_LT(c.mi, 0.0);
    }
    EXPECT_NEAR(joint, 1.0, 1e-12);
    EXPECT_NEAR(sum, r.total, 1e-15);
    EXPECT_NEAR(r.total, contingency_mutual_information(table), 1e-12);
    EXPECT_NEAR(r.total, oracle::direct_mi(table), 1e-12);
    EXPECT_GE(r.total, -1e-12);
  }
  EXPECT_THROW(mutual_information(oracle::Dense{{0, 0}}), DataError);
  EXPECT_THROW(mutual_information(oracle::Dense{}), DataError);
}

TEST(MutualInformation, FromModel) {
  const auto matrix = std::make_shared<const TraversalMatrix>(oracle::to_matrix({{3, 1}, {0, 2}}));
  const CoClusterModel coarse = CoClusterModel::coarsest(matrix);
  EXPECT_EQ(mutual_information(coarse).total, 0.0);
  const CoClusterModel fine = CoClusterModel::finest(matrix);
  EXPECT_NEAR(mutual_information(fine).total, oracle::direct_mi({{3, 1}, {0, 2}}), 1e-12);
}

TEST(CrossedMatrix, BlockDiagonal) {
  const auto matrix = std::make_shared<const TraversalMatrix>(oracle::to_matrix({{1, 0}, {0, 1}}));
  const CrossedMatrix x = crossed_matrix(*matrix, std::vector<int>{0, 1}, std::vector<int>{0, 1});
  EXPECT_EQ(x.block_density[0][1], 0.0);
  EXPECT_EQ(x.block_density[1][0], 0.0);
  EXPECT_EQ(x.block_density[0][0], 1.0);
  EXPECT_THROW(crossed_matrix(*matrix, std::vector<int>{0}, std::vector<int>{0, 1}), DataError);
}

TEST(CrossedMatrix, CoarsestIsOneBlock) {
  const oracle::Dense d{{1, 2, 0}, {0, 4, 1}};
  const auto matrix = std::make_shared<const TraversalMatrix>(oracle::to_matrix(d));
  const CrossedMatrix x = crossed_matrix(CoClusterModel::coarsest(matrix));
  ASSERT_EQ(x.block_density.size(), 1u);
  EXPECT_DOUBLE_EQ(x.block_density[0][0], 8.0 / 6.0);
}

TEST(CrossedMatrix, GeneratedDatasetMatchesNaiveRecount) {
  const RoadNetwork net = synthetic_city({});
  GeneratorConfig cfg;
  cfg.seed = 154769;
  const TrajectoryDataset ds = generate(net, cfg);
  const auto matrix = std::make_shared<const TraversalMatrix>(build_traversal_matrix(ds));
  ASSERT_EQ(matrix->rows(), 85u);
  SearchOptions options;
  options.restarts = 2;
  const CoClusterModel model = vns_search(matrix, options).model;
  const CrossedMatrix x = crossed_matrix(model);
  const oracle::Dense dense = oracle::to_dense(*matrix);
  const auto rows = model.assignment(Side::Trajectory);
  const auto cols = model.assignment(Side::Segment);
  double mass = 0.0;
  for (std::size_t c = 0; c < x.block_counts.size(); ++c) {
    for (std::size_t d = 0; d < x.block_counts[c].size(); ++d) {
      std::int64_t count = 0;
      std::size_t height = 0, width = 0;
      for (std::size_t r = 0; r < dense.size(); ++r) height += rows[r] == static_cast<int>(c) ? 1 : 0;
      for (std::size_t s = 0; s < dense[0].size(); ++s) width += cols[s] == static_cast<int>(d) ? 1 : 0;
      for (std::size_t r = 0; r < dense.size(); ++r) {
        for (std::size_t s = 0; s < dense[0].size(); ++s) {
          if (rows[r] == static_cast<int>(c) && cols[s] == static_cast<int>(d)) count += dense[r][s];
        }
      }
      EXPECT_EQ(x.block_counts[c][d], count);
      EXPECT_NEAR(x.block_density[c][d], static_cast<double>(count) / static_cast<double>(height * width), 1e-15);
      mass += x.block_density[c][d] * static_cast<double>(height * width);
    }
  }
  EXPECT_NEAR(mass, static_cast<double>(matrix->total()), 1e-9);
  // Orders group clusters contiguously.
  for (std::size_t c = 0; c + 1 < x.row_bounds.size(); ++c) {
    for (std::size_t y = x.row_bounds[c]; y < x.row_bounds[c + 1]; ++y) EXPECT_EQ(rows[x.row_order[y]], static_cast<int>(c));
  }
}

TEST(CrossedMatrix, DensityPictureHasPgmHeader) {
  const auto matrix = std::make_shared<const TraversalMatrix>(oracle::to_matrix({{1, 0, 2}, {0, 3, 0}}));
  const CoClusterModel m = CoClusterModel::finest(matrix);
  std::ostringstream out;
  write_density_pgm(out, *matrix, crossed_matrix(m));
  const std::string s = out.str();
  EXPECT_EQ(s.substr(0, 11), "P5\n3 2\n255\n");
  EXPECT_EQ(s.size(), 11u + 6u);
}
