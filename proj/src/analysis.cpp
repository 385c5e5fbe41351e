#include "trajcc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>

#include "trajcc/error.hpp"

namespace trajcc {

std::size_t ContingencyReport::pure_rows(double threshold) const {
  return static_cast<std::size_t>(
      std::count_if(purity.begin(), purity.end(), [threshold](double p) { return p >= threshold - 1e-12; }));
}

ContingencyReport confusion(std::span<const int> predicted, std::span<const int> truth) {
  if (predicted.size() != truth.size()) throw DataError("partitions cover different element sets");
  ContingencyReport out;
  std::map<int, std::size_t> rows;
  std::map<int, std::size_t> cols;
  for (int p : predicted) rows.emplace(p, 0);
  for (int t : truth) cols.emplace(t, 0);
  for (auto& [label, index] : rows) {
    index = out.row_labels.size();
    out.row_labels.push_back(label);
  }
  for (auto& [label, index] : cols) {
    index = out.col_labels.size();
    out.col_labels.push_back(label);
  }
  out.counts.assign(rows.size(), std::vector<std::int64_t>(cols.size(), 0));
  out.row_totals.assign(rows.size(), 0);
  out.col_totals.assign(cols.size(), 0);
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const std::size_t r = rows[predicted[i]];
    const std::size_t c = cols[truth[i]];
    ++out.counts[r][c];
    ++out.row_totals[r];
    ++out.col_totals[c];
  }
  out.total = static_cast<std::int64_t>(predicted.size());
  for (std::size_t r = 0; r < out.counts.size(); ++r) {
    const auto majority = *std::max_element(out.counts[r].begin(), out.counts[r].end());
    out.purity.push_back(static_cast<double>(majority) / static_cast<double>(out.row_totals[r]));
  }
  return out;
}

namespace {

double pairs(std::int64_t n) { return static_cast<double>(n) * static_cast<double>(n - 1) / 2.0; }

}  // namespace

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  if (a.size() != b.size()) throw DataError("partitions cover different element sets");
  const ContingencyReport table = confusion(a, b);
  double index = 0.0;
  for (const auto& row : table.counts) {
    for (std::int64_t n : row) index += pairs(n);
  }
  double sum_rows = 0.0;
  double sum_cols = 0.0;
  for (std::int64_t n : table.row_totals) sum_rows += pairs(n);
  for (std::int64_t n : table.col_totals) sum_cols += pairs(n);
  const double all = pairs(table.total);
  if (all == 0.0) return 1.0;
  const double expected = sum_rows * sum_cols / all;
  const double maximum = 0.5 * (sum_rows + sum_cols);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

MIReport mutual_information(const std::vector<std::vector<std::int64_t>>& table, bool bits) {
  if (table.empty() || table.front().empty()) throw DataError("empty co-cluster table");
  const std::size_t kt = table.size();
  const std::size_t ks = table.front().size();
  std::vector<std::int64_t> row_totals(kt, 0);
  std::vector<std::int64_t> col_totals(ks, 0);
  std::int64_t total = 0;
  for (std::size_t c = 0; c < kt; ++c) {
    if (table[c].size() != ks) throw DataError("ragged co-cluster table");
    for (std::size_t d = 0; d < ks; ++d) {
      if (table[c][d] < 0) throw DataError("negative co-cluster count");
      row_totals[c] += table[c][d];
      col_totals[d] += table[c][d];
      total += table[c][d];
    }
  }
  if (total == 0) throw DataError("mutual information needs at least one traversal");
  const double scale = bits ? 1.0 / std::log(2.0) : 1.0;
  const double n = static_cast<double>(total);

  MIReport out;
  out.trajectory_clusters = kt;
  out.segment_clusters = ks;
  out.bits = bits;
  for (std::size_t c = 0; c < kt; ++c) {
    for (std::size_t d = 0; d < ks; ++d) {
      MICell cell;
      cell.trajectory_cluster = static_cast<int>(c);
      cell.segment_cluster = static_cast<int>(d);
      cell.count = table[c][d];
      cell.joint = static_cast<double>(table[c][d]) / n;
      cell.trajectory_share = static_cast<double>(row_totals[c]) / n;
      cell.segment_share = static_cast<double>(col_totals[d]) / n;
      cell.expected = cell.trajectory_share * cell.segment_share;
      if (table[c][d] > 0) {
        // Ratio in counts: N_cd N / (N_c M_d).
        const double ratio = static_cast<double>(table[c][d]) * n /
                             (static_cast<double>(row_totals[c]) * static_cast<double>(col_totals[d]));
        cell.mi = cell.joint * std::log(ratio) * scale;
      }
      out.total += cell.mi;
      out.cells.push_back(cell);
    }
  }
  return out;
}

MIReport mutual_information(const CoClusterModel& model, bool bits) {
  return mutual_information(model.contingency(), bits);
}

double contingency_mutual_information(const std::vector<std::vector<std::int64_t>>& table) {
  // H(T) + H(S) - H(T, S), each entropy from counts.
  std::vector<double> rows(table.size(), 0.0);
  std::vector<double> cols(table.empty() ? 0 : table.front().size(), 0.0);
  double n = 0.0;
  for (std::size_t c = 0; c < table.size(); ++c) {
    for (std::size_t d = 0; d < table[c].size(); ++d) {
      rows[c] += static_cast<double>(table[c][d]);
      cols[d] += static_cast<double>(table[c][d]);
      n += static_cast<double>(table[c][d]);
    }
  }
  const auto entropy_term = [n](double count) { return count > 0.0 ? -(count / n) * std::log(count / n) : 0.0; };
  double h_rows = 0.0, h_cols = 0.0, h_joint = 0.0;
  for (double r : rows) h_rows += entropy_term(r);
  for (double c : cols) h_cols += entropy_term(c);
  for (const auto& row : table) {
    for (std::int64_t x : row) h_joint += entropy_term(static_cast<double>(x));
  }
  return h_rows + h_cols - h_joint;
}

namespace {

void order_by_cluster(std::span<const int> clusters, std::vector<std::size_t>& order, std::vector<std::size_t>& bounds) {
  const int k = clusters.empty() ? 0 : *std::max_element(clusters.begin(), clusters.end()) + 1;
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int c : clusters) {
    if (c < 0) throw DataError("negative cluster id");
    ++sizes[static_cast<std::size_t>(c)];
  }
  bounds.assign(static_cast<std::size_t>(k) + 1, 0);
  for (std::size_t c = 0; c < sizes.size(); ++c) bounds[c + 1] = bounds[c] + sizes[c];
  order.resize(clusters.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return clusters[x] < clusters[y]; });
}

}  // namespace

CrossedMatrix crossed_matrix(const TraversalMatrix& m, std::span<const int> trajectory_clusters,
                             std::span<const int> segment_clusters) {
  if (trajectory_clusters.size() != m.rows() || segment_clusters.size() != m.cols()) {
    throw DataError("partitions do not cover the traversal matrix");
  }
  CrossedMatrix out;
  order_by_cluster(trajectory_clusters, out.row_order, out.row_bounds);
  order_by_cluster(segment_clusters, out.col_order, out.col_bounds);
  const std::size_t kt = out.row_bounds.size() - 1;
  const std::size_t ks = out.col_bounds.size() - 1;
  out.block_counts.assign(kt, std::vector<std::int64_t>(ks, 0));
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto c = static_cast<std::size_t>(trajectory_clusters[r]);
    for (const CountEntry& e : m.row(r)) {
      out.block_counts[c][static_cast<std::size_t>(segment_clusters[e.index])] += e.count;
    }
  }
  out.block_density.assign(kt, std::vector<double>(ks, 0.0));
  for (std::size_t c = 0; c < kt; ++c) {
    for (std::size_t d = 0; d < ks; ++d) {
      const double area = static_cast<double>(out.row_bounds[c + 1] - out.row_bounds[c]) *
                          static_cast<double>(out.col_bounds[d + 1] - out.col_bounds[d]);
      out.block_density[c][d] = area > 0.0 ? static_cast<double>(out.block_counts[c][d]) / area : 0.0;
    }
  }
  return out;
}

CrossedMatrix crossed_matrix(const CoClusterModel& model) {
  return crossed_matrix(model.matrix(), model.assignment(Side::Trajectory), model.assignment(Side::Segment));
}

void write_density_pgm(std::ostream& out, const TraversalMatrix& m, const CrossedMatrix& crossed) {
  const std::size_t height = crossed.row_order.size();
  const std::size_t width = crossed.col_order.size();
  std::vector<std::size_t> col_position(width);
  for (std::size_t x = 0; x < width; ++x) col_position[crossed.col_order[x]] = x;
  std::int64_t peak = 1;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (const CountEntry& e : m.row(r)) peak = std::max(peak, e.count);
  }
  std::vector<unsigned char> pixels(height * width, 255);
  for (std::size_t b = 1; b + 1 < crossed.col_bounds.size(); ++b) {
    for (std::size_t y = 0; y < height; ++y) pixels[y * width + crossed.col_bounds[b]] = 200;
  }
  for (std::size_t b = 1; b + 1 < crossed.row_bounds.size(); ++b) {
    for (std::size_t x = 0; x < width; ++x) pixels[crossed.row_bounds[b] * width + x] = 200;
  }
  for (std::size_t y = 0; y < height; ++y) {
    for (const CountEntry& e : m.row(crossed.row_order[y])) {
      const double shade = static_cast<double>(e.count) / static_cast<double>(peak);
      pixels[y * width + col_position[e.index]] = static_cast<unsigned char>(std::lround(160.0 * (1.0 - shade)));
    }
  }
  out << "P5\n" << width << ' ' << height << "\n255\n";
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

}  // namespace trajcc
