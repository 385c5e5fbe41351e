#include "trajcc/community.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <queue>
#include <string>
#include <unordered_map>

#include "trajcc/error.hpp"

namespace trajcc {

Partition::Partition(std::span<const int> labels) {
  std::unordered_map<int, int> dense;
  assignment_.reserve(labels.size());
  for (int label : labels) {
    const auto [it, inserted] = dense.emplace(label, cluster_count_);
    if (inserted) ++cluster_count_;
    assignment_.push_back(it->second);
  }
}

Partition Partition::singletons(std::size_t n) {
  std::vector<int> labels(n);
  std::iota(labels.begin(), labels.end(), 0);
  return Partition(labels);
}

Partition Partition::single_cluster(std::size_t n) {
  const std::vector<int> labels(n, 0);
  return Partition(labels);
}

std::vector<std::vector<std::size_t>> Partition::members() const {
  std::vector<std::vector<std::size_t>> out(static_cast<std::size_t>(cluster_count_));
  for (std::size_t i = 0; i < assignment_.size(); ++i) out[static_cast<std::size_t>(assignment_[i])].push_back(i);
  return out;
}

double modularity(const SimilarityGraph& g, const Partition& p) {
  if (p.size() != g.node_count()) throw DataError("partition does not cover the graph's nodes");
  const double total = g.total_weight();
  if (!(total > 0.0)) throw DataError("modularity is undefined on a graph without edge weight");
  const auto k = static_cast<std::size_t>(p.cluster_count());
  std::vector<double> internal(k, 0.0);
  std::vector<double> degree(k, 0.0);
  for (const WeightedEdge& e : g.edges()) {
    if (p[e.a] == p[e.b]) internal[static_cast<std::size_t>(p[e.a])] += e.weight;
  }
  for (std::size_t v = 0; v < g.node_count(); ++v) degree[static_cast<std::size_t>(p[v])] += g.degree(v);
  double q = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double share = degree[c] / (2.0 * total);
    q += internal[c] / total - share * share;
  }
  return q;
}

Partition Dendrogram::partition_after(std::size_t prefix) const {
  if (prefix > merges.size()) throw DataError("dendrogram prefix out of range");
  std::vector<std::size_t> parent(node_count + prefix);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  for (std::size_t t = 0; t < prefix; ++t) {
    parent[merges[t].a] = node_count + t;
    parent[merges[t].b] = node_count + t;
  }
  std::vector<int> labels(node_count);
  for (std::size_t v = 0; v < node_count; ++v) {
    std::size_t root = v;
    while (parent[root] != root) root = parent[root];
    labels[v] = static_cast<int>(root);
  }
  return Partition(labels);
}

namespace {

struct Candidate {
  double gain;
  std::size_t a;
  std::size_t b;
  std::uint64_t version_a;
  std::uint64_t version_b;
};

// Max-heap on gain; equal gains pop the smallest (a, b) first.
struct CandidateOrder {
  bool operator()(const Candidate& x, const Candidate& y) const {
    if (x.gain != y.gain) return x.gain < y.gain;
    if (x.a != y.a) return x.a > y.a;
    return x.b > y.b;
  }
};

}  // namespace

Dendrogram agglomerate(const SimilarityGraph& g) {
  const std::size_t n = g.node_count();
  if (n == 0) throw DataError("cannot cluster an empty graph");
  Dendrogram d;
  d.node_count = n;
  const double total = g.total_weight();
  if (!(total > 0.0)) return d;

  // Slot of a cluster = smallest node index it contains.
  std::vector<std::map<std::size_t, double>> links(n);
  std::vector<double> degree(n);
  std::vector<std::uint64_t> version(n, 0);
  std::vector<bool> alive(n, true);
  std::vector<std::size_t> dendrogram_id(n);
  std::iota(dendrogram_id.begin(), dendrogram_id.end(), std::size_t{0});
  for (std::size_t v = 0; v < n; ++v) {
    degree[v] = g.degree(v);
    for (const Neighbor& nb : g.neighbors(v)) links[v][nb.node] = nb.weight;
  }
  d.initial_q = modularity(g, Partition::singletons(n));

  const double scale = 1.0 / (2.0 * total * total);
  const auto gain = [&](std::size_t a, std::size_t b, double between) {
    return between / total - degree[a] * degree[b] * scale;
  };

  std::priority_queue<Candidate, std::vector<Candidate>, CandidateOrder> heap;
  for (const WeightedEdge& e : g.edges()) heap.push({gain(e.a, e.b, e.weight), e.a, e.b, 0, 0});

  double q = d.initial_q;
  while (!heap.empty()) {
    const Candidate top = heap.top();
    heap.pop();
    if (!alive[top.a] || !alive[top.b] || version[top.a] != top.version_a || version[top.b] != top.version_b) {
      continue;
    }
    const std::size_t keep = top.a;
    const std::size_t drop = top.b;
    q += top.gain;
    Merge merge;
    merge.a = std::min(dendrogram_id[keep], dendrogram_id[drop]);
    merge.b = std::max(dendrogram_id[keep], dendrogram_id[drop]);
    merge.delta_q = top.gain;
    merge.q = q;
    merge.forced = !(top.gain > 0.0);
    dendrogram_id[keep] = n + d.merges.size();
    d.merges.push_back(merge);

    for (const auto& [other, w] : links[drop]) {
      if (other == keep) continue;
      links[keep][other] += w;
      links[other].erase(drop);
      links[other][keep] += w;
    }
    links[keep].erase(drop);
    links[drop].clear();
    degree[keep] += degree[drop];
    alive[drop] = false;
    ++version[keep];
    for (const auto& [other, w] : links[keep]) {
      const std::size_t a = std::min(keep, other);
      const std::size_t b = std::max(keep, other);
      heap.push({gain(a, b, w), a, b, version[a], version[b]});
    }
  }
  return d;
}

Partition refine(const SimilarityGraph& g, const Partition& p, int max_passes) {
  if (p.size() != g.node_count()) throw DataError("partition does not cover the graph's nodes");
  const double total = g.total_weight();
  if (!(total > 0.0) || max_passes <= 0) return p;

  std::vector<int> cluster(p.assignment().begin(), p.assignment().end());
  std::vector<double> cluster_degree(static_cast<std::size_t>(p.cluster_count()), 0.0);
  for (std::size_t v = 0; v < g.node_count(); ++v) cluster_degree[static_cast<std::size_t>(cluster[v])] += g.degree(v);
  const double scale = 1.0 / (2.0 * total * total);

  for (int pass = 0; pass < max_passes; ++pass) {
    bool moved = false;
    for (std::size_t v = 0; v < g.node_count(); ++v) {
      const int own = cluster[v];
      std::map<int, double> link;
      for (const Neighbor& nb : g.neighbors(v)) link[cluster[nb.node]] += nb.weight;
      const double to_own = link.count(own) ? link[own] : 0.0;
      const double dv = g.degree(v);
      const double own_rest = cluster_degree[static_cast<std::size_t>(own)] - dv;
      int best = own;
      double best_gain = 0.0;
      for (const auto& [c, w] : link) {
        if (c == own) continue;
        const double gain = (w - to_own) / total - dv * (cluster_degree[static_cast<std::size_t>(c)] - own_rest) * scale;
        if (gain > best_gain) {
          best_gain = gain;
          best = c;
        }
      }
      // Gains at rounding level are not moves.
      if (best != own && best_gain > 1e-14) {
        cluster_degree[static_cast<std::size_t>(own)] -= dv;
        cluster_degree[static_cast<std::size_t>(best)] += dv;
        cluster[v] = best;
        moved = true;
      }
    }
    if (!moved) break;
  }
  return Partition(cluster);
}

Partition cut(const Dendrogram& d, std::size_t clusters) {
  if (clusters < d.component_count() || clusters > d.node_count || clusters == 0) {
    throw DataError("cluster count " + std::to_string(clusters) + " outside [" +
                    std::to_string(d.component_count()) + ", " + std::to_string(d.node_count) + "]");
  }
  return d.partition_after(d.node_count - clusters);
}

std::size_t best_prefix(const Dendrogram& d) {
  std::size_t best = 0;
  double best_q = d.initial_q;
  for (std::size_t t = 0; t < d.merges.size(); ++t) {
    // Later prefixes have fewer clusters and win ties.
    if (d.merges[t].q >= best_q - 1e-12) {
      if (d.merges[t].q > best_q) best_q = d.merges[t].q;
      best = t + 1;
    }
  }
  return best;
}

Partition cut_best(const Dendrogram& d) { return d.partition_after(best_prefix(d)); }

}  // namespace trajcc
