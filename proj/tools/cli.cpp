#include "cli.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "trajcc/analysis.hpp"
#include "trajcc/bigraph.hpp"
#include "trajcc/cocluster.hpp"
#include "trajcc/community.hpp"
#include "trajcc/dataset.hpp"
#include "trajcc/error.hpp"
#include "trajcc/generator.hpp"
#include "trajcc/network.hpp"
#include "trajcc/text.hpp"

namespace trajcc::cli {

namespace {

using json = nlohmann::ordered_json;

constexpr const char* kVersion = "1.0.0";

// ------------------------------------------------------------------ file helpers

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw DataError(path + ": " + e.what());
  }
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << j.dump(2) << '\n';
}

template <typename Writer>
void write_file(const std::string& path, Writer&& writer) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  writer(out);
}

enum class TableKind { Dataset, Matrix };

TableKind sniff(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::string line;
  while (std::getline(in, line)) {
    const auto view = text::trim(line);
    if (view.empty()) continue;
    if (view == "trajectory_id,class,segments") return TableKind::Dataset;
    if (view == "trajectory_id,segment_id,count") return TableKind::Matrix;
    break;
  }
  throw DataError(path + " is neither a trajectory dataset nor a traversal matrix");
}

std::shared_ptr<const TraversalMatrix> load_traversals(const std::string& path, const RoadNetwork* net = nullptr) {
  if (sniff(path) == TableKind::Dataset) {
    return std::make_shared<const TraversalMatrix>(build_traversal_matrix(load_dataset(path, net)));
  }
  return std::make_shared<const TraversalMatrix>(load_matrix(path));
}

template <typename T>
json to_json_array(std::span<const T> values) {
  json out = json::array();
  for (const T& v : values) out.push_back(v);
  return out;
}

json provenance(const std::string& command, const std::vector<std::string>& args, json config) {
  return json{{"tool", "trajcc"}, {"version", kVersion}, {"command", command}, {"arguments", args},
              {"config", std::move(config)}};
}

std::string fmt(double x) {
  std::ostringstream s;
  s.precision(6);
  s << x;
  return s.str();
}

std::vector<ZonePair> parse_zone_pairs(const std::string& list) {
  std::vector<ZonePair> out;
  if (list.empty()) return out;
  for (const auto item : text::split(list, ',')) {
    const auto parts = text::split(text::trim(item), ':');
    if (parts.size() != 2) throw DataError("zone pair '" + std::string(item) + "' is not <departure>:<arrival>");
    const auto d = text::parse_int(text::trim(parts[0]));
    const auto a = text::parse_int(text::trim(parts[1]));
    if (!d || !a || *d < 0 || *a < 0) throw DataError("bad zone pair '" + std::string(item) + "'");
    out.push_back({static_cast<std::size_t>(*d), static_cast<std::size_t>(*a)});
  }
  return out;
}

// Cluster labels of the matrix rows (or columns) from an id -> cluster listing.
std::vector<int> labels_for(std::span<const std::int64_t> ids, const json& node_ids, const json& assignment,
                            const std::string& what) {
  if (!node_ids.is_array() || !assignment.is_array() || node_ids.size() != assignment.size()) {
    throw DataError(what + ": malformed id/cluster listing");
  }
  std::map<std::int64_t, int> lookup;
  for (std::size_t i = 0; i < node_ids.size(); ++i) {
    lookup[node_ids[i].get<std::int64_t>()] = assignment[i].get<int>();
  }
  std::vector<int> out;
  out.reserve(ids.size());
  for (std::int64_t id : ids) {
    const auto it = lookup.find(id);
    if (it == lookup.end()) throw DataError(what + " has no cluster for id " + std::to_string(id));
    out.push_back(it->second);
  }
  return out;
}

// Trajectory id -> cluster from either a co-clustering model or a trajectory partition.
std::pair<json, json> trajectory_listing(const json& pred, const std::string& path) {
  if (pred.contains("trajectory_clusters")) return {pred.at("trajectory_ids"), pred.at("trajectory_clusters")};
  if (pred.value("kind", "") == "trajectory" && pred.contains("assignment")) {
    return {pred.at("node_ids"), pred.at("assignment")};
  }
  throw DataError(path + " holds neither a co-clustering model nor a trajectory partition");
}

std::pair<json, json> segment_listing(const json& pred, const std::string& path) {
  if (pred.contains("segment_clusters")) return {pred.at("segment_ids"), pred.at("segment_clusters")};
  if (pred.value("kind", "") == "segment" && pred.contains("assignment")) {
    return {pred.at("node_ids"), pred.at("assignment")};
  }
  throw DataError(path + " holds neither a co-clustering model nor a segment partition");
}

// ------------------------------------------------------------------ subcommands

struct CityArgs {
  CityConfig cfg;
  std::string output;
};

int do_city(const CityArgs& a, std::ostream& out) {
  const RoadNetwork net = synthetic_city(a.cfg);
  write_file(a.output, [&](std::ostream& o) { write_network(o, net); });
  out << "city: " << net.vertices().size() << " vertices, " << net.segments().size() << " segments -> " << a.output
      << '\n';
  return kOk;
}

struct GenerateArgs {
  std::string network;
  std::string output;
  GeneratorConfig cfg;
  std::string zones;
};

int do_generate(const GenerateArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  GeneratorConfig cfg = a.cfg;
  cfg.zone_pairs = parse_zone_pairs(a.zones);
  const RoadNetwork net = load_network(a.network);
  const GeneratedData data = generate_detailed(net, cfg);
  save_dataset(a.output, data.dataset);

  json classes = json::array();
  for (const ClassPlan& plan : data.classes) {
    classes.push_back({{"label", plan.label}, {"departure_zone", plan.zones.departure},
                       {"arrival_zone", plan.zones.arrival}, {"size", plan.size}});
  }
  json config{{"network", a.network}, {"classes", cfg.classes}, {"rows", cfg.rows}, {"cols", cfg.cols},
              {"min_size", cfg.min_size}, {"max_size", cfg.max_size}, {"seed", cfg.seed},
              {"max_attempts", cfg.max_attempts}, {"zones", a.zones}};
  write_json(a.output + ".meta.json",
             json{{"provenance", provenance("generate", args, std::move(config))},
                  {"network_vertices", net.vertices().size()},
                  {"network_segments", net.segments().size()},
                  {"trajectories", data.dataset.size()},
                  {"class_plans", std::move(classes)}});
  out << "generated " << data.dataset.size() << " trajectories in " << data.classes.size() << " classes (seed "
      << cfg.seed << ") -> " << a.output << '\n';
  return kOk;
}

struct MatrixArgs {
  std::string input;
  std::string network;
  std::string output;
};

int do_matrix(const MatrixArgs& a, std::ostream& out) {
  std::optional<RoadNetwork> net;
  if (!a.network.empty()) net = load_network(a.network);
  const TrajectoryDataset ds = load_dataset(a.input, net ? &*net : nullptr);
  const TraversalMatrix m = build_traversal_matrix(ds);
  save_matrix(a.output, m);
  out << "matrix " << m.rows() << " trajectories x " << m.cols() << " segments, " << m.total() << " traversals -> "
      << a.output << '\n';
  return kOk;
}

struct ProjectArgs {
  std::string input;
  std::string network;
  std::string kind = "trajectory";
  std::string output;
};

int do_project(const ProjectArgs& a, const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const NodeKind kind = node_kind_from_string(a.kind);
  std::optional<RoadNetwork> net;
  if (!a.network.empty()) net = load_network(a.network);
  if (kind == NodeKind::Trajectory && !net) throw DataError("trajectory projection needs --network for segment lengths");
  const auto m = load_traversals(a.input, net ? &*net : nullptr);
  const Projection p = kind == NodeKind::Trajectory ? project_trajectories(*m, *net) : project_segments(*m);
  for (const std::string& w : p.warnings) err << "warning: " << w << '\n';
  write_file(a.output, [&](std::ostream& o) { write_graph_csv(o, p.graph); });

  std::vector<std::int64_t> zero_ids;
  for (std::size_t v : p.zero_vector_nodes) zero_ids.push_back(p.graph.node_ids()[v]);
  json config{{"input", a.input}, {"network", a.network}, {"kind", a.kind}};
  write_json(a.output + ".json",
             json{{"provenance", provenance("project", args, std::move(config))},
                  {"kind", to_string(kind)},
                  {"nodes", to_json_array(p.graph.node_ids())},
                  {"edges", p.graph.edges().size()},
                  {"total_weight", p.graph.total_weight()},
                  {"zero_vector_nodes", zero_ids},
                  {"warnings", p.warnings}});
  out << to_string(kind) << " graph: " << p.graph.node_count() << " nodes, " << p.graph.edges().size() << " edges"
      << (p.warnings.empty() ? "" : ", " + std::to_string(p.warnings.size()) + " warnings") << " -> " << a.output
      << '\n';
  return kOk;
}

struct ClusterArgs {
  std::string input;
  std::string sidecar;
  std::size_t clusters = 0;
  bool refine = false;
  std::string output;
};

int do_cluster(const ClusterArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const std::string sidecar_path = a.sidecar.empty() ? a.input + ".json" : a.sidecar;
  const json sidecar = read_json(sidecar_path);
  if (!sidecar.contains("kind") || !sidecar.contains("nodes")) throw DataError(sidecar_path + " lacks kind or nodes");
  const NodeKind kind = node_kind_from_string(sidecar.at("kind").get<std::string>());
  auto nodes = sidecar.at("nodes").get<std::vector<std::int64_t>>();
  std::ifstream in(a.input);
  if (!in) throw DataError("cannot open " + a.input);
  const SimilarityGraph g = read_graph_csv(in, kind, std::move(nodes));

  const Dendrogram d = agglomerate(g);
  Partition p = a.clusters > 0 ? cut(d, a.clusters) : cut_best(d);
  if (a.refine) p = refine(g, p);
  const bool weighted = g.total_weight() > 0.0;
  const double q = weighted ? modularity(g, p) : 0.0;  // undefined without edge weight

  json merges = json::array();
  for (const Merge& m : d.merges) {
    merges.push_back({{"a", m.a}, {"b", m.b}, {"delta_q", m.delta_q}, {"q", m.q}, {"forced", m.forced}});
  }
  json config{{"input", a.input}, {"sidecar", sidecar_path}, {"cut", a.clusters > 0 ? json(a.clusters) : json("best-q")},
              {"refine", a.refine}};
  write_json(a.output, json{{"provenance", provenance("cluster", args, std::move(config))},
                            {"kind", to_string(kind)},
                            {"node_ids", to_json_array(g.node_ids())},
                            {"assignment", to_json_array(p.assignment())},
                            {"k", p.cluster_count()},
                            {"modularity", weighted ? json(q) : json(nullptr)},
                            {"dendrogram",
                             {{"node_count", d.node_count},
                              {"components", d.component_count()},
                              {"initial_q", weighted ? json(d.initial_q) : json(nullptr)},
                              {"merges", std::move(merges)}}}});
  out << to_string(kind) << " partition: k=" << p.cluster_count() << " Q=" << (weighted ? fmt(q) : std::string("n/a")) << " ("
      << (a.clusters > 0 ? std::to_string(a.clusters) + "-cluster cut" : std::string("best-Q cut"))
      << (a.refine ? ", refined" : "") << ") -> " << a.output << '\n';
  return kOk;
}

struct CoclusterArgs {
  std::string input;
  std::string network;
  SearchOptions options{.restarts = 10};
  std::string output;
};

json cost_json(const CostBreakdown& b) {
  return json{{"model_size", b.model_size},
              {"partition_prior", b.partition_prior},
              {"cell_prior", b.cell_prior},
              {"cluster_prior", b.cluster_prior},
              {"grid_likelihood", b.grid_likelihood},
              {"cluster_likelihood", b.cluster_likelihood},
              {"prior", b.prior()},
              {"likelihood", b.likelihood()},
              {"total", b.total()}};
}

int do_cocluster(const CoclusterArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  std::optional<RoadNetwork> net;
  if (!a.network.empty()) net = load_network(a.network);
  const auto m = load_traversals(a.input, net ? &*net : nullptr);
  const SearchResult result = vns_search(m, a.options);
  const CoClusterModel& model = result.model;
  model.audit();

  json runs = json::array();
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    runs.push_back({{"run", r},
                    {"cost", result.runs[r].cost},
                    {"k_trajectory", result.runs[r].trajectory_clusters},
                    {"k_segment", result.runs[r].segment_clusters}});
  }
  json config{{"input", a.input}, {"network", a.network}, {"restarts", a.options.restarts},
              {"seed", a.options.seed}, {"jobs", a.options.jobs}, {"max_passes", a.options.max_passes}};
  const CostBreakdown cost = model.cost_breakdown();
  write_json(a.output, json{{"provenance", provenance("cocluster", args, std::move(config))},
                            {"trajectories", m->rows()},
                            {"segments", m->cols()},
                            {"traversals", m->total()},
                            {"k_trajectory", model.cluster_count(Side::Trajectory)},
                            {"k_segment", model.cluster_count(Side::Segment)},
                            {"cost", cost.total()},
                            {"cost_breakdown", cost_json(cost)},
                            {"trajectory_ids", to_json_array(m->row_ids())},
                            {"trajectory_clusters", to_json_array(model.assignment(Side::Trajectory))},
                            {"segment_ids", to_json_array(m->col_ids())},
                            {"segment_clusters", to_json_array(model.assignment(Side::Segment))},
                            {"contingency", model.contingency()},
                            {"search", {{"best_run", result.best_run}, {"runs", std::move(runs)}}}});
  out << "co-clusters: " << model.cluster_count(Side::Trajectory) << " trajectory x "
      << model.cluster_count(Side::Segment) << " segment clusters, cost " << fmt(cost.total()) << " nats (best of "
      << result.runs.size() << " runs: run " << result.best_run << ") -> " << a.output << '\n';
  return kOk;
}

struct EvaluateArgs {
  std::string pred;
  std::string truth;
  double purity = 1.0;
  std::string output;
};

int do_evaluate(const EvaluateArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const json pred = read_json(a.pred);
  const auto [ids, clusters] = trajectory_listing(pred, a.pred);
  const TrajectoryDataset truth = load_dataset(a.truth);
  std::vector<std::int64_t> truth_ids;
  std::vector<int> labels;
  for (const Trajectory& t : truth.trajectories) {
    if (!t.label) throw DataError("trajectory " + std::to_string(t.id) + " has no class label");
    truth_ids.push_back(t.id);
    labels.push_back(*t.label);
  }
  if (ids.size() != truth_ids.size()) throw DataError("prediction and truth cover different trajectories");
  const std::vector<int> predicted = labels_for(truth_ids, ids, clusters, a.pred);

  const double ari = adjusted_rand_index(predicted, labels);
  const ContingencyReport r = confusion(predicted, labels);
  const std::size_t pure = r.pure_rows(a.purity);
  json config{{"pred", a.pred}, {"truth", a.truth}, {"purity_threshold", a.purity}};
  write_json(a.output, json{{"provenance", provenance("evaluate", args, std::move(config))},
                            {"ari", ari},
                            {"trajectories", r.total},
                            {"clusters", r.row_labels.size()},
                            {"classes", r.col_labels.size()},
                            {"purity_threshold", a.purity},
                            {"pure_clusters", pure},
                            {"confusion",
                             {{"cluster_labels", r.row_labels},
                              {"class_labels", r.col_labels},
                              {"counts", r.counts},
                              {"cluster_totals", r.row_totals},
                              {"class_totals", r.col_totals},
                              {"purity", r.purity}}}});
  out << "ARI=" << fmt(ari) << " over " << r.total << " trajectories; " << pure << "/" << r.row_labels.size()
      << " clusters pure -> " << a.output << '\n';
  return kOk;
}

struct ReportArgs {
  std::string model;
  std::string trajectory_partition;
  std::string segment_partition;
  std::string input;
  bool bits = false;
  std::string csv;
  std::string pgm;
  std::string output;
};

std::vector<int> dense(std::vector<int> labels) {
  const Partition p(labels);
  return {p.assignment().begin(), p.assignment().end()};
}

int do_report(const ReportArgs& a, const std::vector<std::string>& args, std::ostream& out) {
  const auto m = load_traversals(a.input);
  std::vector<int> rows, cols;
  if (!a.model.empty()) {
    if (!a.trajectory_partition.empty() || !a.segment_partition.empty()) {
      throw DataError("give either --model or the two partitions, not both");
    }
    const json model = read_json(a.model);
    const auto [tid, tcl] = trajectory_listing(model, a.model);
    const auto [sid, scl] = segment_listing(model, a.model);
    rows = dense(labels_for(m->row_ids(), tid, tcl, a.model));
    cols = dense(labels_for(m->col_ids(), sid, scl, a.model));
  } else {
    if (a.trajectory_partition.empty() || a.segment_partition.empty()) {
      throw DataError("report needs --model or both --trajectory-partition and --segment-partition");
    }
    const json tp = read_json(a.trajectory_partition);
    const json sp = read_json(a.segment_partition);
    const auto [tid, tcl] = trajectory_listing(tp, a.trajectory_partition);
    const auto [sid, scl] = segment_listing(sp, a.segment_partition);
    rows = dense(labels_for(m->row_ids(), tid, tcl, a.trajectory_partition));
    cols = dense(labels_for(m->col_ids(), sid, scl, a.segment_partition));
  }

  const CrossedMatrix crossed = crossed_matrix(*m, rows, cols);
  const MIReport mi = mutual_information(crossed.block_counts, a.bits);

  json cells = json::array();
  for (const MICell& c : mi.cells) {
    cells.push_back({{"trajectory_cluster", c.trajectory_cluster},
                     {"segment_cluster", c.segment_cluster},
                     {"traversals", c.count},
                     {"joint", c.joint},
                     {"trajectory_share", c.trajectory_share},
                     {"segment_share", c.segment_share},
                     {"expected", c.expected},
                     {"mi", c.mi}});
  }
  // Cluster member listings by id, in crossed-matrix order.
  auto members = [](const std::vector<std::size_t>& order, const std::vector<std::size_t>& bounds,
                    std::span<const std::int64_t> ids) {
    json listing = json::array();
    for (std::size_t c = 0; c + 1 < bounds.size(); ++c) {
      json group = json::array();
      for (std::size_t i = bounds[c]; i < bounds[c + 1]; ++i) group.push_back(ids[order[i]]);
      listing.push_back(std::move(group));
    }
    return listing;
  };

  if (!a.csv.empty()) {
    write_file(a.csv, [&](std::ostream& o) {
      o << "trajectory_cluster,segment_cluster,trajectories,segments,traversals,density,joint,expected,mi\n";
      for (const MICell& c : mi.cells) {
        const auto tc = static_cast<std::size_t>(c.trajectory_cluster);
        const auto sc = static_cast<std::size_t>(c.segment_cluster);
        o << c.trajectory_cluster << ',' << c.segment_cluster << ','
          << crossed.row_bounds[tc + 1] - crossed.row_bounds[tc] << ','
          << crossed.col_bounds[sc + 1] - crossed.col_bounds[sc] << ',' << c.count << ','
          << text::format_double(crossed.block_density[tc][sc]) << ',' << text::format_double(c.joint) << ','
          << text::format_double(c.expected) << ',' << text::format_double(c.mi) << '\n';
      }
    });
  }
  if (!a.pgm.empty()) {
    write_file(a.pgm, [&](std::ostream& o) { write_density_pgm(o, *m, crossed); });
  }

  json config{{"model", a.model}, {"trajectory_partition", a.trajectory_partition},
              {"segment_partition", a.segment_partition}, {"input", a.input}, {"bits", a.bits},
              {"csv", a.csv}, {"pgm", a.pgm}};
  write_json(a.output, json{{"provenance", provenance("report", args, std::move(config))},
                            {"unit", a.bits ? "bits" : "nats"},
                            {"mutual_information", mi.total},
                            {"trajectory_clusters", mi.trajectory_clusters},
                            {"segment_clusters", mi.segment_clusters},
                            {"cells", std::move(cells)},
                            {"trajectory_members", members(crossed.row_order, crossed.row_bounds, m->row_ids())},
                            {"segment_members", members(crossed.col_order, crossed.col_bounds, m->col_ids())},
                            {"crossed",
                             {{"row_bounds", crossed.row_bounds},
                              {"col_bounds", crossed.col_bounds},
                              {"block_counts", crossed.block_counts},
                              {"block_density", crossed.block_density}}}});
  out << "MI=" << fmt(mi.total) << ' ' << (a.bits ? "bits" : "nats") << " over " << mi.trajectory_clusters << " x "
      << mi.segment_clusters << " co-clusters -> " << a.output << '\n';
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Co-clustering of network-constrained trajectories", "trajcc"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  CityArgs ci;
  auto* city = app.add_subcommand("city", "Write a synthetic grid city road network");
  city->add_option("--rows", ci.cfg.rows, "Lattice rows")->capture_default_str()->check(CLI::PositiveNumber);
  city->add_option("--cols", ci.cfg.cols, "Lattice columns")->capture_default_str()->check(CLI::PositiveNumber);
  city->add_option("--spacing", ci.cfg.spacing, "Lattice spacing in meters")->capture_default_str();
  city->add_option("--jitter", ci.cfg.jitter, "Vertex jitter as a fraction of the spacing")->capture_default_str();
  city->add_option("--arterial-every", ci.cfg.arterial_every, "Arterial line period")->capture_default_str();
  city->add_option("--local-speed", ci.cfg.local_speed, "Local street speed (km/h)")->capture_default_str();
  city->add_option("--arterial-speed", ci.cfg.arterial_speed, "Arterial speed (km/h)")->capture_default_str();
  city->add_option("--seed", ci.cfg.seed, "Random seed")->capture_default_str();
  city->add_option("-o,--output", ci.output, "Network file to write")->required();

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate labeled trajectories on a road network");
  generate->add_option("--network", gen.network, "Road network file")->required()->check(CLI::ExistingFile);
  generate->add_option("--classes", gen.cfg.classes, "Number of trajectory classes")->capture_default_str();
  generate->add_option("--rows", gen.cfg.rows, "Zone grid rows")->capture_default_str();
  generate->add_option("--cols", gen.cfg.cols, "Zone grid columns")->capture_default_str();
  generate->add_option("--min-size", gen.cfg.min_size, "Smallest class size")->capture_default_str();
  generate->add_option("--max-size", gen.cfg.max_size, "Largest class size")->capture_default_str();
  generate->add_option("--seed", gen.cfg.seed, "Random seed")->capture_default_str();
  generate->add_option("--max-attempts", gen.cfg.max_attempts, "Draws per class before giving up")
      ->capture_default_str();
  generate->add_option("--zones", gen.zones, "Fixed zone pairs per class, e.g. 3:45,7:80");
  generate->add_option("-o,--output", gen.output, "Dataset CSV to write (plus <output>.meta.json)")->required();

  MatrixArgs mat;
  auto* matrix = app.add_subcommand("matrix", "Build the trajectory x segment traversal matrix");
  matrix->add_option("-i,--input", mat.input, "Trajectory dataset CSV")->required()->check(CLI::ExistingFile);
  matrix->add_option("--network", mat.network, "Road network to check segment ids against")
      ->check(CLI::ExistingFile);
  matrix->add_option("-o,--output", mat.output, "Matrix CSV to write")->required();

  ProjectArgs proj;
  auto* project = app.add_subcommand("project", "Project the bipartite graph onto trajectories or segments");
  project->add_option("-i,--input", proj.input, "Traversal matrix or dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  project->add_option("--kind", proj.kind, "trajectory or segment")
      ->capture_default_str()
      ->check(CLI::IsMember({"trajectory", "segment"}));
  project->add_option("--network", proj.network, "Road network (segment lengths; required for trajectory)")
      ->check(CLI::ExistingFile);
  project->add_option("-o,--output", proj.output, "Edge list CSV to write (plus <output>.json)")->required();

  ClusterArgs clu;
  auto* cluster = app.add_subcommand("cluster", "Modularity clustering of a projected graph");
  cluster->add_option("-i,--input", clu.input, "Edge list CSV")->required()->check(CLI::ExistingFile);
  cluster->add_option("--graph-meta", clu.sidecar, "Graph sidecar JSON (default <input>.json)")
      ->check(CLI::ExistingFile);
  cluster->add_option("--clusters", clu.clusters, "Cut the dendrogram at this many clusters (default: best Q)")
      ->check(CLI::PositiveNumber);
  cluster->add_flag("--refine", clu.refine, "Apply single-node moves after the cut");
  cluster->add_option("-o,--output", clu.output, "Partition JSON to write")->required();

  CoclusterArgs co;
  auto* cocluster = app.add_subcommand("cocluster", "Parameter-free co-clustering of trajectories and segments");
  cocluster->add_option("-i,--input", co.input, "Traversal matrix or dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  cocluster->add_option("--network", co.network, "Road network to check segment ids against")
      ->check(CLI::ExistingFile);
  cocluster->add_option("--restarts", co.options.restarts, "Random restarts after the finest start")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  cocluster->add_option("--seed", co.options.seed, "Random seed")->capture_default_str();
  cocluster->add_option("--jobs", co.options.jobs, "Parallel restarts")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cocluster->add_option("--max-passes", co.options.max_passes, "Post-optimization pass limit per run")
      ->check(CLI::NonNegativeNumber);
  cocluster->add_option("-o,--output", co.output, "Model JSON to write")->required();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Compare trajectory clusters with ground-truth classes");
  evaluate->add_option("--pred", ev.pred, "Model or trajectory partition JSON")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate->add_option("--truth", ev.truth, "Labeled trajectory dataset CSV")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--purity", ev.purity, "Majority share a cluster needs to count as pure")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("-o,--output", ev.output, "Evaluation JSON to write")->required();

  ReportArgs rep;
  auto* report = app.add_subcommand("report", "Mutual information and crossed matrix of a co-clustering");
  report->add_option("--model", rep.model, "Co-clustering model JSON")->check(CLI::ExistingFile);
  report->add_option("--trajectory-partition", rep.trajectory_partition, "Trajectory partition JSON")
      ->check(CLI::ExistingFile);
  report->add_option("--segment-partition", rep.segment_partition, "Segment partition JSON")
      ->check(CLI::ExistingFile);
  report->add_option("-i,--input", rep.input, "Traversal matrix or dataset CSV")
      ->required()
      ->check(CLI::ExistingFile);
  report->add_flag("--bits", rep.bits, "Report mutual information in bits instead of nats");
  report->add_option("--csv", rep.csv, "Per co-cluster table CSV to write");
  report->add_option("--pgm", rep.pgm, "Crossed matrix picture (PGM) to write");
  report->add_option("-o,--output", rep.output, "Report JSON to write")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (city->parsed()) return do_city(ci, out);
    if (generate->parsed()) return do_generate(gen, args, out);
    if (matrix->parsed()) return do_matrix(mat, out);
    if (project->parsed()) return do_project(proj, args, out, err);
    if (cluster->parsed()) return do_cluster(clu, args, out);
    if (cocluster->parsed()) return do_cocluster(co, args, out);
    if (evaluate->parsed()) return do_evaluate(ev, args, out);
    if (report->parsed()) return do_report(rep, args, out);
  } catch (const AuditError& e) {
    err << "error: internal consistency check failed: " << e.what() << '\n';
    return kInternalError;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsage;
}

}  // namespace trajcc::cli
