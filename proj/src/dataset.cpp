#include "trajcc/dataset.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_set>

#include "trajcc/error.hpp"
#include "trajcc/text.hpp"

namespace trajcc {

namespace {
constexpr std::string_view kHeader = "trajectory_id,class,segments";
}

void write_dataset(std::ostream& out, const TrajectoryDataset& ds) {
  out << kHeader << '\n';
  for (const Trajectory& t : ds.trajectories) {
    out << t.id << ',';
    if (t.label) {
      out << *t.label;
    } else {
      out << '-';
    }
    out << ',';
    for (std::size_t i = 0; i < t.segments.size(); ++i) {
      if (i > 0) out << ';';
      out << t.segments[i];
    }
    out << '\n';
  }
}

void save_dataset(const std::string& path, const TrajectoryDataset& ds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset file " + path);
  write_dataset(out, ds);
}

TrajectoryDataset read_dataset(std::istream& in, const RoadNetwork* net) {
  TrajectoryDataset ds;
  std::unordered_set<TrajectoryId> seen;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = text::trim(line);
    if (view.empty()) continue;
    if (!header) {
      if (view != kHeader) throw ParseError(line_no, "expected header '" + std::string(kHeader) + "'");
      header = true;
      continue;
    }
    const auto fields = text::split(view, ',');
    if (fields.size() != 3) throw ParseError(line_no, "expected 3 comma-separated fields");
    Trajectory t;
    const auto id = text::parse_int(fields[0]);
    if (!id || *id < 0) throw ParseError(line_no, "bad trajectory id");
    if (!seen.insert(*id).second) throw ParseError(line_no, "duplicate trajectory id " + std::to_string(*id));
    t.id = *id;
    if (fields[1] != "-") {
      const auto label = text::parse_int(fields[1]);
      if (!label) throw ParseError(line_no, "bad class label");
      t.label = static_cast<int>(*label);
    }
    if (fields[2].empty()) throw ParseError(line_no, "empty segment sequence");
    for (std::string_view token : text::split(fields[2], ';')) {
      const auto seg = text::parse_int(token);
      if (!seg || *seg < 0) throw ParseError(line_no, "bad segment id '" + std::string(token) + "'");
      if (net != nullptr && !net->segment_index(*seg)) {
        throw ParseError(line_no, "segment id " + std::to_string(*seg) + " not in network");
      }
      t.segments.push_back(*seg);
    }
    ds.trajectories.push_back(std::move(t));
  }
  if (!header) throw ParseError(line_no, "missing header");
  return ds;
}

TrajectoryDataset load_dataset(const std::string& path, const RoadNetwork* net) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file " + path);
  return read_dataset(in, net);
}

void validate_paths(const TrajectoryDataset& ds, const RoadNetwork& net) {
  for (const Trajectory& t : ds.trajectories) {
    const std::string who = "trajectory " + std::to_string(t.id);
    if (t.segments.empty()) throw DataError(who + " is empty");
    const Segment* prev = nullptr;
    for (SegmentId id : t.segments) {
      const Segment* s = net.find_segment(id);
      if (s == nullptr) throw DataError(who + " uses unknown segment " + std::to_string(id));
      if (prev != nullptr && prev->to != s->from) {
        throw DataError(who + " is disconnected at segment " + std::to_string(id));
      }
      prev = s;
    }
  }
}

}  // namespace trajcc
