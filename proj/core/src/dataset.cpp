#include "polyenc/dataset.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "polyenc/error.hpp"
#include "polyenc/wkt.hpp"

namespace polyenc {

using nlohmann::json;

void save_shape_dataset(const std::vector<ShapeSample>& samples, std::ostream& os) {
  for (const auto& s : samples) {
    json j{{"id", s.id}, {"label", s.label}, {"wkt", serialize_wkt(s.geom)}};
    os << j.dump() << '\n';
  }
}

void save_relation_dataset(const std::vector<RelationSample>& samples, std::ostream& os) {
  for (const auto& s : samples) {
    json j{{"id", s.id},
           {"relation", relation_name(s.relation)},
           {"subject_wkt", serialize_wkt(s.subject)},
           {"object_wkt", serialize_wkt(s.object)},
           {"sliver", s.sliver}};
    os << j.dump() << '\n';
  }
}

std::vector<ShapeSample> load_shape_dataset(std::istream& is) {
  std::vector<ShapeSample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      fail(Errc::parse, "dataset line " + std::to_string(lineno) + ": bad JSON");
    if (!j.contains("label") || !j.contains("wkt"))
      fail(Errc::parse, "dataset line " + std::to_string(lineno) + ": not a shape sample");
    ShapeSample s;
    s.id = j.value("id", "line-" + std::to_string(lineno));
    s.label = j["label"].get<int>();
    s.geom = parse_wkt(j["wkt"].get<std::string>());
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<RelationSample> load_relation_dataset(std::istream& is) {
  std::vector<RelationSample> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded())
      fail(Errc::parse, "dataset line " + std::to_string(lineno) + ": bad JSON");
    if (!j.contains("relation") || !j.contains("subject_wkt") || !j.contains("object_wkt"))
      fail(Errc::parse, "dataset line " + std::to_string(lineno) + ": not a relation sample");
    RelationSample s;
    s.id = j.value("id", "line-" + std::to_string(lineno));
    s.relation = relation_from_name(j["relation"].get<std::string>());
    s.subject = parse_wkt(j["subject_wkt"].get<std::string>());
    s.object = parse_wkt(j["object_wkt"].get<std::string>());
    s.sliver = j.value("sliver", false);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(Errc::io, "cannot write '" + path + "'");
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(Errc::io, "cannot read '" + path + "'");
  return is;
}

}  // namespace

void save_shape_dataset_file(const std::vector<ShapeSample>& samples, const std::string& path) {
  auto os = open_out(path);
  save_shape_dataset(samples, os);
}

void save_relation_dataset_file(const std::vector<RelationSample>& samples,
                                const std::string& path) {
  auto os = open_out(path);
  save_relation_dataset(samples, os);
}

std::vector<ShapeSample> load_shape_dataset_file(const std::string& path) {
  auto is = open_in(path);
  return load_shape_dataset(is);
}

std::vector<RelationSample> load_relation_dataset_file(const std::string& path) {
  auto is = open_in(path);
  return load_relation_dataset(is);
}

DatasetKind sniff_dataset_kind(const std::string& path) {
  auto is = open_in(path);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) fail(Errc::parse, "dataset '" + path + "': bad JSON first line");
    return j.contains("relation") ? DatasetKind::relations : DatasetKind::shapes;
  }
  fail(Errc::parse, "dataset '" + path + "' is empty");
}

}  // namespace polyenc
