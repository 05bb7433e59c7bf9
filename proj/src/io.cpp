#include "ugp/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "ugp/error.hpp"
#include "ugp/stats.hpp"

namespace ugp {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", x);
  return buf;
}

namespace {

std::ifstream open_input(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::MissingFile, path.string());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

[[noreturn]] void parse_fail(const fs::path& file, std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, file.filename().string() + ":" + std::to_string(line) + ": " + what);
}

json read_json(const fs::path& path) {
  std::ifstream in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.filename().string() + ": " + e.what());
  }
}

// Splits on tabs; fields are views into `line`.
std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return fields;
}

template <typename T>
bool parse_field(std::string_view text, T& out) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

template <typename T>
T meta_field(const json& meta, const char* key) {
  if (!meta.contains(key)) throw Error(ErrorCode::ParseError, std::string("meta.json: missing '") + key + "'");
  try {
    return meta.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ParseError, std::string("meta.json: bad '") + key + "'");
  }
}

EdgeList read_edges(const fs::path& path, NodeId n) {
  std::ifstream in = open_input(path);
  EdgeList edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    Edge e;
    if (f.size() != 2 || !parse_field(f[0], e.u) || !parse_field(f[1], e.v)) parse_fail(path, lineno, "expected 'u<TAB>v'");
    if (e.u < 0 || e.v >= n || e.u >= n || e.v < 0) parse_fail(path, lineno, "node index out of range");
    if (e.u == e.v) parse_fail(path, lineno, "self-loop");
    if (e.u > e.v) parse_fail(path, lineno, "edge not in canonical u < v form");
    if (!edges.empty() && !(edges.back() < e)) parse_fail(path, lineno, "edges not sorted or duplicated");
    edges.push_back(e);
  }
  return edges;
}

DenseMatrix read_features(const fs::path& path, NodeId n, Eigen::Index d) {
  std::ifstream in = open_input(path);
  DenseMatrix x(n, d);
  std::string line;
  std::size_t lineno = 0;
  NodeId row = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty() && d > 0) continue;
    if (row >= n) parse_fail(path, lineno, "more feature rows than nodes");
    const auto f = d == 0 ? std::vector<std::string_view>{} : split_tabs(line);
    if (static_cast<Eigen::Index>(f.size()) != d) {
      throw Error(ErrorCode::DimensionMismatch, path.filename().string() + ":" + std::to_string(lineno) + ": " +
                                                    std::to_string(f.size()) + " columns, expected " + std::to_string(d));
    }
    for (Eigen::Index k = 0; k < d; ++k) {
      double value = 0.0;
      if (!parse_field(f[k], value) || !std::isfinite(value)) {
        parse_fail(path, lineno, "bad feature value '" + std::string(f[k]) + "'");
      }
      x(row, k) = value;
    }
    ++row;
  }
  if (row != n) {
    throw Error(ErrorCode::DimensionMismatch, "features.tsv has " + std::to_string(row) + " rows, expected " + std::to_string(n));
  }
  return x;
}

std::vector<int> read_labels(const fs::path& path, NodeId n, int num_classes) {
  std::ifstream in = open_input(path);
  std::vector<int> labels;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    int y = 0;
    if (!parse_field(std::string_view(line), y)) parse_fail(path, lineno, "expected an integer class id");
    if (y < 0 || y >= num_classes) parse_fail(path, lineno, "label outside [0, num_classes)");
    labels.push_back(y);
  }
  if (static_cast<NodeId>(labels.size()) != n) {
    throw Error(ErrorCode::DimensionMismatch, "labels.tsv has " + std::to_string(labels.size()) + " rows, expected " + std::to_string(n));
  }
  return labels;
}

std::vector<NodeId> split_part(const json& split, const char* key) {
  if (!split.contains(key)) throw Error(ErrorCode::ParseError, std::string("split.json: missing '") + key + "'");
  try {
    auto nodes = split.at(key).get<std::vector<NodeId>>();
    std::sort(nodes.begin(), nodes.end());
    return nodes;
  } catch (const json::exception&) {
    throw Error(ErrorCode::ParseError, std::string("split.json: bad '") + key + "'");
  }
}

json edges_json(const EdgeList& edges) {
  json a = json::array();
  for (const Edge& e : edges) a.push_back({e.u, e.v});
  return a;
}

EdgeList edges_from_json(const json& a) {
  EdgeList out;
  for (const auto& pair : a) out.push_back({pair.at(0).get<NodeId>(), pair.at(1).get<NodeId>()});
  return out;
}

}  // namespace

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::MissingFile, dir.string() + " is not a directory");
  const json meta = read_json(dir / "meta.json");
  if (meta_field<int>(meta, "format_version") != kDatasetFormatVersion) {
    throw Error(ErrorCode::ParseError, "meta.json: unsupported format_version");
  }
  Dataset d;
  d.name = meta_field<std::string>(meta, "name");
  const auto n = meta_field<NodeId>(meta, "num_nodes");
  const auto num_features = meta_field<Eigen::Index>(meta, "num_features");
  d.num_classes = meta_field<int>(meta, "num_classes");
  if (n < 1 || num_features < 0 || d.num_classes < 1) throw Error(ErrorCode::ParseError, "meta.json: non-positive sizes");

  d.graph = Graph::build(n, read_edges(dir / "edges.tsv", n));
  d.features = FeatureMatrix(read_features(dir / "features.tsv", n, num_features));
  d.labels = read_labels(dir / "labels.tsv", n, d.num_classes);
  const json split = read_json(dir / "split.json");
  d.split = {split_part(split, "train"), split_part(split, "val"), split_part(split, "test")};
  validate(d);
  return d;
}

void save_dataset(const Dataset& d, const fs::path& dir) {
  validate(d);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

  json meta = {{"name", d.name},
               {"num_nodes", d.num_nodes()},
               {"num_features", d.features.cols()},
               {"num_classes", d.num_classes},
               {"format_version", kDatasetFormatVersion}};
  open_output(dir / "meta.json") << meta.dump(2) << '\n';

  {
    std::ofstream out = open_output(dir / "edges.tsv");
    for (const Edge& e : d.graph.edges()) out << e.u << '\t' << e.v << '\n';
  }
  {
    std::ofstream out = open_output(dir / "features.tsv");
    std::string line;
    for (Eigen::Index i = 0; i < d.features.rows(); ++i) {
      line.clear();
      for (Eigen::Index k = 0; k < d.features.cols(); ++k) {
        if (k) line += '\t';
        line += format_double(d.features.values()(i, k));
      }
      out << line << '\n';
    }
  }
  {
    std::ofstream out = open_output(dir / "labels.tsv");
    for (int y : d.labels) out << y << '\n';
  }
  json split = {{"train", d.split.train}, {"val", d.split.val}, {"test", d.split.test}};
  std::ofstream out = open_output(dir / "split.json");
  out << split.dump() << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write failed in " + dir.string());
}

void save_sidecar(const PerturbationSidecar& s, const fs::path& path) {
  json j = {{"method", s.method},
            {"rate", s.rate},
            {"seed", s.seed},
            {"injected", edges_json(s.injected)},
            {"removed", edges_json(s.removed)}};
  open_output(path) << j.dump(2) << '\n';
}

PerturbationSidecar load_sidecar(const fs::path& path) {
  const json j = read_json(path);
  try {
    PerturbationSidecar s;
    s.method = j.at("method").get<std::string>();
    s.rate = j.at("rate").get<double>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.injected = edges_from_json(j.at("injected"));
    s.removed = edges_from_json(j.at("removed"));
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.filename().string() + ": " + e.what());
  }
}

json report_to_json(const PurifyReport& r, bool include_timings) {
  json iterations = json::array();
  for (const auto& rec : r.iterations) {
    json it = {{"iteration", rec.iteration},
               {"deleted", edges_json(rec.deleted)},
               {"edges_after", rec.edges_after},
               {"val_accuracy", rec.val_accuracy ? json(*rec.val_accuracy) : json(nullptr)}};
    if (include_timings) it["wall_time_ms"] = rec.wall_time_ms;
    iterations.push_back(std::move(it));
  }
  const std::int64_t final_edges = r.iterations.empty() ? r.initial_edges : r.iterations.back().edges_after;
  return {{"initial_edges", r.initial_edges},
          {"final_edges", final_edges},
          {"stopping_reason", to_string(r.stopping_reason)},
          {"iterations", std::move(iterations)}};
}

std::string ResultRow::key() const {
  return dataset + ',' + attack + ',' + format_double(rate) + ',' + scorer + ',' + judge + ',' + filter + ',' +
         (residual ? "1" : "0") + ',' + std::to_string(seed) + ',' + phase;
}

std::string format_row(const ResultRow& r) {
  return r.key() + ',' + format_double(r.accuracy) + ',' + std::to_string(r.edges_deleted);
}

ResultRow parse_row(const std::string& line) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) f.push_back(field);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  if (f.size() != 11) throw Error(ErrorCode::ParseError, "results row has " + std::to_string(f.size()) + " fields");
  ResultRow r;
  r.dataset = f[0];
  r.attack = f[1];
  r.scorer = f[3];
  r.judge = f[4];
  r.filter = f[5];
  r.phase = f[8];
  if (!parse_field(std::string_view(f[2]), r.rate) || (f[6] != "0" && f[6] != "1") ||
      !parse_field(std::string_view(f[7]), r.seed) || !parse_field(std::string_view(f[9]), r.accuracy) ||
      !parse_field(std::string_view(f[10]), r.edges_deleted)) {
    throw Error(ErrorCode::ParseError, "bad results row '" + line + "'");
  }
  r.residual = f[6] == "1";
  return r;
}

std::vector<ResultRow> read_results(const fs::path& path) {
  std::vector<ResultRow> rows;
  if (!fs::exists(path)) return rows;
  std::ifstream in = open_input(path);
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    strip_cr(line);
    if (header) {
      if (line != kResultsHeader) throw Error(ErrorCode::ParseError, path.string() + ": unexpected header");
      header = false;
      continue;
    }
    if (!line.empty()) rows.push_back(parse_row(line));
  }
  return rows;
}

fs::path aggregate_path(const fs::path& results) {
  return results.parent_path() / (results.stem().string() + "_aggregate.csv");
}

void write_results(const std::vector<ResultRow>& rows, const fs::path& path) {
  for (const auto& r : rows) {
    for (const std::string* s : {&r.dataset, &r.attack, &r.scorer, &r.judge, &r.filter, &r.phase}) {
      if (s->find_first_of(",\n") != std::string::npos) throw Error(ErrorCode::IoError, "field contains a separator: " + *s);
    }
  }
  {
    std::ofstream out = open_output(path);
    out << kResultsHeader << '\n';
    for (const auto& r : rows) out << format_row(r) << '\n';
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
  }

  // Group by everything except the seed, in order of first appearance.
  std::vector<std::string> order;
  std::map<std::string, std::vector<const ResultRow*>> groups;
  for (const auto& r : rows) {
    const std::string group = r.dataset + ',' + r.attack + ',' + format_double(r.rate) + ',' + r.scorer + ',' +
                              r.judge + ',' + r.filter + ',' + (r.residual ? "1" : "0") + ',' + r.phase;
    auto [it, fresh] = groups.try_emplace(group);
    if (fresh) order.push_back(group);
    it->second.push_back(&r);
  }
  std::ofstream out = open_output(aggregate_path(path));
  out << kAggregateHeader << '\n';
  for (const auto& group : order) {
    std::vector<double> acc, deleted;
    for (const ResultRow* r : groups[group]) {
      acc.push_back(r->accuracy);
      deleted.push_back(static_cast<double>(r->edges_deleted));
    }
    out << group << ',' << acc.size() << ',' << format_double(stats::mean(acc)) << ','
        << format_double(stats::standard_error(acc)) << ',' << format_double(stats::mean(deleted)) << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + aggregate_path(path).string());
}

}  // namespace ugp
