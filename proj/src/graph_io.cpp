#include "fairgdiff/graph_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <unordered_map>

#include "fairgdiff/error.hpp"

namespace fairgdiff {

using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  auto e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

}  // namespace

AttributedGraph load_graph(const std::filesystem::path& node_table,
                           const std::filesystem::path& edge_list,
                           const NodeSchema& schema, LoadStats* stats) {
  std::ifstream nodes(node_table);
  if (!nodes) throw data_error("cannot open node table: " + node_table.string());
  std::string header_line;
  if (!std::getline(nodes, header_line))
    throw data_error("node table is empty: " + node_table.string());
  const auto header = split_csv_line(header_line);

  auto column_index = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == name) return static_cast<int>(i);
    return -1;
  };
  const int id_col = column_index(schema.id_column);
  if (id_col < 0)
    throw config_error("schema error: id column '" + schema.id_column +
                       "' not found in node table header");
  const int sens_col = column_index(schema.sensitive_column);
  if (sens_col < 0)
    throw config_error("schema error: sensitive column '" +
                       schema.sensitive_column + "' not found");
  int label_col = -1;
  if (schema.label_column) {
    label_col = column_index(*schema.label_column);
    if (label_col < 0)
      throw config_error("schema error: label column '" + *schema.label_column +
                         "' not found");
  }

  std::vector<int> feature_cols;
  if (!schema.feature_columns.empty()) {
    for (const auto& name : schema.feature_columns) {
      int c = column_index(name);
      if (c < 0)
        throw config_error("schema error: feature column '" + name +
                           "' not found");
      feature_cols.push_back(c);
    }
  } else {
    for (int c = 0; c < static_cast<int>(header.size()); ++c)
      if (c != id_col && c != sens_col && c != label_col)
        feature_cols.push_back(c);
  }

  std::unordered_map<std::string, int> id_of;
  std::vector<std::vector<double>> feats;
  std::vector<int> sens;
  std::vector<int> labs;
  std::string line;
  int line_no = 1;
  while (std::getline(nodes, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw data_error("node table line " + std::to_string(line_no) +
                       ": expected " + std::to_string(header.size()) +
                       " columns, got " + std::to_string(cells.size()));
    const std::string raw_id = trim(cells[id_col]);
    if (id_of.count(raw_id))
      throw data_error("node table line " + std::to_string(line_no) +
                       ": duplicate node id '" + raw_id + "'");
    id_of[raw_id] = static_cast<int>(id_of.size());

    const std::string raw_sens = trim(cells[sens_col]);
    int s;
    if (schema.sensitive_positive_value) {
      s = (raw_sens == *schema.sensitive_positive_value) ? 1 : 0;
    } else {
      double v;
      if (!parse_double(raw_sens, v) || (v != 0.0 && v != 1.0))
        throw data_error("validation error at node table line " +
                         std::to_string(line_no) + ": sensitive value '" +
                         raw_sens + "' is not in {0,1}");
      s = static_cast<int>(v);
    }
    sens.push_back(s);

    if (label_col >= 0) {
      double v;
      if (!parse_double(trim(cells[label_col]), v) || (v != 0.0 && v != 1.0))
        throw data_error("validation error at node table line " +
                         std::to_string(line_no) + ": label value '" +
                         trim(cells[label_col]) + "' is not in {0,1}");
      labs.push_back(static_cast<int>(v));
    }

    std::vector<double> row;
    row.reserve(feature_cols.size());
    for (int c : feature_cols) {
      double v;
      if (!parse_double(cells[c], v))
        throw data_error("node table line " + std::to_string(line_no) +
                         ": feature column '" + trim(header[c]) +
                         "' value '" + trim(cells[c]) + "' is not numeric");
      row.push_back(v);
    }
    feats.push_back(std::move(row));
  }

  const int n = static_cast<int>(id_of.size());
  if (n == 0) throw data_error("node table has no data rows");

  std::ifstream edges_in(edge_list);
  if (!edges_in) throw data_error("cannot open edge list: " + edge_list.string());
  std::set<std::pair<int, int>> edge_set;
  LoadStats local{};
  std::string eline;
  int eline_no = 0;
  while (std::getline(edges_in, eline)) {
    ++eline_no;
    std::string cleaned = eline;
    std::replace(cleaned.begin(), cleaned.end(), ',', ' ');
    std::istringstream is(cleaned);
    std::string a, b;
    if (!(is >> a)) continue;  // blank line
    if (!(is >> b))
      throw data_error("ingestion error at edge list line " +
                       std::to_string(eline_no) + ": '" + eline +
                       "' does not contain two ids");
    auto ia = id_of.find(a);
    auto ib = id_of.find(b);
    if (ia == id_of.end() || ib == id_of.end())
      throw data_error("ingestion error at edge list line " +
                       std::to_string(eline_no) + ": '" + eline +
                       "' references an unknown node id");
    int i = ia->second, j = ib->second;
    if (i == j) {
      ++local.dropped_self_loops;
      continue;
    }
    if (i > j) std::swap(i, j);
    if (!edge_set.insert({i, j}).second) ++local.deduplicated_edges;
  }

  Eigen::MatrixXd X(n, static_cast<int>(feature_cols.size()));
  for (int i = 0; i < n; ++i)
    for (std::size_t j = 0; j < feature_cols.size(); ++j) X(i, j) = feats[i][j];
  Eigen::VectorXi s(n);
  for (int i = 0; i < n; ++i) s[i] = sens[i];
  std::optional<Eigen::VectorXi> y;
  if (label_col >= 0) {
    Eigen::VectorXi yy(n);
    for (int i = 0; i < n; ++i) yy[i] = labs[i];
    y = yy;
  }
  std::vector<std::pair<int, int>> edge_vec(edge_set.begin(), edge_set.end());
  auto g = AttributedGraph::from_edges(n, edge_vec, std::move(X), std::move(s),
                                       std::move(y),
                                       node_table.stem().string());
  if (stats) *stats = local;
  return g;
}

void save_graph(const AttributedGraph& graph, const std::filesystem::path& path) {
  json doc;
  doc["schema_version"] = 1;
  doc["name"] = graph.name;
  doc["n"] = graph.n;
  json edges = json::array();
  for (auto [i, j] : graph.edges()) edges.push_back(json::array({i, j}));
  doc["edges"] = std::move(edges);
  json feats = json::array();
  for (int i = 0; i < graph.features.rows(); ++i) {
    json row = json::array();
    for (int j = 0; j < graph.features.cols(); ++j)
      row.push_back(graph.features(i, j));
    feats.push_back(std::move(row));
  }
  doc["features"] = std::move(feats);
  json sens = json::array();
  for (int i = 0; i < graph.n; ++i) sens.push_back(graph.sensitive[i]);
  doc["sensitive"] = std::move(sens);
  if (graph.labels) {
    json labs = json::array();
    for (int i = 0; i < graph.n; ++i) labs.push_back((*graph.labels)[i]);
    doc["labels"] = std::move(labs);
  } else {
    doc["labels"] = nullptr;
  }
  std::ofstream out(path);
  if (!out) throw data_error("cannot write graph file: " + path.string());
  out << doc.dump(2) << "\n";
}

AttributedGraph load_graph(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw data_error("cannot open graph file: " + json_path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw data_error("graph file " + json_path.string() +
                     " is not valid JSON: " + e.what());
  }
  if (!doc.contains("schema_version") || doc["schema_version"] != 1)
    throw data_error("graph file " + json_path.string() +
                     ": unsupported or missing schema_version");
  const int n = doc.at("n").get<int>();
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : doc.at("edges"))
    edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  const auto& jf = doc.at("features");
  const int f = jf.empty() ? 0 : static_cast<int>(jf[0].size());
  Eigen::MatrixXd X(n, f);
  if (static_cast<int>(jf.size()) != n)
    throw data_error("graph file: features row count != n");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < f; ++j) X(i, j) = jf[i][j].get<double>();
  Eigen::VectorXi s(n);
  const auto& js = doc.at("sensitive");
  if (static_cast<int>(js.size()) != n)
    throw data_error("graph file: sensitive length != n");
  for (int i = 0; i < n; ++i) s[i] = js[i].get<int>();
  std::optional<Eigen::VectorXi> y;
  if (!doc.at("labels").is_null()) {
    Eigen::VectorXi yy(n);
    const auto& jy = doc["labels"];
    if (static_cast<int>(jy.size()) != n)
      throw data_error("graph file: labels length != n");
    for (int i = 0; i < n; ++i) yy[i] = jy[i].get<int>();
    y = yy;
  }
  return AttributedGraph::from_edges(n, edges, std::move(X), std::move(s),
                                     std::move(y),
                                     doc.value("name", json_path.stem().string()));
}

}  // namespace fairgdiff
