// SPDX-License-Identifier: Apache-2.0
#include "atkse/bundle.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "atkse/errors.hpp"

namespace atkse {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ifstream open_input(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

json read_json(const fs::path& path) {
  auto in = open_input(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

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

std::string_view strip_cr(std::string_view s) {
  if (!s.empty() && s.back() == '\r') s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view text, const fs::path& file, std::size_t line_no) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  if (!text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw IoError(file.string() + ":" + std::to_string(line_no) + ": cannot parse '" +
                  std::string(text) + "'");
  }
  return value;
}

void check_node(long long id, int n, const fs::path& file, std::size_t line_no) {
  if (id < 0 || id >= n) {
    throw InvalidArgument(file.string() + ":" + std::to_string(line_no) + ": node id " +
                          std::to_string(id) + " out of range");
  }
}

std::string format_real(double value) {
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  (void)ec;
  return std::string(buf.data(), ptr);
}

std::vector<NodeId> read_ids(const json& doc, const char* key, const fs::path& file) {
  if (!doc.contains(key) || !doc[key].is_array()) {
    throw IoError(file.string() + ": missing array '" + key + "'");
  }
  std::vector<NodeId> ids;
  for (const auto& v : doc[key]) {
    if (!v.is_number_integer()) throw IoError(file.string() + ": non-integer id in '" + key + "'");
    ids.push_back(v.get<NodeId>());
  }
  return ids;
}

}  // namespace

Graph load_graph_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("bundle directory not found: " + dir.string());
  const json meta = read_json(dir / "meta.json");
  int n = 0;
  int f = 0;
  int c = 0;
  try {
    n = meta.at("num_nodes").get<int>();
    f = meta.at("num_features").get<int>();
    c = meta.at("num_classes").get<int>();
  } catch (const json::exception& e) {
    throw IoError((dir / "meta.json").string() + ": " + e.what());
  }
  if (n < 1 || f < 0 || c < 1) throw IoError((dir / "meta.json").string() + ": invalid dimensions");

  Graph g;
  g.num_classes = c;
  g.adjacency = Matrix::Zero(n, n);
  Matrix seen = Matrix::Constant(n, n, -1.0);

  {
    const fs::path file = dir / "edges.tsv";
    auto in = open_input(file);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string_view line = strip_cr(raw);
      if (line.empty()) continue;
      const auto fields = split_tabs(line);
      if (fields.size() != 2 && fields.size() != 3) {
        throw IoError(file.string() + ":" + std::to_string(line_no) + ": expected u<TAB>v");
      }
      const auto u = parse_number<long long>(fields[0], file, line_no);
      const auto v = parse_number<long long>(fields[1], file, line_no);
      check_node(u, n, file, line_no);
      check_node(v, n, file, line_no);
      if (u == v) {
        throw InvalidArgument(file.string() + ":" + std::to_string(line_no) + ": self-loop (" +
                              std::to_string(u) + "," + std::to_string(v) + ") rejected");
      }
      const double w = fields.size() == 3 ? parse_number<double>(fields[2], file, line_no) : 1.0;
      if (!(w >= 0.0 && w <= 1.0)) {
        throw InvalidArgument(file.string() + ":" + std::to_string(line_no) + ": weight outside [0,1]");
      }
      const auto a = static_cast<Eigen::Index>(std::min(u, v));
      const auto b = static_cast<Eigen::Index>(std::max(u, v));
      if (seen(a, b) >= 0.0 && seen(a, b) != w) {
        throw InvalidArgument(file.string() + ":" + std::to_string(line_no) + ": edge (" +
                              std::to_string(a) + "," + std::to_string(b) +
                              ") listed twice with conflicting weights");
      }
      seen(a, b) = w;
      g.adjacency(a, b) = w;
      g.adjacency(b, a) = w;
    }
  }

  {
    const fs::path file = dir / "features.tsv";
    auto in = open_input(file);
    g.features = Matrix::Zero(n, f);
    std::string raw;
    std::size_t line_no = 0;
    int row = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string_view line = strip_cr(raw);
      if (line.empty() && f > 0) continue;
      if (row >= n) throw IoError(file.string() + ": more rows than nodes");
      if (f > 0) {
        const auto fields = split_tabs(line);
        if (static_cast<int>(fields.size()) != f) {
          throw IoError(file.string() + ":" + std::to_string(line_no) + ": expected " +
                        std::to_string(f) + " columns");
        }
        for (int j = 0; j < f; ++j) g.features(row, j) = parse_number<double>(fields[static_cast<std::size_t>(j)], file, line_no);
      }
      ++row;
    }
    if (row != n && f > 0) throw IoError(file.string() + ": expected " + std::to_string(n) + " rows");
  }

  {
    const fs::path file = dir / "labels.tsv";
    auto in = open_input(file);
    g.labels.assign(static_cast<std::size_t>(n), -1);
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const std::string_view line = strip_cr(raw);
      if (line.empty()) continue;
      const auto fields = split_tabs(line);
      if (fields.size() != 2) throw IoError(file.string() + ":" + std::to_string(line_no) + ": expected id<TAB>class");
      const auto id = parse_number<long long>(fields[0], file, line_no);
      const auto y = parse_number<long long>(fields[1], file, line_no);
      check_node(id, n, file, line_no);
      if (y < 0 || y >= c) {
        throw InvalidArgument(file.string() + ":" + std::to_string(line_no) + ": label " +
                              std::to_string(y) + " outside [0," + std::to_string(c) + ")");
      }
      g.labels[static_cast<std::size_t>(id)] = static_cast<int>(y);
    }
    for (int i = 0; i < n; ++i) {
      if (g.labels[static_cast<std::size_t>(i)] < 0) {
        throw IoError(file.string() + ": node " + std::to_string(i) + " has no label");
      }
    }
  }

  {
    const fs::path file = dir / "split.json";
    const json split = read_json(file);
    g.split.train = read_ids(split, "train", file);
    g.split.test = read_ids(split, "test", file);
  }

  g.validate();
  return g;
}

void save_graph_bundle(const Graph& graph, const fs::path& dir) {
  graph.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const int n = graph.num_nodes();
  {
    json meta = {{"num_nodes", n}, {"num_features", graph.num_features()}, {"num_classes", graph.num_classes}};
    auto out = open_output(dir / "meta.json");
    out << meta.dump(2) << '\n';
  }
  {
    std::ostringstream buf;
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        const double w = graph.adjacency(u, v);
        if (w == 0.0) continue;
        buf << u << '\t' << v;
        if (w != 1.0) buf << '\t' << format_real(w);
        buf << '\n';
      }
    }
    auto out = open_output(dir / "edges.tsv");
    out << buf.str();
  }
  {
    std::string text;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < graph.num_features(); ++j) {
        if (j) text += '\t';
        text += format_real(graph.features(i, j));
      }
      text += '\n';
    }
    auto out = open_output(dir / "features.tsv");
    out << text;
  }
  {
    std::ostringstream buf;
    for (int i = 0; i < n; ++i) buf << i << '\t' << graph.labels[static_cast<std::size_t>(i)] << '\n';
    auto out = open_output(dir / "labels.tsv");
    out << buf.str();
  }
  {
    json split = {{"train", graph.split.train}, {"test", graph.split.test}};
    auto out = open_output(dir / "split.json");
    out << split.dump() << '\n';
  }
}

}  // namespace atkse
