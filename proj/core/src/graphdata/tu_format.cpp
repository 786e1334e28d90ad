#include "pas/graphdata/tu_format.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "pas/error.hpp"

namespace pas {
namespace {

namespace fs = std::filesystem;

struct Line {
  std::size_t number;
  std::string text;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<Line> read_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open required file " + path.string());
  std::vector<Line> lines;
  std::string raw;
  std::size_t n = 0;
  while (std::getline(in, raw)) {
    ++n;
    std::string t = trim(raw);
    if (!t.empty()) lines.push_back({n, std::move(t)});
  }
  return lines;
}

[[noreturn]] void fail(const fs::path& path, std::size_t line, const std::string& what) {
  throw DataError(path.filename().string() + ":" + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_fields(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(s);
  while (std::getline(ss, cur, ',')) out.push_back(trim(cur));
  return out;
}

long parse_int(const fs::path& path, const Line& l, const std::string& field) {
  long v = 0;
  const char* b = field.data();
  const char* e = field.data() + field.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e) fail(path, l.number, "expected an integer, got '" + field + "'");
  return v;
}

double parse_real(const fs::path& path, const Line& l, const std::string& field) {
  try {
    std::size_t used = 0;
    double v = std::stod(field, &used);
    if (used != field.size()) throw std::invalid_argument(field);
    return v;
  } catch (const std::exception&) {
    fail(path, l.number, "expected a real number, got '" + field + "'");
  }
}

fs::path file_for(const fs::path& dir, const std::string& name, const char* suffix) {
  return dir / (name + suffix);
}

}  // namespace

Dataset load_tu_dataset(const fs::path& dir, const std::string& name) {
  const fs::path a_path = file_for(dir, name, "_A.txt");
  const fs::path ind_path = file_for(dir, name, "_graph_indicator.txt");
  const fs::path gl_path = file_for(dir, name, "_graph_labels.txt");
  const fs::path nl_path = file_for(dir, name, "_node_labels.txt");
  const fs::path na_path = file_for(dir, name, "_node_attributes.txt");
  for (const auto& p : {a_path, ind_path, gl_path}) {
    if (!fs::exists(p)) throw DataError("missing required file " + p.string());
  }

  // Graph membership of each node; ids must be 1..G, non-decreasing, no gaps.
  const auto ind_lines = read_lines(ind_path);
  std::vector<int> graph_of(ind_lines.size());
  long prev = 0;
  for (std::size_t i = 0; i < ind_lines.size(); ++i) {
    const long g = parse_int(ind_path, ind_lines[i], ind_lines[i].text);
    if (g < 1) fail(ind_path, ind_lines[i].number, "graph ids are 1-indexed");
    if (g < prev) fail(ind_path, ind_lines[i].number, "graph ids must be non-decreasing");
    if (g > prev + 1) fail(ind_path, ind_lines[i].number, "graph id gap: " + std::to_string(prev) + " -> " + std::to_string(g));
    prev = g;
    graph_of[i] = static_cast<int>(g - 1);
  }
  const int num_graphs = static_cast<int>(prev);
  if (num_graphs == 0) throw DataError(ind_path.filename().string() + ": no nodes");

  std::vector<Eigen::Index> first(static_cast<std::size_t>(num_graphs) + 1, 0);
  for (int g : graph_of) ++first[static_cast<std::size_t>(g) + 1];
  for (std::size_t g = 0; g < static_cast<std::size_t>(num_graphs); ++g) first[g + 1] += first[g];

  const auto gl_lines = read_lines(gl_path);
  if (static_cast<int>(gl_lines.size()) != num_graphs) {
    throw DataError(gl_path.filename().string() + ": " + std::to_string(gl_lines.size()) + " labels for " +
                    std::to_string(num_graphs) + " graphs");
  }
  std::vector<long> raw_labels;
  std::set<long> label_set;
  for (const auto& l : gl_lines) {
    raw_labels.push_back(parse_int(gl_path, l, l.text));
    label_set.insert(raw_labels.back());
  }
  std::map<long, int> label_index;
  for (long v : label_set) label_index.emplace(v, static_cast<int>(label_index.size()));

  // Optional node labels (one-hot) then attributes.
  std::vector<long> node_labels;
  std::map<long, int> node_label_index;
  if (fs::exists(nl_path)) {
    const auto lines = read_lines(nl_path);
    if (lines.size() != graph_of.size()) {
      throw DataError(nl_path.filename().string() + ": " + std::to_string(lines.size()) + " node labels for " +
                      std::to_string(graph_of.size()) + " nodes");
    }
    std::set<long> uniq;
    for (const auto& l : lines) {
      const auto fields = split_fields(l.text);
      node_labels.push_back(parse_int(nl_path, l, fields.at(0)));
      uniq.insert(node_labels.back());
    }
    for (long v : uniq) node_label_index.emplace(v, static_cast<int>(node_label_index.size()));
  }
  std::vector<std::vector<double>> attrs;
  std::size_t attr_dim = 0;
  if (fs::exists(na_path)) {
    const auto lines = read_lines(na_path);
    if (lines.size() != graph_of.size()) {
      throw DataError(na_path.filename().string() + ": " + std::to_string(lines.size()) + " attribute rows for " +
                      std::to_string(graph_of.size()) + " nodes");
    }
    for (const auto& l : lines) {
      std::vector<double> row;
      for (const auto& f : split_fields(l.text)) row.push_back(parse_real(na_path, l, f));
      if (attrs.empty()) attr_dim = row.size();
      if (row.size() != attr_dim) fail(na_path, l.number, "attribute count differs from the first row");
      attrs.push_back(std::move(row));
    }
  }
  const std::size_t onehot_dim = node_label_index.size();
  std::size_t feat_dim = onehot_dim + attr_dim;
  const bool constant_feature = feat_dim == 0;
  if (constant_feature) feat_dim = 1;

  Dataset ds;
  ds.name = name;
  ds.num_classes = static_cast<int>(label_index.size());
  ds.feature_dim = static_cast<Eigen::Index>(feat_dim);
  ds.graphs.resize(static_cast<std::size_t>(num_graphs));
  for (int g = 0; g < num_graphs; ++g) {
    const Eigen::Index n = first[static_cast<std::size_t>(g) + 1] - first[static_cast<std::size_t>(g)];
    Graph& gr = ds.graphs[static_cast<std::size_t>(g)];
    gr.adj = Matrix::Zero(n, n);
    gr.feat = Matrix::Zero(n, ds.feature_dim);
    gr.label = label_index.at(raw_labels[static_cast<std::size_t>(g)]);
  }
  for (std::size_t v = 0; v < graph_of.size(); ++v) {
    const auto g = static_cast<std::size_t>(graph_of[v]);
    const Eigen::Index local = static_cast<Eigen::Index>(v) - first[g];
    Matrix& f = ds.graphs[g].feat;
    if (constant_feature) {
      f(local, 0) = 1.0;
      continue;
    }
    if (onehot_dim > 0) f(local, node_label_index.at(node_labels[v])) = 1.0;
    for (std::size_t k = 0; k < attr_dim; ++k) {
      f(local, static_cast<Eigen::Index>(onehot_dim + k)) = attrs[v][k];
    }
  }

  for (const auto& l : read_lines(a_path)) {
    const auto fields = split_fields(l.text);
    if (fields.size() != 2) fail(a_path, l.number, "expected 'i, j'");
    const long i = parse_int(a_path, l, fields[0]);
    const long j = parse_int(a_path, l, fields[1]);
    const auto nodes = static_cast<long>(graph_of.size());
    if (i < 1 || j < 1 || i > nodes || j > nodes) fail(a_path, l.number, "node id out of range");
    const int gi = graph_of[static_cast<std::size_t>(i - 1)];
    const int gj = graph_of[static_cast<std::size_t>(j - 1)];
    if (gi != gj) {
      fail(a_path, l.number, "edge (" + std::to_string(i) + ", " + std::to_string(j) + ") crosses graph boundary");
    }
    if (i == j) continue;  // self loops dropped: adjacency diagonal is zero
    const auto off = first[static_cast<std::size_t>(gi)];
    Matrix& adj = ds.graphs[static_cast<std::size_t>(gi)].adj;
    adj(i - 1 - off, j - 1 - off) = 1.0;
    adj(j - 1 - off, i - 1 - off) = 1.0;
  }

  validate_dataset(ds);
  return ds;
}

void write_tu_dataset(const Dataset& ds, const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  auto open = [&](const char* suffix) {
    std::ofstream out(file_for(dir, name, suffix));
    if (!out) throw DataError("cannot write " + file_for(dir, name, suffix).string());
    return out;
  };
  std::ofstream a = open("_A.txt");
  std::ofstream ind = open("_graph_indicator.txt");
  std::ofstream gl = open("_graph_labels.txt");
  std::ofstream na = open("_node_attributes.txt");
  char buf[64];
  long offset = 0;
  for (std::size_t g = 0; g < ds.graphs.size(); ++g) {
    const Graph& gr = ds.graphs[g];
    const Eigen::Index n = gr.num_nodes();
    for (Eigen::Index i = 0; i < n; ++i) {
      ind << (g + 1) << '\n';
      for (Eigen::Index k = 0; k < gr.feat.cols(); ++k) {
        std::snprintf(buf, sizeof(buf), "%.17g", gr.feat(i, k));
        na << (k ? ", " : "") << buf;
      }
      na << '\n';
      for (Eigen::Index j = 0; j < n; ++j) {
        if (gr.adj(i, j) != 0.0) a << (offset + i + 1) << ", " << (offset + j + 1) << '\n';
      }
    }
    gl << gr.label << '\n';
    offset += n;
  }
}

}  // namespace pas
