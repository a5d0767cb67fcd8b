#include "locec/graph_io.hpp"

#include <algorithm>
#include <optional>
#include <tuple>

#include "locec/errors.hpp"
#include "locec/text_io.hpp"

namespace locec {
namespace {

bool is_comment_or_blank(std::string_view line) {
  line = text::trim(line);
  return line.empty() || line.front() == '#';
}

/// Finds a "#<key>=<int>" header line in the file.
std::size_t read_dimension_header(const std::string& path, std::string_view key) {
  std::optional<std::size_t> dim;
  text::for_each_line(path, [&](std::string_view line, std::size_t number) {
    if (dim) return;
    line = text::trim(line);
    if (line.size() > key.size() + 1 && line.front() == '#' && line.substr(1, key.size()) == key &&
        line[key.size() + 1] == '=') {
      std::size_t value = 0;
      if (!text::parse_number(line.substr(key.size() + 2), value) || value == 0) {
        throw DataError(path, number, "invalid header, expected #" + std::string(key) + "=<positive int>");
      }
      dim = value;
    }
  });
  if (!dim) throw DataError(path + ": missing header #" + std::string(key) + "=<int>");
  return *dim;
}

ExternalId parse_id(std::string_view field, const std::string& path, std::size_t line) {
  ExternalId id = 0;
  if (!text::parse_number(field, id)) {
    throw DataError(path, line, "invalid node id '" + std::string(field) + "'");
  }
  return id;
}

/// Splits "a<TAB>b<TAB>rest" where the last field may itself be a
/// comma-separated list (which must not contain whitespace).
std::vector<std::string_view> fields_of(std::string_view line) { return text::split_ws(text::trim(line)); }

}  // namespace

Graph load_graph(const GraphPaths& paths, bool normalize_features) {
  const std::size_t feature_dim = read_dimension_header(paths.features, "|f|");
  const std::size_t interaction_dim = read_dimension_header(paths.interactions, "|I|");
  GraphBuilder builder(feature_dim, interaction_dim);

  text::for_each_line(paths.edges, [&](std::string_view line, std::size_t number) {
    if (is_comment_or_blank(line)) return;
    const auto f = fields_of(line);
    if (f.size() != 2) throw DataError(paths.edges, number, "expected 'u<TAB>v'");
    const auto a = parse_id(f[0], paths.edges, number);
    const auto b = parse_id(f[1], paths.edges, number);
    if (a == b) throw DataError(paths.edges, number, "self-loop on node " + std::to_string(a));
    builder.add_edge(a, b);
  });

  text::for_each_line(paths.features, [&](std::string_view line, std::size_t number) {
    if (is_comment_or_blank(line)) return;
    const auto f = fields_of(line);
    if (f.size() != 2) throw DataError(paths.features, number, "expected 'u<TAB>x_1,...,x_|f|'");
    const auto id = parse_id(f[0], paths.features, number);
    std::vector<double> values;
    for (const auto part : text::split(f[1], ',')) {
      double x = 0.0;
      if (!text::parse_number(part, x)) {
        throw DataError(paths.features, number, "invalid feature value '" + std::string(part) + "'");
      }
      values.push_back(x);
    }
    try {
      builder.set_features(id, std::move(values));
    } catch (const DataError& e) {
      throw DataError(paths.features, number, e.what());
    }
  });

  text::for_each_line(paths.interactions, [&](std::string_view line, std::size_t number) {
    if (is_comment_or_blank(line)) return;
    const auto f = fields_of(line);
    if (f.size() != 3) throw DataError(paths.interactions, number, "expected 'u<TAB>v<TAB>c_1,...,c_|I|'");
    const auto a = parse_id(f[0], paths.interactions, number);
    const auto b = parse_id(f[1], paths.interactions, number);
    std::vector<Count> counts;
    for (const auto part : text::split(f[2], ',')) {
      Count c = 0;
      if (!text::parse_number(part, c)) {
        throw DataError(paths.interactions, number, "invalid interaction count '" + std::string(part) + "'");
      }
      counts.push_back(c);
    }
    try {
      builder.set_interactions(a, b, std::move(counts));
    } catch (const DataError& e) {
      throw DataError(paths.interactions, number, e.what());
    }
  });

  return std::move(builder).build(normalize_features);
}

void save_graph(const Graph& g, const GraphPaths& paths) {
  {
    auto out = text::open_output(paths.edges);
    for (const auto& e : g.edges()) out << g.external_id(e.u) << '\t' << g.external_id(e.v) << '\n';
  }
  {
    auto out = text::open_output(paths.features);
    out << "#|f|=" << g.feature_dim() << '\n';
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
      const auto f = g.features(v);
      out << g.external_id(v) << '\t' << text::join_doubles({f.begin(), f.end()}) << '\n';
    }
  }
  {
    auto out = text::open_output(paths.interactions);
    out << "#|I|=" << g.interaction_dim() << '\n';
    for (EdgeId e = 0; e < g.num_edges(); ++e) {
      if (!g.has_interaction_record(e)) continue;
      const auto& edge = g.edge(e);
      out << g.external_id(edge.u) << '\t' << g.external_id(edge.v) << '\t';
      const auto counts = g.interactions(e);
      for (std::size_t j = 0; j < counts.size(); ++j) out << (j ? "," : "") << counts[j];
      out << '\n';
    }
  }
}

std::vector<LabeledEdge> read_edge_labels(const std::string& path) {
  std::vector<LabeledEdge> labels;
  text::for_each_line(path, [&](std::string_view line, std::size_t number) {
    if (is_comment_or_blank(line)) return;
    const auto f = fields_of(line);
    if (f.size() != 3) throw DataError(path, number, "expected 'u<TAB>v<TAB>label'");
    const auto a = parse_id(f[0], path, number);
    const auto b = parse_id(f[1], path, number);
    if (a == b) throw DataError(path, number, "self-loop on node " + std::to_string(a));
    labels.push_back({std::min(a, b), std::max(a, b), std::string(f[2])});
  });
  std::stable_sort(labels.begin(), labels.end(), [](const LabeledEdge& x, const LabeledEdge& y) {
    return std::tie(x.u, x.v) < std::tie(y.u, y.v);
  });
  std::vector<LabeledEdge> unique;
  for (auto& l : labels) {
    if (!unique.empty() && unique.back().u == l.u && unique.back().v == l.v) {
      if (unique.back().label != l.label) {
        throw DataError(path + ": conflicting labels for pair " + std::to_string(l.u) + "-" +
                        std::to_string(l.v));
      }
      continue;
    }
    unique.push_back(std::move(l));
  }
  return unique;
}

void write_edge_labels(const std::string& path, const std::vector<LabeledEdge>& labels) {
  auto out = text::open_output(path);
  for (const auto& l : labels) out << l.u << '\t' << l.v << '\t' << l.label << '\n';
}

}  // namespace locec
