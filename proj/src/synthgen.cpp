#include "locec/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "locec/errors.hpp"
#include "locec/text_io.hpp"

namespace locec {

namespace {

constexpr std::uint32_t kNone = UINT32_MAX;

std::uint64_t pair_key(std::uint64_t a, std::uint64_t b) { return (std::min(a, b) << 32) | std::max(a, b); }

std::size_t group_size(double mean, std::mt19937_64& rng) {
  if (mean <= 2.0) return 2;
  std::poisson_distribution<std::size_t> extra(mean - 2.0);
  return 2 + extra(rng);
}

/// Cuts `users` into consecutive chunks; a trailing singleton joins the
/// previous chunk.
std::vector<std::vector<ExternalId>> chunk(const std::vector<ExternalId>& users, double mean, std::mt19937_64& rng) {
  std::vector<std::vector<ExternalId>> out;
  std::size_t pos = 0;
  while (pos < users.size()) {
    const std::size_t size = std::min(group_size(mean, rng), users.size() - pos);
    if (size < 2 && !out.empty()) {
      out.back().insert(out.back().end(), users.begin() + static_cast<std::ptrdiff_t>(pos), users.end());
      break;
    }
    out.emplace_back(users.begin() + static_cast<std::ptrdiff_t>(pos),
                     users.begin() + static_cast<std::ptrdiff_t>(pos + size));
    pos += size;
  }
  for (auto& g : out) std::sort(g.begin(), g.end());
  return out;
}

std::vector<double> parse_rates(std::string_view value, const std::string& source, std::size_t line) {
  std::vector<double> out;
  for (const auto part : text::split(value, ',')) {
    double x = 0;
    if (!text::parse_number(part, x)) throw DataError(source, line, "invalid rate '" + std::string(part) + "'");
    out.push_back(x);
  }
  return out;
}

std::string join(const std::vector<double>& v) { return text::join_doubles(v); }

}  // namespace

const char* group_label(GroupType t) {
  switch (t) {
    case GroupType::Family: return "family";
    case GroupType::Colleague: return "colleague";
    case GroupType::Schoolmate: return "schoolmate";
  }
  return "?";
}

void GenConfig::validate() const {
  auto prob = [](double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  };
  prob(school_fraction, "school_fraction");
  prob(work_fraction, "work_fraction");
  prob(p_in, "p_in");
  prob(p_out, "p_out");
  prob(zero_fraction, "zero_fraction");
  if (n_users < 2) throw std::invalid_argument("n_users must be at least 2");
  for (double m : {family_mean, colleague_mean, schoolmate_mean}) {
    if (!(m >= 2.0)) throw std::invalid_argument("group size means must be at least 2");
  }
  const std::size_t dims = rates_family.size();
  if (dims == 0) throw std::invalid_argument("at least one interaction dimension is required");
  for (const auto* r : {&rates_family, &rates_colleague, &rates_schoolmate, &rates_other}) {
    if (r->size() != dims) throw std::invalid_argument("rate vectors must have equal length");
    for (double x : *r) {
      if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("rates must be finite and non-negative");
    }
  }
  if (p_in == 0.0 && p_out == 0.0) throw std::invalid_argument("p_in and p_out are both 0: expected degree is 0");
}

GenConfig parse_gen_config(const std::string& content, const std::string& source) {
  GenConfig cfg;
  std::istringstream in(content);
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw DataError(source, number, "expected key=value");
    const std::string key(text::trim(line.substr(0, eq)));
    const auto value = text::trim(line.substr(eq + 1));
    auto number_of = [&](auto& out) {
      if (!text::parse_number(value, out)) throw DataError(source, number, "invalid value for " + key);
    };
    if (key == "n_users") number_of(cfg.n_users);
    else if (key == "seed") number_of(cfg.seed);
    else if (key == "family_mean") number_of(cfg.family_mean);
    else if (key == "colleague_mean") number_of(cfg.colleague_mean);
    else if (key == "schoolmate_mean") number_of(cfg.schoolmate_mean);
    else if (key == "school_fraction") number_of(cfg.school_fraction);
    else if (key == "work_fraction") number_of(cfg.work_fraction);
    else if (key == "p_in") number_of(cfg.p_in);
    else if (key == "p_out") number_of(cfg.p_out);
    else if (key == "zero_fraction") number_of(cfg.zero_fraction);
    else if (key == "rates.family") cfg.rates_family = parse_rates(value, source, number);
    else if (key == "rates.colleague") cfg.rates_colleague = parse_rates(value, source, number);
    else if (key == "rates.schoolmate") cfg.rates_schoolmate = parse_rates(value, source, number);
    else if (key == "rates.other") cfg.rates_other = parse_rates(value, source, number);
    else throw DataError(source, number, "unknown key '" + key + "'");
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(source + ": " + e.what());
  }
  return cfg;
}

GenConfig read_gen_config(const std::string& path) { return parse_gen_config(text::read_file(path), path); }

std::string format_gen_config(const GenConfig& cfg) {
  std::ostringstream out;
  out << "n_users=" << cfg.n_users << "\nseed=" << cfg.seed << "\nfamily_mean=" << text::format_double(cfg.family_mean)
      << "\ncolleague_mean=" << text::format_double(cfg.colleague_mean)
      << "\nschoolmate_mean=" << text::format_double(cfg.schoolmate_mean)
      << "\nschool_fraction=" << text::format_double(cfg.school_fraction)
      << "\nwork_fraction=" << text::format_double(cfg.work_fraction) << "\np_in=" << text::format_double(cfg.p_in)
      << "\np_out=" << text::format_double(cfg.p_out) << "\nzero_fraction=" << text::format_double(cfg.zero_fraction)
      << "\nrates.family=" << join(cfg.rates_family) << "\nrates.colleague=" << join(cfg.rates_colleague)
      << "\nrates.schoolmate=" << join(cfg.rates_schoolmate) << "\nrates.other=" << join(cfg.rates_other) << '\n';
  return out.str();
}

SyntheticData generate(const GenConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  const std::size_t n = cfg.n_users;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<ExternalId> users(n);
  for (std::size_t i = 0; i < n; ++i) users[i] = i;

  // families, with members spread over generations
  std::vector<double> age(n), gender(n), activity(n);
  std::vector<std::uint32_t> family_of(n, kNone), work_of(n, kNone), school_of(n, kNone);
  std::vector<PlantedGroup> groups;
  std::shuffle(users.begin(), users.end(), rng);
  std::uniform_real_distribution<double> base_age(35.0, 65.0);
  std::uniform_int_distribution<int> generation(-1, 1);
  std::normal_distribution<double> jitter(0.0, 4.0);
  for (auto& members : chunk(users, cfg.family_mean, rng)) {
    const double base = base_age(rng);
    for (auto u : members) {
      age[u] = std::clamp(base + 27.0 * generation(rng) + jitter(rng), 6.0, 95.0);
      family_of[u] = static_cast<std::uint32_t>(groups.size());
    }
    groups.push_back({GroupType::Family, std::move(members)});
  }
  for (std::size_t u = 0; u < n; ++u) {
    gender[u] = unit(rng) < 0.5 ? 0.0 : 1.0;
    activity[u] = unit(rng);
  }

  // workplaces among working-age users
  std::vector<ExternalId> workers;
  for (std::size_t u = 0; u < n; ++u) {
    if (age[u] >= 22.0 && age[u] <= 65.0 && unit(rng) < cfg.work_fraction) workers.push_back(u);
  }
  std::shuffle(workers.begin(), workers.end(), rng);
  for (auto& members : chunk(workers, cfg.colleague_mean, rng)) {
    for (auto u : members) work_of[u] = static_cast<std::uint32_t>(groups.size());
    groups.push_back({GroupType::Colleague, std::move(members)});
  }

  // schools group classmates of similar age
  std::vector<ExternalId> pupils;
  for (std::size_t u = 0; u < n; ++u) {
    if (unit(rng) < cfg.school_fraction) pupils.push_back(u);
  }
  std::stable_sort(pupils.begin(), pupils.end(), [&](auto a, auto b) { return age[a] < age[b]; });
  for (auto& members : chunk(pupils, cfg.schoolmate_mean, rng)) {
    for (auto u : members) school_of[u] = static_cast<std::uint32_t>(groups.size());
    groups.push_back({GroupType::Schoolmate, std::move(members)});
  }

  auto shared_type = [&](ExternalId a, ExternalId b) -> std::optional<GroupType> {
    if (family_of[a] == family_of[b]) return GroupType::Family;
    if (work_of[a] != kNone && work_of[a] == work_of[b]) return GroupType::Colleague;
    if (school_of[a] != kNone && school_of[a] == school_of[b]) return GroupType::Schoolmate;
    return std::nullopt;
  };

  std::unordered_set<std::uint64_t> edge_keys;
  std::bernoulli_distribution inside(cfg.p_in);
  for (const auto& g : groups) {
    for (std::size_t i = 0; i < g.members.size(); ++i) {
      for (std::size_t j = i + 1; j < g.members.size(); ++j) {
        if (inside(rng)) edge_keys.insert(pair_key(g.members[i], g.members[j]));
      }
    }
  }
  // cross-group pairs by geometric skipping over all pairs (w < v)
  if (cfg.p_out > 0.0) {
    const double log_q = std::log1p(-cfg.p_out);
    std::int64_t v = 1, w = -1;
    const auto nn = static_cast<std::int64_t>(n);
    while (v < nn) {
      const double r = unit(rng);
      w += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log_q));
      while (w >= v && v < nn) {
        w -= v;
        ++v;
      }
      if (v < nn && !shared_type(static_cast<ExternalId>(w), static_cast<ExternalId>(v))) {
        edge_keys.insert(pair_key(static_cast<ExternalId>(w), static_cast<ExternalId>(v)));
      }
    }
  }

  std::vector<std::uint64_t> keys(edge_keys.begin(), edge_keys.end());
  std::sort(keys.begin(), keys.end());

  SyntheticData out;
  std::vector<const std::vector<double>*> edge_rates;
  out.truth.reserve(keys.size());
  for (auto key : keys) {
    const ExternalId a = key >> 32;
    const ExternalId b = key & 0xffffffffu;
    const auto t = shared_type(a, b);
    out.truth.push_back({a, b, t ? group_label(*t) : kOtherLabel});
    edge_rates.push_back(!t                            ? &cfg.rates_other
                         : *t == GroupType::Family     ? &cfg.rates_family
                         : *t == GroupType::Colleague  ? &cfg.rates_colleague
                                                       : &cfg.rates_schoolmate);
  }

  // gate chosen so that the expected share of silent edges hits the target
  double p0 = 0.0;
  for (const auto* r : edge_rates) {
    double total = 0.0;
    for (double x : *r) total += x;
    p0 += std::exp(-total);
  }
  p0 = keys.empty() ? 0.0 : p0 / static_cast<double>(keys.size());
  out.zero_gate = p0 >= 1.0 ? 0.0 : std::clamp((cfg.zero_fraction - p0) / (1.0 - p0), 0.0, 1.0);

  GraphBuilder builder(3, cfg.interaction_dim());
  for (std::size_t u = 0; u < n; ++u) {
    builder.add_node(u);
    builder.set_features(u, {age[u], gender[u], activity[u]});
  }
  std::bernoulli_distribution silent(out.zero_gate);
  for (std::size_t e = 0; e < keys.size(); ++e) {
    const auto& [a, b, label] = out.truth[e];
    builder.add_edge(a, b);
    if (silent(rng)) continue;
    std::vector<Count> counts;
    bool any = false;
    for (double rate : *edge_rates[e]) {
      Count c = 0;
      if (rate > 0.0) c = std::poisson_distribution<Count>(rate)(rng);
      any = any || c > 0;
      counts.push_back(c);
    }
    if (any) builder.set_interactions(a, b, std::move(counts));
  }
  out.graph = std::move(builder).build(true);
  out.groups = std::move(groups);
  return out;
}

void write_synthetic(const std::string& dir, const SyntheticData& data) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path d(dir);
  save_graph(data.graph, {(d / "edges.tsv").string(), (d / "features.tsv").string(),
                          (d / "interactions.tsv").string()});
  write_edge_labels((d / "labels.tsv").string(), data.truth);
  auto out = text::open_output((d / "groups.tsv").string());
  for (std::size_t i = 0; i < data.groups.size(); ++i) {
    out << i << '\t' << group_label(data.groups[i].type) << '\t';
    const auto& m = data.groups[i].members;
    for (std::size_t j = 0; j < m.size(); ++j) out << (j ? "," : "") << m[j];
    out << '\n';
  }
  if (!out) throw DataError("failed writing groups file in " + dir);
}

double zero_interaction_fraction(const Graph& g) {
  if (g.num_edges() == 0) return 0.0;
  std::size_t zero = 0;
  for (EdgeId e = 0; e < g.num_edges(); ++e) {
    const auto c = g.interactions(e);
    zero += std::all_of(c.begin(), c.end(), [](Count x) { return x == 0; });
  }
  return static_cast<double>(zero) / static_cast<double>(g.num_edges());
}

namespace {

std::vector<std::size_t> quantiles(std::vector<std::size_t> v) {
  if (v.empty()) return std::vector<std::size_t>(5, 0);
  std::sort(v.begin(), v.end());
  std::vector<std::size_t> q;
  for (int p : {0, 25, 50, 75, 100}) q.push_back(v[(v.size() - 1) * static_cast<std::size_t>(p) / 100]);
  return q;
}

}  // namespace

SyntheticSummary summarize(const Graph& g, const std::vector<LabeledEdge>& truth,
                           const std::vector<PlantedGroup>& groups) {
  SyntheticSummary s;
  s.nodes = g.num_nodes();
  s.edges = g.num_edges();
  std::vector<std::size_t> degrees;
  for (NodeId v = 0; v < g.num_nodes(); ++v) degrees.push_back(g.degree(v));
  s.mean_degree = s.nodes ? 2.0 * static_cast<double>(s.edges) / static_cast<double>(s.nodes) : 0.0;
  s.max_degree = degrees.empty() ? 0 : *std::max_element(degrees.begin(), degrees.end());
  s.degree_quantiles = quantiles(degrees);
  std::vector<std::size_t> sizes;
  for (const auto& grp : groups) sizes.push_back(grp.members.size());
  s.group_size_quantiles = quantiles(sizes);
  s.zero_interaction_fraction = zero_interaction_fraction(g);
  std::map<std::string, std::size_t> counts;
  for (const auto& e : truth) ++counts[e.label];
  s.label_counts.assign(counts.begin(), counts.end());
  return s;
}

void print_summary(std::ostream& out, const SyntheticSummary& s) {
  auto list = [&](const std::vector<std::size_t>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? " " : "") << v[i];
  };
  out << "nodes\t" << s.nodes << "\nedges\t" << s.edges << "\nmean_degree\t" << s.mean_degree << "\nmax_degree\t"
      << s.max_degree << "\ndegree_quantiles(0,25,50,75,100)\t";
  list(s.degree_quantiles);
  out << "\ngroup_size_quantiles(0,25,50,75,100)\t";
  list(s.group_size_quantiles);
  out << "\nzero_interaction_fraction\t" << s.zero_interaction_fraction << '\n';
  for (const auto& [label, count] : s.label_counts) out << "label." << label << '\t' << count << '\n';
}

}  // namespace locec
