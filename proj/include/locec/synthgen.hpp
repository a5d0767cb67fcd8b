/// Synthetic social graphs with planted family / workplace / school groups,
/// type-dependent interaction counts and zero-inflated sparsity.
///
/// Config file: one key=value per line, '#' comments. Keys:
///   n_users, seed, family_mean, colleague_mean, schoolmate_mean,
///   school_fraction, work_fraction, p_in, p_out, zero_fraction,
///   rates.family, rates.colleague, rates.schoolmate, rates.other
/// Rate values are comma-separated, one per interaction dimension.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "locec/graph.hpp"
#include "locec/graph_io.hpp"

namespace locec {

inline constexpr const char* kOtherLabel = "other";

struct GenConfig {
  std::size_t n_users = 5000;
  std::uint64_t seed = 1;
  double family_mean = 5.0;
  double colleague_mean = 15.0;
  double schoolmate_mean = 10.0;
  double school_fraction = 0.7;  // users attending one school
  double work_fraction = 0.8;    // working-age users with one workplace
  double p_in = 0.8;
  double p_out = 0.002;
  double zero_fraction = 0.6;  // target share of edges without interactions
  std::vector<double> rates_family{3.0, 2.0, 0.3, 0.1};
  std::vector<double> rates_colleague{0.8, 0.3, 1.5, 0.2};
  std::vector<double> rates_schoolmate{1.5, 0.8, 0.3, 1.5};
  std::vector<double> rates_other{0.3, 0.1, 0.2, 0.1};

  std::size_t interaction_dim() const { return rates_family.size(); }
  /// Throws std::invalid_argument when a value is out of range.
  void validate() const;
};

/// Parses the key=value format; unknown keys and bad values raise DataError.
GenConfig read_gen_config(const std::string& path);
GenConfig parse_gen_config(const std::string& text, const std::string& source = "<config>");
std::string format_gen_config(const GenConfig& cfg);

enum class GroupType { Family, Colleague, Schoolmate };
const char* group_label(GroupType t);

struct PlantedGroup {
  GroupType type;
  std::vector<ExternalId> members;  // ascending
};

struct SyntheticData {
  Graph graph;
  std::vector<LabeledEdge> truth;  // every edge, "other" for cross-group edges
  std::vector<PlantedGroup> groups;
  double zero_gate = 0.0;  // probability that an edge is forced silent
};

/// Deterministic given cfg.seed. Node ids are 0..n_users-1; features are
/// [age, gender, activity] before min-max normalisation.
SyntheticData generate(const GenConfig& cfg);

/// Writes edges.tsv, features.tsv, interactions.tsv, labels.tsv and
/// groups.tsv into dir.
void write_synthetic(const std::string& dir, const SyntheticData& data);

struct SyntheticSummary {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  double mean_degree = 0.0;
  std::size_t max_degree = 0;
  std::vector<std::size_t> degree_quantiles;  // 0, 25, 50, 75, 100 %
  std::vector<std::size_t> group_size_quantiles;
  double zero_interaction_fraction = 0.0;
  std::vector<std::pair<std::string, std::size_t>> label_counts;
};

SyntheticSummary summarize(const Graph& g, const std::vector<LabeledEdge>& truth,
                           const std::vector<PlantedGroup>& groups);
void print_summary(std::ostream& out, const SyntheticSummary& s);

/// Fraction of edges whose interaction counts are all zero.
double zero_interaction_fraction(const Graph& g);

}  // namespace locec
