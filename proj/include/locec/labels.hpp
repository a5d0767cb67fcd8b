/// Relationship label sets and softmax class results.

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace locec {

/// Ordered, non-empty list of unique class names shared by training and
/// inference.
class LabelSet {
 public:
  /// Throws std::invalid_argument on an empty list, an empty name, a name
  /// containing whitespace or commas, or duplicates.
  explicit LabelSet(std::vector<std::string> names);

  /// family, colleague, schoolmate
  static LabelSet defaults();
  /// Parses a comma-separated list.
  static LabelSet parse(std::string_view csv);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;
  std::string joined() const;

  friend bool operator==(const LabelSet&, const LabelSet&) = default;

 private:
  std::vector<std::string> names_;
};

/// Softmax probability vector over a label set.
struct ClassResult {
  std::vector<double> probabilities;
  std::size_t label = 0;  // argmax, lowest index on ties
  friend bool operator==(const ClassResult&, const ClassResult&) = default;
};

/// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);
ClassResult make_class_result(std::vector<double> probabilities);
inline ClassResult class_result_from_logits(std::span<const double> logits) {
  return make_class_result(softmax(logits));
}

}  // namespace locec
