#include "locec/labels.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "locec/text_io.hpp"

namespace locec {

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.empty()) throw std::invalid_argument("label set must not be empty");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (n.empty() || n.find_first_of(" \t\n,") != std::string::npos) {
      throw std::invalid_argument("invalid label name '" + n + "'");
    }
    if (!seen.insert(n).second) throw std::invalid_argument("duplicate label '" + n + "'");
  }
}

LabelSet LabelSet::defaults() { return LabelSet({"family", "colleague", "schoolmate"}); }

LabelSet LabelSet::parse(std::string_view csv) {
  std::vector<std::string> names;
  for (const auto part : text::split(csv, ',')) names.emplace_back(text::trim(part));
  return LabelSet(std::move(names));
}

std::optional<std::size_t> LabelSet::index_of(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::string LabelSet::joined() const {
  std::string out;
  for (std::size_t i = 0; i < names_.size(); ++i) out += (i ? "," : "") + names_[i];
  return out;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double top = *std::max_element(p.begin(), p.end());
  double total = 0.0;
  for (auto& x : p) {
    x = std::exp(x - top);
    total += x;
  }
  for (auto& x : p) x /= total;
  return p;
}

ClassResult make_class_result(std::vector<double> probabilities) {
  ClassResult r;
  r.label = static_cast<std::size_t>(std::max_element(probabilities.begin(), probabilities.end()) -
                                     probabilities.begin());
  r.probabilities = std::move(probabilities);
  return r;
}

}  // namespace locec
