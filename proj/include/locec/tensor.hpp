/// Named dense parameter tensors.

#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace locec {

struct Tensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::string n, std::vector<std::size_t> s)
      : name(std::move(n)), shape(std::move(s)), data(element_count(shape), 0.0) {}

  std::size_t size() const { return data.size(); }

  static std::size_t element_count(const std::vector<std::size_t>& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  }

  friend bool operator==(const Tensor&, const Tensor&) = default;
};

using TensorList = std::vector<Tensor>;

/// Zero tensors with the same names and shapes.
inline TensorList zeros_like(const TensorList& ts) {
  TensorList out;
  out.reserve(ts.size());
  for (const auto& t : ts) out.emplace_back(t.name, t.shape);
  return out;
}

}  // namespace locec
