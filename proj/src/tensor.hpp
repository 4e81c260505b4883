#pragma once

#include <cstdint>
#include <vector>

#include "rng.hpp"

namespace gdiff {

using Shape = std::vector<std::int64_t>;

// Dense row-major double tensor. Plain value type; shape product always
// equals data.size().
struct Tensor {
  Shape shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(Shape s, std::vector<double> d);

  static Tensor zeros(const Shape& s);
  static Tensor full(const Shape& s, double value);

  std::int64_t size() const { return static_cast<std::int64_t>(data.size()); }
  bool all_finite() const;
  bool same_shape(const Tensor& other) const { return shape == other.shape; }
};

std::int64_t shape_size(const Shape& s);

// Element count sanity plus finiteness; throws on violation.
void check_finite(const Tensor& t, const char* what);

Tensor sample_normal(RngStream& rng, const Shape& shape);
Tensor sample_gamma(RngStream& rng, double k, double theta, const Shape& shape);

}  // namespace gdiff
