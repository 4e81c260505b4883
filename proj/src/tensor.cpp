#include "tensor.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "errors.hpp"

namespace gdiff {

std::int64_t shape_size(const Shape& s) {
  std::int64_t n = 1;
  for (auto d : s) {
    if (d < 0) throw std::invalid_argument("shape dimensions must be non-negative");
    n *= d;
  }
  return n;
}

Tensor::Tensor(Shape s, std::vector<double> d) : shape(std::move(s)), data(std::move(d)) {
  if (shape_size(shape) != static_cast<std::int64_t>(data.size()))
    throw std::invalid_argument("tensor data length does not match shape");
}

Tensor Tensor::zeros(const Shape& s) {
  return Tensor(s, std::vector<double>(static_cast<std::size_t>(shape_size(s)), 0.0));
}

Tensor Tensor::full(const Shape& s, double value) {
  return Tensor(s, std::vector<double>(static_cast<std::size_t>(shape_size(s)), value));
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

void check_finite(const Tensor& t, const char* what) {
  if (!t.all_finite()) throw NumericError(std::string(what) + ": non-finite tensor entries");
}

Tensor sample_normal(RngStream& rng, const Shape& shape) {
  Tensor out = Tensor::zeros(shape);
  for (auto& v : out.data) v = rng.normal();
  return out;
}

Tensor sample_gamma(RngStream& rng, double k, double theta, const Shape& shape) {
  Tensor out = Tensor::zeros(shape);
  for (auto& v : out.data) v = rng.gamma(k, theta);
  return out;
}

}  // namespace gdiff
