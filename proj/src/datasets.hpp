#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rng.hpp"
#include "tensor.hpp"

namespace gdiff {

// Built-in toy datasets. All generators draw sample i from rng.split(i), so
// the set of rows depends only on the seed, not on generation order; rows are
// then sorted into a canonical lexicographic order. Training shuffles are
// keyed separately, so two runs over the same data agree even if the source
// rows arrived permuted.
enum class DatasetKind { kMixture1d, kRings2d, kBlobs8x8 };

DatasetKind dataset_kind_from_string(const std::string& name);
std::string dataset_kind_to_string(DatasetKind kind);
std::int64_t dataset_dim(DatasetKind kind);

struct Dataset {
  std::string name;
  Tensor data;  // [n, dim], normalized per dimension
  std::vector<double> shift, scale;  // raw = normalized * scale + shift
};

// Raw (unnormalized) samples.
Tensor generate_raw(DatasetKind kind, std::int64_t n, const RngStream& rng);

// Generate, sort rows, and normalize each dimension to mean 0, variance 1.
Dataset make_dataset(DatasetKind kind, std::int64_t n, std::uint64_t seed);

// Numeric CSV (one row per sample, comma separated, optional blank lines),
// sorted and normalized the same way. Parse errors carry 1-based line numbers.
Dataset load_dataset_csv(const std::string& path);

void sort_rows_lexicographic(Tensor& x);

// Computes shift/scale from x and rewrites it in place. Dimensions with
// near-zero spread keep scale 1 so the transform stays invertible.
void normalize_columns(Tensor& x, std::vector<double>& shift, std::vector<double>& scale);

// Maps normalized samples back to raw space: x*scale + shift, per column.
Tensor denormalize(const Tensor& x, const std::vector<double>& shift,
                   const std::vector<double>& scale);

}  // namespace gdiff
