#include "datasets.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace gdiff {
namespace {

constexpr double kPi = 3.14159265358979323846;

void mixture1d_row(RngStream& r, double* out) {
  const double center = (r.uniform() < 0.5) ? -1.0 : 1.0;
  out[0] = center + 0.1 * r.normal();
}

// Eight equal blobs on the unit circle. Offsets are redrawn beyond four
// standard deviations so every sample stays close to its ring.
void rings2d_row(RngStream& r, double* out) {
  const std::uint64_t j = r.uniform_int(8);
  const double angle = 2.0 * kPi * static_cast<double>(j) / 8.0;
  const double sigma = 0.05;
  const double cap2 = (4.0 * sigma) * (4.0 * sigma);
  double ox, oy;
  do {
    ox = sigma * r.normal();
    oy = sigma * r.normal();
  } while (ox * ox + oy * oy > cap2);
  out[0] = std::cos(angle) + ox;
  out[1] = std::sin(angle) + oy;
}

// One soft bump per image on an 8x8 grid: center uniform in [1.5, 5.5]^2 and
// width uniform in [0.7, 1.3], so the peak always lands strictly inside the
// grid and each image has a unique brightest pixel.
void blobs8x8_row(RngStream& r, double* out) {
  const double cx = 1.5 + 4.0 * r.uniform();
  const double cy = 1.5 + 4.0 * r.uniform();
  const double sigma = 0.7 + 0.6 * r.uniform();
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const double d2 = (i - cx) * (i - cx) + (j - cy) * (j - cy);
      out[i * 8 + j] = std::exp(-d2 * inv);
    }
  }
}

}  // namespace

DatasetKind dataset_kind_from_string(const std::string& name) {
  if (name == "mixture1d") return DatasetKind::kMixture1d;
  if (name == "rings2d") return DatasetKind::kRings2d;
  if (name == "blobs8x8") return DatasetKind::kBlobs8x8;
  throw std::invalid_argument("unknown dataset: " + name +
                              " (expected mixture1d, rings2d, or blobs8x8)");
}

std::string dataset_kind_to_string(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kMixture1d: return "mixture1d";
    case DatasetKind::kRings2d: return "rings2d";
    case DatasetKind::kBlobs8x8: return "blobs8x8";
  }
  throw std::logic_error("dataset_kind_to_string: bad enum");
}

std::int64_t dataset_dim(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kMixture1d: return 1;
    case DatasetKind::kRings2d: return 2;
    case DatasetKind::kBlobs8x8: return 64;
  }
  throw std::logic_error("dataset_dim: bad enum");
}

Tensor generate_raw(DatasetKind kind, std::int64_t n, const RngStream& rng) {
  if (n < 1) throw std::invalid_argument("generate_raw: n must be >= 1");
  const std::int64_t dim = dataset_dim(kind);
  Tensor x = Tensor::zeros({n, dim});
  for (std::int64_t i = 0; i < n; ++i) {
    RngStream r = rng.split(static_cast<std::uint64_t>(i));
    double* row = x.data.data() + i * dim;
    switch (kind) {
      case DatasetKind::kMixture1d: mixture1d_row(r, row); break;
      case DatasetKind::kRings2d: rings2d_row(r, row); break;
      case DatasetKind::kBlobs8x8: blobs8x8_row(r, row); break;
    }
  }
  return x;
}

void sort_rows_lexicographic(Tensor& x) {
  if (x.shape.size() != 2) throw std::invalid_argument("sort_rows_lexicographic: want [n, dim]");
  const std::int64_t n = x.shape[0], dim = x.shape[1];
  std::vector<std::int64_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const double* d = x.data.data();
  std::sort(order.begin(), order.end(), [&](std::int64_t a, std::int64_t b) {
    const double* ra = d + a * dim;
    const double* rb = d + b * dim;
    return std::lexicographical_compare(ra, ra + dim, rb, rb + dim);
  });
  std::vector<double> sorted(x.data.size());
  for (std::int64_t i = 0; i < n; ++i) {
    std::copy_n(d + order[static_cast<std::size_t>(i)] * dim, dim, sorted.begin() + i * dim);
  }
  x.data.swap(sorted);
}

void normalize_columns(Tensor& x, std::vector<double>& shift, std::vector<double>& scale) {
  if (x.shape.size() != 2) throw std::invalid_argument("normalize_columns: want [n, dim]");
  const std::int64_t n = x.shape[0], dim = x.shape[1];
  if (n < 2) throw std::invalid_argument("normalize_columns: need at least 2 rows");
  shift.assign(static_cast<std::size_t>(dim), 0.0);
  scale.assign(static_cast<std::size_t>(dim), 1.0);
  for (std::int64_t j = 0; j < dim; ++j) {
    double mean = 0.0;
    for (std::int64_t i = 0; i < n; ++i) mean += x.data[static_cast<std::size_t>(i * dim + j)];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::int64_t i = 0; i < n; ++i) {
      const double d = x.data[static_cast<std::size_t>(i * dim + j)] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    shift[static_cast<std::size_t>(j)] = mean;
    scale[static_cast<std::size_t>(j)] = (sd > 1e-12) ? sd : 1.0;
  }
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < dim; ++j) {
      double& v = x.data[static_cast<std::size_t>(i * dim + j)];
      v = (v - shift[static_cast<std::size_t>(j)]) / scale[static_cast<std::size_t>(j)];
    }
  }
}

Tensor denormalize(const Tensor& x, const std::vector<double>& shift,
                   const std::vector<double>& scale) {
  if (x.shape.size() != 2) throw std::invalid_argument("denormalize: want [n, dim]");
  const std::int64_t n = x.shape[0], dim = x.shape[1];
  if (shift.size() != static_cast<std::size_t>(dim) || scale.size() != static_cast<std::size_t>(dim)) {
    throw std::invalid_argument("denormalize: shift/scale length mismatch");
  }
  Tensor out = x;
  for (std::int64_t i = 0; i < n; ++i) {
    for (std::int64_t j = 0; j < dim; ++j) {
      double& v = out.data[static_cast<std::size_t>(i * dim + j)];
      v = v * scale[static_cast<std::size_t>(j)] + shift[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

Dataset make_dataset(DatasetKind kind, std::int64_t n, std::uint64_t seed) {
  Dataset ds;
  ds.name = dataset_kind_to_string(kind);
  RngStream root(seed);
  ds.data = generate_raw(kind, n, root);
  sort_rows_lexicographic(ds.data);
  normalize_columns(ds.data, ds.shift, ds.scale);
  return ds;
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::int64_t lineno = 0;
  std::int64_t dim = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t pos = 0;
        const double v = std::stod(cell, &pos);
        while (pos < cell.size() && std::isspace(static_cast<unsigned char>(cell[pos]))) ++pos;
        if (pos != cell.size()) throw std::invalid_argument("trailing characters");
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
        row.push_back(v);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad numeric cell '" + cell + "'");
      }
    }
    if (row.empty()) continue;
    if (dim < 0) dim = static_cast<std::int64_t>(row.size());
    if (static_cast<std::int64_t>(row.size()) != dim) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(dim) + " columns, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.size() < 2) throw std::runtime_error(path + ": need at least 2 data rows");
  Dataset ds;
  ds.name = "csv";
  ds.data = Tensor::zeros({static_cast<std::int64_t>(rows.size()), dim});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i].begin(), rows[i].end(), ds.data.data.begin() + static_cast<std::int64_t>(i) * dim);
  }
  sort_rows_lexicographic(ds.data);
  normalize_columns(ds.data, ds.shift, ds.scale);
  return ds;
}

}  // namespace gdiff
