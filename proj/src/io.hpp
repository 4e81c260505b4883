#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "mlp.hpp"
#include "training.hpp"

namespace gdiff {

// All writers go through a ".tmp" sibling plus rename, so partially written
// files never appear under the final name.
void atomic_write_text(const std::string& path, const std::string& content);
void atomic_write_bytes(const std::string& path, const std::vector<unsigned char>& bytes);
std::string read_text_file(const std::string& path);

// %.17g: round-trips doubles and is byte-stable across runs.
std::string format_double(double v);

std::string loss_history_csv(const std::vector<TrainRecord>& records);

// One row per sample, one column per dimension.
std::string samples_csv(const std::vector<double>& data, std::int64_t n, std::int64_t dim);

// Checkpoint: one JSON header line, then param_count little-endian float64s.
struct Checkpoint {
  nlohmann::json header;
  std::vector<double> params;
};

void save_checkpoint(const std::string& path, const nlohmann::json& header,
                     const std::vector<double>& params);
Checkpoint load_checkpoint(const std::string& path);

void ensure_dir(const std::string& path);

// manifest.json: resolved config, library version, and result fields. No
// timestamps, so reruns are byte-identical.
void write_manifest(const std::string& dir, const nlohmann::json& manifest);

struct SvgSeries {
  std::string name;
  std::string color;
  std::vector<double> x, y;
};

std::string svg_line_plot(const std::string& title, const std::vector<SvgSeries>& series);

}  // namespace gdiff
