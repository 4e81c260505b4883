#pragma once

#include <string>

#include <json.hpp>

namespace gdiff {

// Command implementations behind the public API. Each consumes a JSON config
// object, writes its artifacts under out_dir (created if missing), and
// records the fully resolved config plus result fields in
// out_dir/manifest.json. Outputs carry no timestamps, so a rerun with the
// same config produces byte-identical files.
//
// Errors: std::invalid_argument for bad config values, IoError for file
// problems, NumericError for numeric breakdown, CheckFailed when a
// verification run finishes with failing checks (the report is still
// written first).

void cmd_schedule(const nlohmann::json& config, const std::string& out_dir);
void cmd_train(const nlohmann::json& config, const std::string& out_dir);
void cmd_sample(const nlohmann::json& config, const std::string& out_dir);
void cmd_verify(const nlohmann::json& config, const std::string& out_dir);
void cmd_fit_noise(const nlohmann::json& config, const std::string& out_dir);

}  // namespace gdiff
