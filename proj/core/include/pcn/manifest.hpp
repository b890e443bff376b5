#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pcn/experiment.hpp"

namespace pcn {

inline constexpr const char* kArtifactVersion = "pcn 0.1.0";

// Everything needed to rerun a training job bit-exactly.
struct RunManifest {
  ExperimentConfig config;
  std::vector<std::pair<std::string, std::uint32_t>> data_digests;  // crc32
  std::vector<std::size_t> training_rows;  // MNIST train-file indices trained on
  std::string stop_reason;
  int epochs = 0;
  std::string artifact_version = kArtifactVersion;
  // Wall-clock stamps. Kept out of the checkpoint so that identical runs
  // produce identical checkpoint bytes.
  std::string started_at;
  std::string finished_at;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
// Fields absent from `j` keep their current values in `c`.
void merge_config(ExperimentConfig& c, const nlohmann::json& j);

nlohmann::json manifest_to_json(const RunManifest& m, bool with_timestamps);
RunManifest manifest_from_json(const nlohmann::json& j);

// Manifest text embedded in checkpoints (no timestamps).
std::string checkpoint_manifest_text(const RunManifest& m);
RunManifest parse_manifest_text(const std::string& text);

std::string utc_timestamp();

}  // namespace pcn
