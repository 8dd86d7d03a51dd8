#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "json.hpp"

namespace logsieve {

// Training and filtering hyperparameters. Field names match the config file
// keys, the CLI flags and the model header.
struct Config {
  double alpha = 0.65;              // LCS match fraction
  double beta = 0.7;                // column mode fraction for constants
  std::size_t shingle_n = 2;
  std::size_t num_permutations = 100;
  double jaccard_threshold = 0.75;  // LSH target similarity
  std::uint64_t gamma = 250;        // frequency filter, absolute count
  double coverage_fraction = 0.98;
  double file_presence_fraction = 0.70;
  std::size_t max_iterations = 10;
  std::uint64_t seed = 1;

  // Throws UsageError naming the first invalid field.
  void validate() const;

  bool operator==(const Config&) const = default;
};

nlohmann::json to_json(const Config& config);
// Unknown keys are rejected; missing keys keep the values already in `base`.
Config config_from_json(const nlohmann::json& j, Config base = {});
Config load_config_file(const std::string& path, Config base = {});

}  // namespace logsieve
