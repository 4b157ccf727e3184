#pragma once

#include <json.hpp>

namespace semfilter {

/// Prefilter hyperparameters. Defaults are the values used for the reported results.
struct PipelineConfig {
  int tile_size = 224;
  int tile_num = 24;
  double logit_scale = 20.0;
  double sigma_one = 0.2;   // sigma at score 1
  double sigma_max = 3.0;   // sigma at score 0
  int kernel_size = 11;
  int context_window = 77;
  int batch_size = 8;       // tiles per encoder call

  bool use_scoring = true;        // false: every tile scores 1 ("w/o TinyCLIP")
  bool allow_overlap = true;      // false: stride is always tile_size ("NoOverlap")
  bool preprocess_prompt = true;  // false: raw prompt goes to the text encoder ("w/o PP")

  /// Throws ConfigError naming the first offending field.
  void validate() const;
};

/// Reads any subset of the fields above; unknown keys are rejected.
PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig base = {});
nlohmann::json to_json(const PipelineConfig& cfg);

}  // namespace semfilter
