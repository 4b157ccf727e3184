#include "semfilter/config.hpp"

#include <set>
#include <string>

#include "semfilter/error.hpp"

namespace semfilter {

void PipelineConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("invalid config field '" + field + "': " + why);
  };
  if (tile_size < 4 || tile_size % 4 != 0) fail("tile_size", "must be a positive multiple of 4");
  if (tile_num < 1) fail("tile_num", "must be >= 1");
  if (!(logit_scale > 0.0)) fail("logit_scale", "must be > 0");
  if (!(sigma_one > 0.0)) fail("sigma_one", "must be > 0");
  if (!(sigma_one < sigma_max)) fail("sigma_max", "must exceed sigma_one");
  if (kernel_size < 3 || kernel_size % 2 == 0) fail("kernel_size", "must be odd and >= 3");
  // Per-block reflection needs the radius to fit inside the smallest possible block.
  if ((kernel_size - 1) / 2 + 1 > tile_size / 4) fail("kernel_size", "radius exceeds tile_size/4 - 1");
  if (context_window < 2) fail("context_window", "must be >= 2");
  if (batch_size < 1) fail("batch_size", "must be >= 1");
}

PipelineConfig pipeline_config_from_json(const nlohmann::json& j, PipelineConfig cfg) {
  if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
  static const std::set<std::string> known = {"tile_size",     "tile_num",    "logit_scale",   "sigma_one",
                                              "sigma_max",     "kernel_size", "context_window", "batch_size",
                                              "use_scoring",   "allow_overlap", "preprocess_prompt"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError("unknown config field '" + key + "'");
  }
  auto take = [&](const char* key, auto& field) {
    if (!j.contains(key)) return;
    try {
      j.at(key).get_to(field);
    } catch (const nlohmann::json::exception&) {
      throw ConfigError(std::string("invalid config field '") + key + "': wrong type");
    }
  };
  take("tile_size", cfg.tile_size);
  take("tile_num", cfg.tile_num);
  take("logit_scale", cfg.logit_scale);
  take("sigma_one", cfg.sigma_one);
  take("sigma_max", cfg.sigma_max);
  take("kernel_size", cfg.kernel_size);
  take("context_window", cfg.context_window);
  take("batch_size", cfg.batch_size);
  take("use_scoring", cfg.use_scoring);
  take("allow_overlap", cfg.allow_overlap);
  take("preprocess_prompt", cfg.preprocess_prompt);
  return cfg;
}

nlohmann::json to_json(const PipelineConfig& cfg) {
  return {{"tile_size", cfg.tile_size},
          {"tile_num", cfg.tile_num},
          {"logit_scale", cfg.logit_scale},
          {"sigma_one", cfg.sigma_one},
          {"sigma_max", cfg.sigma_max},
          {"kernel_size", cfg.kernel_size},
          {"context_window", cfg.context_window},
          {"batch_size", cfg.batch_size},
          {"use_scoring", cfg.use_scoring},
          {"allow_overlap", cfg.allow_overlap},
          {"preprocess_prompt", cfg.preprocess_prompt}};
}

}  // namespace semfilter
