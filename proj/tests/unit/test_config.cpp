#include <doctest.h>

#include "semfilter/config.hpp"
#include "semfilter/error.hpp"

using namespace semfilter;

TEST_CASE("defaults validate and survive a json round trip") {
  PipelineConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  const PipelineConfig back = pipeline_config_from_json(to_json(cfg));
  CHECK(back.tile_size == 224);
  CHECK(back.tile_num == 24);
  CHECK(back.logit_scale == 20.0);
  CHECK(back.sigma_one == 0.2);
  CHECK(back.sigma_max == 3.0);
  CHECK(back.kernel_size == 11);
  CHECK(back.context_window == 77);
}

TEST_CASE("partial json overrides only the given fields") {
  const auto cfg = pipeline_config_from_json({{"tile_num", 8}, {"use_scoring", false}});
  CHECK(cfg.tile_num == 8);
  CHECK_FALSE(cfg.use_scoring);
  CHECK(cfg.allow_overlap);
}

TEST_CASE("bad configs raise ConfigError naming the field") {
  CHECK_THROWS_AS(pipeline_config_from_json({{"tile_nmu", 8}}), ConfigError);
  CHECK_THROWS_AS(pipeline_config_from_json({{"tile_num", "many"}}), ConfigError);
  CHECK_THROWS_AS(pipeline_config_from_json(nlohmann::json::array()), ConfigError);

  PipelineConfig cfg;
  cfg.sigma_one = 4.0;
  try {
    cfg.validate();
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("sigma") != std::string::npos);
  }
  cfg = {};
  cfg.kernel_size = 10;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.tile_size = 222;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = {};
  cfg.tile_num = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
