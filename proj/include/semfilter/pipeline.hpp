#pragma once

#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "semfilter/config.hpp"
#include "semfilter/embedder.hpp"
#include "semfilter/image.hpp"
#include "semfilter/prefilter.hpp"
#include "semfilter/prompt.hpp"
#include "semfilter/scorer.hpp"
#include "semfilter/tiler.hpp"

namespace semfilter {

struct PrefilterResult {
  Image canvas;    // input resized to a multiple of the tile size
  Image filtered;  // same size as canvas; this is what gets encoded
  TileGrid grid;
  Eigen::VectorXd tile_scores;  // empty when scoring is disabled
  ScoreGrid scores;
  SigmaGrid sigmas;
  std::string text;  // prompt as given to the text encoder
};

/// Prompt-guided prefilter: resize, tile, embed, score, aggregate, map to sigma, smooth.
class Prefilter {
public:
  /// `backend` may be null only when config.use_scoring is false.
  Prefilter(PipelineConfig config, std::shared_ptr<const EmbeddingBackend> backend,
            const PhraseBlacklist& blacklist = PhraseBlacklist::defaults(),
            const Lexicon& lexicon = Lexicon::builtin());

  /// Throws ConfigError for an empty prompt while scoring is enabled.
  PrefilterResult run(const Image& img, std::string_view prompt) const;

  /// Text that would reach the encoder for `prompt` under the current flags.
  std::string prepare_prompt(std::string_view prompt) const;

  const PipelineConfig& config() const noexcept { return config_; }

private:
  PipelineConfig config_;
  std::shared_ptr<const EmbeddingBackend> backend_;
  const PhraseBlacklist* blacklist_;
  const Lexicon* lexicon_;
};

/// Canvas-sized grayscale rendering of a cell lattice, value lo -> 0 and hi -> 255.
Image lattice_heatmap(const Eigen::MatrixXd& cells, int stride, double lo, double hi);

}  // namespace semfilter
