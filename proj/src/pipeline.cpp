#include "semfilter/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>

#include "semfilter/error.hpp"

namespace semfilter {

Prefilter::Prefilter(PipelineConfig config, std::shared_ptr<const EmbeddingBackend> backend,
                     const PhraseBlacklist& blacklist, const Lexicon& lexicon)
    : config_(config), backend_(std::move(backend)), blacklist_(&blacklist), lexicon_(&lexicon) {
  config_.validate();
  if (config_.use_scoring && !backend_) throw ConfigError("scoring is enabled but no embedding backend was given");
}

std::string Prefilter::prepare_prompt(std::string_view prompt) const {
  if (!config_.preprocess_prompt) return std::string(prompt);
  const auto window = std::min<std::size_t>(static_cast<std::size_t>(config_.context_window),
                                            backend_ ? backend_->context_window() : SIZE_MAX);
  const TokenCounter count = backend_ ? token_counter(*backend_) : TokenCounter([this](std::string_view t) {
    return normalize(t, *lexicon_).tokens.size() + 2;
  });
  return condense_prompt(prompt, window, count, *blacklist_, *lexicon_);
}

PrefilterResult Prefilter::run(const Image& img, std::string_view prompt) const {
  if (img.empty()) throw std::invalid_argument("prefilter: empty image");
  PrefilterResult r;
  r.canvas = resize_to_tile_multiple(img, config_.tile_size);
  const int stride = select_stride(r.canvas.width(), r.canvas.height(), config_.tile_size, config_.tile_num,
                                   config_.allow_overlap);
  r.grid = make_grid(r.canvas.width(), r.canvas.height(), config_.tile_size, stride);

  if (config_.use_scoring) {
    const bool blank = std::all_of(prompt.begin(), prompt.end(), [](unsigned char c) { return std::isspace(c); });
    if (blank) throw ConfigError("empty prompt with scoring enabled (use --no-scoring for the uniform path)");
    r.text = prepare_prompt(prompt);
    const EmbeddingVector text = encode_text(*backend_, r.text);
    const auto tiles = extract_tiles(r.canvas, r.grid);
    const Eigen::MatrixXf tile_embeddings = encode_tiles(*backend_, tiles, config_.batch_size);
    r.tile_scores = score_tiles(text, tile_embeddings, config_.logit_scale);
    r.scores = aggregate(r.grid, r.tile_scores);
  } else {
    r.scores = uniform_scores(r.grid);
  }
  r.sigmas = sigma_map(r.scores, config_.sigma_one, config_.sigma_max);
  r.filtered = filter_blocks(r.canvas, r.sigmas, config_.kernel_size);
  return r;
}

Image lattice_heatmap(const Eigen::MatrixXd& cells, int stride, double lo, double hi) {
  if (stride < 1 || cells.size() == 0) throw std::invalid_argument("lattice_heatmap: empty lattice");
  const double span = hi > lo ? hi - lo : 1.0;
  Image out(static_cast<int>(cells.cols()) * stride, static_cast<int>(cells.rows()) * stride);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const std::uint8_t v = to_u8(255.0 * (cells(y / stride, x / stride) - lo) / span);
      for (int c = 0; c < Image::kChannels; ++c) out(x, y, c) = v;
    }
  }
  return out;
}

}  // namespace semfilter
