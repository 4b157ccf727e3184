#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "semfilter/image.hpp"
#include "semfilter/prompt.hpp"

namespace semfilter {

/// Unit-norm embedding.
using EmbeddingVector = Eigen::VectorXf;

/// Column-wise L2 normalization. Zero columns are rejected.
template <typename Derived>
typename Derived::PlainObject l2_normalized(const Eigen::MatrixBase<Derived>& m) {
  typename Derived::PlainObject out = m;
  for (Eigen::Index j = 0; j < out.cols(); ++j) {
    const auto norm = out.col(j).norm();
    if (!(norm > 0)) throw std::domain_error("cannot normalize a zero embedding");
    out.col(j) /= norm;
  }
  return out;
}

/// Joint text/image encoder. Implementations are immutable after construction
/// and safe to call from several threads.
class EmbeddingBackend {
public:
  virtual ~EmbeddingBackend() = default;

  virtual std::string name() const = 0;
  virtual int dim() const = 0;
  virtual std::size_t context_window() const = 0;

  /// Raw text embedding; input longer than the context window is truncated.
  virtual Eigen::VectorXf embed_text(std::string_view text) const = 0;
  /// Raw embeddings of equally sized RGB images, one column per image.
  virtual Eigen::MatrixXf embed_images(std::span<const Image> images) const = 0;
  /// Tokens the text encoder would see, begin/end markers included.
  virtual std::size_t count_tokens(std::string_view text) const = 0;
};

EmbeddingVector encode_text(const EmbeddingBackend& backend, std::string_view text);

/// Unit columns, one per tile, order preserved. Tiles must be equally sized squares.
Eigen::MatrixXf encode_tiles(const EmbeddingBackend& backend, std::span<const Image> tiles, int batch_size = 8);

TokenCounter token_counter(const EmbeddingBackend& backend);

/// Dependency-free deterministic backend. Text vectors are sums of per-word hashed
/// Gaussian vectors; image vectors are a fixed hashed projection of coarse colour
/// and gradient statistics, so similar pixels give similar embeddings.
class StubBackend final : public EmbeddingBackend {
public:
  /// Optional fixed text-to-image cosine per image; lets tests dictate scores.
  using SimilarityFn = std::function<double(const Image&)>;

  explicit StubBackend(int dim = 64, std::size_t context_window = 77, SimilarityFn similarity = {});

  std::string name() const override { return "stub"; }
  int dim() const override { return dim_; }
  std::size_t context_window() const override { return context_window_; }

  Eigen::VectorXf embed_text(std::string_view text) const override;
  Eigen::MatrixXf embed_images(std::span<const Image> images) const override;
  /// Whitespace-separated words + 2.
  std::size_t count_tokens(std::string_view text) const override;

private:
  Eigen::VectorXf content_embedding(const Image& img) const;

  int dim_;
  std::size_t context_window_;
  SimilarityFn similarity_;
  Eigen::MatrixXf projection_;
};

/// Contents of a model assets directory (metadata.json plus the files it names).
struct ModelAssets {
  std::filesystem::path dir;
  int dim = 0;
  std::size_t context_window = 77;
  int image_size = 224;
  std::array<float, 3> mean{};
  std::array<float, 3> std{};
  double logit_scale_hint = 0.0;  // informational only
  std::filesystem::path vision_model;
  std::filesystem::path text_model;
  std::filesystem::path tokenizer;
  std::string vision_input = "pixel_values";
  std::string vision_output = "image_embeds";
  std::string text_input = "input_ids";
  std::string text_output = "text_embeds";

  static ModelAssets load(const std::filesystem::path& dir);
};

/// $SEMFILTER_MODEL_DIR, if set.
std::optional<std::filesystem::path> default_model_dir();

/// ONNX vision/text encoder pair executed through a dynamically loaded ONNX Runtime.
/// The runtime library is taken from `runtime_library`, then $SEMFILTER_ORT_LIB,
/// then the system loader path.
std::unique_ptr<EmbeddingBackend> load_neural_backend(const std::filesystem::path& model_dir,
                                                      const std::optional<std::filesystem::path>& runtime_library = {});

/// "stub" or "neural"; neural needs a model directory (argument or $SEMFILTER_MODEL_DIR).
std::unique_ptr<EmbeddingBackend> make_backend(std::string_view kind,
                                               const std::optional<std::filesystem::path>& model_dir = {});

}  // namespace semfilter
