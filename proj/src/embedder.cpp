#include "semfilter/embedder.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "semfilter/error.hpp"

namespace semfilter {

EmbeddingVector encode_text(const EmbeddingBackend& backend, std::string_view text) {
  const Eigen::VectorXf raw = backend.embed_text(text);
  if (raw.size() != backend.dim()) throw BackendError(backend.name() + ": text embedding has wrong dimension");
  return l2_normalized(raw);
}

Eigen::MatrixXf encode_tiles(const EmbeddingBackend& backend, std::span<const Image> tiles, int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("encode_tiles: batch_size must be >= 1");
  if (tiles.empty()) return Eigen::MatrixXf(backend.dim(), 0);
  const int side = tiles.front().width();
  for (const auto& t : tiles) {
    if (t.width() != side || t.height() != side) {
      throw std::invalid_argument("encode_tiles: tiles must all be " + std::to_string(side) + "x" +
                                  std::to_string(side));
    }
  }
  Eigen::MatrixXf out(backend.dim(), static_cast<Eigen::Index>(tiles.size()));
  for (std::size_t first = 0; first < tiles.size(); first += static_cast<std::size_t>(batch_size)) {
    const std::size_t n = std::min(tiles.size() - first, static_cast<std::size_t>(batch_size));
    const Eigen::MatrixXf raw = backend.embed_images(tiles.subspan(first, n));
    if (raw.rows() != backend.dim() || raw.cols() != static_cast<Eigen::Index>(n)) {
      throw BackendError(backend.name() + ": image embedding batch has wrong shape");
    }
    out.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(n)) = l2_normalized(raw);
  }
  return out;
}

TokenCounter token_counter(const EmbeddingBackend& backend) {
  return [&backend](std::string_view text) { return backend.count_tokens(text); };
}

std::optional<std::filesystem::path> default_model_dir() {
  if (const char* env = std::getenv("SEMFILTER_MODEL_DIR"); env != nullptr && *env != '\0') {
    return std::filesystem::path(env);
  }
  return std::nullopt;
}

std::unique_ptr<EmbeddingBackend> make_backend(std::string_view kind,
                                               const std::optional<std::filesystem::path>& model_dir) {
  if (kind == "stub") return std::make_unique<StubBackend>();
  if (kind == "neural") {
    const auto dir = model_dir ? model_dir : default_model_dir();
    if (!dir) throw BackendError("neural backend needs --model-dir or SEMFILTER_MODEL_DIR");
    return load_neural_backend(*dir);
  }
  throw ConfigError("unknown backend '" + std::string(kind) + "' (expected stub or neural)");
}

}  // namespace semfilter
