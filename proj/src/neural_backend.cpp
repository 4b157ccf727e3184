#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "onnx_runtime.hpp"
#include "semfilter/clip_tokenizer.hpp"
#include "semfilter/embedder.hpp"
#include "semfilter/error.hpp"

namespace semfilter {
namespace {

using nlohmann::json;

template <typename T>
T required(const json& j, const char* key, const std::filesystem::path& file) {
  if (!j.contains(key)) throw BackendError(file.string() + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw BackendError(file.string() + ": field '" + key + "': " + e.what());
  }
}

std::filesystem::path existing(const std::filesystem::path& dir, const std::string& name) {
  const auto p = dir / name;
  if (!std::filesystem::exists(p)) throw BackendError("model asset not found: " + p.string());
  return p;
}

class NeuralBackend final : public EmbeddingBackend {
public:
  NeuralBackend(ModelAssets assets, const std::optional<std::filesystem::path>& runtime_library)
      : assets_(std::move(assets)),
        tokenizer_(ClipTokenizer::from_file(assets_.tokenizer)),
        runtime_(ort::Runtime::open(runtime_library)),
        vision_(runtime_, assets_.vision_model),
        text_(runtime_, assets_.text_model) {}

  std::string name() const override { return "neural"; }
  int dim() const override { return assets_.dim; }
  std::size_t context_window() const override { return assets_.context_window; }
  std::size_t count_tokens(std::string_view text) const override { return tokenizer_.count(text); }

  Eigen::VectorXf embed_text(std::string_view text) const override {
    const auto ids = tokenizer_.tokenize(text, assets_.context_window);
    const auto t = text_.run(assets_.text_input, assets_.text_output, ids.data(),
                             {1, static_cast<std::int64_t>(ids.size())});
    return to_columns(t, 1).col(0);
  }

  Eigen::MatrixXf embed_images(std::span<const Image> images) const override {
    const int s = assets_.image_size;
    const std::size_t plane = static_cast<std::size_t>(s) * static_cast<std::size_t>(s);
    std::vector<float> batch(images.size() * 3 * plane);
    for (std::size_t b = 0; b < images.size(); ++b) {
      const Image& src = images[b];
      const Image img = (src.width() == s && src.height() == s) ? src : resize_bilinear(src, s, s);
      float* dst = batch.data() + b * 3 * plane;
      for (int c = 0; c < 3; ++c) {
        const float mean = assets_.mean[static_cast<std::size_t>(c)];
        const float inv_std = 1.0f / assets_.std[static_cast<std::size_t>(c)];
        for (int y = 0; y < s; ++y) {
          for (int x = 0; x < s; ++x) {
            dst[static_cast<std::size_t>(c) * plane + static_cast<std::size_t>(y) * static_cast<std::size_t>(s) +
                static_cast<std::size_t>(x)] = (static_cast<float>(img(x, y, c)) / 255.0f - mean) * inv_std;
          }
        }
      }
    }
    const auto t = vision_.run(assets_.vision_input, assets_.vision_output, batch.data(),
                               {static_cast<std::int64_t>(images.size()), 3, s, s});
    return to_columns(t, static_cast<std::int64_t>(images.size()));
  }

private:
  // [batch, dim] row-major is [dim, batch] column-major.
  Eigen::MatrixXf to_columns(const ort::Tensor& t, std::int64_t batch) const {
    const bool ok = (t.shape.size() == 2 && t.shape[0] == batch && t.shape[1] == assets_.dim) ||
                    (t.shape.size() == 1 && batch == 1 && t.shape[0] == assets_.dim);
    if (!ok) {
      std::string shape;
      for (auto d : t.shape) shape += (shape.empty() ? "" : ",") + std::to_string(d);
      throw BackendError("model output has shape [" + shape + "], expected [" + std::to_string(batch) + "," +
                         std::to_string(assets_.dim) + "]");
    }
    return Eigen::Map<const Eigen::MatrixXf>(t.values.data(), assets_.dim, static_cast<Eigen::Index>(batch));
  }

  ModelAssets assets_;
  ClipTokenizer tokenizer_;
  std::shared_ptr<ort::Runtime> runtime_;
  ort::Session vision_;
  ort::Session text_;
};

}  // namespace

ModelAssets ModelAssets::load(const std::filesystem::path& dir) {
  const auto meta_path = dir / "metadata.json";
  std::ifstream in(meta_path);
  if (!in) throw BackendError("cannot open " + meta_path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw BackendError(meta_path.string() + ": " + e.what());
  }
  ModelAssets a;
  a.dir = dir;
  a.dim = required<int>(j, "dim", meta_path);
  a.context_window = required<std::size_t>(j, "context_window", meta_path);
  a.image_size = required<int>(j, "image_size", meta_path);
  a.mean = required<std::array<float, 3>>(j, "mean", meta_path);
  a.std = required<std::array<float, 3>>(j, "std", meta_path);
  a.logit_scale_hint = j.value("logit_scale_hint", 0.0);
  a.vision_model = existing(dir, required<std::string>(j, "vision_model", meta_path));
  a.text_model = existing(dir, required<std::string>(j, "text_model", meta_path));
  a.tokenizer = existing(dir, required<std::string>(j, "tokenizer", meta_path));
  a.vision_input = j.value("vision_input", a.vision_input);
  a.vision_output = j.value("vision_output", a.vision_output);
  a.text_input = j.value("text_input", a.text_input);
  a.text_output = j.value("text_output", a.text_output);
  if (a.dim < 1 || a.context_window < 2 || a.image_size < 1) {
    throw BackendError(meta_path.string() + ": dim, context_window and image_size must be positive");
  }
  for (float s : a.std) {
    if (!(s > 0.0f)) throw BackendError(meta_path.string() + ": std entries must be positive");
  }
  return a;
}

std::unique_ptr<EmbeddingBackend> load_neural_backend(const std::filesystem::path& model_dir,
                                                      const std::optional<std::filesystem::path>& runtime_library) {
  return std::make_unique<NeuralBackend>(ModelAssets::load(model_dir), runtime_library);
}

}  // namespace semfilter
