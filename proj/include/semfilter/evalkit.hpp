#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "semfilter/bdrate.hpp"
#include "semfilter/codec.hpp"
#include "semfilter/embedder.hpp"
#include "semfilter/pipeline.hpp"

namespace semfilter {

struct ManifestEntry {
  std::string id;
  std::filesystem::path image;
  std::string prompt;
  std::optional<std::string> answer;
};

/// JSONL, one {"id", "image", "prompt", "answer"?} object per line. Relative image
/// paths are resolved against the manifest's directory. Ids must be unique and
/// images must exist; an empty manifest is a ConfigError.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);

/// Cosine between whole-image embeddings of both images, each resized to tile_size.
double fidelity_proxy(const EmbeddingBackend& backend, const Image& original, const Image& reconstructed,
                      int tile_size = 224);

/// What is handed to the codec. Every mode starts from the tile-multiple canvas.
struct BenchMode {
  enum class Kind { None, Prefilter, GlobalGaussian, Downsample };
  Kind kind = Kind::None;
  double param = 0.0;  // sigma or scale ratio

  /// "none", "prefilter", "gaussian(s)" / "global_gaussian(s)" / "gaussian:s",
  /// "downsample(r)" / "downsample:r" where r may be a fraction such as 1/2.
  static BenchMode parse(std::string_view text);
  /// Canonical form: none, prefilter, gaussian(0.2), downsample(0.5).
  std::string label() const;

  friend bool operator==(const BenchMode&, const BenchMode&) = default;
};

struct ModeInput {
  Image canvas;         // reference for fidelity
  Image encoder_input;  // raster given to the codec
  double latency_ms = 0.0;
};

ModeInput prepare_mode(const BenchMode& mode, const Prefilter& prefilter, const Image& img, std::string_view prompt);

struct BenchRecord {
  std::string id;
  std::string codec;
  std::string mode;
  int param = 0;
  double bpp = 0.0;
  int width = 0;   // encoded raster
  int height = 0;
  std::optional<double> fidelity;
  double prefilter_ms = 0.0;
  std::optional<std::string> error;

  /// "<codec>/<mode>/<param>", the key used by accuracy CSVs.
  std::string run_label() const { return codec + "/" + mode + "/" + std::to_string(param); }
};

nlohmann::json to_json(const BenchRecord& r);

struct CurveSummary {
  std::string codec;
  std::string mode;
  std::string quality_source;  // "accuracy" or "fidelity_proxy"
  std::vector<int> params;
  std::vector<RateQualityPoint> points;  // same order as params
};

struct BdRateEntry {
  std::string codec;
  std::string mode;
  std::string anchor;
  std::optional<double> percent;
  std::string error;
};

using AccuracyTable = std::map<std::string, double>;

struct BenchOptions {
  std::vector<std::string> codecs{"jpeg"};
  std::map<std::string, std::vector<int>> qualities;  // codec -> params; jpeg defaults to 10..90
  std::vector<BenchMode> modes{{BenchMode::Kind::None}, {BenchMode::Kind::Prefilter}};
  std::string anchor = "none";
  BdMethod method = BdMethod::Pchip;
  unsigned workers = 0;  // 0 = hardware concurrency
  std::optional<std::filesystem::path> records_jsonl;    // streamed as records complete
  std::optional<std::filesystem::path> bitstream_dir;    // --keep-bitstreams
  std::optional<AccuracyTable> accuracy;
};

struct BenchReport {
  std::vector<BenchRecord> records;  // sorted by id, codec, mode, param
  std::vector<CurveSummary> curves;
  std::vector<BdRateEntry> bd_rates;
  std::vector<std::string> warnings;
  std::size_t failed = 0;
};

/// `backend` computes the fidelity proxy; it may differ from the prefilter's scorer.
BenchReport run_benchmark(const std::vector<ManifestEntry>& manifest, const Prefilter& prefilter,
                          const EmbeddingBackend& backend, const BenchOptions& options);

/// Reads a "label,accuracy" CSV. Duplicate labels and malformed rows are ConfigErrors.
AccuracyTable ingest_accuracy(const std::filesystem::path& csv);
/// Labels in `table` that match no run; callers report them as warnings.
std::vector<std::string> unmatched_labels(const AccuracyTable& table, const std::vector<BenchRecord>& records);

nlohmann::json summary_json(const BenchReport& report, const BenchOptions& options);
void write_records_jsonl(const std::filesystem::path& path, const std::vector<BenchRecord>& records);
void write_records_csv(const std::filesystem::path& path, const std::vector<BenchRecord>& records);
void write_curves_csv(const std::filesystem::path& path, const std::vector<CurveSummary>& curves);

struct LatencyStats {
  std::size_t n = 0;
  double mean_ms = 0.0;
  double stddev_ms = 0.0;
  double ci_low_ms = 0.0;   // mean -/+ 1.96 standard errors
  double ci_high_ms = 0.0;
};

/// Requires at least 30 samples.
LatencyStats summarize_latency(std::span<const double> samples_ms);

/// Wall clock of Prefilter::run per image. `prompts` holds one prompt for all
/// images or one per image.
LatencyStats bench_latency(const Prefilter& prefilter, std::span<const Image> images,
                           std::span<const std::string> prompts);

}  // namespace semfilter
