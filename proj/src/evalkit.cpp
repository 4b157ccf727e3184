#include "semfilter/evalkit.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <tuple>

#include "parallel.hpp"
#include "semfilter/error.hpp"

namespace semfilter {

using nlohmann::json;

// ---- manifest -------------------------------------------------------------------

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const auto base = path.parent_path();
  std::vector<ManifestEntry> entries;
  std::set<std::string> ids;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ConfigError(where + e.what());
    }
    ManifestEntry e;
    try {
      e.id = j.at("id").get<std::string>();
      e.image = j.at("image").get<std::string>();
      e.prompt = j.value("prompt", "");
      if (j.contains("answer") && !j.at("answer").is_null()) e.answer = j.at("answer").get<std::string>();
    } catch (const json::exception& ex) {
      throw ConfigError(where + ex.what());
    }
    if (e.id.empty()) throw ConfigError(where + "empty id");
    if (!ids.insert(e.id).second) throw ConfigError(where + "duplicate id '" + e.id + "'");
    if (e.image.is_relative()) e.image = base / e.image;
    if (!std::filesystem::exists(e.image)) throw IoError(where + "image not found: " + e.image.string());
    entries.push_back(std::move(e));
  }
  if (entries.empty()) throw ConfigError("manifest " + path.string() + " has no entries");
  return entries;
}

// ---- fidelity proxy -------------------------------------------------------------

double fidelity_proxy(const EmbeddingBackend& backend, const Image& original, const Image& reconstructed,
                      int tile_size) {
  if (original.width() != reconstructed.width() || original.height() != reconstructed.height()) {
    throw std::invalid_argument("fidelity_proxy: images differ in size");
  }
  const std::vector<Image> pair{resize_bilinear(original, tile_size, tile_size),
                                resize_bilinear(reconstructed, tile_size, tile_size)};
  const Eigen::MatrixXf e = encode_tiles(backend, pair, 2);
  return std::clamp(static_cast<double>(e.col(0).dot(e.col(1))), -1.0, 1.0);
}

// ---- modes ----------------------------------------------------------------------

namespace {

double parse_number(std::string_view s, std::string_view whole) {
  const auto fail = [&] { return ConfigError("bad mode parameter in '" + std::string(whole) + "'"); };
  const std::string text(s);
  const auto slash = text.find('/');
  try {
    std::size_t used = 0;
    if (slash == std::string::npos) {
      const double v = std::stod(text, &used);
      if (used != text.size()) throw fail();
      return v;
    }
    const double num = std::stod(text.substr(0, slash), &used);
    if (used != slash) throw fail();
    const std::string den_text = text.substr(slash + 1);
    const double den = std::stod(den_text, &used);
    if (used != den_text.size() || den == 0.0) throw fail();
    return num / den;
  } catch (const std::logic_error&) {
    throw fail();
  }
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

}  // namespace

BenchMode BenchMode::parse(std::string_view text) {
  if (text == "none") return {Kind::None, 0.0};
  if (text == "prefilter") return {Kind::Prefilter, 0.0};
  std::string_view name;
  std::string_view arg;
  if (const auto open = text.find('('); open != std::string_view::npos && text.back() == ')') {
    name = text.substr(0, open);
    arg = text.substr(open + 1, text.size() - open - 2);
  } else if (const auto colon = text.find(':'); colon != std::string_view::npos) {
    name = text.substr(0, colon);
    arg = text.substr(colon + 1);
  } else {
    throw ConfigError("unknown mode '" + std::string(text) + "'");
  }
  const double v = parse_number(arg, text);
  if (name == "gaussian" || name == "global_gaussian") {
    if (!(v >= 0.0)) throw ConfigError("gaussian mode needs sigma >= 0: '" + std::string(text) + "'");
    return {Kind::GlobalGaussian, v};
  }
  if (name == "downsample") {
    if (!(v > 0.0 && v <= 1.0)) throw ConfigError("downsample ratio must be in (0, 1]: '" + std::string(text) + "'");
    return {Kind::Downsample, v};
  }
  throw ConfigError("unknown mode '" + std::string(text) + "'");
}

std::string BenchMode::label() const {
  switch (kind) {
    case Kind::None: return "none";
    case Kind::Prefilter: return "prefilter";
    case Kind::GlobalGaussian: return "gaussian(" + format_number(param) + ")";
    case Kind::Downsample: return "downsample(" + format_number(param) + ")";
  }
  return "none";
}

ModeInput prepare_mode(const BenchMode& mode, const Prefilter& prefilter, const Image& img, std::string_view prompt) {
  const auto& cfg = prefilter.config();
  ModeInput m;
  const auto start = std::chrono::steady_clock::now();
  switch (mode.kind) {
    case BenchMode::Kind::Prefilter: {
      auto r = prefilter.run(img, prompt);
      m.latency_ms = elapsed_ms(start);
      m.canvas = std::move(r.canvas);
      m.encoder_input = std::move(r.filtered);
      return m;
    }
    case BenchMode::Kind::None:
      m.canvas = resize_to_tile_multiple(img, cfg.tile_size);
      m.encoder_input = m.canvas;
      break;
    case BenchMode::Kind::GlobalGaussian:
      m.canvas = resize_to_tile_multiple(img, cfg.tile_size);
      m.encoder_input = gaussian_blur(m.canvas, mode.param, cfg.kernel_size);
      break;
    case BenchMode::Kind::Downsample: {
      m.canvas = resize_to_tile_multiple(img, cfg.tile_size);
      const int w = std::max(1, static_cast<int>(std::lround(m.canvas.width() * mode.param)));
      const int h = std::max(1, static_cast<int>(std::lround(m.canvas.height() * mode.param)));
      m.encoder_input = resize_bilinear(m.canvas, w, h);
      break;
    }
  }
  m.latency_ms = elapsed_ms(start);
  return m;
}

json to_json(const BenchRecord& r) {
  json j{{"id", r.id},       {"codec", r.codec}, {"mode", r.mode},     {"param", r.param},
         {"bpp", r.bpp},     {"width", r.width}, {"height", r.height}, {"prefilter_ms", r.prefilter_ms},
         {"label", r.run_label()}};
  j["fidelity"] = r.fidelity ? json(*r.fidelity) : json(nullptr);
  if (r.error) j["error"] = *r.error;
  return j;
}

// ---- benchmark ------------------------------------------------------------------

namespace {

std::vector<int> default_qualities(const CodecAdapter& codec) {
  if (codec.name() == "jpeg") return {10, 30, 50, 70, 90};
  if (codec.name() == "hevc" || codec.name() == "vvc") return {22, 27, 32, 37};
  throw ConfigError("no quality list given for codec '" + codec.name() + "'");
}

std::string file_safe(std::string s) {
  for (char& c : s) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-' && c != '_') c = '_';
  }
  return s;
}

struct CodecPlan {
  std::string spec;
  std::unique_ptr<CodecAdapter> codec;
  std::vector<int> params;
};

void build_curves(BenchReport& report, const std::vector<CodecPlan>& plans, const BenchOptions& options) {
  for (const auto& plan : plans) {
    for (const auto& mode : options.modes) {
      CurveSummary c{plan.codec->name(), mode.label(), "fidelity_proxy", {}, {}};
      bool all_accuracy = options.accuracy.has_value();
      std::vector<std::tuple<int, double, double>> rows;  // param, mean bpp, mean fidelity
      for (int q : plan.params) {
        double bpp = 0.0;
        double fid = 0.0;
        int n = 0;
        for (const auto& r : report.records) {
          if (r.error || r.codec != c.codec || r.mode != c.mode || r.param != q) continue;
          bpp += r.bpp;
          fid += r.fidelity.value_or(0.0);
          ++n;
        }
        if (n == 0) continue;
        rows.emplace_back(q, bpp / n, fid / n);
        const std::string label = c.codec + "/" + c.mode + "/" + std::to_string(q);
        if (all_accuracy && !options.accuracy->contains(label)) all_accuracy = false;
      }
      if (all_accuracy && !rows.empty()) c.quality_source = "accuracy";
      for (const auto& [q, bpp, fid] : rows) {
        c.params.push_back(q);
        const std::string label = c.codec + "/" + c.mode + "/" + std::to_string(q);
        c.points.push_back({bpp, all_accuracy ? options.accuracy->at(label) : fid});
      }
      report.curves.push_back(std::move(c));
    }
  }
  for (const auto& anchor : report.curves) {
    if (anchor.mode != options.anchor) continue;
    for (const auto& test : report.curves) {
      if (test.codec != anchor.codec || test.mode == anchor.mode) continue;
      BdRateEntry e{test.codec, test.mode, anchor.mode, std::nullopt, ""};
      try {
        e.percent = bd_rate(RateQualityCurve(anchor.mode, anchor.points), RateQualityCurve(test.mode, test.points),
                            options.method);
      } catch (const std::invalid_argument& ex) {
        e.error = ex.what();
      }
      report.bd_rates.push_back(std::move(e));
    }
  }
}

}  // namespace

BenchReport run_benchmark(const std::vector<ManifestEntry>& manifest, const Prefilter& prefilter,
                          const EmbeddingBackend& backend, const BenchOptions& options) {
  if (manifest.empty()) throw ConfigError("benchmark manifest is empty");
  if (options.modes.empty()) throw ConfigError("no benchmark modes given");
  if (options.codecs.empty()) throw ConfigError("no codecs given");
  const PipelineConfig& config = prefilter.config();

  std::vector<CodecPlan> plans;
  for (const auto& spec : options.codecs) {
    CodecPlan p{spec, make_codec(spec), {}};
    const auto it = options.qualities.find(spec);
    p.params = it != options.qualities.end() ? it->second : default_qualities(*p.codec);
    if (p.params.empty()) throw ConfigError("empty quality list for codec '" + spec + "'");
    for (int q : p.params) {
      if (!p.codec->quality_range().contains(q)) {
        throw ConfigError(spec + ": quality parameter " + std::to_string(q) + " out of range");
      }
    }
    plans.push_back(std::move(p));
  }
  if (options.bitstream_dir) std::filesystem::create_directories(*options.bitstream_dir);

  BenchReport report;
  std::mutex sink_mutex;
  std::ofstream jsonl;
  if (options.records_jsonl) {
    jsonl.open(*options.records_jsonl);
    if (!jsonl) throw IoError("cannot write " + options.records_jsonl->string());
  }
  auto append = [&](std::vector<BenchRecord> batch) {
    std::lock_guard lock(sink_mutex);
    for (auto& r : batch) {
      if (r.error) ++report.failed;
      if (jsonl.is_open()) jsonl << to_json(r).dump() << '\n';
      report.records.push_back(std::move(r));
    }
    if (jsonl.is_open()) jsonl.flush();
  };

  detail::parallel_for(
      static_cast<int>(manifest.size()),
      [&](int i) {
        const auto& entry = manifest[static_cast<std::size_t>(i)];
        std::vector<BenchRecord> batch;
        try {
          const Image img = load_image(entry.image);
          for (const auto& mode : options.modes) {
            const ModeInput input = prepare_mode(mode, prefilter, img, entry.prompt);
            for (const auto& plan : plans) {
              for (int q : plan.params) {
                BenchRecord r;
                r.id = entry.id;
                r.codec = plan.codec->name();
                r.mode = mode.label();
                r.param = q;
                r.prefilter_ms = input.latency_ms;
                try {
                  const EncodeResult enc = plan.codec->encode(input.encoder_input, q);
                  r.bpp = enc.bpp;
                  r.width = input.encoder_input.width();
                  r.height = input.encoder_input.height();
                  const Image& rec = enc.reconstructed;
                  const Image restored = (rec.width() == input.canvas.width() && rec.height() == input.canvas.height())
                                             ? rec
                                             : resize_bilinear(rec, input.canvas.width(), input.canvas.height());
                  r.fidelity = fidelity_proxy(backend, input.canvas, restored, config.tile_size);
                  if (options.bitstream_dir) {
                    write_file(*options.bitstream_dir / file_safe(entry.id + "_" + r.codec + "_" + r.mode + "_" +
                                                                  std::to_string(q) + plan.codec->bitstream_extension()),
                               enc.bitstream);
                  }
                } catch (const std::exception& e) {
                  r.error = e.what();
                }
                batch.push_back(std::move(r));
              }
            }
          }
        } catch (const std::exception& e) {
          BenchRecord r;
          r.id = entry.id;
          r.error = e.what();
          batch.push_back(std::move(r));
        }
        append(std::move(batch));
      },
      options.workers);

  std::sort(report.records.begin(), report.records.end(), [](const BenchRecord& a, const BenchRecord& b) {
    return std::tie(a.id, a.codec, a.mode, a.param) < std::tie(b.id, b.codec, b.mode, b.param);
  });
  build_curves(report, plans, options);
  if (options.accuracy) {
    for (const auto& label : unmatched_labels(*options.accuracy, report.records)) {
      report.warnings.push_back("accuracy label '" + label + "' matches no run");
    }
  }
  return report;
}

// ---- accuracy join --------------------------------------------------------------

AccuracyTable ingest_accuracy(const std::filesystem::path& csv) {
  std::ifstream in(csv);
  if (!in) throw IoError("cannot open " + csv.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(csv.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "label,accuracy") throw ConfigError(csv.string() + ": header must be 'label,accuracy'");
  AccuracyTable table;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = csv.string() + ":" + std::to_string(lineno) + ": ";
    const auto comma = line.rfind(',');
    if (comma == std::string::npos || comma == 0) throw ConfigError(where + "expected 'label,accuracy'");
    const std::string label = line.substr(0, comma);
    const std::string value = line.substr(comma + 1);
    double acc = 0.0;
    try {
      std::size_t used = 0;
      acc = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      throw ConfigError(where + "accuracy '" + value + "' is not a number");
    }
    if (!std::isfinite(acc)) throw ConfigError(where + "accuracy must be finite");
    if (!table.emplace(label, acc).second) throw ConfigError(where + "duplicate label '" + label + "'");
  }
  return table;
}

std::vector<std::string> unmatched_labels(const AccuracyTable& table, const std::vector<BenchRecord>& records) {
  std::set<std::string> runs;
  for (const auto& r : records) {
    if (!r.error) runs.insert(r.run_label());
  }
  std::vector<std::string> out;
  for (const auto& [label, _] : table) {
    if (!runs.contains(label)) out.push_back(label);
  }
  return out;
}

// ---- persistence ----------------------------------------------------------------

json summary_json(const BenchReport& report, const BenchOptions& options) {
  json curves = json::array();
  for (const auto& c : report.curves) {
    json pts = json::array();
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      pts.push_back({{"param", c.params[i]}, {"bpp", c.points[i].bpp}, {"quality", c.points[i].quality}});
    }
    curves.push_back({{"codec", c.codec}, {"mode", c.mode}, {"quality_source", c.quality_source}, {"points", pts}});
  }
  json bd = json::array();
  for (const auto& e : report.bd_rates) {
    json row{{"codec", e.codec}, {"mode", e.mode}, {"anchor", e.anchor}};
    row["bd_rate_percent"] = e.percent ? json(*e.percent) : json(nullptr);
    if (!e.error.empty()) row["error"] = e.error;
    bd.push_back(std::move(row));
  }
  return {{"anchor", options.anchor},
          {"method", options.method == BdMethod::Pchip ? "pchip" : "cubic"},
          {"records", report.records.size()},
          {"failed", report.failed},
          {"curves", curves},
          {"bd_rates", bd},
          {"warnings", report.warnings}};
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(10);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

void write_records_jsonl(const std::filesystem::path& path, const std::vector<BenchRecord>& records) {
  auto out = open_out(path);
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

void write_records_csv(const std::filesystem::path& path, const std::vector<BenchRecord>& records) {
  auto out = open_out(path);
  out << "id,codec,mode,param,bpp,width,height,fidelity,prefilter_ms,error\n";
  for (const auto& r : records) {
    out << csv_field(r.id) << ',' << r.codec << ',' << csv_field(r.mode) << ',' << r.param << ',' << r.bpp << ','
        << r.width << ',' << r.height << ',';
    if (r.fidelity) out << *r.fidelity;
    out << ',' << r.prefilter_ms << ',' << csv_field(r.error.value_or("")) << '\n';
  }
}

void write_curves_csv(const std::filesystem::path& path, const std::vector<CurveSummary>& curves) {
  auto out = open_out(path);
  out << "codec,mode,param,bpp,quality,quality_source\n";
  for (const auto& c : curves) {
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      out << c.codec << ',' << csv_field(c.mode) << ',' << c.params[i] << ',' << c.points[i].bpp << ','
          << c.points[i].quality << ',' << c.quality_source << '\n';
    }
  }
}

// ---- latency --------------------------------------------------------------------

LatencyStats summarize_latency(std::span<const double> samples_ms) {
  if (samples_ms.size() < 30) {
    throw std::invalid_argument("latency needs at least 30 samples, got " + std::to_string(samples_ms.size()));
  }
  const Eigen::Map<const Eigen::VectorXd> v(samples_ms.data(), static_cast<Eigen::Index>(samples_ms.size()));
  LatencyStats s;
  s.n = samples_ms.size();
  s.mean_ms = v.mean();
  s.stddev_ms = std::sqrt((v.array() - s.mean_ms).square().sum() / static_cast<double>(s.n - 1));
  const double half = 1.96 * s.stddev_ms / std::sqrt(static_cast<double>(s.n));
  s.ci_low_ms = s.mean_ms - half;
  s.ci_high_ms = s.mean_ms + half;
  return s;
}

LatencyStats bench_latency(const Prefilter& prefilter, std::span<const Image> images,
                           std::span<const std::string> prompts) {
  if (images.size() < 30) {
    throw std::invalid_argument("latency benchmark needs at least 30 images, got " + std::to_string(images.size()));
  }
  if (prompts.size() != 1 && prompts.size() != images.size()) {
    throw std::invalid_argument("bench_latency: give one prompt or one per image");
  }
  std::vector<double> samples;
  samples.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto& prompt = prompts[prompts.size() == 1 ? 0 : i];
    const auto start = std::chrono::steady_clock::now();
    prefilter.run(images[i], prompt);
    samples.push_back(elapsed_ms(start));
  }
  return summarize_latency(samples);
}

}  // namespace semfilter
