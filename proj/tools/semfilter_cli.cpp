// Command-line front end: filter, encode, bench, bdrate, latency, plot, export-assets.

#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "semfilter/bdrate.hpp"
#include "semfilter/codec.hpp"
#include "semfilter/config.hpp"
#include "semfilter/embedder.hpp"
#include "semfilter/error.hpp"
#include "semfilter/evalkit.hpp"
#include "semfilter/pipeline.hpp"
#include "semfilter/plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace semfilter;

namespace {

// Pipeline and backend settings shared by every subcommand that runs the prefilter.
struct RunOptions {
  std::optional<fs::path> config_file;
  std::string backend;
  std::optional<fs::path> model_dir;
  bool no_scoring = false;
  bool no_overlap = false;
  bool no_pp = false;
  std::optional<int> tile_num;
  std::optional<double> logit_scale;
  std::optional<double> sigma_one;
  std::optional<double> sigma_max;
  std::optional<fs::path> blacklist;
  std::optional<fs::path> stop_words;
  std::optional<fs::path> lemmas;
  std::optional<fs::path> pos;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--config", config_file, "JSON config file (see README)");
    cmd->add_option("--backend", backend, "embedding backend: stub or neural");
    cmd->add_option("--model-dir", model_dir, "model assets directory (default $SEMFILTER_MODEL_DIR)");
    cmd->add_flag("--no-scoring", no_scoring, "skip embedding; every cell scores 1");
    cmd->add_flag("--no-overlap", no_overlap, "stride is always the tile size");
    cmd->add_flag("--no-pp", no_pp, "send the raw prompt to the text encoder");
    cmd->add_option("--tile-num", tile_num, "target tile count");
    cmd->add_option("--logit-scale", logit_scale, "softmax temperature multiplier");
    cmd->add_option("--sigma-one", sigma_one, "sigma at score 1");
    cmd->add_option("--sigma-max", sigma_max, "sigma at score 0");
    cmd->add_option("--blacklist", blacklist, "instruction phrases to strip, one per line");
    cmd->add_option("--stop-words", stop_words, "stop word list replacing the built-in one");
    cmd->add_option("--lemmas", lemmas, "irregular lemma table replacing the built-in one");
    cmd->add_option("--pos", pos, "part-of-speech lexicon replacing the built-in one");
  }
};

// Everything a Prefilter borrows must outlive it, so it all lives here.
struct Runtime {
  PipelineConfig config;
  std::shared_ptr<const EmbeddingBackend> backend;
  std::optional<PhraseBlacklist> blacklist;
  std::optional<Lexicon> lexicon;
  std::unique_ptr<Prefilter> prefilter;
};

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::unique_ptr<Runtime> make_runtime(const RunOptions& o, bool need_backend) {
  auto rt = std::make_unique<Runtime>();
  std::string backend = "stub";
  std::optional<fs::path> model_dir = o.model_dir;
  std::optional<fs::path> blacklist = o.blacklist;
  std::optional<fs::path> stop_words = o.stop_words;
  std::optional<fs::path> lemmas = o.lemmas;
  std::optional<fs::path> pos = o.pos;
  if (o.config_file) {
    const json j = read_json(*o.config_file);
    if (!j.is_object()) throw ConfigError(o.config_file->string() + ": top level must be an object");
    const auto base = o.config_file->parent_path();
    auto path_field = [&](const char* key, std::optional<fs::path>& slot) {
      if (!slot && j.contains(key)) {
        fs::path p = j.at(key).get<std::string>();
        slot = p.is_relative() ? base / p : p;
      }
    };
    for (const auto& [key, _] : j.items()) {
      static const std::set<std::string> known{"pipeline", "backend", "model_dir", "blacklist",
                                               "stop_words", "lemmas", "pos"};
      if (!known.contains(key)) throw ConfigError("invalid config field '" + key + "': unknown key");
    }
    if (j.contains("pipeline")) rt->config = pipeline_config_from_json(j.at("pipeline"), rt->config);
    if (j.contains("backend")) backend = j.at("backend").get<std::string>();
    path_field("model_dir", model_dir);
    path_field("blacklist", blacklist);
    path_field("stop_words", stop_words);
    path_field("lemmas", lemmas);
    path_field("pos", pos);
  }
  if (!o.backend.empty()) backend = o.backend;
  if (o.no_scoring) rt->config.use_scoring = false;
  if (o.no_overlap) rt->config.allow_overlap = false;
  if (o.no_pp) rt->config.preprocess_prompt = false;
  if (o.tile_num) rt->config.tile_num = *o.tile_num;
  if (o.logit_scale) rt->config.logit_scale = *o.logit_scale;
  if (o.sigma_one) rt->config.sigma_one = *o.sigma_one;
  if (o.sigma_max) rt->config.sigma_max = *o.sigma_max;
  rt->config.validate();
  if (backend != "stub" && backend != "neural") {
    throw ConfigError("invalid config field 'backend': expected stub or neural, got '" + backend + "'");
  }

  if (blacklist) rt->blacklist = PhraseBlacklist::from_file(*blacklist);
  if (stop_words || lemmas || pos) rt->lexicon = Lexicon::with_overrides(stop_words, lemmas, pos);
  if (need_backend || rt->config.use_scoring) rt->backend = make_backend(backend, model_dir);
  rt->prefilter = std::make_unique<Prefilter>(rt->config, rt->backend,
                                              rt->blacklist ? *rt->blacklist : PhraseBlacklist::defaults(),
                                              rt->lexicon ? *rt->lexicon : Lexicon::builtin());
  return rt;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& item : split(s, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("invalid quality list '" + s + "'");
    }
  }
  if (out.empty()) throw ConfigError("empty quality list");
  return out;
}

// Modes are comma separated, but commas inside parentheses belong to the mode.
std::vector<BenchMode> parse_modes(const std::vector<std::string>& args) {
  std::vector<BenchMode> out;
  for (const auto& arg : args) {
    std::string cur;
    int depth = 0;
    for (char c : arg + ",") {
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (c == ',' && depth == 0) {
        if (!cur.empty()) out.push_back(BenchMode::parse(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
  }
  return out;
}

RateQualityCurve read_curve_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "bpp,quality") throw ConfigError(path.string() + ": header must be 'bpp,quality'");
  std::vector<RateQualityPoint> pts;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    try {
      if (fields.size() != 2) throw std::invalid_argument(line);
      pts.push_back({std::stod(fields[0]), std::stod(fields[1])});
    } catch (const std::logic_error&) {
      throw ConfigError(path.string() + ": malformed row '" + line + "'");
    }
  }
  return RateQualityCurve(path.stem().string(), std::move(pts));
}

BdMethod parse_method(const std::string& m) {
  if (m == "pchip") return BdMethod::Pchip;
  if (m == "cubic") return BdMethod::Cubic;
  throw ConfigError("unknown BD-rate method '" + m + "' (expected pchip or cubic)");
}

void save_output(const Image& img, const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".ppm") {
    save_ppm(img, path);
  } else {
    save_png(img, path);
  }
}

// ---- subcommands ----------------------------------------------------------------

struct FilterArgs {
  fs::path image;
  std::string prompt;
  fs::path out;
  std::optional<fs::path> dump_scores;
  std::optional<fs::path> dump_sigma;
};

int cmd_filter(const RunOptions& ro, const FilterArgs& a) {
  const auto rt = make_runtime(ro, false);
  const Image img = load_image(a.image);
  const auto r = rt->prefilter->run(img, a.prompt);
  save_output(r.filtered, a.out);
  if (a.dump_scores) save_png(lattice_heatmap(r.scores.scores, r.scores.stride, 0.0, r.scores.scores.maxCoeff()), *a.dump_scores);
  if (a.dump_sigma) save_png(lattice_heatmap(r.sigmas.sigmas, r.sigmas.stride, 0.0, rt->config.sigma_max), *a.dump_sigma);
  std::cout << json{{"out", a.out.string()},
                    {"width", r.filtered.width()},
                    {"height", r.filtered.height()},
                    {"stride", r.grid.stride},
                    {"tiles", r.grid.count()},
                    {"text", r.text},
                    {"min_sigma", r.sigmas.sigmas.minCoeff()},
                    {"max_sigma", r.sigmas.sigmas.maxCoeff()}}
                   .dump()
            << '\n';
  return 0;
}

struct EncodeArgs {
  fs::path image;
  std::string prompt;
  std::string codec = "jpeg";
  int quality = 50;
  fs::path out;
  std::optional<fs::path> recon;
  bool no_prefilter = false;
};

int cmd_encode(const RunOptions& ro, const EncodeArgs& a) {
  const auto codec = make_codec(a.codec);
  const auto rt = make_runtime(ro, false);
  const Image img = load_image(a.image);
  const Image input = a.no_prefilter ? resize_to_tile_multiple(img, rt->config.tile_size)
                                     : rt->prefilter->run(img, a.prompt).filtered;
  const EncodeResult r = codec->encode(input, a.quality);
  write_file(a.out, r.bitstream);
  if (a.recon) save_output(r.reconstructed, *a.recon);
  std::cout << json{{"codec", codec->name()},
                    {"quality", a.quality},
                    {"prefiltered", !a.no_prefilter},
                    {"bytes", r.bitstream.size()},
                    {"width", input.width()},
                    {"height", input.height()},
                    {"bpp", r.bpp},
                    {"bitstream", a.out.string()}}
                   .dump()
            << '\n';
  return 0;
}

struct BenchArgs {
  fs::path manifest;
  std::string codecs = "jpeg";
  std::vector<std::string> qualities;
  std::vector<std::string> modes{"none,prefilter"};
  fs::path out_dir = "bench_out";
  std::string anchor = "none";
  std::string method = "pchip";
  unsigned workers = 0;
  bool keep_bitstreams = false;
  std::optional<fs::path> accuracy;
};

int cmd_bench(const RunOptions& ro, const BenchArgs& a) {
  BenchOptions opt;
  opt.codecs = split(a.codecs, ',');
  for (const auto& q : a.qualities) {
    if (const auto eq = q.find('='); eq != std::string::npos) {
      opt.qualities[q.substr(0, eq)] = parse_int_list(q.substr(eq + 1));
    } else {
      for (const auto& c : opt.codecs) opt.qualities[c] = parse_int_list(q);
    }
  }
  opt.modes = parse_modes(a.modes);
  opt.anchor = BenchMode::parse(a.anchor).label();
  opt.method = parse_method(a.method);
  opt.workers = a.workers;
  if (a.accuracy) opt.accuracy = ingest_accuracy(*a.accuracy);
  const auto manifest = load_manifest(a.manifest);
  const auto rt = make_runtime(ro, true);

  fs::create_directories(a.out_dir);
  opt.records_jsonl = a.out_dir / "records.partial.jsonl";
  if (a.keep_bitstreams) opt.bitstream_dir = a.out_dir / "bitstreams";
  const BenchReport report = run_benchmark(manifest, *rt->prefilter, *rt->backend, opt);
  fs::remove(*opt.records_jsonl);

  write_records_jsonl(a.out_dir / "records.jsonl", report.records);
  write_records_csv(a.out_dir / "records.csv", report.records);
  write_curves_csv(a.out_dir / "curves.csv", report.curves);
  const json summary = summary_json(report, opt);
  std::ofstream(a.out_dir / "summary.json") << summary.dump(2) << '\n';
  for (const auto& spec : opt.codecs) {
    const auto name = make_codec(spec)->name();
    const auto series = series_from_summary(summary, name);
    if (series.empty()) continue;
    const std::string ylabel = report.curves.empty() ? "quality" : report.curves.front().quality_source;
    std::ofstream(a.out_dir / ("plot_" + name + ".svg")) << render_svg(series, name + " rate-quality", "bpp", ylabel);
  }
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& r : report.records) {
    if (r.error) std::cerr << "error: " << r.id << " " << r.run_label() << ": " << *r.error << '\n';
  }
  std::cout << json{{"out_dir", a.out_dir.string()}, {"bd_rates", summary.at("bd_rates")}, {"failed", report.failed}}.dump(2)
            << '\n';
  if (report.failed == report.records.size()) return exit_code(ErrorKind::Codec);
  return 0;
}

int cmd_bdrate(const fs::path& anchor, const fs::path& test, const std::string& method) {
  const auto a = read_curve_csv(anchor);
  const auto t = read_curve_csv(test);
  const double pct = bd_rate(a, t, parse_method(method));
  std::cout << json{{"anchor", anchor.string()}, {"test", test.string()}, {"method", method}, {"bd_rate_percent", pct}}.dump()
            << '\n';
  return 0;
}

int cmd_latency(const RunOptions& ro, const fs::path& manifest_path, const std::optional<std::string>& prompt) {
  const auto manifest = load_manifest(manifest_path);
  const auto rt = make_runtime(ro, false);
  std::vector<Image> images;
  std::vector<std::string> prompts;
  for (const auto& e : manifest) {
    images.push_back(load_image(e.image));
    prompts.push_back(prompt.value_or(e.prompt));
  }
  const auto s = bench_latency(*rt->prefilter, images, prompts);
  std::cout << json{{"n", s.n},
                    {"mean_ms", s.mean_ms},
                    {"stddev_ms", s.stddev_ms},
                    {"ci95_low_ms", s.ci_low_ms},
                    {"ci95_high_ms", s.ci_high_ms}}
                   .dump()
            << '\n';
  return 0;
}

int cmd_plot(const fs::path& summary, const fs::path& out, const std::optional<std::string>& codec,
             const std::string& title) {
  const json j = read_json(summary);
  const auto series = series_from_summary(j, codec);
  if (series.empty()) throw ConfigError("summary contains no curves to plot");
  std::string ylabel = "quality";
  if (!j.at("curves").empty()) ylabel = j.at("curves").front().value("quality_source", ylabel);
  std::ofstream(out) << render_svg(series, title, "bpp", ylabel);
  return 0;
}

int cmd_export_assets(const std::vector<std::string>& args) {
  fs::path script;
  if (const char* env = std::getenv("SEMFILTER_EXPORT_SCRIPT"); env != nullptr && *env != '\0') {
    script = env;
  } else {
    script = fs::path(SEMFILTER_SOURCE_DIR) / "model_export" / "export_assets.py";
  }
  if (!fs::exists(script)) {
    throw ConfigError("export script not found at " + script.string() +
                      " (the model export component is not installed; set SEMFILTER_EXPORT_SCRIPT)");
  }
  std::vector<std::string> argv{"python3", script.string()};
  argv.insert(argv.end(), args.begin(), args.end());
  std::vector<char*> cargv;
  for (auto& s : argv) cargv.push_back(s.data());
  cargv.push_back(nullptr);
  std::cout.flush();
  ::execvp(cargv[0], cargv.data());
  throw IoError("cannot run python3 for " + script.string());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prompt-guided image prefiltering for machine-oriented compression"};
  app.require_subcommand(1);

  RunOptions run_opts;

  FilterArgs fa;
  auto* filter = app.add_subcommand("filter", "prefilter one image for a prompt");
  filter->add_option("--image", fa.image, "input image")->required();
  filter->add_option("--prompt", fa.prompt, "task prompt");
  filter->add_option("--out", fa.out, "output PNG (or .ppm)")->required();
  filter->add_option("--dump-scores", fa.dump_scores, "write the score lattice as a grayscale PNG");
  filter->add_option("--dump-sigma", fa.dump_sigma, "write the sigma lattice as a grayscale PNG");
  run_opts.add_to(filter);

  EncodeArgs ea;
  auto* encode = app.add_subcommand("encode", "prefilter and encode one image");
  encode->add_option("--image", ea.image, "input image")->required();
  encode->add_option("--prompt", ea.prompt, "task prompt");
  encode->add_option("--codec", ea.codec, "jpeg, hevc, vvc or a JSON template path");
  encode->add_option("--q", ea.quality, "quality factor or QP")->required();
  encode->add_option("--out", ea.out, "bitstream output path")->required();
  encode->add_option("--recon", ea.recon, "write the decoded reconstruction");
  encode->add_flag("--no-prefilter", ea.no_prefilter, "encode the resized input without filtering");
  run_opts.add_to(encode);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "rate-quality benchmark over a manifest");
  bench->add_option("--manifest", ba.manifest, "JSONL manifest")->required();
  bench->add_option("--codecs", ba.codecs, "comma-separated codec list");
  bench->add_option("--qualities", ba.qualities, "quality list, optionally per codec: jpeg=10,30,50");
  bench->add_option("--modes", ba.modes, "none, prefilter, gaussian(s), downsample(r)");
  bench->add_option("--out-dir", ba.out_dir, "output directory");
  bench->add_option("--anchor", ba.anchor, "anchor mode for BD-rate");
  bench->add_option("--method", ba.method, "BD-rate interpolation: pchip or cubic");
  bench->add_option("--workers", ba.workers, "parallel entries (0 = all cores)");
  bench->add_flag("--keep-bitstreams", ba.keep_bitstreams, "keep every bitstream under out-dir/bitstreams");
  bench->add_option("--accuracy", ba.accuracy, "CSV 'label,accuracy' to use instead of the fidelity proxy");
  run_opts.add_to(bench);

  fs::path bd_anchor;
  fs::path bd_test;
  std::string bd_method = "pchip";
  auto* bdrate = app.add_subcommand("bdrate", "BD-rate between two 'bpp,quality' CSV curves");
  bdrate->add_option("--anchor", bd_anchor, "anchor curve CSV")->required();
  bdrate->add_option("--test", bd_test, "test curve CSV")->required();
  bdrate->add_option("--method", bd_method, "pchip or cubic");

  fs::path lat_manifest;
  std::optional<std::string> lat_prompt;
  auto* latency = app.add_subcommand("latency", "prefilter latency over at least 30 images");
  latency->add_option("--manifest", lat_manifest, "JSONL manifest")->required();
  latency->add_option("--prompt", lat_prompt, "prompt for every image instead of the manifest prompts");
  run_opts.add_to(latency);

  fs::path plot_summary;
  fs::path plot_out;
  std::optional<std::string> plot_codec;
  std::string plot_title = "rate-quality";
  auto* plot = app.add_subcommand("plot", "SVG chart from a benchmark summary.json");
  plot->add_option("--summary", plot_summary, "summary.json from bench")->required();
  plot->add_option("--out", plot_out, "output SVG")->required();
  plot->add_option("--codec", plot_codec, "only this codec");
  plot->add_option("--title", plot_title, "chart title");

  std::vector<std::string> export_args;
  auto* export_assets = app.add_subcommand("export-assets", "run the model export script, if installed");
  export_assets->allow_extras();
  export_assets->add_option("args", export_args, "arguments passed to the script");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*filter) return cmd_filter(run_opts, fa);
    if (*encode) return cmd_encode(run_opts, ea);
    if (*bench) return cmd_bench(run_opts, ba);
    if (*bdrate) return cmd_bdrate(bd_anchor, bd_test, bd_method);
    if (*latency) return cmd_latency(run_opts, lat_manifest, lat_prompt);
    if (*plot) return cmd_plot(plot_summary, plot_out, plot_codec, plot_title);
    if (*export_assets) {
      auto extras = export_assets->remaining();
      export_args.insert(export_args.end(), extras.begin(), extras.end());
      return cmd_export_assets(export_args);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(ErrorKind::Config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
