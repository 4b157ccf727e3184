// Acceptance checks, one line per criterion:  [PASS|FAIL|SKIP] <n> <name>: <detail> (<seconds>)
// Exit status is non-zero when any criterion fails. Skips do not fail the run.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>

#include "semfilter/bdrate.hpp"
#include "semfilter/clip_tokenizer.hpp"
#include "semfilter/codec.hpp"
#include "semfilter/embedder.hpp"
#include "semfilter/error.hpp"
#include "semfilter/evalkit.hpp"
#include "semfilter/pipeline.hpp"
#include "semfilter/prefilter.hpp"
#include "semfilter/prompt.hpp"
#include "semfilter/scorer.hpp"
#include "semfilter/tiler.hpp"
#include "support.hpp"

using namespace semfilter;
namespace t = semfilter::testing;

namespace {

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status;
  std::string detail;
};

Outcome pass(std::string d) { return {Status::Pass, std::move(d)}; }
Outcome fail(std::string d) { return {Status::Fail, std::move(d)}; }

std::string fmt(double v, int prec = 6) {
  std::ostringstream s;
  s.precision(prec);
  s << v;
  return s.str();
}

Eigen::MatrixXf random_unit_columns(int d, int k, std::mt19937& rng) {
  std::normal_distribution<float> g;
  Eigen::MatrixXf m(d, k);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  return l2_normalized(m);
}

Outcome softmax_normalization() {
  std::mt19937 rng(101);
  std::uniform_int_distribution<int> k_dist(1, 64);
  const double scales[] = {1.0, 20.0, 100.0};
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = k_dist(rng);
    const double scale = scales[trial % 3];
    const Eigen::VectorXf text = random_unit_columns(32, 1, rng).col(0);
    const Eigen::VectorXd s = score_tiles(text, random_unit_columns(32, k, rng), scale);
    const double err = std::abs(s.sum() - k) / k;
    worst = std::max(worst, err);
    if (err > 1e-6) return fail("sum off by " + fmt(err * k) + " for k=" + std::to_string(k));
  }
  double uniform_err = 0.0;
  for (int k : {1, 7, 64}) {
    for (double scale : scales) {
      const Eigen::VectorXf text = random_unit_columns(32, 1, rng).col(0);
      const Eigen::MatrixXf same = random_unit_columns(32, 1, rng).replicate(1, k);
      uniform_err = std::max(uniform_err, (score_tiles(text, same, scale).array() - 1.0).abs().maxCoeff());
    }
  }
  if (uniform_err > 1e-9) return fail("uniform case deviates by " + fmt(uniform_err));
  return pass("1000 sets, max relative sum error " + fmt(worst, 3) + ", uniform deviation " + fmt(uniform_err, 3));
}

Outcome sigma_shape() {
  const double s1 = 0.2, smax = 3.0;
  if (sigma_for_score(0.0, s1, smax) != smax) return fail("sigma(0) != sigma_max");
  if (sigma_for_score(1.0, s1, smax) != s1) return fail("sigma(1) != sigma_1");
  const double mid_err = std::abs(sigma_for_score(0.5, s1, smax) - std::sqrt(s1 * smax));
  if (mid_err > 1e-12) return fail("sigma(0.5) off by " + fmt(mid_err));
  double prev = sigma_for_score(0.0, s1, smax);
  for (int i = 1; i <= 30000; ++i) {
    const double s = sigma_for_score(i * 1e-4, s1, smax);
    if (!(s < prev)) return fail("not strictly decreasing at score " + fmt(i * 1e-4));
    prev = s;
  }
  return pass("endpoints exact, midpoint error " + fmt(mid_err, 3) + ", decreasing on 30001 samples of [0, 3]");
}

Outcome filter_oracle() {
  std::mt19937 rng(303);
  int worst = 0;
  for (int b = 0; b < 20; ++b) {
    const Image block = b % 2 ? t::noise_image(224, 224, rng) : t::natural_image(224, 224, rng);
    for (double sigma : {0.2, 1.0, 3.0}) {
      const SigmaGrid grid{224, Eigen::MatrixXd::Constant(1, 1, sigma)};
      const int d = t::max_abs_diff(filter_blocks(block, grid, 11), t::brute_force_blur(block, sigma, 11));
      worst = std::max(worst, d);
      if (d > 1) return fail("block " + std::to_string(b) + " sigma " + fmt(sigma) + " differs by " + std::to_string(d));
    }
  }
  return pass("20 blocks x 3 sigmas, max difference " + std::to_string(worst) + " gray level(s)");
}

Outcome ablation_identity() {
  std::mt19937 rng(404);
  PipelineConfig cfg;
  cfg.use_scoring = false;
  const Prefilter pf(cfg, nullptr);
  const BenchMode baseline{BenchMode::Kind::GlobalGaussian, cfg.sigma_one};
  const int sizes[][2] = {{224, 224}, {300, 200}, {640, 480}, {500, 375}, {1024, 768},
                          {231, 449}, {448, 672}, {97, 333}, {800, 600}, {1280, 720}};
  for (int i = 0; i < 10; ++i) {
    const Image img = i % 3 == 0   ? t::noise_image(sizes[i][0], sizes[i][1], rng)
                      : i % 3 == 1 ? t::texture_image(sizes[i][0], sizes[i][1], rng)
                                   : t::natural_image(sizes[i][0], sizes[i][1], rng);
    const Image ours = pf.run(img, "").filtered;
    const Image base = prepare_mode(baseline, pf, img, "").encoder_input;
    if (!(ours == base)) return fail("fixture " + std::to_string(i) + " differs from the gaussian(" + fmt(cfg.sigma_one) + ") baseline");
  }
  return pass("10 fixtures byte-identical to gaussian(" + fmt(cfg.sigma_one) + ")");
}

// The stub backend is told which tiles matter: a lookup from tile pixels to a
// fixed text-tile cosine. Only the tile at the canvas origin is relevant.
Outcome compression_gain() {
  std::mt19937 rng(505);
  struct Fixture {
    std::string kind;
    Image img;
  };
  std::vector<Fixture> suite;
  for (int i = 0; i < 4; ++i) suite.push_back({"noise", t::noise_image(448, 448, rng)});
  for (int i = 0; i < 3; ++i) suite.push_back({"texture", t::texture_image(448, 448, rng)});
  for (int i = 0; i < 3; ++i) suite.push_back({"natural", t::natural_image(448, 448, rng)});

  const JpegCodec jpeg;
  const int qualities[] = {10, 30, 50, 70, 90};
  double reduction_sum = 0.0;
  int reduction_n = 0;
  double worst_high_fraction = 0.0;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const Image canvas = resize_to_tile_multiple(suite[i].img, 224);
    const PipelineConfig cfg;
    const TileGrid grid = make_grid(canvas.width(), canvas.height(), cfg.tile_size,
                                    select_stride(canvas.width(), canvas.height(), cfg.tile_size, cfg.tile_num, true));
    const Image relevant = crop(canvas, 0, 0, cfg.tile_size, cfg.tile_size);
    auto backend = std::make_shared<StubBackend>(16, 77, [relevant](const Image& tile) { return tile == relevant ? 0.9 : 0.1; });
    const PrefilterResult r = Prefilter(cfg, backend).run(suite[i].img, "the object of interest");
    if (r.grid.count() != grid.count()) return fail("unexpected tile lattice");
    const double high = (r.scores.scores.array() >= 1.0).cast<double>().mean();
    worst_high_fraction = std::max(worst_high_fraction, high);
    if (high > 0.25) return fail("score field marks " + fmt(high * 100, 3) + "% of cells high");

    for (int q : qualities) {
      const double plain = jpeg.encode(r.canvas, q).bpp;
      const double filtered = jpeg.encode(r.filtered, q).bpp;
      if (!(filtered < plain)) {
        return fail(suite[i].kind + " image " + std::to_string(i) + " q" + std::to_string(q) + ": " + fmt(filtered) +
                    " >= " + fmt(plain) + " bpp");
      }
      if (suite[i].kind != "natural") {
        reduction_sum += 1.0 - filtered / plain;
        ++reduction_n;
      }
    }
  }
  const double mean = reduction_sum / reduction_n;
  if (mean < 0.10) return fail("mean noise/texture reduction " + fmt(mean * 100, 3) + "% < 10%");
  return pass("bpp lower at every quality; mean noise/texture reduction " + fmt(mean * 100, 4) + "%, high cells <= " +
              fmt(worst_high_fraction * 100, 3) + "%");
}

Outcome bd_rate_oracle() {
  const RateQualityCurve a("a", {{0.21, 31.0}, {0.48, 44.5}, {1.05, 53.0}, {2.4, 59.5}});
  const double self = bd_rate(a, a);
  if (std::abs(self) > 1e-12) return fail("bd_rate(a, a) = " + fmt(self));

  std::vector<RateQualityPoint> half;
  for (const auto& p : a.points()) half.push_back({p.bpp / 2, p.quality});
  const double h = bd_rate(a, RateQualityCurve("half", half));
  if (std::abs(h + 50.0) > 0.01) return fail("half-rate fixture gives " + fmt(h) + "%");

  // Random 4-point curves against trapezoid integration of a reference interpolant.
  std::mt19937 rng(606);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto random_curve = [&](const std::string& label) {
    std::vector<RateQualityPoint> pts;
    double bpp = 0.1 + 0.2 * u(rng), q = 25 + 10 * u(rng);
    for (int i = 0; i < 4; ++i) {
      pts.push_back({bpp, q});
      bpp *= 1.5 + 1.5 * u(rng);
      q += 3 + 12 * u(rng);
    }
    return RateQualityCurve(label, pts);
  };
  const RateQualityCurve ra = random_curve("anchor");
  const RateQualityCurve rt = random_curve("test");
  auto dense = [](const RateQualityCurve& c, double lo, double hi) {
    std::vector<double> x, y;
    for (const auto& p : c.points()) x.push_back(p.quality), y.push_back(std::log10(p.bpp));
    return t::ReferencePchip(x, y).dense_integral(lo, hi);
  };
  const double lo = std::max(ra.min_quality(), rt.min_quality());
  const double hi = std::min(ra.max_quality(), rt.max_quality());
  const double oracle = (std::pow(10.0, (dense(rt, lo, hi) - dense(ra, lo, hi)) / (hi - lo)) - 1.0) * 100.0;
  const double got = bd_rate(ra, rt);
  if (std::abs(got - oracle) > 0.01) return fail("random fixture " + fmt(got) + "% vs oracle " + fmt(oracle) + "%");

  const auto frozen = t::read_json(t::data_dir() / "oracles.json")["bd_rate"];
  auto from_json = [](const nlohmann::json& j, const std::string& label) {
    std::vector<RateQualityPoint> pts;
    for (std::size_t i = 0; i < j["bpp"].size(); ++i) pts.push_back({j["bpp"][i], j["quality"][i]});
    return RateQualityCurve(label, pts);
  };
  const double scipy = frozen["pchip_percent"];
  const double ours = bd_rate(from_json(frozen["anchor"], "a"), from_json(frozen["test"], "t"));
  if (std::abs(ours - scipy) > 0.01) return fail("frozen fixture " + fmt(ours) + "% vs " + fmt(scipy) + "%");

  return pass("self 0, half-rate " + fmt(h, 8) + "%, random " + fmt(got, 8) + "% vs dense " + fmt(oracle, 8) +
              "%, frozen " + fmt(ours, 8) + "%");
}

Outcome stride_exhaustive() {
  long checks = 0;
  for (int w = 224; w <= 2240; w += 224) {
    for (int h = 224; h <= 2240; h += 224) {
      for (int n = 1; n <= 600; ++n) {
        int best = -1;
        long best_gap = 0;
        for (int s : {224, 112, 56}) {  // larger first: ties keep the larger stride
          const long k = static_cast<long>((w - 224) / s + 1) * ((h - 224) / s + 1);
          const long gap = std::labs(k - n);
          if (best < 0 || gap < best_gap) best = s, best_gap = gap;
        }
        if (select_stride(w, h, 224, n, true) != best) {
          return fail(std::to_string(w) + "x" + std::to_string(h) + " tile_num " + std::to_string(n));
        }
        ++checks;
      }
    }
  }
  return pass(std::to_string(checks) + " configurations agree with brute force");
}

Outcome prompt_budget() {
  const auto prompts = t::read_lines(t::data_dir() / "prompts.txt");
  if (prompts.size() != 50) return fail("corpus has " + std::to_string(prompts.size()) + " prompts");
  const auto tok = ClipTokenizer::from_file(t::data_dir() / "clip_bpe_vocab_16e6.txt.gz");
  // The encoder's own BPE count, and a deliberately expensive counter (one token
  // per two bytes) that forces pruning on most of the corpus.
  const TokenCounter counters[] = {[&](std::string_view s) { return tok.count(s); },
                                   [](std::string_view s) { return (s.size() + 1) / 2 + 2; }};
  int pruned = 0;
  for (const auto& count : counters) {
  for (const auto& p : prompts) {
    const TokenizedPrompt tp = normalize(strip_instructions(p));
    for (std::size_t window : {16u, 32u, 77u}) {
      const std::string out = prune_to_window(tp, window, count);
      if (count(out) > window) return fail("'" + p + "' exceeds window " + std::to_string(window));
      // Survivors form a subsequence of the normalized tokens; recover which were removed.
      std::istringstream words(out);
      std::vector<std::string> kept;
      for (std::string w; words >> w;) kept.push_back(w);
      std::size_t j = 0;
      int min_kept = 99, max_removed = -1;
      for (const auto& tkn : tp.tokens) {
        if (j < kept.size() && kept[j] == tkn.lemma) {
          min_kept = std::min(min_kept, priority(tkn.pos));
          ++j;
        } else {
          max_removed = std::max(max_removed, priority(tkn.pos));
        }
      }
      if (j != kept.size()) {
        // Only a lone truncated word may fail to match.
        if (kept.size() != 1) return fail("output of '" + p + "' is not a token subsequence");
        continue;
      }
      if (max_removed >= 0) ++pruned;
      if (max_removed == priority(PartOfSpeech::Noun) && min_kept < priority(PartOfSpeech::Noun)) {
        return fail("'" + p + "' lost a noun while a lower-priority token remained (window " + std::to_string(window) + ")");
      }
      if (max_removed > min_kept) return fail("'" + p + "' removed a higher class before a lower one");
    }
  }
  }
  return pass("2 counters x 150 prompt/window pairs within budget, " + std::to_string(pruned) + " needed pruning, class order kept");
}

double cosine(const Eigen::VectorXf& a, const Eigen::VectorXf& b) { return a.dot(b) / (a.norm() * b.norm()); }

// Filled disc of the named colour in one quadrant over a grey noise background.
Image quadrant_fixture(int quadrant, const std::array<std::uint8_t, 3>& colour, std::mt19937& rng) {
  Image img = t::noise_image(448, 448, rng);
  for (auto& v : img.pixels()) v = static_cast<std::uint8_t>(100 + v / 8);
  const int cx = (quadrant % 2) * 224 + 112, cy = (quadrant / 2) * 224 + 112;
  for (int y = 0; y < 448; ++y) {
    for (int x = 0; x < 448; ++x) {
      if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= 80 * 80) {
        for (int c = 0; c < 3; ++c) img(x, y, c) = colour[static_cast<std::size_t>(c)];
      }
    }
  }
  return img;
}

Outcome neural_golden() {
  const auto dir = default_model_dir();
  if (!dir) return {Status::Skip, "SEMFILTER_MODEL_DIR not set; exported model assets are required"};
  std::shared_ptr<EmbeddingBackend> backend;
  try {
    backend = load_neural_backend(*dir);
  } catch (const Error& e) {
    return fail(std::string("cannot load model: ") + e.what());
  }
  const auto golden_path = *dir / "golden.json";
  if (!std::filesystem::exists(golden_path)) return fail("no golden.json in " + dir->string());
  const auto golden = t::read_json(golden_path);
  double worst = 1.0;
  for (const auto& g : golden["texts"]) {
    const auto want = g["embedding"].get<std::vector<float>>();
    worst = std::min(worst, cosine(backend->embed_text(g["text"].get<std::string>()),
                                   Eigen::Map<const Eigen::VectorXf>(want.data(), static_cast<Eigen::Index>(want.size()))));
  }
  for (const auto& g : golden["tiles"]) {
    const auto want = g["embedding"].get<std::vector<float>>();
    const std::vector<Image> tile{load_image(*dir / g["image"].get<std::string>())};
    worst = std::min(worst, cosine(backend->embed_images(tile).col(0),
                                   Eigen::Map<const Eigen::VectorXf>(want.data(), static_cast<Eigen::Index>(want.size()))));
  }
  if (worst < 0.999) return fail("golden cosine " + fmt(worst));

  struct Case {
    int quadrant;
    std::string prompt;
    std::array<std::uint8_t, 3> colour;
  };
  const Case cases[] = {{0, "a red circle", {220, 20, 30}},
                        {1, "a blue circle", {20, 40, 230}},
                        {2, "a green circle", {30, 200, 40}},
                        {3, "a yellow circle", {240, 220, 20}},
                        {1, "a purple circle", {140, 30, 180}}};
  std::mt19937 rng(909);
  const Prefilter pf({}, backend);
  int hits = 0;
  for (const auto& c : cases) {
    const PrefilterResult r = pf.run(quadrant_fixture(c.quadrant, c.colour, rng), c.prompt);
    const Eigen::Index h = r.scores.scores.rows() / 2, w = r.scores.scores.cols() / 2;
    double mean[4];
    for (int q = 0; q < 4; ++q) mean[q] = r.scores.scores.block((q / 2) * h, (q % 2) * w, h, w).mean();
    bool top = true;
    for (int q = 0; q < 4; ++q) top &= q == c.quadrant || mean[c.quadrant] > mean[q];
    hits += top;
  }
  if (hits < 4) return fail("golden cosine " + fmt(worst) + " but target quadrant led on " + std::to_string(hits) + "/5");
  return pass("golden cosine >= " + fmt(worst) + ", target quadrant led on " + std::to_string(hits) + "/5");
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
    double budget_s;  // 0 = no runtime bound
  };
  const Criterion criteria[] = {
      {1, "softmax normalization", softmax_normalization, 5.0},
      {2, "sigma endpoints and shape", sigma_shape, 0.0},
      {3, "filter oracle equivalence", filter_oracle, 30.0},
      {4, "ablation identity", ablation_identity, 0.0},
      {5, "compression gain", compression_gain, 120.0},
      {6, "bd-rate oracle", bd_rate_oracle, 0.0},
      {7, "stride selection", stride_exhaustive, 10.0},
      {8, "prompt budget", prompt_budget, 0.0},
      {9, "neural golden check", neural_golden, 0.0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (o.status == Status::Pass && c.budget_s > 0 && secs > c.budget_s) {
      o = fail(o.detail + "; exceeded " + fmt(c.budget_s) + " s budget");
    }
    const char* tag = o.status == Status::Pass ? "PASS" : o.status == Status::Fail ? "FAIL" : "SKIP";
    std::printf("[%s] %d %s: %s (%.2f s)\n", tag, c.id, c.name, o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.status == Status::Fail;
  }
  return failures == 0 ? 0 : 1;
}
