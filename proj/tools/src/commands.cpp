#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "klcpd/blobs.hpp"
#include "klcpd/error.hpp"
#include "klcpd/experiment.hpp"
#include "klcpd/model_io.hpp"
#include "klcpd/series_io.hpp"
#include "manifest.hpp"
#include "run_config.hpp"

namespace fs = std::filesystem;

namespace klcpd::cli {

namespace {

constexpr const char* kSeriesFile = "series.csv";
constexpr const char* kCheckpointFile = "checkpoint.bin";
constexpr const char* kLogFile = "train_log.jsonl";
constexpr const char* kScoresFile = "scores.csv";
constexpr const char* kMetricsFile = "metrics.txt";
constexpr const char* kPowerFile = "power.csv";

std::string bounds_string(const std::array<std::size_t, 4>& b) {
  return std::to_string(b[0]) + "," + std::to_string(b[1]) + "," + std::to_string(b[2]) + "," +
         std::to_string(b[3]);
}

std::array<std::size_t, 4> parse_bounds(const std::string& text) {
  std::array<std::size_t, 4> b{};
  std::istringstream in(text);
  std::string item;
  std::size_t i = 0;
  while (std::getline(in, item, ',')) {
    if (i == 4) throw ConfigError("bounds: expected 4 comma-separated indices");
    try {
      std::size_t pos = 0;
      b[i] = std::stoull(item, &pos);
      if (pos != item.size()) throw ConfigError("bounds: bad index '" + item + "'");
    } catch (const std::logic_error&) {
      throw ConfigError("bounds: bad index '" + item + "'");
    }
    ++i;
  }
  if (i != 4) throw ConfigError("bounds: expected 4 comma-separated indices");
  for (std::size_t k = 1; k < 4; ++k)
    if (b[k] < b[k - 1]) throw ConfigError("bounds must be non-decreasing");
  return b;
}

NoiseDist parse_noise(const std::string& name) {
  if (name == "normal") return NoiseDist::normal;
  if (name == "uniform") return NoiseDist::uniform;
  throw ConfigError("unknown noise distribution '" + name + "' (normal, uniform)");
}

ToleranceSide parse_side(const std::string& name) {
  if (name == "forward") return ToleranceSide::forward;
  if (name == "both") return ToleranceSide::both;
  throw ConfigError("unknown tolerance side '" + name + "' (forward, both)");
}

void require(const std::string& value, const std::string& flag) {
  if (value.empty()) throw ConfigError(flag + " is required");
}

fs::path prepare_out(const std::string& out) {
  require(out, "--out");
  fs::create_directories(out);
  return fs::path(out);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot write '" + path.string() + "'");
  f << text;
}

std::string lookup(const std::map<std::string, std::string>& m, const std::string& key, const std::string& fallback) {
  const auto it = m.find(key);
  return it == m.end() ? fallback : it->second;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw DataError("bad number for " + what + ": '" + s + "'");
}

std::size_t to_size(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const std::size_t v = std::stoull(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw DataError("bad integer for " + what + ": '" + s + "'");
}

// -- generate ---------------------------------------------------------------

struct GenerateOpts {
  DatasetSpec spec;
  std::string out;
};

void add_generate(CLI::App& sub, GenerateOpts& o) {
  sub.add_option("--dataset", o.spec.name, "jumping-mean, scaling-variance, gaussian-mixtures, highdim-variance, blobs");
  sub.add_option("--seed", o.spec.seed);
  sub.add_option("--length", o.spec.length, "series length (sample count for blobs)");
  sub.add_option("--d", o.spec.d, "dimension of highdim-variance");
  sub.add_option("--epsilon", o.spec.epsilon, "blob eigenvalue ratio");
  sub.add_option("--out", o.out, "output directory");
}

int run_generate(const CLI::App& sub, const GenerateOpts& o) {
  const LabeledSeries s = make_dataset(o.spec);
  const fs::path dir = prepare_out(o.out);
  const fs::path series = dir / kSeriesFile;
  write_labeled_series(series, s);
  Manifest m("generate", resolved_config(sub));
  m.set("manifest.seed", std::to_string(o.spec.seed));
  m.set("manifest.sha1.series", git_blob_sha1(series));
  m.set("manifest.sha1.labels", git_blob_sha1(labels_path(series)));
  m.write(dir);
  std::cout << series.string() << ": T=" << s.length() << " d=" << s.dim() << " labels=" << s.labels.size()
            << "\n";
  return kExitOk;
}

// -- train ------------------------------------------------------------------

struct TrainOpts {
  std::string input;
  std::string out;
  std::string mode = "klcpd";
  std::string noise = "normal";
  std::optional<double> sigma2;
  TrainConfig cfg;
  SplitFractions split;
};

void add_split_options(CLI::App& sub, SplitFractions& f) {
  sub.add_option("--split-train", f.train);
  sub.add_option("--split-val", f.val);
  sub.add_option("--split-test", f.test);
}

void add_train(CLI::App& sub, TrainOpts& o) {
  sub.add_option("--input", o.input, "series CSV");
  sub.add_option("--out", o.out, "output directory");
  sub.add_option("--mode", o.mode, "dataspace, codespace, negsample, klcpd");
  sub.add_option("--lr", o.cfg.lr);
  sub.add_option("--clip", o.cfg.clip_c);
  sub.add_option("--n-c", o.cfg.n_c, "kernel steps per generator step");
  sub.add_option("--lambda", o.cfg.lambda);
  sub.add_option("--beta", o.cfg.beta);
  sub.add_option("--epsilon-stop", o.cfg.epsilon_stop);
  sub.add_option("--max-epochs", o.cfg.max_epochs);
  sub.add_option("--batch", o.cfg.batch);
  sub.add_option("--w", o.cfg.w, "window length");
  sub.add_option("--d-h", o.cfg.d_h, "encoder state size");
  sub.add_option("--noise", o.noise, "generator noise: normal, uniform");
  sub.add_option("--negsample-scale", o.cfg.negsample_scale);
  sub.add_option("--steps-per-epoch", o.cfg.steps_per_epoch, "0 = ceil(pairs / batch)");
  sub.add_option("--sigma2", o.sigma2, "fixed bandwidth; default is the per-pair median heuristic");
  sub.add_option("--seed", o.cfg.seed);
  add_split_options(sub, o.split);
}

int run_train(const CLI::App& sub, TrainOpts& o) {
  require(o.input, "--input");
  TrainConfig cfg = o.cfg;
  cfg.mode = parse_score_mode(o.mode);
  cfg.noise = parse_noise(o.noise);
  cfg.sigma2 = o.sigma2;
  cfg.validate();
  o.split.validate();

  const Matrix values = read_series_csv(o.input);
  const auto bounds = split_bounds(values.rows(), o.split);
  if (bounds[1] < 2 * cfg.w) throw ParameterError("training split shorter than two windows");
  const NormalizedSeries norm = normalize(values, bounds[1]);
  const TrainResult fitted = fit(norm.values.slice_rows(0, bounds[1]), cfg);

  const fs::path dir = prepare_out(o.out);
  write_text(dir / kLogFile, fitted.log.to_jsonl());
  Manifest m("train", resolved_config(sub));
  m.add_input("series", o.input);
  m.set("manifest.seed", std::to_string(cfg.seed));
  m.set("manifest.bounds", bounds_string(bounds));
  m.set("manifest.epochs", std::to_string(fitted.log.epochs.size()));
  m.set("manifest.stopped_early", fitted.log.stopped_early ? "true" : "false");
  if (fitted.log.aborted) {
    m.set("manifest.aborted", fitted.log.abort_reason);
    m.write(dir);
    std::cerr << "training aborted: " << fitted.log.abort_reason << "\n";
    return kExitNumeric;
  }

  std::map<std::string, std::string> meta;
  meta["mode"] = to_string(cfg.mode);
  meta["w"] = std::to_string(cfg.w);
  meta["seed"] = std::to_string(cfg.seed);
  meta["split.train"] = format_double(o.split.train);
  meta["split.val"] = format_double(o.split.val);
  meta["split.test"] = format_double(o.split.test);
  if (cfg.sigma2) meta["sigma2"] = format_double(*cfg.sigma2);
  const fs::path ckpt = dir / kCheckpointFile;
  save_checkpoint(make_model_checkpoint(fitted.state, norm.transform, meta), ckpt);
  m.set("manifest.sha1.checkpoint", git_blob_sha1(ckpt));
  m.write(dir);
  std::cout << "trained " << to_string(cfg.mode) << " for " << fitted.log.epochs.size() << " epochs"
            << (fitted.log.stopped_early ? " (stopped early)" : "") << " -> " << ckpt.string() << "\n";
  return kExitOk;
}

// -- score ------------------------------------------------------------------

struct ScoreOpts {
  std::string input;
  std::string checkpoint;
  std::string out;
  std::optional<std::string> mode;
  std::optional<std::size_t> w;
  std::size_t stride = 1;
  std::optional<double> sigma2;
  std::optional<double> split_train;
  std::optional<double> split_val;
  std::optional<double> split_test;
};

void add_score(CLI::App& sub, ScoreOpts& o) {
  sub.add_option("--input", o.input, "series CSV");
  sub.add_option("--checkpoint", o.checkpoint, "trained model; optional for dataspace");
  sub.add_option("--out", o.out, "output directory");
  sub.add_option("--mode", o.mode, "defaults to the checkpoint's mode, else dataspace");
  sub.add_option("--w", o.w, "window length; defaults to the training window");
  sub.add_option("--stride", o.stride);
  sub.add_option("--sigma2", o.sigma2, "fixed bandwidth; defaults to the training setting");
  sub.add_option("--split-train", o.split_train);
  sub.add_option("--split-val", o.split_val);
  sub.add_option("--split-test", o.split_test);
}

int run_score(const CLI::App& sub, const ScoreOpts& o) {
  require(o.input, "--input");
  std::optional<SavedModel> model;
  if (!o.checkpoint.empty()) model = read_model_checkpoint(load_checkpoint(o.checkpoint));
  const std::map<std::string, std::string> meta = model ? model->meta : std::map<std::string, std::string>{};

  const ScoreMode mode = parse_score_mode(o.mode.value_or(lookup(meta, "mode", "dataspace")));
  ScoreConfig sc;
  sc.w = o.w.value_or(meta.count("w") ? to_size(meta.at("w"), "checkpoint w") : kDefaultWindow);
  sc.stride = o.stride;
  sc.sigma2 = o.sigma2;
  if (!sc.sigma2 && meta.count("sigma2")) sc.sigma2 = to_double(meta.at("sigma2"), "checkpoint sigma2");
  SplitFractions split;
  if (meta.count("split.train")) {
    split.train = to_double(meta.at("split.train"), "checkpoint split");
    split.val = to_double(meta.at("split.val"), "checkpoint split");
    split.test = to_double(meta.at("split.test"), "checkpoint split");
  }
  split.train = o.split_train.value_or(split.train);
  split.val = o.split_val.value_or(split.val);
  split.test = o.split_test.value_or(split.test);
  split.validate();

  const Matrix values = read_series_csv(o.input);
  const auto bounds = split_bounds(values.rows(), split);
  Matrix x;
  if (model) {
    if (model->state.dk.d != values.cols())
      throw DataError("series has " + std::to_string(values.cols()) + " columns, checkpoint expects " +
                      std::to_string(model->state.dk.d));
    x = model->transform.apply(values);
  } else {
    x = normalize(values, bounds[1]).values;
  }
  const ScoreSeries scores = score(x, mode, model ? &model->state.dk : nullptr, sc);

  const fs::path dir = prepare_out(o.out);
  const fs::path path = dir / kScoresFile;
  write_scores_csv(path, scores);
  Manifest m("score", resolved_config(sub));
  m.add_input("series", o.input);
  if (model) m.add_input("checkpoint", o.checkpoint);
  m.set("manifest.seed", lookup(meta, "seed", "none"));
  m.set("manifest.mode", to_string(mode));
  m.set("manifest.w", std::to_string(sc.w));
  m.set("manifest.sigma2", sc.sigma2 ? format_double(*sc.sigma2) : "median");
  m.set("manifest.bounds", bounds_string(bounds));
  m.set("manifest.sha1.scores", git_blob_sha1(path));
  m.write(dir);
  std::cout << "scored " << scores.size() << " windows (" << to_string(mode) << ") -> " << path.string() << "\n";
  return kExitOk;
}

// -- eval -------------------------------------------------------------------

struct EvalOpts {
  std::string scores;
  std::string labels;
  std::string out;
  std::size_t tolerance = 10;
  std::string side = "forward";
  std::string bounds;
};

void add_eval(CLI::App& sub, EvalOpts& o) {
  sub.add_option("--scores", o.scores, "scores CSV");
  sub.add_option("--labels", o.labels, "labels file");
  sub.add_option("--out", o.out, "output directory");
  sub.add_option("--tolerance", o.tolerance, "steps after a label counted as positive");
  sub.add_option("--side", o.side, "forward or both");
  sub.add_option("--bounds", o.bounds, "b0,b1,b2,b3; defaults to the score manifest");
}

int run_eval(const CLI::App& sub, const EvalOpts& o) {
  require(o.scores, "--scores");
  require(o.labels, "--labels");
  const AucConfig cfg{o.tolerance, parse_side(o.side)};
  const ScoreSeries scores = read_scores_csv(o.scores);
  const std::vector<std::size_t> labels = read_labels(o.labels);

  KeyValues upstream;
  const fs::path score_manifest = fs::path(o.scores).parent_path() / kManifestFile;
  if (fs::exists(score_manifest)) upstream = read_key_values(score_manifest);
  std::optional<std::array<std::size_t, 4>> bounds;
  if (!o.bounds.empty())
    bounds = parse_bounds(o.bounds);
  else if (upstream.count("manifest.bounds"))
    bounds = parse_bounds(upstream.at("manifest.bounds"));

  KeyValues metrics;
  auto put = [&](const std::string& key, std::size_t begin, std::size_t end) {
    try {
      metrics[key] = format_double(auc_in_range(scores, labels, begin, end, cfg));
    } catch (const UndefinedAucError&) {
      metrics[key] = "undefined";
    }
  };
  put("auc_all", 0, std::numeric_limits<std::size_t>::max());
  if (bounds) {
    put("auc_val", (*bounds)[1], (*bounds)[2]);
    put("auc_test", (*bounds)[2], (*bounds)[3]);
    metrics["bounds"] = bounds_string(*bounds);
  }
  metrics["n_scores"] = std::to_string(scores.size());
  metrics["n_labels"] = std::to_string(labels.size());
  metrics["tolerance"] = std::to_string(o.tolerance);
  metrics["side"] = o.side;

  const fs::path dir = prepare_out(o.out);
  const fs::path path = dir / kMetricsFile;
  write_key_values(path, metrics);
  Manifest m("eval", resolved_config(sub));
  m.add_input("scores", o.scores);
  m.add_input("labels", o.labels);
  m.set("manifest.seed", lookup(upstream, "manifest.seed", "none"));
  m.set("manifest.sha1.metrics", git_blob_sha1(path));
  m.write(dir);
  for (const auto& [k, v] : metrics) std::cout << k << "=" << v << "\n";
  return kExitOk;
}

// -- blobs ------------------------------------------------------------------

struct BlobsOpts {
  BlobExperimentConfig cfg;
  std::vector<std::string> selectors{"median", "max-ratio-full", "max-ratio-sparse", "surrogate"};
  std::string out;
};

void add_blobs(CLI::App& sub, BlobsOpts& o) {
  sub.add_option("--eps-q", o.cfg.epsilon_q);
  sub.add_option("--eps-g", o.cfg.epsilon_g, "surrogate eigenvalue ratio");
  sub.add_option("--m", o.cfg.m, "test samples per side");
  sub.add_option("--sparse-m", o.cfg.sparse_m);
  sub.add_option("--trials", o.cfg.trials);
  sub.add_option("--perms", o.cfg.n_permutations);
  sub.add_option("--bootstrap", o.cfg.bootstrap);
  sub.add_option("--alpha", o.cfg.alpha);
  sub.add_option("--lambda", o.cfg.lambda);
  sub.add_option("--n-bandwidths", o.cfg.n_bandwidths);
  sub.add_option("--sigma-min", o.cfg.sigma_min);
  sub.add_option("--sigma-max", o.cfg.sigma_max);
  sub.add_option("--seed", o.cfg.seed);
  sub.add_option("--selectors", o.selectors)->delimiter(',');
  sub.add_option("--out", o.out, "output directory");
}

int run_blobs(const CLI::App& sub, const BlobsOpts& o) {
  o.cfg.validate();
  std::vector<BlobSelector> selectors;
  for (const auto& s : o.selectors) selectors.push_back(parse_blob_selector(s));
  if (selectors.empty()) throw ConfigError("--selectors is empty");
  const fs::path dir = prepare_out(o.out);
  const auto rows = run_blob_experiment(o.cfg, selectors);

  std::string csv = "selector,power\n";
  for (const auto& r : rows) csv += to_string(r.selector) + "," + format_double(r.power) + "\n";
  const fs::path path = dir / kPowerFile;
  write_text(path, csv);
  Manifest m("blobs", resolved_config(sub));
  m.set("manifest.seed", std::to_string(o.cfg.seed));
  m.set("manifest.sha1.power", git_blob_sha1(path));
  m.write(dir);
  std::cout << csv;
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"klcpd: kernel change-point detection with learned deep kernels"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  GenerateOpts gen;
  TrainOpts train;
  ScoreOpts sco;
  EvalOpts ev;
  BlobsOpts blobs;
  std::string config;

  struct Entry {
    CLI::App* sub;
    std::function<int(const CLI::App&)> run;
  };
  std::vector<Entry> entries;
  auto add = [&](const char* name, const char* help, auto&& setup, std::function<int(const CLI::App&)> run) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "flat key=value file; flags take precedence");
    setup(*sub);
    entries.push_back({sub, std::move(run)});
  };
  add("generate", "write a synthetic series and its labels", [&](CLI::App& s) { add_generate(s, gen); },
      [&](const CLI::App& s) { return run_generate(s, gen); });
  add("train", "fit a kernel on the training split", [&](CLI::App& s) { add_train(s, train); },
      [&](const CLI::App& s) { return run_train(s, train); });
  add("score", "score every window pair of a series", [&](CLI::App& s) { add_score(s, sco); },
      [&](const CLI::App& s) { return run_score(s, sco); });
  add("eval", "AUC of a score file against labels", [&](CLI::App& s) { add_eval(s, ev); },
      [&](const CLI::App& s) { return run_eval(s, ev); });
  add("blobs", "test power of kernel selectors on the blob problem", [&](CLI::App& s) { add_blobs(s, blobs); },
      [&](const CLI::App& s) { return run_blobs(s, blobs); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (auto& e : entries) {
      if (!e.sub->parsed()) continue;
      if (!config.empty()) apply_config_file(*e.sub, config);
      return e.run(*e.sub);
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ParameterError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const Error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("klcpd");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

}  // namespace klcpd::cli
