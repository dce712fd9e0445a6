// Acceptance run: one PASS/FAIL line per criterion 1-10.
//
//   klcpd_acceptance [--only 1,4,9] [--strict] [--report path]
//
// Without --strict the exit code only reflects whether every selected
// criterion could be evaluated; the verdicts are in the printed lines.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "commands.hpp"
#include "klcpd/blobs.hpp"
#include "klcpd/error.hpp"
#include "klcpd/experiment.hpp"
#include "klcpd/mmdstats.hpp"
#include "klcpd/series_io.hpp"
#include "klcpd/tstest.hpp"
#include "../unit/fd_check.hpp"

using namespace klcpd;
namespace fs = std::filesystem;

namespace {

// Seeds here never overlap the ones used while tuning defaults (101+).
constexpr std::uint64_t kSeedBase = 20000;

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string list(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt("%.3f", v[i]);
  return s + "]";
}

Matrix normal_sample(std::size_t n, double mean, Rng& rng) {
  std::normal_distribution<double> z(mean, 1.0);
  Matrix m(n, 1);
  for (double& v : m.values()) v = z(rng);
  return m;
}

// -- 1 ----------------------------------------------------------------------

Verdict gradient_check() {
  double worst = 0.0, smallest_norm = std::numeric_limits<double>::infinity();
  for (std::uint64_t i = 0; i < 20; ++i) {
    const std::uint64_t seed = kSeedBase + i;
    TrainConfig cfg;
    cfg.d_h = 3;
    cfg.w = 4;
    cfg.seed = seed;
    TrainState st = init_state(2, cfg);
    Rng rng(derive_seed(seed, 1));
    std::normal_distribution<double> z(0.0, 1.0);
    Matrix x(24, 2);
    for (double& v : x.values()) v = z(rng);
    const auto starts = sample_starts(x.rows(), cfg.w, 3, rng);
    const PairBatch batch = make_batch(x, starts, cfg.w);
    ObjectiveInputs in;
    in.batch = &batch;
    in.omega = sample_noise(NoiseDist::normal, batch.size(), cfg.d_h, rng);
    in.lambda = 0.7;
    in.beta = 0.3;
    // The median bandwidth is detached: freeze it at the base point.
    in.sigma2 = evaluate_objective(st.dk, st.gen, in, {}).sigma2;
    const auto rep = testing::fd_compare(
        {&st.dk.encoder, &st.dk.decoder, &st.gen.theta_e, &st.gen.theta_d},
        [&] { evaluate_objective(st.dk, st.gen, in, {true, true, true}); },
        [&] { return evaluate_objective(st.dk, st.gen, in, {}).objective; });
    worst = std::max(worst, rep.rel_error);
    smallest_norm = std::min(smallest_norm, rep.grad_norm);
  }
  return {worst <= 1e-5 && smallest_norm > 0.0,
          "20 seeds, max relative error " + fmt("%.2e", worst) + ", min |grad| " + fmt("%.2e", smallest_norm)};
}

// -- 2 ----------------------------------------------------------------------

Verdict null_unbiasedness() {
  const std::size_t draws = 1000, m = 50;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < draws; ++i) {
    Rng rng(derive_seed(kSeedBase + 2, i));
    const Matrix x = normal_sample(m, 0.0, rng);
    const Matrix y = normal_sample(m, 0.0, rng);
    const double v = mmd2_unbiased(x, y, RbfKernel(median_heuristic(x, y)));
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / draws;
  const double se = std::sqrt((sum2 / draws - mean * mean) / (draws - 1));
  return {std::abs(mean) <= 3.0 * se,
          "mean " + fmt("%.3e", mean) + ", SE " + fmt("%.3e", se) + ", |mean|/SE " + fmt("%.2f", std::abs(mean) / se)};
}

// -- 3 ----------------------------------------------------------------------

Verdict type_one() {
  const Sampler p = [](std::size_t m, Rng& rng) { return normal_sample(m, 0.0, rng); };
  const KernelChooser chooser = [&p](Rng& rng) {
    const Matrix a = p(50, rng), b = p(50, rng);
    return RbfKernel(median_heuristic(a, b));
  };
  const TestConfig cfg{0.05, 200, 50};
  const double rate = estimate_power(p, p, chooser, cfg, 1000, kSeedBase + 3);
  return {rate >= 0.03 && rate <= 0.07, "rejection rate " + fmt("%.3f", rate) + " over 1000 trials"};
}

// -- 4 ----------------------------------------------------------------------

Verdict blob_ordering() {
  BlobExperimentConfig cfg;
  cfg.seed = kSeedBase + 4;
  const auto rows = run_blob_experiment(cfg);
  double power[4] = {};
  for (const auto& r : rows) power[static_cast<int>(r.selector)] = r.power;
  const double med = power[0], full = power[1], sparse = power[2], sur = power[3];
  const bool a = full >= med, b = sur >= sparse + 0.05;
  return {a && b, "median " + fmt("%.2f", med) + ", max-ratio-full " + fmt("%.2f", full) + ", max-ratio-sparse " +
                      fmt("%.2f", sparse) + ", surrogate " + fmt("%.2f", sur) + "; full>=median " +
                      (a ? "yes" : "no") + ", surrogate>=sparse+0.05 " + (b ? "yes" : "no")};
}

// -- 5-8 --------------------------------------------------------------------

double test_auc(const LabeledSeries& series, ScoreMode mode, std::uint64_t seed) {
  ExperimentConfig cfg;
  cfg.train.mode = mode;
  cfg.train.seed = seed;
  return run_experiment(series, cfg).test_auc;
}

struct ModeAucs {
  std::vector<double> dataspace, codespace, klcpd;
};

ModeAucs sweep(const std::string& dataset, std::size_t d, std::size_t seeds, std::uint64_t base,
               bool with_codespace) {
  ModeAucs out;
  for (std::size_t i = 0; i < seeds; ++i) {
    DatasetSpec spec;
    spec.name = dataset;
    spec.d = d;
    spec.seed = base + i;
    const LabeledSeries s = make_dataset(spec);
    out.dataspace.push_back(test_auc(s, ScoreMode::dataspace, spec.seed));
    if (with_codespace) out.codespace.push_back(test_auc(s, ScoreMode::codespace, spec.seed));
    out.klcpd.push_back(test_auc(s, ScoreMode::klcpd, spec.seed));
    std::fprintf(stderr, "  %s d=%zu seed %llu: dataspace %.3f%s klcpd %.3f\n", dataset.c_str(), d,
                 static_cast<unsigned long long>(spec.seed), out.dataspace.back(),
                 with_codespace ? (" codespace " + fmt("%.3f", out.codespace.back())).c_str() : "",
                 out.klcpd.back());
  }
  return out;
}

Verdict jumping_mean() {
  const ModeAucs r = sweep("jumping-mean", 1, 5, kSeedBase + 500, false);
  const double k = median(r.klcpd), ds = median(r.dataspace);
  return {k >= 0.85 && k - ds >= 0.05, "median test AUC klcpd " + fmt("%.4f", k) + " " + list(r.klcpd) +
                                           ", dataspace " + fmt("%.4f", ds) + " " + list(r.dataspace) +
                                           ", margin " + fmt("%+.4f", k - ds) + " (need >= 0.85 and >= +0.05)"};
}

Verdict scaling_variance() {
  const ModeAucs r = sweep("scaling-variance", 1, 5, kSeedBase + 600, false);
  const double k = median(r.klcpd), ds = median(r.dataspace);
  return {k >= 0.78, "median test AUC klcpd " + fmt("%.4f", k) + " " + list(r.klcpd) + " (need >= 0.78); dataspace " +
                         fmt("%.4f", ds)};
}

Verdict gaussian_mixtures() {
  const ModeAucs r = sweep("gaussian-mixtures", 1, 5, kSeedBase + 700, false);
  const double k = median(r.klcpd), ds = median(r.dataspace);
  return {k - ds >= 0.03, "median test AUC klcpd " + fmt("%.4f", k) + " " + list(r.klcpd) + ", dataspace " +
                              fmt("%.4f", ds) + " " + list(r.dataspace) + ", margin " + fmt("%+.4f", k - ds) +
                              " (need >= +0.03)"};
}

Verdict dimensionality() {
  const ModeAucs lo = sweep("highdim-variance", 4, 10, kSeedBase + 800, true);
  const ModeAucs hi = sweep("highdim-variance", 20, 10, kSeedBase + 900, true);
  const double ds4 = median(lo.dataspace), cs4 = median(lo.codespace), kl4 = median(lo.klcpd);
  const double ds20 = median(hi.dataspace), cs20 = median(hi.codespace), kl20 = median(hi.klcpd);
  const bool high = cs20 - ds20 >= 0.10 && kl20 - ds20 >= 0.10;
  const double spread4 = std::max({ds4, cs4, kl4}) - std::min({ds4, cs4, kl4});
  const bool low = spread4 <= 0.05;
  return {high && low, "d=20 dataspace " + fmt("%.3f", ds20) + " codespace " + fmt("%.3f", cs20) + " klcpd " +
                           fmt("%.3f", kl20) + " (need both >= dataspace+0.10: " + (high ? "yes" : "no") +
                           "); d=4 dataspace " + fmt("%.3f", ds4) + " codespace " + fmt("%.3f", cs4) + " klcpd " +
                           fmt("%.3f", kl4) + " (spread " + fmt("%.3f", spread4) + ", need <= 0.05)"};
}

// -- 9 ----------------------------------------------------------------------

Verdict fixtures() {
  std::string detail;
  bool ok = true;

  // Constant series in every mode, with freshly initialised encoders.
  const Matrix constant(120, 1, 3.0);
  const Matrix norm_const = normalize(constant).values;
  for (ScoreMode mode : {ScoreMode::dataspace, ScoreMode::codespace, ScoreMode::negsample, ScoreMode::klcpd}) {
    TrainConfig cfg;
    cfg.mode = mode;
    cfg.seed = kSeedBase + 9;
    const TrainState st = init_state(1, cfg);
    const ScoreSeries s = score(norm_const, mode, &st.dk);
    double worst = 0.0;
    for (double v : s.score) worst = std::max(worst, std::abs(v));
    const bool zero = worst == 0.0;
    ok = ok && zero;
    detail += "constant/" + to_string(mode) + " max|score| " + fmt("%.3g", worst) + (zero ? "" : " (not 0)") + "; ";
  }

  // Step 0 -> 5 at t = 100, dataspace, w = 25.
  Matrix step(200, 1);
  for (std::size_t t = 100; t < 200; ++t) step(t, 0) = 5.0;
  const ScoreSeries s = score(step, ScoreMode::dataspace, nullptr);
  const auto it = std::max_element(s.score.begin(), s.score.end());
  const std::size_t arg = s.t[static_cast<std::size_t>(it - s.score.begin())];
  const bool step_ok = arg >= 95 && arg <= 105;
  ok = ok && step_ok;
  detail += "step argmax t=" + std::to_string(arg) + (step_ok ? "" : " (outside [95,105])") + "; ";

  const Matrix pts = Matrix::from_rows({{0.0}, {2.0}});
  const double value = mmd2_unbiased(pts, pts, RbfKernel(1.0));
  const double expected = std::exp(-2.0) - 1.0;
  const bool mmd_ok = std::abs(value - expected) <= 1e-12;
  ok = ok && mmd_ok;
  detail += "{0,2}/{0,2} mmd " + fmt("%.15f", value) + " vs e^-2-1, |diff| " + fmt("%.1e", std::abs(value - expected));
  return {ok, detail};
}

// -- 10 ---------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism() {
  const fs::path dir = fs::temp_directory_path() / "klcpd_acceptance_c10";
  fs::remove_all(dir);
  auto run = [](std::vector<std::string> args) {
    if (cli::run_cli(args) != 0) throw klcpd::Error("command failed: " + args.front());
  };
  auto p = [&](const char* rel) { return (dir / rel).string(); };
  run({"generate", "--dataset", "jumping-mean", "--length", "1200", "--seed", "5", "--out", p("g")});
  run({"train", "--input", p("g/series.csv"), "--out", p("t"), "--max-epochs", "2", "--seed", "5"});
  run({"score", "--input", p("g/series.csv"), "--checkpoint", p("t/checkpoint.bin"), "--out", p("s")});
  run({"eval", "--scores", p("s/scores.csv"), "--labels", p("g/series.csv.labels"), "--out", p("e")});
  run({"blobs", "--m", "100", "--trials", "10", "--perms", "100", "--seed", "5", "--out", p("b")});
  for (const char* c : {"generate:g", "train:t", "score:s", "eval:e", "blobs:b"}) {
    const std::string spec = c;
    const std::string cmd = spec.substr(0, spec.find(':')), sub = spec.substr(spec.find(':') + 1);
    run({cmd, "--config", p((sub + "/manifest.txt").c_str()), "--out", p((sub + "2").c_str())});
  }
  const std::pair<const char*, const char*> files[] = {{"g/series.csv", "g2/series.csv"},
                                                       {"t/checkpoint.bin", "t2/checkpoint.bin"},
                                                       {"s/scores.csv", "s2/scores.csv"},
                                                       {"e/metrics.txt", "e2/metrics.txt"},
                                                       {"b/power.csv", "b2/power.csv"}};
  std::string detail;
  bool ok = true;
  for (const auto& [a, b] : files) {
    const bool same = !slurp(dir / a).empty() && slurp(dir / a) == slurp(dir / b);
    ok = ok && same;
    detail += std::string(a) + (same ? " identical; " : " DIFFERS; ");
  }
  return {ok, detail + "reruns from manifest.txt"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria 1-10"};
  std::vector<int> only;
  bool strict = false;
  std::string report;
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_flag("--strict", strict, "exit 1 if any criterion fails");
  app.add_option("--report", report, "also write the result lines here");
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"gradient correctness", gradient_check},
      {"estimator unbiasedness", null_unbiasedness},
      {"type-I calibration", type_one},
      {"blob selector ordering", blob_ordering},
      {"jumping-mean", jumping_mean},
      {"scaling-variance", scaling_variance},
      {"gaussian-mixtures", gaussian_mixtures},
      {"dimensionality trend", dimensionality},
      {"exactness fixtures", fixtures},
      {"determinism", determinism},
  };
  const std::set<int> selected(only.begin(), only.end());
  std::ofstream rep;
  if (!report.empty()) rep.open(report);
  int failed = 0, errors = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    std::string line;
    try {
      const Verdict v = criteria[i].second();
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      failed += v.pass ? 0 : 1;
      line = std::string(v.pass ? "PASS" : "FAIL") + " criterion " + std::to_string(id) + " (" + criteria[i].first +
             "): " + v.detail + " [" + fmt("%.1f", secs) + "s]";
    } catch (const std::exception& e) {
      ++errors;
      line = "ERROR criterion " + std::to_string(id) + " (" + criteria[i].first + "): " + e.what();
    }
    std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    if (rep) rep << line << "\n" << std::flush;
  }
  if (errors > 0) return 2;
  return strict && failed > 0 ? 1 : 0;
}
