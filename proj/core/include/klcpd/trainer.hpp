#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "klcpd/kernels.hpp"
#include "klcpd/models.hpp"
#include "klcpd/pipeline.hpp"
#include "klcpd/random.hpp"

namespace klcpd {

struct TrainConfig {
  ScoreMode mode = ScoreMode::klcpd;
  double lr = 1e-3;
  double clip_c = 0.01;
  std::size_t n_c = 5;  // kernel steps per generator step
  double lambda = 0.1;
  double beta = 1e-3;
  double epsilon_stop = 1e-3;
  std::size_t max_epochs = 30;
  std::size_t batch = 64;
  std::size_t w = kDefaultWindow;
  std::size_t d_h = 10;
  NoiseDist noise = NoiseDist::normal;
  double negsample_scale = 0.1;  // noise std as a fraction of per-dimension data std
  /// Minibatch steps per epoch; 0 means ceil(pairs / batch).
  std::size_t steps_per_epoch = 0;
  /// Fixed bandwidth; empty uses the per-pair median heuristic.
  std::optional<double> sigma2;
  std::uint64_t seed = 0;

  /// Throws ParameterError on an invalid value.
  void validate() const;
};

/// B window pairs in timestep-major layout: left[t] and right[t] are B x d.
struct PairBatch {
  SeqBatch left;
  SeqBatch right;

  [[nodiscard]] std::size_t size() const noexcept { return left.empty() ? 0 : left.front().rows(); }
  [[nodiscard]] std::size_t window() const noexcept { return left.size(); }
};

/// Pairs X_l = rows [s, s + w), X_r = rows [s + w, s + 2w) for each start s.
PairBatch make_batch(const Matrix& series, std::span<const std::size_t> starts, std::size_t w);
/// `count` starts drawn uniformly from [0, T - 2w].
std::vector<std::size_t> sample_starts(std::size_t length, std::size_t w, std::size_t count, Rng& rng);

/// Where the surrogate windows Z come from.
enum class SurrogateSource { generator, given, none };

struct ObjectiveInputs {
  const PairBatch* batch = nullptr;
  SurrogateSource source = SurrogateSource::generator;
  Matrix omega;            // B x d_h generator noise (source = generator)
  SeqBatch surrogate;      // timestep-major Z (source = given)
  std::vector<double> sigma2;  // one per pair; empty means median heuristic
  double lambda = 0.0;
  double beta = 0.0;
};

/// Which stores receive gradients.
struct Trainable {
  bool phi = false;
  bool psi = false;
  bool theta = false;
};

/// Batch means of the objective terms.
struct ObjectiveValues {
  double objective = 0.0;  // mmd_pg - lambda * mmd_xx - beta * recon
  double mmd_pg = 0.0;     // mmd2(f(X_r), f(Z)); 0 when source = none
  double mmd_xx = 0.0;     // mmd2(f(X_l), f(X_r))
  double recon = 0.0;      // mean per-timestep |v - F(f(v))|^2 over X_l, X_r and Z
  std::vector<double> sigma2;  // bandwidth used per pair
};

/// Evaluates the training objective and, for every store flagged in
/// `which`, leaves d objective / d param in the parameters' grad fields.
/// The bandwidth is treated as a constant.
ObjectiveValues evaluate_objective(DeepKernel& dk, GeneratorParams& gen, const ObjectiveInputs& in, Trainable which);

struct TrainState {
  DeepKernel dk;
  GeneratorParams gen;
  std::vector<double> noise_std;  // per-dimension std used by negsample
};

/// Fresh parameters for a d-dimensional series, seeded from cfg.seed.
TrainState init_state(std::size_t d, const TrainConfig& cfg);

/// One RMSProp ascent step on phi and psi, then phi is clipped to
/// [-clip_c, clip_c]. Generator parameters stay frozen. For codespace this
/// is a descent step on the reconstruction error of X_l and X_r without
/// clipping. Throws NumericError (parameters untouched) if the objective or
/// a gradient is non-finite.
ObjectiveValues kernel_step(const PairBatch& batch, TrainState& state, const TrainConfig& cfg, Rng& rng);

/// One Adam descent step on theta for mmd2(f(X_r), f(Z)); kernel frozen.
ObjectiveValues generator_step(const PairBatch& batch, TrainState& state, const TrainConfig& cfg, Rng& rng);

struct EpochRecord {
  std::size_t epoch = 0;
  double mmd_pg = 0.0;
  double mmd_xx = 0.0;
  double recon = 0.0;
  double objective = 0.0;
  double wallclock = 0.0;  // seconds since fit() started
};

struct TrainLog {
  std::vector<EpochRecord> epochs;
  bool stopped_early = false;
  bool aborted = false;
  std::string abort_reason;

  /// One JSON object per epoch.
  [[nodiscard]] std::string to_jsonl() const;
};

struct TrainResult {
  TrainState state;
  TrainLog log;
};

/// Alternates n_c kernel steps with one generator step over random
/// minibatches. Stops once an epoch's mean mmd_pg <= epsilon_stop, or after
/// max_epochs. negsample skips the generator steps, codespace trains the
/// autoencoder only (no stop rule) and dataspace returns the identity kernel
/// untouched.
TrainResult fit(const Matrix& train_series, const TrainConfig& cfg);

}  // namespace klcpd
