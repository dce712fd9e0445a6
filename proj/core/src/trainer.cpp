#include "klcpd/trainer.hpp"

#include <chrono>
#include <cmath>

#include <json.hpp>

#include "klcpd/error.hpp"
#include "klcpd/ops.hpp"
#include "klcpd/optim.hpp"

namespace klcpd {

void TrainConfig::validate() const {
  if (!(lr > 0.0)) throw ParameterError("lr must be > 0");
  if (!(clip_c > 0.0)) throw ParameterError("clip_c must be > 0");
  if (n_c < 1) throw ParameterError("n_c must be >= 1");
  if (!(lambda >= 0.0)) throw ParameterError("lambda must be >= 0");
  if (!(beta >= 0.0)) throw ParameterError("beta must be >= 0");
  if (!(epsilon_stop > 0.0)) throw ParameterError("epsilon_stop must be > 0");
  if (batch < 1) throw ParameterError("batch must be >= 1");
  if (w < 2) throw ParameterError("w must be >= 2");
  if (d_h < 1) throw ParameterError("d_h must be >= 1");
  if (!(negsample_scale >= 0.0)) throw ParameterError("negsample_scale must be >= 0");
  if (sigma2 && !(*sigma2 > 0.0)) throw ParameterError("sigma2 must be > 0");
}

PairBatch make_batch(const Matrix& series, std::span<const std::size_t> starts, std::size_t w) {
  if (starts.empty()) throw ParameterError("make_batch: empty minibatch");
  std::vector<Matrix> left, right;
  left.reserve(starts.size());
  right.reserve(starts.size());
  for (std::size_t s : starts) {
    if (s + 2 * w > series.rows()) throw ParameterError("make_batch: pair runs past the series end");
    left.push_back(series.slice_rows(s, s + w));
    right.push_back(series.slice_rows(s + w, s + 2 * w));
  }
  return {to_timestep_major(left), to_timestep_major(right)};
}

std::vector<std::size_t> sample_starts(std::size_t length, std::size_t w, std::size_t count, Rng& rng) {
  if (length < 2 * w) throw ParameterError("training series shorter than two windows");
  std::uniform_int_distribution<std::size_t> pick(0, length - 2 * w);
  std::vector<std::size_t> out(count);
  for (auto& s : out) s = pick(rng);
  return out;
}

namespace {

std::vector<Var> as_constants(Graph& g, const SeqBatch& seq) {
  std::vector<Var> out;
  out.reserve(seq.size());
  for (const auto& m : seq) out.push_back(g.constant(m));
  return out;
}

std::vector<Var> encode(DeepKernel& dk, ParamBinder& phi, std::span<const Var> seq) {
  if (dk.kind == EncoderKind::identity) return {seq.begin(), seq.end()};
  return encode_batch(phi, seq);
}

/// Per-pair median heuristic over the pooled encodings of X_l and X_r.
std::vector<double> pair_bandwidths(std::span<const Var> el, std::span<const Var> er) {
  const std::size_t batch = el.front().rows();
  const std::size_t w = el.size();
  const std::size_t k = el.front().cols();
  std::vector<double> out(batch);
  Matrix a(w, k), b(w, k);
  for (std::size_t g = 0; g < batch; ++g) {
    for (std::size_t t = 0; t < w; ++t) {
      const Matrix& lv = el[t].value();
      const Matrix& rv = er[t].value();
      for (std::size_t c = 0; c < k; ++c) {
        a(t, c) = lv(g, c);
        b(t, c) = rv(g, c);
      }
    }
    out[g] = median_heuristic(a, b);
  }
  return out;
}

/// Sum over windows and timesteps of |v - F(f(v))|^2.
Var recon_sum(ParamBinder& psi, std::span<const Var> inputs, std::span<const Var> states) {
  auto rec = reconstruct_batch(psi, states);
  std::vector<Var> parts;
  parts.reserve(rec.size());
  for (std::size_t t = 0; t < rec.size(); ++t) parts.push_back(squared_norm(sub(rec[t], inputs[t])));
  return sum(concat_rows(parts));
}

}  // namespace

ObjectiveValues evaluate_objective(DeepKernel& dk, GeneratorParams& gen, const ObjectiveInputs& in, Trainable which) {
  if (in.batch == nullptr || in.batch->size() == 0) throw ParameterError("evaluate_objective: empty batch");
  const PairBatch& pb = *in.batch;
  const std::size_t batch = pb.size();
  const std::size_t w = pb.window();
  if (w < 2) throw ParameterError("evaluate_objective: window must be >= 2");
  if (in.lambda < 0.0 || in.beta < 0.0) throw ParameterError("evaluate_objective: lambda and beta must be >= 0");
  const bool identity = dk.kind == EncoderKind::identity;
  const bool record = which.phi || which.psi || which.theta;

  Graph g(record);
  ParamBinder phi(g, dk.encoder, which.phi && !identity);
  ParamBinder psi(g, dk.decoder, which.psi && !identity);
  const auto xl = as_constants(g, pb.left);
  const auto xr = as_constants(g, pb.right);

  std::vector<Var> z;
  if (in.source == SurrogateSource::generator) {
    GeneratorBinder theta{ParamBinder(g, gen.theta_e, which.theta), ParamBinder(g, gen.theta_d, which.theta)};
    z = generate_batch(theta, xl, xr, g.constant(in.omega));
  } else if (in.source == SurrogateSource::given) {
    if (in.surrogate.size() != w || in.surrogate.front().rows() != batch)
      throw ShapeError("evaluate_objective: surrogate windows do not match the batch");
    z = as_constants(g, in.surrogate);
  }

  const auto el = encode(dk, phi, xl);
  const auto er = encode(dk, phi, xr);
  ObjectiveValues out;
  if (!in.sigma2.empty()) {
    if (in.sigma2.size() != batch) throw ShapeError("evaluate_objective: need one bandwidth per pair");
    out.sigma2 = in.sigma2;
  } else {
    out.sigma2 = pair_bandwidths(el, er);
  }

  const double inv_batch = 1.0 / static_cast<double>(batch);
  Var er_cat = concat_rows(er);
  Var mmd_xx = scale(sum(grouped_mmd2(concat_rows(el), er_cat, batch, out.sigma2)), inv_batch);
  Var objective = scale(mmd_xx, -in.lambda);
  out.mmd_xx = mmd_xx.value().scalar_value();

  std::vector<Var> ez;
  if (!z.empty()) {
    ez = encode(dk, phi, z);
    Var mmd_pg = scale(sum(grouped_mmd2(er_cat, concat_rows(ez), batch, out.sigma2)), inv_batch);
    objective = add(objective, mmd_pg);
    out.mmd_pg = mmd_pg.value().scalar_value();
  }

  if (!identity) {
    Var rec = add(recon_sum(psi, xl, el), recon_sum(psi, xr, er));
    std::size_t sets = 2;
    if (!z.empty()) {
      rec = add(rec, recon_sum(psi, z, ez));
      ++sets;
    }
    rec = scale(rec, 1.0 / static_cast<double>(sets * batch * w));
    out.recon = rec.value().scalar_value();
    objective = sub(objective, scale(rec, in.beta));
  }

  out.objective = objective.value().scalar_value();
  if (!std::isfinite(out.objective)) throw NumericError("training objective is not finite");
  if (record) g.backward(objective);
  return out;
}

TrainState init_state(std::size_t d, const TrainConfig& cfg) {
  cfg.validate();
  if (d == 0) throw ParameterError("init_state: d must be >= 1");
  Rng rng = make_rng(cfg.seed, 0);
  TrainState s;
  s.dk = cfg.mode == ScoreMode::dataspace ? DeepKernel::identity(d) : DeepKernel::gru(d, cfg.d_h, rng);
  s.gen = GeneratorParams::make(d, cfg.d_h, cfg.noise, rng);
  s.noise_std.assign(d, 1.0);
  return s;
}

namespace {

SeqBatch negative_samples(const PairBatch& batch, const TrainState& state, const TrainConfig& cfg, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  SeqBatch z = batch.left;
  for (auto& step : z)
    for (std::size_t b = 0; b < step.rows(); ++b)
      for (std::size_t c = 0; c < step.cols(); ++c) step(b, c) += cfg.negsample_scale * state.noise_std[c] * n(rng);
  return z;
}

ObjectiveInputs base_inputs(const PairBatch& batch, const TrainConfig& cfg) {
  ObjectiveInputs in;
  in.batch = &batch;
  if (cfg.sigma2) in.sigma2.assign(batch.size(), *cfg.sigma2);
  return in;
}

}  // namespace

ObjectiveValues kernel_step(const PairBatch& batch, TrainState& state, const TrainConfig& cfg, Rng& rng) {
  if (state.dk.kind != EncoderKind::gru) throw StateError("kernel_step: no trainable encoder");
  ObjectiveInputs in = base_inputs(batch, cfg);
  const RmsPropConfig opt{cfg.lr};
  if (cfg.mode == ScoreMode::codespace) {
    in.source = SurrogateSource::none;
    in.beta = 1.0;
    const ObjectiveValues v = evaluate_objective(state.dk, state.gen, in, {true, true, false});
    // Pure autoencoder: the objective is -recon (plus the unused mmd_xx at
    // weight 0), so ascent minimizes the reconstruction error.
    rmsprop_step(state.dk.encoder, opt, Direction::ascent);
    rmsprop_step(state.dk.decoder, opt, Direction::ascent);
    return v;
  }
  in.lambda = cfg.lambda;
  in.beta = cfg.beta;
  if (cfg.mode == ScoreMode::negsample) {
    in.source = SurrogateSource::given;
    in.surrogate = negative_samples(batch, state, cfg, rng);
  } else {
    in.source = SurrogateSource::generator;
    in.omega = sample_noise(state.gen.noise, batch.size(), state.gen.d_h, rng);
  }
  const ObjectiveValues v = evaluate_objective(state.dk, state.gen, in, {true, true, false});
  rmsprop_step(state.dk.encoder, opt, Direction::ascent);
  rmsprop_step(state.dk.decoder, opt, Direction::ascent);
  clip(state.dk.encoder, cfg.clip_c);
  return v;
}

ObjectiveValues generator_step(const PairBatch& batch, TrainState& state, const TrainConfig& cfg, Rng& rng) {
  ObjectiveInputs in = base_inputs(batch, cfg);
  in.source = SurrogateSource::generator;
  in.omega = sample_noise(state.gen.noise, batch.size(), state.gen.d_h, rng);
  const ObjectiveValues v = evaluate_objective(state.dk, state.gen, in, {false, false, true});
  // lambda = beta = 0: the objective is mmd_pg plus constant terms.
  const AdamConfig opt{cfg.lr};
  adam_step(state.gen.theta_e, opt);
  adam_step(state.gen.theta_d, opt);
  return v;
}

std::string TrainLog::to_jsonl() const {
  std::string out;
  for (const auto& e : epochs) {
    nlohmann::ordered_json j;
    j["epoch"] = e.epoch;
    j["mmd_pg"] = e.mmd_pg;
    j["mmd_xx"] = e.mmd_xx;
    j["recon"] = e.recon;
    j["objective"] = e.objective;
    j["wallclock"] = e.wallclock;
    out += j.dump();
    out += '\n';
  }
  return out;
}

TrainResult fit(const Matrix& train_series, const TrainConfig& cfg) {
  cfg.validate();
  if (train_series.rows() == 0 || train_series.cols() == 0) throw ParameterError("fit: empty training data");
  if (train_series.rows() < 2 * cfg.w) throw ParameterError("fit: training split shorter than two windows");
  TrainResult res{init_state(train_series.cols(), cfg), {}};
  TrainState& st = res.state;
  if (cfg.mode == ScoreMode::dataspace) return res;

  for (std::size_t c = 0; c < train_series.cols(); ++c) {
    double mean = 0.0, sq = 0.0;
    for (std::size_t r = 0; r < train_series.rows(); ++r) mean += train_series(r, c);
    mean /= static_cast<double>(train_series.rows());
    for (std::size_t r = 0; r < train_series.rows(); ++r) sq += (train_series(r, c) - mean) * (train_series(r, c) - mean);
    st.noise_std[c] = std::sqrt(sq / static_cast<double>(train_series.rows()));
  }

  Rng batch_rng = make_rng(cfg.seed, 1);
  Rng noise_rng = make_rng(cfg.seed, 2);
  const std::size_t pairs = train_series.rows() - 2 * cfg.w + 1;
  const std::size_t steps = cfg.steps_per_epoch > 0 ? cfg.steps_per_epoch : (pairs + cfg.batch - 1) / cfg.batch;
  const bool adversarial = cfg.mode == ScoreMode::klcpd;
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t kernel_steps = 0;

  for (std::size_t epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    try {
      for (std::size_t s = 0; s < steps; ++s) {
        const auto starts = sample_starts(train_series.rows(), cfg.w, cfg.batch, batch_rng);
        const PairBatch batch = make_batch(train_series, starts, cfg.w);
        const ObjectiveValues v = kernel_step(batch, st, cfg, noise_rng);
        rec.mmd_pg += v.mmd_pg;
        rec.mmd_xx += v.mmd_xx;
        rec.recon += v.recon;
        rec.objective += v.objective;
        if (adversarial && ++kernel_steps % cfg.n_c == 0) generator_step(batch, st, cfg, noise_rng);
      }
    } catch (const NumericError& e) {
      res.log.aborted = true;
      res.log.abort_reason = e.what();
      break;
    }
    const double n = static_cast<double>(steps);
    rec.mmd_pg /= n;
    rec.mmd_xx /= n;
    rec.recon /= n;
    rec.objective /= n;
    rec.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.log.epochs.push_back(rec);
    if (cfg.mode != ScoreMode::codespace && rec.mmd_pg <= cfg.epsilon_stop) {
      res.log.stopped_early = true;
      break;
    }
  }
  return res;
}

}  // namespace klcpd
