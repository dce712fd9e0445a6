#include "klcpd/models.hpp"

#include "klcpd/error.hpp"
#include "klcpd/ops.hpp"

namespace klcpd {

SeqBatch to_timestep_major(std::span<const Matrix> windows) {
  if (windows.empty()) throw ShapeError("to_timestep_major: empty batch");
  const std::size_t w = windows.front().rows();
  const std::size_t d = windows.front().cols();
  if (w == 0) throw ShapeError("to_timestep_major: zero-length windows");
  SeqBatch seq(w, Matrix(windows.size(), d));
  for (std::size_t b = 0; b < windows.size(); ++b) {
    const Matrix& win = windows[b];
    if (win.rows() != w || win.cols() != d) throw ShapeError("to_timestep_major: windows differ in shape");
    for (std::size_t t = 0; t < w; ++t)
      for (std::size_t c = 0; c < d; ++c) seq[t](b, c) = win(t, c);
  }
  return seq;
}

std::vector<Matrix> to_windows(const SeqBatch& seq) {
  if (seq.empty()) return {};
  const std::size_t batch = seq.front().rows();
  const std::size_t d = seq.front().cols();
  std::vector<Matrix> out(batch, Matrix(seq.size(), d));
  for (std::size_t t = 0; t < seq.size(); ++t)
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t c = 0; c < d; ++c) out[b](t, c) = seq[t](b, c);
  return out;
}

Matrix shift_right_one(const Matrix& window) {
  Matrix out(window.rows(), window.cols());
  for (std::size_t t = 1; t < window.rows(); ++t)
    for (std::size_t c = 0; c < window.cols(); ++c) out(t, c) = window(t - 1, c);
  return out;
}

ParamBinder::ParamBinder(Graph& g, ParamStore& store, bool trainable)
    : graph_(&g), mutable_store_(&store), store_(&store), trainable_(trainable) {}

ParamBinder::ParamBinder(Graph& g, const ParamStore& store)
    : graph_(&g), mutable_store_(nullptr), store_(&store), trainable_(false) {}

Var ParamBinder::operator()(const std::string& name) {
  if (auto it = cache_.find(name); it != cache_.end()) return it->second;
  Var v = trainable_ ? graph_->param(mutable_store_->at(name)) : graph_->constant(store_->at(name).value);
  cache_.emplace(name, v);
  return v;
}

void add_gru_params(ParamStore& store, const std::string& prefix, std::size_t d_in, std::size_t d_h, Rng& rng,
                    double init_scale) {
  if (d_in == 0 || d_h == 0) throw ParameterError("add_gru_params: zero dimension");
  store.add_uniform(prefix + ".W", d_in, 3 * d_h, init_scale, rng);
  store.add(prefix + ".b", Matrix(1, 3 * d_h));
  store.add_uniform(prefix + ".U_zr", d_h, 2 * d_h, init_scale, rng);
  store.add_uniform(prefix + ".U_n", d_h, d_h, init_scale, rng);
}

void add_linear_params(ParamStore& store, const std::string& prefix, std::size_t d_in, std::size_t d_out, Rng& rng,
                       double init_scale) {
  store.add_uniform(prefix + ".V", d_in, d_out, init_scale, rng);
  store.add(prefix + ".c", Matrix(1, d_out));
}

Var gru_cell(ParamBinder& params, const std::string& prefix, Var x, Var h) {
  Var xproj = add_row(matmul(x, params(prefix + ".W")), params(prefix + ".b"));
  return gru_step(xproj, h, params(prefix + ".U_zr"), params(prefix + ".U_n"));
}

std::vector<Var> run_gru(ParamBinder& params, const std::string& prefix, std::span<const Var> inputs, Var h0) {
  std::vector<Var> states;
  states.reserve(inputs.size());
  Var h = h0;
  for (Var x : inputs) {
    h = gru_cell(params, prefix, x, h);
    states.push_back(h);
  }
  return states;
}

std::vector<Var> apply_linear(ParamBinder& params, const std::string& prefix, std::span<const Var> inputs) {
  Var v = params(prefix + ".V");
  Var c = params(prefix + ".c");
  std::vector<Var> out;
  out.reserve(inputs.size());
  for (Var x : inputs) out.push_back(add_row(matmul(x, v), c));
  return out;
}

Matrix gru_cell(const ParamStore& params, const std::string& prefix, const Matrix& x, const Matrix& h) {
  Graph g(false);
  ParamBinder bind(g, params);
  return gru_cell(bind, prefix, g.constant(x), g.constant(h)).value();
}

ParamStore make_encoder(std::size_t d, std::size_t d_h, Rng& rng) {
  ParamStore s;
  add_gru_params(s, "gru", d, d_h, rng);
  return s;
}

ParamStore make_decoder(std::size_t d, std::size_t d_h, Rng& rng) {
  ParamStore s;
  add_gru_params(s, "gru", d_h, d_h, rng);
  add_linear_params(s, "out", d_h, d, rng);
  return s;
}

namespace {

std::size_t hidden_size(ParamBinder& params, const std::string& prefix) {
  return params(prefix + ".U_n").value().rows();
}

Var zero_state(ParamBinder& params, const std::string& prefix, std::size_t batch) {
  return params.graph().constant(Matrix(batch, hidden_size(params, prefix)));
}

std::vector<Var> constants(Graph& g, const SeqBatch& seq) {
  std::vector<Var> out;
  out.reserve(seq.size());
  for (const auto& m : seq) out.push_back(g.constant(m));
  return out;
}

}  // namespace

std::vector<Var> encode_batch(ParamBinder& phi, std::span<const Var> inputs) {
  if (inputs.empty()) throw ShapeError("encode_batch: window length must be >= 1");
  return run_gru(phi, "gru", inputs, zero_state(phi, "gru", inputs.front().rows()));
}

std::vector<Var> reconstruct_batch(ParamBinder& psi, std::span<const Var> states) {
  if (states.empty()) throw ShapeError("reconstruct_batch: empty sequence");
  auto dec = run_gru(psi, "gru", states, zero_state(psi, "gru", states.front().rows()));
  return apply_linear(psi, "out", dec);
}

Matrix encode_window(const Matrix& window, const ParamStore& phi) {
  if (window.rows() == 0) throw ShapeError("encode_window: window length must be >= 1");
  if (phi.at("gru.W").value.rows() != window.cols())
    throw ShapeError("encode_window: window has " + std::to_string(window.cols()) + " dims, encoder expects " +
                     std::to_string(phi.at("gru.W").value.rows()));
  Graph g(false);
  ParamBinder bind(g, phi);
  const Matrix one[] = {window};
  auto inputs = constants(g, to_timestep_major(one));
  auto states = encode_batch(bind, inputs);
  Matrix out(states.size(), states.front().cols());
  for (std::size_t t = 0; t < states.size(); ++t)
    for (std::size_t c = 0; c < out.cols(); ++c) out(t, c) = states[t].value()(0, c);
  return out;
}

Matrix reconstruct(const Matrix& encoded, const ParamStore& psi) {
  if (encoded.rows() == 0) throw ShapeError("reconstruct: empty encoding");
  if (psi.at("gru.W").value.rows() != encoded.cols()) throw ShapeError("reconstruct: hidden size mismatch");
  Graph g(false);
  ParamBinder bind(g, psi);
  const Matrix one[] = {encoded};
  auto inputs = constants(g, to_timestep_major(one));
  auto outs = reconstruct_batch(bind, inputs);
  Matrix out(outs.size(), outs.front().cols());
  for (std::size_t t = 0; t < outs.size(); ++t)
    for (std::size_t c = 0; c < out.cols(); ++c) out(t, c) = outs[t].value()(0, c);
  return out;
}

double reconstruction_loss(std::span<const Matrix> windows, const ParamStore& phi, const ParamStore& psi) {
  if (windows.empty()) throw ParameterError("reconstruction_loss: no windows");
  double total = 0.0;
  std::size_t count = 0;
  for (const auto& win : windows) {
    const Matrix rec = reconstruct(encode_window(win, phi), psi);
    for (std::size_t t = 0; t < win.rows(); ++t) {
      total += squared_distance(win.row(t), rec.row(t));
      ++count;
    }
  }
  return total / static_cast<double>(count);
}

GeneratorParams GeneratorParams::make(std::size_t d, std::size_t d_h, NoiseDist noise, Rng& rng) {
  GeneratorParams p;
  p.d = d;
  p.d_h = d_h;
  p.noise = noise;
  add_gru_params(p.theta_e, "gru", d, d_h, rng);
  add_gru_params(p.theta_d, "gru", d, d_h, rng);
  add_linear_params(p.theta_d, "out", d_h, d, rng);
  return p;
}

Matrix sample_noise(NoiseDist dist, std::size_t batch, std::size_t d_h, Rng& rng) {
  Matrix out(batch, d_h);
  if (dist == NoiseDist::uniform) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (double& v : out.values()) v = u(rng);
  } else {
    std::normal_distribution<double> n(0.0, 1.0);
    for (double& v : out.values()) v = n(rng);
  }
  return out;
}

std::vector<Var> generate_batch(GeneratorBinder& theta, std::span<const Var> left, std::span<const Var> right,
                                Var omega) {
  if (left.size() != right.size() || left.empty())
    throw ShapeError("generate_batch: past and current windows must have equal non-zero length");
  Graph& g = theta.encoder.graph();
  const std::size_t batch = left.front().rows();
  auto enc = run_gru(theta.encoder, "gru", left, zero_state(theta.encoder, "gru", batch));
  if (!omega.value().same_shape(enc.back().value()))
    throw ShapeError("generate_batch: noise " + omega.value().shape_string() + " vs hidden " +
                     enc.back().value().shape_string());
  Var h_tilde = add(enc.back(), omega);

  std::vector<Var> shifted;
  shifted.reserve(right.size());
  shifted.push_back(g.constant(Matrix(batch, right.front().cols())));
  for (std::size_t t = 0; t + 1 < right.size(); ++t) shifted.push_back(right[t]);

  auto dec = run_gru(theta.decoder, "gru", shifted, h_tilde);
  return apply_linear(theta.decoder, "out", dec);
}

Matrix generate(const Matrix& left, const Matrix& right, std::span<const double> omega,
                const GeneratorParams& theta) {
  if (!left.same_shape(right)) throw ShapeError("generate: windows differ in shape");
  if (left.cols() != theta.d) throw ShapeError("generate: data dimension mismatch");
  if (omega.size() != theta.d_h) throw ShapeError("generate: noise must be d_h-dimensional");
  Graph g(false);
  GeneratorBinder bind{ParamBinder(g, theta.theta_e), ParamBinder(g, theta.theta_d)};
  const Matrix l[] = {left};
  const Matrix r[] = {right};
  auto lv = constants(g, to_timestep_major(l));
  auto rv = constants(g, to_timestep_major(r));
  Var om = g.constant(Matrix(1, omega.size(), std::vector<double>(omega.begin(), omega.end())));
  auto z = generate_batch(bind, lv, rv, om);
  Matrix out(z.size(), theta.d);
  for (std::size_t t = 0; t < z.size(); ++t)
    for (std::size_t c = 0; c < theta.d; ++c) out(t, c) = z[t].value()(0, c);
  return out;
}

}  // namespace klcpd
