#include "klcpd/model_io.hpp"

#include <charconv>

#include "klcpd/error.hpp"
#include "klcpd/series_io.hpp"

namespace klcpd {

namespace {

Matrix row_of(const std::vector<double>& v) { return Matrix(1, v.size(), v); }

std::vector<double> row_values(const Matrix& m, std::size_t d, const std::string& name) {
  if (m.rows() != 1 || m.cols() != d) throw DataError("checkpoint: " + name + " has shape " + m.shape_string());
  return m.storage();
}

const std::string& need(const Checkpoint& c, const std::string& key) {
  const auto it = c.meta.find(key);
  if (it == c.meta.end()) throw DataError("checkpoint: missing metadata '" + key + "'");
  return it->second;
}

std::size_t need_size(const Checkpoint& c, const std::string& key) {
  const std::string& s = need(c, key);
  std::size_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw DataError("checkpoint: bad integer for '" + key + "'");
  return v;
}

double need_double(const Checkpoint& c, const std::string& key) {
  const std::string& s = need(c, key);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) throw DataError("checkpoint: bad number for '" + key + "'");
  return v;
}

}  // namespace

Checkpoint make_model_checkpoint(const TrainState& state, const MinMaxTransform& transform,
                                 const std::map<std::string, std::string>& meta) {
  const DeepKernel& dk = state.dk;
  if (transform.lo.size() != dk.d || transform.hi.size() != dk.d || state.noise_std.size() != dk.d)
    throw ShapeError("make_model_checkpoint: dimension mismatch");
  Checkpoint c;
  for (const auto& [k, v] : meta) {
    if (k.rfind("model.", 0) == 0) throw ConfigError("metadata key '" + k + "' is reserved");
    c.meta[k] = v;
  }
  c.meta["model.kind"] = dk.kind == EncoderKind::gru ? "gru" : "identity";
  c.meta["model.d"] = std::to_string(dk.d);
  c.meta["model.d_h"] = std::to_string(state.gen.d_h);
  c.meta["model.noise"] = state.gen.noise == NoiseDist::uniform ? "uniform" : "normal";
  c.meta["model.sigma2"] = format_double(dk.rbf.sigma2());
  if (dk.kind == EncoderKind::gru) {
    c.add_store("phi", dk.encoder);
    c.add_store("psi", dk.decoder);
  }
  c.add_store("theta_e", state.gen.theta_e);
  c.add_store("theta_d", state.gen.theta_d);
  c.add("norm.lo", row_of(transform.lo));
  c.add("norm.hi", row_of(transform.hi));
  c.add("noise_std", row_of(state.noise_std));
  return c;
}

SavedModel read_model_checkpoint(const Checkpoint& ckpt) {
  const std::string& kind = need(ckpt, "model.kind");
  const std::size_t d = need_size(ckpt, "model.d");
  const std::size_t d_h = need_size(ckpt, "model.d_h");
  const std::string& noise_name = need(ckpt, "model.noise");
  const double sigma2 = need_double(ckpt, "model.sigma2");
  if (d == 0 || d_h == 0) throw DataError("checkpoint: zero dimension");
  if (!(sigma2 > 0.0)) throw DataError("checkpoint: sigma2 must be > 0");
  NoiseDist noise;
  if (noise_name == "normal")
    noise = NoiseDist::normal;
  else if (noise_name == "uniform")
    noise = NoiseDist::uniform;
  else
    throw DataError("checkpoint: unknown noise '" + noise_name + "'");

  SavedModel out;
  // Shapes come from freshly built stores; the values are then overwritten.
  Rng scratch(0);
  if (kind == "gru") {
    out.state.dk = DeepKernel::gru(d, d_h, scratch, sigma2);
    ckpt.load_store("phi", out.state.dk.encoder);
    ckpt.load_store("psi", out.state.dk.decoder);
  } else if (kind == "identity") {
    out.state.dk = DeepKernel::identity(d, sigma2);
  } else {
    throw DataError("checkpoint: unknown encoder kind '" + kind + "'");
  }
  out.state.gen = GeneratorParams::make(d, d_h, noise, scratch);
  ckpt.load_store("theta_e", out.state.gen.theta_e);
  ckpt.load_store("theta_d", out.state.gen.theta_d);
  out.transform.lo = row_values(ckpt.tensor("norm.lo"), d, "norm.lo");
  out.transform.hi = row_values(ckpt.tensor("norm.hi"), d, "norm.hi");
  out.state.noise_std = row_values(ckpt.tensor("noise_std"), d, "noise_std");
  for (const auto& [k, v] : ckpt.meta)
    if (k.rfind("model.", 0) != 0) out.meta[k] = v;
  return out;
}

}  // namespace klcpd
