#include "klcpd/pipeline.hpp"

#include "klcpd/error.hpp"
#include "klcpd/mmdstats.hpp"

namespace klcpd {

std::string to_string(ScoreMode mode) {
  switch (mode) {
    case ScoreMode::dataspace: return "dataspace";
    case ScoreMode::codespace: return "codespace";
    case ScoreMode::negsample: return "negsample";
    case ScoreMode::klcpd: return "klcpd";
  }
  return "unknown";
}

ScoreMode parse_score_mode(const std::string& name) {
  for (ScoreMode m : {ScoreMode::dataspace, ScoreMode::codespace, ScoreMode::negsample, ScoreMode::klcpd})
    if (to_string(m) == name) return m;
  throw ConfigError("unknown mode '" + name + "' (expected dataspace, codespace, negsample or klcpd)");
}

bool mode_needs_encoder(ScoreMode mode) { return mode != ScoreMode::dataspace; }

std::size_t pair_count(std::size_t length, std::size_t w_l, std::size_t w_r, std::size_t stride) {
  if (w_l == 0 || w_r == 0) throw ParameterError("window sizes must be >= 1");
  if (stride == 0) throw ParameterError("stride must be >= 1");
  if (length < w_l + w_r)
    throw ParameterError("series of length " + std::to_string(length) + " is shorter than w_l + w_r");
  return (length - w_l - w_r) / stride + 1;
}

std::vector<WindowPair> sliding_pairs(const Matrix& series, std::size_t w_l, std::size_t w_r, std::size_t stride) {
  const std::size_t n = pair_count(series.rows(), w_l, w_r, stride);
  std::vector<WindowPair> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = w_l + i * stride;
    out.push_back({t, series.slice_rows(t - w_l, t), series.slice_rows(t, t + w_r)});
  }
  return out;
}

ScoreSeries score(const Matrix& series, ScoreMode mode, const DeepKernel* dk, const ScoreConfig& cfg) {
  if (cfg.w < 2) throw ParameterError("score: window must be >= 2");
  if (mode_needs_encoder(mode) && (dk == nullptr || dk->kind != EncoderKind::gru))
    throw ConfigError("mode " + to_string(mode) + " needs a trained encoder");
  if (cfg.sigma2 && !(*cfg.sigma2 > 0.0)) throw ParameterError("score: sigma2 must be positive");
  const std::size_t w = cfg.w;
  const std::size_t n = pair_count(series.rows(), w, w, cfg.stride);

  // Every window start is encoded once; windows are reused as X_r at t and
  // as X_l at t + w.
  std::vector<Matrix> encoded(series.rows() - w + 1);
  std::vector<bool> done(encoded.size(), false);
  auto window = [&](std::size_t start) -> const Matrix& {
    if (!done[start]) {
      const Matrix raw = series.slice_rows(start, start + w);
      encoded[start] = mode_needs_encoder(mode) ? dk->encode(raw) : raw;
      done[start] = true;
    }
    return encoded[start];
  };

  ScoreSeries out;
  out.t.reserve(n);
  out.score.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t t = w + i * cfg.stride;
    const Matrix& left = window(t - w);
    const Matrix& right = window(t);
    const RbfKernel k(cfg.sigma2 ? *cfg.sigma2 : median_heuristic(left, right));
    out.t.push_back(t);
    out.score.push_back(mmd2_unbiased(left, right, k));
  }
  return out;
}

}  // namespace klcpd
