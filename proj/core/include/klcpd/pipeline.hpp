#pragma once

#include <optional>
#include <string>
#include <vector>

#include "klcpd/kernels.hpp"
#include "klcpd/matrix.hpp"

namespace klcpd {

/// Scoring / training variants. dataspace scores raw samples; codespace uses
/// an autoencoder-trained encoder; negsample trains the kernel against
/// noise-perturbed past windows; klcpd trains it against the generator.
enum class ScoreMode { dataspace, codespace, negsample, klcpd };

std::string to_string(ScoreMode mode);
ScoreMode parse_score_mode(const std::string& name);
/// True for every mode that needs a trained GRU encoder.
bool mode_needs_encoder(ScoreMode mode);

inline constexpr std::size_t kDefaultWindow = 25;

/// X_l = rows [t - w_l, t), X_r = rows [t, t + w_r).
struct WindowPair {
  std::size_t t = 0;
  Matrix left;
  Matrix right;
};

/// Pairs at t = w_l, w_l + stride, ... while t + w_r <= T.
std::vector<WindowPair> sliding_pairs(const Matrix& series, std::size_t w_l, std::size_t w_r, std::size_t stride = 1);
/// Number of pairs sliding_pairs would return.
std::size_t pair_count(std::size_t length, std::size_t w_l, std::size_t w_r, std::size_t stride = 1);

struct ScoreSeries {
  std::vector<std::size_t> t;
  std::vector<double> score;

  [[nodiscard]] std::size_t size() const noexcept { return t.size(); }
};

struct ScoreConfig {
  std::size_t w = kDefaultWindow;
  std::size_t stride = 1;
  /// Fixed bandwidth; when empty each pair uses the median heuristic over
  /// its pooled encoded samples.
  std::optional<double> sigma2;
};

/// score(t) = mmd2_unbiased(f(X_l), f(X_r)). dataspace ignores `dk`; the
/// other modes require a GRU encoder (ConfigError otherwise).
ScoreSeries score(const Matrix& series, ScoreMode mode, const DeepKernel* dk, const ScoreConfig& cfg = {});

}  // namespace klcpd
