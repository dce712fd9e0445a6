#pragma once

#include "klcpd/params.hpp"

namespace klcpd {

enum class Direction { descent, ascent };

struct RmsPropConfig {
  double lr = 1e-3;
  double decay = 0.9;
  double eps = 1e-8;
};

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// p <- p -/+ lr * g / (sqrt(v) + eps), v <- decay v + (1 - decay) g^2.
/// Throws NumericError (leaving the store untouched) if any gradient is
/// non-finite.
void rmsprop_step(ParamStore& params, const RmsPropConfig& cfg, Direction dir);

/// Bias-corrected Adam descent step.
void adam_step(ParamStore& params, const AdamConfig& cfg);

/// Clamps every entry of every parameter into [-c, c].
void clip(ParamStore& params, double c);

}  // namespace klcpd
