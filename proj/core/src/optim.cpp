#include "klcpd/optim.hpp"

#include <algorithm>
#include <cmath>

#include "klcpd/error.hpp"

namespace klcpd {
namespace {

void require_finite_grads(const ParamStore& params, const char* who) {
  for (const auto& p : params) {
    if (!p.grad.all_finite())
      throw NumericError(std::string(who) + ": non-finite gradient for '" + p.name + "'; update rejected");
  }
}

}  // namespace

void rmsprop_step(ParamStore& params, const RmsPropConfig& cfg, Direction dir) {
  if (!(cfg.lr > 0.0)) throw ParameterError("rmsprop_step: lr must be > 0");
  require_finite_grads(params, "rmsprop_step");
  const double sign = dir == Direction::ascent ? 1.0 : -1.0;
  for (auto& p : params) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      double& v = p.moment2[i];
      v = cfg.decay * v + (1.0 - cfg.decay) * g * g;
      p.value[i] += sign * cfg.lr * g / (std::sqrt(v) + cfg.eps);
    }
  }
  ++params.step;
}

void adam_step(ParamStore& params, const AdamConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw ParameterError("adam_step: lr must be > 0");
  require_finite_grads(params, "adam_step");
  ++params.step;
  const double t = static_cast<double>(params.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& p : params) {
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      double& m = p.moment1[i];
      double& v = p.moment2[i];
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
      const double mhat = m / c1;
      const double vhat = v / c2;
      p.value[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

void clip(ParamStore& params, double c) {
  if (!(c > 0.0)) throw ParameterError("clip: c must be > 0");
  for (auto& p : params)
    for (double& v : p.value.values()) v = std::clamp(v, -c, c);
}

}  // namespace klcpd
