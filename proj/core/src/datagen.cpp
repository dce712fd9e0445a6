#include "klcpd/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "klcpd/error.hpp"

namespace klcpd {

void LabeledSeries::validate() const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= values.rows())
      throw DataError("label " + std::to_string(labels[i]) + " outside series of length " +
                      std::to_string(values.rows()));
    if (i > 0 && labels[i] <= labels[i - 1]) throw DataError("labels must be strictly increasing");
  }
}

double blob_correlation(double epsilon) {
  if (!(epsilon >= 1.0)) throw ParameterError("blob epsilon must be >= 1");
  return (epsilon - 1.0) / (epsilon + 1.0);
}

Matrix gen_blobs(double epsilon, std::size_t n, Rng& rng) {
  const double rho = blob_correlation(epsilon);
  if (n == 0) throw ParameterError("gen_blobs: n must be >= 1");
  const double tail = std::sqrt(1.0 - rho * rho);
  std::uniform_int_distribution<std::size_t> center(0, kBlobGrid - 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    const double cx = kBlobSpacing * static_cast<double>(center(rng));
    const double cy = kBlobSpacing * static_cast<double>(center(rng));
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    out(i, 0) = cx + z1;
    out(i, 1) = cy + rho * z1 + tail * z2;
  }
  return out;
}

Matrix gen_blobs(double epsilon, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return gen_blobs(epsilon, n, rng);
}

double jumping_mean_mu(std::size_t n) {
  if (n == 0) throw ParameterError("segment index starts at 1");
  double mu = 0.0;
  for (std::size_t k = 2; k <= n; ++k) mu += static_cast<double>(k) / 16.0;
  return mu;
}

double scaling_variance_sigma(std::size_t n) {
  if (n == 0) throw ParameterError("segment index starts at 1");
  if (n % 2 == 1) return 1.0;
  return std::log(std::numbers::e + static_cast<double>(n) / 4.0);
}

namespace {

/// Segment index (1-based) of every timestep plus the segment start labels.
struct Segmentation {
  std::vector<std::size_t> segment_of;
  std::vector<std::size_t> labels;
};

Segmentation segment(const SegmentConfig& cfg, Rng& rng) {
  if (cfg.length == 0) throw ParameterError("series length must be >= 1");
  if (cfg.min_segment == 0) throw ParameterError("min_segment must be >= 1");
  std::normal_distribution<double> tau(0.0, 1.0);
  Segmentation s;
  s.segment_of.reserve(cfg.length);
  std::size_t n = 1;
  while (s.segment_of.size() < cfg.length) {
    const double draw = cfg.tau_std > 0.0 ? cfg.tau_std * tau(rng) : 0.0;
    const double len = std::max(static_cast<double>(cfg.min_segment), std::round(cfg.base + draw));
    if (n > 1) s.labels.push_back(s.segment_of.size());
    for (std::size_t i = 0; i < static_cast<std::size_t>(len) && s.segment_of.size() < cfg.length; ++i)
      s.segment_of.push_back(n);
    ++n;
  }
  return s;
}

template <typename NoiseFn>
LabeledSeries ar2_series(std::uint64_t seed, const SegmentConfig& cfg, NoiseFn noise) {
  Rng seg_rng = make_rng(seed, 0);
  Rng noise_rng = make_rng(seed, 1);
  const Segmentation seg = segment(cfg, seg_rng);
  LabeledSeries out;
  out.values = Matrix(cfg.length, 1);
  out.labels = seg.labels;
  // y(1) = y(2) = 0: the recursion starts at the third sample.
  for (std::size_t t = 2; t < cfg.length; ++t) {
    const double e = noise(seg.segment_of[t], noise_rng);
    out.values(t, 0) = 0.6 * out.values(t - 1, 0) - 0.5 * out.values(t - 2, 0) + e;
  }
  return out;
}

}  // namespace

LabeledSeries gen_jumping_mean(std::uint64_t seed, const SegmentConfig& cfg) {
  std::vector<double> mu_cache(1, 0.0);
  return ar2_series(seed, cfg, [&mu_cache](std::size_t n, Rng& rng) {
    while (mu_cache.size() < n) mu_cache.push_back(mu_cache.back() + static_cast<double>(mu_cache.size() + 1) / 16.0);
    std::normal_distribution<double> e(mu_cache[n - 1], 1.5);
    return e(rng);
  });
}

LabeledSeries gen_scaling_variance(std::uint64_t seed, const SegmentConfig& cfg) {
  return ar2_series(seed, cfg, [](std::size_t n, Rng& rng) {
    std::normal_distribution<double> e(0.0, scaling_variance_sigma(n));
    return e(rng);
  });
}

LabeledSeries gen_gaussian_mixtures(std::uint64_t seed, std::size_t length) {
  if (length == 0) throw ParameterError("series length must be >= 1");
  Rng rng(derive_seed(seed, 0));
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::normal_distribution<double> z(0.0, 1.0);
  LabeledSeries out;
  out.values = Matrix(length, 1);
  for (std::size_t t = 0; t < length; ++t) {
    const bool second = (t / kAlternatingSegment) % 2 == 1;
    if (t > 0 && t % kAlternatingSegment == 0) out.labels.push_back(t);
    const double pick = u(rng);
    double v;
    if (!second)
      v = pick < 0.5 ? -1.0 + 0.5 * z(rng) : 1.0 + 0.5 * z(rng);
    else
      v = pick < 0.8 ? -1.0 + 1.0 * z(rng) : 1.0 + 0.1 * z(rng);
    out.values(t, 0) = v;
  }
  return out;
}

LabeledSeries gen_highdim_variance(std::size_t d, std::uint64_t seed, std::size_t length) {
  if (d == 0) throw ParameterError("gen_highdim_variance: d must be >= 1");
  if (length == 0) throw ParameterError("series length must be >= 1");
  Rng rng(derive_seed(seed, 0));
  std::normal_distribution<double> z(0.0, 1.0);
  LabeledSeries out;
  out.values = Matrix(length, d);
  for (std::size_t t = 0; t < length; ++t) {
    const bool second = (t / kAlternatingSegment) % 2 == 1;
    if (t > 0 && t % kAlternatingSegment == 0) out.labels.push_back(t);
    const double sigma = second ? kHighdimSigma2 : kHighdimSigma1;
    for (std::size_t c = 0; c < d; ++c) out.values(t, c) = sigma * z(rng);
  }
  return out;
}

}  // namespace klcpd
