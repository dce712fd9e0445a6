#pragma once

#include <cstdint>
#include <vector>

#include "klcpd/matrix.hpp"
#include "klcpd/random.hpp"

namespace klcpd {

/// T x d series with change-point indices (strictly increasing, in [0, T)).
struct LabeledSeries {
  Matrix values;
  std::vector<std::size_t> labels;

  [[nodiscard]] std::size_t length() const noexcept { return values.rows(); }
  [[nodiscard]] std::size_t dim() const noexcept { return values.cols(); }
  /// Throws DataError when the label invariant does not hold.
  void validate() const;
};

// -- blobs ------------------------------------------------------------------

inline constexpr double kBlobSpacing = 15.0;
inline constexpr std::size_t kBlobGrid = 5;

/// (eps - 1) / (eps + 1); eps is the eigenvalue ratio of each blob.
double blob_correlation(double epsilon);

/// n draws from the 5 x 5 grid of unit-variance 2-D Gaussians centred at
/// {0, 15, 30, 45, 60}^2 with within-blob correlation blob_correlation(eps).
/// eps = 1 gives the isotropic reference distribution.
Matrix gen_blobs(double epsilon, std::size_t n, Rng& rng);
Matrix gen_blobs(double epsilon, std::size_t n, std::uint64_t seed);

// -- piecewise AR(2) series ---------------------------------------------------

/// Segment layout shared by the jumping-mean and scaling-variance series:
/// segment n lasts max(min_segment, round(base + tau_n)) steps with
/// tau_n ~ N(0, tau_std^2).
struct SegmentConfig {
  std::size_t length = 5000;
  double base = 100.0;
  double tau_std = 10.0;
  std::size_t min_segment = 50;
};

/// mu_1 = 0, mu_n = mu_{n-1} + n / 16.
double jumping_mean_mu(std::size_t n);
/// 1 for odd n, ln(e + n/4) for even n.
double scaling_variance_sigma(std::size_t n);

/// y(t) = 0.6 y(t-1) - 0.5 y(t-2) + e_t with y(1) = y(2) = 0 and
/// e_t ~ N(mu_n, 1.5^2) in segment n.
LabeledSeries gen_jumping_mean(std::uint64_t seed, const SegmentConfig& cfg = {});
/// Same recursion with e_t ~ N(0, sigma_n^2).
LabeledSeries gen_scaling_variance(std::uint64_t seed, const SegmentConfig& cfg = {});

// -- alternating i.i.d. segments --------------------------------------------

inline constexpr std::size_t kAlternatingSegment = 100;

/// Alternates every 100 steps between 0.5 N(-1, 0.5^2) + 0.5 N(1, 0.5^2) and
/// 0.8 N(-1, 1) + 0.2 N(1, 0.1^2), starting with the former.
LabeledSeries gen_gaussian_mixtures(std::uint64_t seed, std::size_t length = 5000);

inline constexpr double kHighdimSigma1 = 0.75;
inline constexpr double kHighdimSigma2 = 1.25;

/// Alternates every 100 steps between N(0, 0.75^2 I_d) and N(0, 1.25^2 I_d).
LabeledSeries gen_highdim_variance(std::size_t d, std::uint64_t seed, std::size_t length = 5000);

}  // namespace klcpd
