#pragma once

#include <functional>
#include <span>
#include <vector>

#include "klcpd/kernels.hpp"
#include "klcpd/matrix.hpp"
#include "klcpd/mmdstats.hpp"
#include "klcpd/random.hpp"

namespace klcpd {

struct TestConfig {
  double alpha = 0.05;
  std::size_t n_permutations = 200;
  std::size_t m = 50;  // samples per side

  /// Throws ParameterError unless 0 < alpha < 1 and n_permutations >= 100.
  void validate() const;
};

/// Quantile with linear interpolation between order statistics
/// (position q * (n - 1) in the sorted values). q in [0, 1].
double empirical_quantile(std::vector<double> values, double q);

/// m * mmd2 for `count` random equal re-splits of the pooled sample.
std::vector<double> permutation_statistics(const PooledGram& g, std::size_t count, Rng& rng);
std::vector<double> permutation_statistics(const Matrix& x, const Matrix& y, const RbfKernel& k, std::size_t count,
                                           Rng& rng);

/// Empirical (1 - alpha) quantile of the permutation statistics.
double permutation_threshold(const Matrix& x, const Matrix& y, const RbfKernel& k, const TestConfig& cfg, Rng& rng);

/// m * mmd2(X, Y) > c_alpha (strict).
bool reject(const Matrix& x, const Matrix& y, const RbfKernel& k, double c_alpha);

/// Draws m samples.
using Sampler = std::function<Matrix(std::size_t m, Rng& rng)>;
/// Picks the kernel for one trial, drawing its own selection data from `rng`.
using KernelChooser = std::function<RbfKernel(Rng& rng)>;

/// Fraction of `trials` in which the permutation test rejects. Trial t
/// derives two generators from derive_seed(seed, t): stream 0 feeds the
/// chooser, stream 1 the test draw and the permutations.
double estimate_power(const Sampler& p, const Sampler& q, const KernelChooser& chooser, const TestConfig& cfg,
                      std::size_t trials, std::uint64_t seed);

/// estimate_power at several alphas sharing every draw, kernel choice and
/// permutation; cfg.alpha is ignored.
std::vector<double> estimate_power_curve(const Sampler& p, const Sampler& q, const KernelChooser& chooser,
                                         const TestConfig& cfg, std::span<const double> alphas, std::size_t trials,
                                         std::uint64_t seed);

}  // namespace klcpd
