#pragma once

#include <optional>
#include <span>

#include "klcpd/kernels.hpp"
#include "klcpd/matrix.hpp"
#include "klcpd/random.hpp"

namespace klcpd {

/// Floor applied to every variance estimate before it is used as a divisor.
inline constexpr double kVarianceFloor = 1e-8;
inline constexpr std::size_t kDefaultBootstrap = 500;

struct MmdEstimate {
  double value = 0.0;  // may be negative
  std::size_t m = 0;
  std::optional<double> variance;
};

/// Gram matrix over X and Y stacked (X rows first), reused by the estimator,
/// the bootstrap and the permutation test.
struct PooledGram {
  Matrix k;            // (nx + ny) x (nx + ny)
  std::size_t nx = 0;  // rows of X
  std::size_t ny = 0;

  PooledGram(const Matrix& x, const Matrix& y, const RbfKernel& kernel);
  /// From squared distances over the stacked rows (see pooled_sq_dists).
  PooledGram(const Matrix& sq_dists, std::size_t nx, const RbfKernel& kernel);
};

/// (nx + ny) x (nx + ny) squared Euclidean distances over X stacked on Y.
Matrix pooled_sq_dists(const Matrix& x, const Matrix& y);

/// Unbiased U-statistic estimate of MMD^2 between the rows of X and Y:
///
///   1/(m(m-1)) sum_{i != j} k(x_i, x_j) - 2/m^2 sum_{i,j} k(x_i, y_j)
///   + 1/(m(m-1)) sum_{i != j} k(y_i, y_j)
///
/// Requires equal sample counts m >= 2.
double mmd2_unbiased(const Matrix& x, const Matrix& y, const RbfKernel& k);
double mmd2_unbiased(const PooledGram& g);

/// Bootstrap estimate of Var[mmd2_unbiased]: each of `resamples` rounds draws
/// m indices with replacement inside X and inside Y and re-evaluates the
/// estimator. The empirical variance is floored at kVarianceFloor.
/// Requires m >= 4 and resamples >= 100.
double mmd2_variance(const Matrix& x, const Matrix& y, const RbfKernel& k, std::size_t resamples, Rng& rng);
double mmd2_variance(const PooledGram& g, std::size_t resamples, Rng& rng);

MmdEstimate mmd2_estimate(const Matrix& x, const Matrix& y, const RbfKernel& k, std::size_t resamples, Rng& rng);

/// argmax_k mmd2 / sqrt(max(var, floor)); ties go to the smallest index.
std::size_t max_ratio_select(const Matrix& x, const Matrix& y, std::span<const RbfKernel> kernels,
                             std::size_t resamples, Rng& rng);

/// Ascent objective for the kernel in one window pair:
///   mmd2(f(X_r), f(Z)) - lambda * mmd2(f(X_l), f(X_r))
/// under dk (encoder plus dk.rbf bandwidth).
double power_bound_objective(const Matrix& x_left, const Matrix& x_right, const Matrix& z, const DeepKernel& dk,
                             double lambda);

}  // namespace klcpd
