#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "klcpd/kernels.hpp"
#include "klcpd/tstest.hpp"

namespace klcpd {

enum class BlobSelector { median, max_ratio_full, max_ratio_sparse, surrogate };

inline constexpr std::array<BlobSelector, 4> kAllBlobSelectors = {
    BlobSelector::median, BlobSelector::max_ratio_full, BlobSelector::max_ratio_sparse, BlobSelector::surrogate};

std::string to_string(BlobSelector s);
/// Accepts median, max-ratio-full, max-ratio-sparse and surrogate.
BlobSelector parse_blob_selector(const std::string& name);

struct BlobExperimentConfig {
  double epsilon_q = 6.0;
  double epsilon_g = 4.0;      // surrogate G
  std::size_t m = 500;         // test samples per side
  std::size_t sparse_m = 200;  // size of the sparse Q sample
  std::size_t trials = 100;
  std::size_t n_permutations = 200;
  std::size_t bootstrap = 100;  // variance resamples for max-ratio
  double alpha = 0.05;
  double lambda = 0.0;  // weight of mmd2(X, X') in the surrogate criterion
  std::size_t n_bandwidths = 20;
  double sigma_min = 0.1;  // bandwidths are log-spaced in sigma, sigma2 = sigma^2
  double sigma_max = 30.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Candidate kernels, sigma log-spaced in [sigma_min, sigma_max].
std::vector<RbfKernel> blob_bandwidths(const BlobExperimentConfig& cfg);

/// Index of the candidate maximising mmd2(X, Z) - lambda * mmd2(X, X').
std::size_t surrogate_select(const Matrix& x, const Matrix& x_prime, const Matrix& z,
                             std::span<const RbfKernel> kernels, double lambda);

/// Kernel chooser drawing fresh selection data for one selector.
KernelChooser make_blob_chooser(BlobSelector selector, const BlobExperimentConfig& cfg);

struct BlobPowerRow {
  BlobSelector selector;
  double power = 0.0;
};

/// Test power of P (eps = 1) versus Q (eps_q) for each selector. Every
/// selector sees the same per-trial seeds.
std::vector<BlobPowerRow> run_blob_experiment(const BlobExperimentConfig& cfg,
                                              std::span<const BlobSelector> selectors = kAllBlobSelectors);

}  // namespace klcpd
