#include "klcpd/blobs.hpp"

#include <cmath>
#include <limits>
#include <memory>

#include "klcpd/datagen.hpp"
#include "klcpd/error.hpp"
#include "klcpd/mmdstats.hpp"

namespace klcpd {

std::string to_string(BlobSelector s) {
  switch (s) {
    case BlobSelector::median: return "median";
    case BlobSelector::max_ratio_full: return "max-ratio-full";
    case BlobSelector::max_ratio_sparse: return "max-ratio-sparse";
    case BlobSelector::surrogate: return "surrogate";
  }
  return "unknown";
}

BlobSelector parse_blob_selector(const std::string& name) {
  for (BlobSelector s : kAllBlobSelectors)
    if (to_string(s) == name) return s;
  throw ConfigError("unknown blob selector '" + name + "'");
}

void BlobExperimentConfig::validate() const {
  if (!(epsilon_q >= 1.0) || !(epsilon_g >= 1.0)) throw ParameterError("blob epsilon must be >= 1");
  if (m < 4 || sparse_m < 4) throw ParameterError("blob sample sizes must be >= 4");
  if (trials == 0) throw ParameterError("trials must be >= 1");
  if (n_bandwidths == 0) throw ParameterError("n_bandwidths must be >= 1");
  if (!(sigma_min > 0.0) || !(sigma_max >= sigma_min)) throw ParameterError("bad bandwidth range");
  if (lambda < 0.0) throw ParameterError("lambda must be >= 0");
  TestConfig{alpha, n_permutations, m}.validate();
}

std::vector<RbfKernel> blob_bandwidths(const BlobExperimentConfig& cfg) {
  std::vector<RbfKernel> out;
  const double lo = std::log(cfg.sigma_min);
  const double hi = std::log(cfg.sigma_max);
  for (std::size_t i = 0; i < cfg.n_bandwidths; ++i) {
    const double f = cfg.n_bandwidths == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(cfg.n_bandwidths - 1);
    const double sigma = std::exp(lo + f * (hi - lo));
    out.emplace_back(sigma * sigma);
  }
  return out;
}

namespace {

std::size_t max_ratio_shared(const Matrix& x, const Matrix& y, std::span<const RbfKernel> kernels,
                             std::size_t resamples, Rng& rng) {
  if (kernels.empty()) throw ParameterError("max_ratio_select: empty kernel list");
  const Matrix d = pooled_sq_dists(x, y);
  std::size_t best = 0;
  double best_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    const PooledGram g(d, x.rows(), kernels[i]);
    const double ratio = mmd2_unbiased(g) / std::sqrt(mmd2_variance(g, resamples, rng));
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = i;
    }
  }
  return best;
}

}  // namespace

std::size_t surrogate_select(const Matrix& x, const Matrix& x_prime, const Matrix& z,
                             std::span<const RbfKernel> kernels, double lambda) {
  if (kernels.empty()) throw ParameterError("surrogate_select: empty kernel list");
  if (lambda < 0.0) throw ParameterError("surrogate_select: lambda must be >= 0");
  const Matrix dz = pooled_sq_dists(x, z);
  Matrix dp;
  if (lambda > 0.0) dp = pooled_sq_dists(x, x_prime);
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    double v = mmd2_unbiased(PooledGram(dz, x.rows(), kernels[i]));
    if (lambda > 0.0) v -= lambda * mmd2_unbiased(PooledGram(dp, x.rows(), kernels[i]));
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

KernelChooser make_blob_chooser(BlobSelector selector, const BlobExperimentConfig& cfg) {
  cfg.validate();
  const auto kernels = std::make_shared<const std::vector<RbfKernel>>(blob_bandwidths(cfg));
  switch (selector) {
    case BlobSelector::median:
      return [cfg](Rng& rng) {
        const Matrix x = gen_blobs(1.0, cfg.m, rng);
        const Matrix y = gen_blobs(cfg.epsilon_q, cfg.m, rng);
        return RbfKernel(median_heuristic(x, y));
      };
    case BlobSelector::max_ratio_full:
    case BlobSelector::max_ratio_sparse: {
      const std::size_t n = selector == BlobSelector::max_ratio_full ? cfg.m : cfg.sparse_m;
      return [cfg, kernels, n](Rng& rng) {
        const Matrix x = gen_blobs(1.0, n, rng);
        const Matrix y = gen_blobs(cfg.epsilon_q, n, rng);
        return (*kernels)[max_ratio_shared(x, y, *kernels, cfg.bootstrap, rng)];
      };
    }
    case BlobSelector::surrogate:
      return [cfg, kernels](Rng& rng) {
        const Matrix x = gen_blobs(1.0, cfg.m, rng);
        const Matrix x_prime = gen_blobs(1.0, cfg.m, rng);
        const Matrix z = gen_blobs(cfg.epsilon_g, cfg.m, rng);
        return (*kernels)[surrogate_select(x, x_prime, z, *kernels, cfg.lambda)];
      };
  }
  throw ParameterError("unknown blob selector");
}

std::vector<BlobPowerRow> run_blob_experiment(const BlobExperimentConfig& cfg,
                                              std::span<const BlobSelector> selectors) {
  cfg.validate();
  const Sampler p = [](std::size_t m, Rng& rng) { return gen_blobs(1.0, m, rng); };
  const double eq = cfg.epsilon_q;
  const Sampler q = [eq](std::size_t m, Rng& rng) { return gen_blobs(eq, m, rng); };
  const TestConfig tc{cfg.alpha, cfg.n_permutations, cfg.m};
  std::vector<BlobPowerRow> rows;
  for (BlobSelector s : selectors)
    rows.push_back({s, estimate_power(p, q, make_blob_chooser(s, cfg), tc, cfg.trials, cfg.seed)});
  return rows;
}

}  // namespace klcpd
