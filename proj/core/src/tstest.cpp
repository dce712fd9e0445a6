#include "klcpd/tstest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "klcpd/error.hpp"

namespace klcpd {

void TestConfig::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
  if (n_permutations < 100) throw ParameterError("n_permutations must be >= 100");
  if (m < 2) throw ParameterError("m must be >= 2");
}

double empirical_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw ParameterError("empirical_quantile: no values");
  if (!(q >= 0.0 && q <= 1.0)) throw ParameterError("empirical_quantile: q must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<double> permutation_statistics(const PooledGram& g, std::size_t count, Rng& rng) {
  if (g.nx != g.ny || g.nx < 2) throw ParameterError("permutation_statistics: need equal sides with m >= 2");
  const std::size_t m = g.nx;
  const std::size_t n = 2 * m;
  std::vector<double> rowsum(n, 0.0);
  double total = 0.0, trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* ki = &g.k(i, 0);
    rowsum[i] = std::accumulate(ki, ki + n, 0.0);
    total += rowsum[i];
    trace += ki[i];
  }
  const double md = static_cast<double>(m);
  const double within = 1.0 / (md * (md - 1.0));
  const double cross = 2.0 / (md * md);

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<double> stats;
  stats.reserve(count);
  for (std::size_t b = 0; b < count; ++b) {
    std::shuffle(perm.begin(), perm.end(), rng);
    // First half is the permuted X; sorted so row reads walk forward.
    std::sort(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(m));
    double s_aa = 0.0, r_a = 0.0, diag_a = 0.0;
    for (std::size_t a = 0; a < m; ++a) {
      const std::size_t i = perm[a];
      const double* ki = &g.k(i, 0);
      double s = 0.0;
      for (std::size_t c = 0; c < m; ++c) s += ki[perm[c]];
      s_aa += s;
      r_a += rowsum[i];
      diag_a += ki[i];
    }
    const double s_ab = r_a - s_aa;
    const double s_bb = total - s_aa - 2.0 * s_ab;
    const double diag_b = trace - diag_a;
    const double mmd = within * ((s_aa - diag_a) + (s_bb - diag_b)) - cross * s_ab;
    stats.push_back(md * mmd);
  }
  return stats;
}

std::vector<double> permutation_statistics(const Matrix& x, const Matrix& y, const RbfKernel& k, std::size_t count,
                                           Rng& rng) {
  if (x.rows() != y.rows() || x.rows() < 2)
    throw ParameterError("permutation_statistics: need equal sides with m >= 2");
  return permutation_statistics(PooledGram(x, y, k), count, rng);
}

double permutation_threshold(const Matrix& x, const Matrix& y, const RbfKernel& k, const TestConfig& cfg, Rng& rng) {
  cfg.validate();
  return empirical_quantile(permutation_statistics(x, y, k, cfg.n_permutations, rng), 1.0 - cfg.alpha);
}

bool reject(const Matrix& x, const Matrix& y, const RbfKernel& k, double c_alpha) {
  return static_cast<double>(x.rows()) * mmd2_unbiased(x, y, k) > c_alpha;
}

std::vector<double> estimate_power_curve(const Sampler& p, const Sampler& q, const KernelChooser& chooser,
                                         const TestConfig& cfg, std::span<const double> alphas, std::size_t trials,
                                         std::uint64_t seed) {
  if (trials == 0) throw ParameterError("estimate_power: trials must be >= 1");
  if (alphas.empty()) throw ParameterError("estimate_power: no alpha values");
  for (double a : alphas) {
    TestConfig c = cfg;
    c.alpha = a;
    c.validate();
  }
  std::vector<std::size_t> hits(alphas.size(), 0);
  for (std::size_t t = 0; t < trials; ++t) {
    // Separate streams: the test draw of trial t does not depend on how much
    // randomness the chooser consumed, so selectors are compared on equal data.
    const std::uint64_t trial_seed = derive_seed(seed, t);
    Rng select_rng = make_rng(trial_seed, 0);
    Rng rng = make_rng(trial_seed, 1);
    const RbfKernel kernel = chooser(select_rng);
    const Matrix x = p(cfg.m, rng);
    const Matrix y = q(cfg.m, rng);
    if (x.rows() != cfg.m || y.rows() != cfg.m) throw ShapeError("estimate_power: sampler returned wrong size");
    const PooledGram g(x, y, kernel);
    const double stat = static_cast<double>(cfg.m) * mmd2_unbiased(g);
    const std::vector<double> perms = permutation_statistics(g, cfg.n_permutations, rng);
    for (std::size_t a = 0; a < alphas.size(); ++a)
      if (stat > empirical_quantile(perms, 1.0 - alphas[a])) ++hits[a];
  }
  std::vector<double> power(alphas.size());
  for (std::size_t a = 0; a < alphas.size(); ++a)
    power[a] = static_cast<double>(hits[a]) / static_cast<double>(trials);
  return power;
}

double estimate_power(const Sampler& p, const Sampler& q, const KernelChooser& chooser, const TestConfig& cfg,
                      std::size_t trials, std::uint64_t seed) {
  const double alpha[1] = {cfg.alpha};
  return estimate_power_curve(p, q, chooser, cfg, alpha, trials, seed).front();
}

}  // namespace klcpd
