#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "klcpd/error.hpp"
#include "klcpd/tstest.hpp"

using namespace klcpd;

namespace {

Matrix normal(std::size_t m, double mu, Rng& rng) {
  std::normal_distribution<double> n(mu, 1.0);
  Matrix x(m, 1);
  for (double& v : x.values()) v = n(rng);
  return x;
}

}  // namespace

TEST_CASE("config validation") {
  CHECK_NOTHROW(TestConfig{}.validate());
  CHECK_THROWS_AS((TestConfig{0.0, 200, 10}.validate()), ParameterError);
  CHECK_THROWS_AS((TestConfig{1.0, 200, 10}.validate()), ParameterError);
  CHECK_THROWS_AS((TestConfig{0.05, 99, 10}.validate()), ParameterError);
}

TEST_CASE("empirical quantile interpolates linearly") {
  CHECK(empirical_quantile({3, 1, 2}, 0.5) == 2.0);
  CHECK(empirical_quantile({1, 2, 3, 4}, 0.5) == 2.5);
  CHECK(empirical_quantile({1, 2, 3, 4}, 1.0) == 4.0);
  CHECK(empirical_quantile({10, 20}, 0.25) == 12.5);
  CHECK_THROWS_AS(empirical_quantile({}, 0.5), ParameterError);
}

TEST_CASE("permutation statistics agree with recomputing the estimator") {
  Rng rng(1);
  const Matrix x = normal(7, 0.0, rng), y = normal(7, 1.0, rng);
  const RbfKernel k(0.8);
  Rng a(42);
  const auto fast = permutation_statistics(x, y, k, 20, a);

  // Replay the same shuffles and evaluate m * mmd2 on explicit splits.
  Rng b(42);
  const Matrix pooled = vstack(std::vector<Matrix>{x, y});
  std::vector<std::size_t> perm(14);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = 0; i < 20; ++i) {
    std::shuffle(perm.begin(), perm.end(), b);
    std::sort(perm.begin(), perm.begin() + 7);
    Matrix xs(7, 1), ys(7, 1);
    for (std::size_t j = 0; j < 7; ++j) {
      xs(j, 0) = pooled(perm[j], 0);
      ys(j, 0) = pooled(perm[7 + j], 0);
    }
    CHECK(fast[i] == doctest::Approx(7.0 * mmd2_unbiased(xs, ys, k)).epsilon(1e-10));
  }
}

TEST_CASE("threshold at alpha 0.5 is the median of the permutation statistics") {
  Rng rng(3);
  const Matrix x = normal(12, 0.0, rng), y = normal(12, 0.0, rng);
  const RbfKernel k(1.0);
  Rng a(8), b(8);
  const double c = permutation_threshold(x, y, k, {0.5, 101, 12}, a);
  CHECK(c == empirical_quantile(permutation_statistics(x, y, k, 101, b), 0.5));
}

TEST_CASE("identical pooled points give a zero threshold") {
  Rng rng(3);
  const Matrix x(6, 2, 1.5);
  CHECK(permutation_threshold(x, x, RbfKernel(1.0), {0.05, 100, 6}, rng) == 0.0);
}

TEST_CASE("threshold is stable across seeds") {
  Rng rng(17);
  const Matrix x = normal(30, 0.0, rng), y = normal(30, 0.0, rng);
  const RbfKernel k(1.0);
  const TestConfig cfg{0.05, 2000, 30};
  // Quantile standard error from the spread of repeated thresholds.
  std::vector<double> reps;
  for (std::uint64_t s = 0; s < 10; ++s) {
    Rng r(100 + s);
    reps.push_back(permutation_threshold(x, y, k, cfg, r));
  }
  double mean = 0.0;
  for (double v : reps) mean += v;
  mean /= reps.size();
  double var = 0.0;
  for (double v : reps) var += (v - mean) * (v - mean);
  const double se = std::sqrt(var / (reps.size() - 1));
  Rng r1(1), r2(2);
  const double c1 = permutation_threshold(x, y, k, cfg, r1);
  const double c2 = permutation_threshold(x, y, k, cfg, r2);
  CHECK(std::abs(c1 - c2) <= 2.0 * std::sqrt(2.0) * se + 1e-12);
}

TEST_CASE("reject uses a strict inequality") {
  Rng rng(4);
  const Matrix x = normal(10, 0.0, rng), y = normal(10, 2.0, rng);
  const RbfKernel k(1.0);
  const double stat = 10.0 * mmd2_unbiased(x, y, k);
  CHECK_FALSE(reject(x, y, k, stat));
  CHECK(reject(x, y, k, std::nextafter(stat, -1.0)));
  CHECK_FALSE(reject(x, x, k, 0.1));
}

TEST_CASE("far-separated clouds are rejected") {
  Rng rng(5);
  const Matrix x = normal(20, 0.0, rng), y = normal(20, 50.0, rng);
  const RbfKernel k(1.0);
  const double c = permutation_threshold(x, y, k, {0.05, 200, 20}, rng);
  CHECK(reject(x, y, k, c));
}

TEST_CASE("power of a strong mean shift") {
  const Sampler p = [](std::size_t m, Rng& r) { return normal(m, 0.0, r); };
  const Sampler q = [](std::size_t m, Rng& r) { return normal(m, 5.0, r); };
  const KernelChooser median = [&](Rng& r) { return RbfKernel(median_heuristic(p(100, r), q(100, r))); };
  CHECK(estimate_power(p, q, median, {0.05, 100, 100}, 100, 1) >= 0.99);
}

TEST_CASE("power is monotone in alpha with shared draws") {
  const Sampler p = [](std::size_t m, Rng& r) { return normal(m, 0.0, r); };
  const Sampler q = [](std::size_t m, Rng& r) { return normal(m, 0.4, r); };
  const KernelChooser fixed = [](Rng&) { return RbfKernel(1.0); };
  const double alphas[] = {0.01, 0.05, 0.1};
  const auto pw = estimate_power_curve(p, q, fixed, {0.05, 200, 40}, alphas, 200, 3);
  CHECK(pw[0] <= pw[1]);
  CHECK(pw[1] <= pw[2]);
  CHECK(pw[2] > 0.0);
}

TEST_CASE("type-I calibration for every bandwidth in a small grid") {
  const Sampler p = [](std::size_t m, Rng& r) { return normal(m, 0.0, r); };
  for (double s2 : {0.1, 1.0, 10.0}) {
    const KernelChooser fixed = [s2](Rng&) { return RbfKernel(s2); };
    const double rate = estimate_power(p, p, fixed, {0.05, 200, 30}, 1000, 11);
    CHECK(rate >= 0.03);
    CHECK(rate <= 0.07);
  }
}
