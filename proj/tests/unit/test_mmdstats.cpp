#include <doctest.h>

#include <cmath>
#include <numeric>

#include "klcpd/error.hpp"
#include "klcpd/mmdstats.hpp"

using namespace klcpd;

namespace {

Matrix col(std::vector<double> v) {
  const std::size_t n = v.size();
  return Matrix(n, 1, std::move(v));
}

Matrix normal(std::size_t m, double mu, Rng& rng) {
  std::normal_distribution<double> n(mu, 1.0);
  Matrix x(m, 1);
  for (double& v : x.values()) v = n(rng);
  return x;
}

// Direct O(m^2) evaluation of the U-statistic, written independently of
// the library's blocked sums.
double brute_mmd2(const Matrix& x, const Matrix& y, const RbfKernel& k) {
  const std::size_t m = x.rows();
  double xx = 0.0, yy = 0.0, xy = 0.0;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      if (i != j) {
        xx += k(x.row(i), x.row(j));
        yy += k(y.row(i), y.row(j));
      }
      xy += k(x.row(i), y.row(j));
    }
  const double md = static_cast<double>(m);
  return xx / (md * (md - 1)) + yy / (md * (md - 1)) - 2.0 * xy / (md * md);
}

}  // namespace

TEST_CASE("hand-computed two-point fixture") {
  const Matrix x = col({0, 2});
  CHECK(std::abs(mmd2_unbiased(x, x, RbfKernel(1.0)) - (std::exp(-2.0) - 1.0)) <= 1e-12);
  CHECK(mmd2_unbiased(x, x, RbfKernel(1.0)) == doctest::Approx(-0.864665).epsilon(1e-6));
}

TEST_CASE("limits and degenerate inputs") {
  CHECK(mmd2_unbiased(col({0, 0}), col({1e4, 1e4}), RbfKernel(1.0)) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(mmd2_unbiased(col({5, 5, 5}), col({5, 5, 5}), RbfKernel(0.3)) == 0.0);
  CHECK_THROWS_AS(mmd2_unbiased(col({1}), col({2}), RbfKernel(1.0)), ParameterError);
  CHECK_THROWS_AS(mmd2_unbiased(col({1, 2}), col({2, 3, 4}), RbfKernel(1.0)), ParameterError);
}

TEST_CASE("estimator matches brute force and stays bounded") {
  Rng rng(21);
  const RbfKernel k(0.9);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix x = normal(9, 0.0, rng), y = normal(9, 0.7, rng);
    const double v = mmd2_unbiased(x, y, k);
    CHECK(v == doctest::Approx(brute_mmd2(x, y, k)).epsilon(1e-13));
    CHECK(std::abs(v) <= 2.0);
  }
}

TEST_CASE("unbiased under the null") {
  Rng rng(2024);
  const std::size_t draws = 1000;
  std::vector<double> v(draws);
  for (auto& s : v) {
    const Matrix x = normal(50, 0.0, rng), y = normal(50, 0.0, rng);
    s = mmd2_unbiased(x, y, RbfKernel(median_heuristic(x, y)));
  }
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / draws;
  double var = 0.0;
  for (double s : v) var += (s - mean) * (s - mean);
  const double se = std::sqrt(var / (draws - 1) / draws);
  CHECK(std::abs(mean) <= 3.0 * se);
}

TEST_CASE("mean statistic grows with the shift") {
  Rng rng(77);
  const RbfKernel k(1.0);
  double prev = -1.0;
  for (double delta : {0.0, 0.5, 1.0, 2.0}) {
    double acc = 0.0;
    for (int t = 0; t < 200; ++t) acc += mmd2_unbiased(normal(200, 0.0, rng), normal(200, delta, rng), k);
    const double mean = acc / 200.0;
    CHECK(mean >= prev);
    prev = mean;
  }
}

TEST_CASE("bootstrap variance") {
  Rng rng(5);
  CHECK(mmd2_variance(col({1, 1, 1, 1}), col({1, 1, 1, 1}), RbfKernel(1.0), 100, rng) == kVarianceFloor);
  CHECK_THROWS_AS(mmd2_variance(col({1, 2, 3}), col({1, 2, 3}), RbfKernel(1.0), 100, rng), ParameterError);
  CHECK_THROWS_AS(mmd2_variance(col({1, 2, 3, 4}), col({1, 2, 3, 4}), RbfKernel(1.0), 50, rng), ParameterError);

  // Relabeling the sample order leaves the estimate unchanged up to
  // resampling noise.
  const Matrix x = normal(20, 0.0, rng), y = normal(20, 0.5, rng);
  Matrix xr(20, 1);
  for (std::size_t i = 0; i < 20; ++i) xr(i, 0) = x(19 - i, 0);
  Rng r1(9), r2(10);
  const double v1 = mmd2_variance(x, y, RbfKernel(1.0), 4000, r1);
  const double v2 = mmd2_variance(xr, y, RbfKernel(1.0), 4000, r2);
  CHECK(v2 == doctest::Approx(v1).epsilon(0.15));
}

TEST_CASE("bootstrap variance tracks the sampling variance") {
  Rng rng(99);
  const RbfKernel k(1.0);
  std::vector<double> fresh(500);
  for (auto& s : fresh) s = mmd2_unbiased(normal(100, 0.0, rng), normal(100, 0.0, rng), k);
  const double mean = std::accumulate(fresh.begin(), fresh.end(), 0.0) / 500.0;
  double emp = 0.0;
  for (double s : fresh) emp += (s - mean) * (s - mean);
  emp /= 499.0;
  const double boot = mmd2_variance(normal(100, 0.0, rng), normal(100, 0.0, rng), k, 500, rng);
  CHECK(boot <= 3.0 * emp);
  CHECK(boot >= emp / 3.0);
}

TEST_CASE("max-ratio selection") {
  Rng rng(3);
  const Matrix x = normal(20, 0.0, rng), y = normal(20, 1.5, rng);
  const RbfKernel one[] = {RbfKernel(1.0)};
  CHECK(max_ratio_select(x, y, one, 100, rng) == 0);
  CHECK_THROWS_AS(max_ratio_select(x, y, std::span<const RbfKernel>{}, 100, rng), ParameterError);
  // Constant sides: every kernel scores 0 / sqrt(floor); ties keep index 0.
  const RbfKernel three[] = {RbfKernel(0.5), RbfKernel(1.0), RbfKernel(2.0)};
  CHECK(max_ratio_select(col({1, 1, 1, 1}), col({1, 1, 1, 1}), three, 100, rng) == 0);
  // Separated clouds: a bandwidth far too small sees nothing, a moderate one
  // separates them.
  const RbfKernel pair[] = {RbfKernel(1e-6), RbfKernel(1.0)};
  const Matrix a = normal(20, 0.0, rng), b = normal(20, 4.0, rng);
  CHECK(max_ratio_select(a, b, pair, 100, rng) == 1);
}

TEST_CASE("power bound objective") {
  Rng rng(6);
  const DeepKernel dk = DeepKernel::identity(1, 1.0);
  const Matrix xl = normal(10, 0.0, rng), xr = normal(10, 0.3, rng), z = normal(10, 2.0, rng);
  const double surrogate = mmd2_unbiased(xr, z, dk.rbf);
  const double null_term = mmd2_unbiased(xl, xr, dk.rbf);
  CHECK(power_bound_objective(xl, xr, z, dk, 0.0) == surrogate);
  const double o1 = power_bound_objective(xl, xr, z, dk, 1.0);
  const double o2 = power_bound_objective(xl, xr, z, dk, 2.0);
  CHECK(o1 == doctest::Approx(surrogate - null_term).epsilon(1e-14));
  CHECK(o2 - o1 == doctest::Approx(o1 - surrogate).epsilon(1e-12));
  // Identical sets cancel only at lambda = 1; constant windows vanish for
  // every lambda.
  CHECK(std::abs(power_bound_objective(xr, xr, xr, dk, 1.0)) <= 1e-15);
  const Matrix flat = col({0.4, 0.4, 0.4});
  CHECK(power_bound_objective(flat, flat, flat, dk, 3.0) == 0.0);
  CHECK_THROWS_AS(power_bound_objective(xl, xr, z, dk, -1.0), ParameterError);
  CHECK_THROWS_AS(power_bound_objective(col({1}), col({1}), col({1}), dk, 0.0), ParameterError);
}
