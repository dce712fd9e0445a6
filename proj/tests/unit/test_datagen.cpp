#include <doctest.h>

#include <cmath>
#include <numbers>

#include "klcpd/datagen.hpp"
#include "klcpd/error.hpp"

using namespace klcpd;

TEST_CASE("blob correlation and layout") {
  CHECK(blob_correlation(1.0) == 0.0);
  CHECK(blob_correlation(6.0) == doctest::Approx(5.0 / 7.0).epsilon(1e-15));
  CHECK(blob_correlation(6.0) == doctest::Approx(0.714286).epsilon(1e-6));
  CHECK_THROWS_AS(blob_correlation(0.5), ParameterError);
  CHECK_THROWS_AS(gen_blobs(2.0, 0, std::uint64_t{1}), ParameterError);

  const Matrix x = gen_blobs(6.0, 100000, std::uint64_t{3});
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    mx += x(i, 0);
    my += x(i, 1);
  }
  CHECK(std::abs(mx / x.rows() - 30.0) <= 0.5);
  CHECK(std::abs(my / x.rows() - 30.0) <= 0.5);

  // Within-blob correlation: residuals from the nearest grid centre.
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    const double rx = x(i, 0) - 15.0 * std::round(x(i, 0) / 15.0);
    const double ry = x(i, 1) - 15.0 * std::round(x(i, 1) / 15.0);
    sxy += rx * ry;
    sxx += rx * rx;
    syy += ry * ry;
  }
  CHECK(sxy / std::sqrt(sxx * syy) == doctest::Approx(5.0 / 7.0).epsilon(0.02));
  CHECK(gen_blobs(6.0, 10, std::uint64_t{5}) == gen_blobs(6.0, 10, std::uint64_t{5}));
}

TEST_CASE("segment schedules") {
  CHECK(jumping_mean_mu(1) == 0.0);
  CHECK(jumping_mean_mu(2) == 0.125);
  CHECK(jumping_mean_mu(3) == 0.3125);
  CHECK(scaling_variance_sigma(1) == 1.0);
  CHECK(scaling_variance_sigma(3) == 1.0);
  CHECK(scaling_variance_sigma(2) == doctest::Approx(std::log(std::numbers::e + 0.5)).epsilon(1e-15));
  CHECK(scaling_variance_sigma(2) == doctest::Approx(1.1688476234983056).epsilon(1e-14));
  CHECK(scaling_variance_sigma(48) == doctest::Approx(2.6890903828778803).epsilon(1e-14));
  CHECK_THROWS_AS(jumping_mean_mu(0), ParameterError);
}

TEST_CASE("piecewise AR series") {
  for (auto gen : {&gen_jumping_mean, &gen_scaling_variance}) {
    const LabeledSeries s = gen(7, {});
    CHECK(s.length() == 5000);
    CHECK(s.dim() == 1);
    CHECK(s.values(0, 0) == 0.0);
    CHECK(s.values(1, 0) == 0.0);
    CHECK_NOTHROW(s.validate());
    CHECK(!s.labels.empty());
    for (std::size_t i = 1; i < s.labels.size(); ++i) CHECK(s.labels[i] - s.labels[i - 1] >= 50);
    CHECK(gen(7, {}).values == s.values);
    CHECK(gen(8, {}).values != s.values);
  }
}

TEST_CASE("fixed segment length puts labels on hundreds") {
  SegmentConfig c;
  c.tau_std = 0.0;
  const LabeledSeries s = gen_jumping_mean(1, c);
  REQUIRE(s.labels.size() == 49);
  for (std::size_t i = 0; i < s.labels.size(); ++i) CHECK(s.labels[i] == 100 * (i + 1));
}

TEST_CASE("jumping-mean segment means are nondecreasing") {
  SegmentConfig c;
  c.tau_std = 0.0;
  const LabeledSeries s = gen_jumping_mean(11, c);
  // The AR(2) recursion maps a noise mean mu to a level mu / (1 - 0.6 + 0.5);
  // compare the implied noise means with 3 sigma / sqrt(100) slack.
  const double slack = 3.0 * 1.5 / std::sqrt(100.0);
  double prev = -1e9;
  for (std::size_t seg = 0; seg < 50; ++seg) {
    double acc = 0.0;
    // Skip the first steps of each segment while the level settles.
    for (std::size_t t = seg * 100 + 20; t < seg * 100 + 100; ++t) acc += s.values(t, 0);
    const double implied = 0.9 * acc / 80.0;
    CHECK(implied >= prev - slack);
    prev = std::max(prev, implied);
  }
}

TEST_CASE("alternating mixtures") {
  const LabeledSeries s = gen_gaussian_mixtures(3, 20000);
  REQUIRE(s.labels.size() == 199);
  CHECK(s.labels.front() == 100);
  CHECK(s.labels[1] == 200);
  double a = 0.0, b = 0.0;
  for (std::size_t t = 0; t < s.length(); ++t) ((t / 100) % 2 == 0 ? a : b) += s.values(t, 0);
  CHECK(a / 10000.0 == doctest::Approx(0.0).epsilon(0.05).scale(1.0));
  CHECK(b / 10000.0 == doctest::Approx(-0.6).epsilon(0.05).scale(1.0));
}

TEST_CASE("high-dimensional variance switch") {
  const LabeledSeries s = gen_highdim_variance(4, 9, 40000);
  CHECK(s.dim() == 4);
  CHECK(s.labels.front() == 100);
  double v1 = 0.0, v2 = 0.0;
  for (std::size_t t = 0; t < s.length(); ++t)
    for (std::size_t c = 0; c < 4; ++c) ((t / 100) % 2 == 0 ? v1 : v2) += s.values(t, c) * s.values(t, c);
  CHECK(v2 / v1 == doctest::Approx(25.0 / 9.0).epsilon(0.03));
  CHECK_THROWS_AS(gen_highdim_variance(0, 1), ParameterError);
}

TEST_CASE("label validation") {
  LabeledSeries s{Matrix(10, 1), {3, 3}};
  CHECK_THROWS_AS(s.validate(), DataError);
  s.labels = {10};
  CHECK_THROWS_AS(s.validate(), DataError);
}
