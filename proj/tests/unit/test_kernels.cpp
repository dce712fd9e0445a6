#include <doctest.h>

#include <cmath>

#include "klcpd/error.hpp"
#include "klcpd/kernels.hpp"

using namespace klcpd;

namespace {

// Cholesky of G + tol * I succeeds iff the smallest eigenvalue of G is
// above -tol (up to rounding).
bool psd_within(const Matrix& g, double tol) {
  const std::size_t n = g.rows();
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = g(j, j) + tol;
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= 0.0) return false;
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = g(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return true;
}

Matrix col(std::initializer_list<double> v) { return Matrix(v.size(), 1, std::vector<double>(v)); }

}  // namespace

TEST_CASE("rbf values") {
  const double zero[] = {0.0}, two[] = {2.0};
  CHECK(rbf_eval(zero, zero, 1.0) == 1.0);
  CHECK(rbf_eval(zero, two, 1.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-15));
  CHECK(rbf_eval(zero, two, 1.0) == doctest::Approx(0.135335).epsilon(1e-6));
  const double a[] = {0.3, -1.2, 4.0}, b[] = {1.1, 0.5, -0.7};
  CHECK(rbf_eval(a, b, 0.8) == rbf_eval(b, a, 0.8));
  CHECK_THROWS_AS(RbfKernel(0.0), ParameterError);
  CHECK_THROWS_AS(RbfKernel(-1.0), ParameterError);
}

TEST_CASE("median heuristic") {
  CHECK(median_heuristic(col({0, 1, 2})) == 0.5);
  CHECK(median_heuristic(col({3, 3, 3, 3})) == 1.0);
  CHECK_THROWS_AS(median_heuristic(col({1})), ParameterError);
  // Zero median with some distinct points falls back to the smallest
  // positive squared distance over two.
  CHECK(median_heuristic(col({0, 0, 0, 0, 3})) == 4.5);

  Rng rng(4);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix x(15, 2);
  for (double& v : x.values()) v = n(rng);
  Matrix scaled = x * 3.0;
  CHECK(median_heuristic(scaled) == doctest::Approx(9.0 * median_heuristic(x)).epsilon(1e-12));
  Matrix reversed(15, 2);
  for (std::size_t i = 0; i < 15; ++i)
    for (std::size_t c = 0; c < 2; ++c) reversed(i, c) = x(14 - i, c);
  CHECK(median_heuristic(reversed) == median_heuristic(x));
  CHECK(median_heuristic(x.slice_rows(0, 7), x.slice_rows(7, 15)) == median_heuristic(x));
}

TEST_CASE("gram matrix") {
  Rng rng(8);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix x(8, 3);
  for (double& v : x.values()) v = n(rng);
  const RbfKernel k(0.7);
  const Matrix g = gram(x, x, k);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(g(i, i) == 1.0);
    for (std::size_t j = 0; j < 8; ++j) {
      CHECK(g(i, j) == g(j, i));
      CHECK(g(i, j) > 0.0);
      CHECK(g(i, j) <= 1.0);
    }
  }
  CHECK(psd_within(g, 1e-8));
  const Matrix one = gram(x.slice_rows(0, 1), x.slice_rows(1, 2), k);
  CHECK(one.rows() == 1);
  CHECK(one(0, 0) == k(x.row(0), x.row(1)));
  CHECK_THROWS_AS(gram(x, Matrix(2, 2), k), ShapeError);
}

TEST_CASE("deep kernel evaluation") {
  Rng rng(2);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix a(6, 2), b(6, 2);
  for (double& v : a.values()) v = n(rng);
  for (double& v : b.values()) v = n(rng);

  const DeepKernel id = DeepKernel::identity(2, 1.3);
  CHECK(deep_eval(a, b, id) == gram(a, b, id.rbf));

  DeepKernel dk = DeepKernel::gru(2, 4, rng, 0.5);
  CHECK(dk.embed_dim() == 4);
  const Matrix g = deep_eval(a, a, dk);
  for (std::size_t i = 0; i < 6; ++i) CHECK(g(i, i) == 1.0);
  CHECK(psd_within(g, 1e-8));
  CHECK(deep_eval(a, b, dk) == gram(dk.encode(a), dk.encode(b), dk.rbf));

  // Zero weights: every hidden state stays at the zero fixpoint.
  for (auto& p : dk.encoder) p.value.fill(0.0);
  const Matrix flat = deep_eval(a, b, dk);
  for (double v : flat.values()) CHECK(v == 1.0);
  CHECK_THROWS_AS(static_cast<void>(dk.encode(Matrix(3, 5))), ShapeError);
}
