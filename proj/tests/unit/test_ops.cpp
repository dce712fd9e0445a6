#include <doctest.h>

#include <cmath>
#include <functional>

#include "fd_check.hpp"
#include "klcpd/error.hpp"
#include "klcpd/mmdstats.hpp"
#include "klcpd/ops.hpp"

using namespace klcpd;

namespace {

// Scalar probe sum(out .* R) with a fixed random R, so every output entry
// contributes a distinct weight to the checked gradient.
using UnaryBuilder = std::function<Var(Graph&, std::vector<Var>&)>;

double probe(ParamStore& store, const UnaryBuilder& build, const Matrix& weights, bool record) {
  Graph g(record);
  std::vector<Var> in;
  for (auto& p : store) in.push_back(record ? g.param(p) : g.constant(p.value));
  Var out = build(g, in);
  Var loss = sum(mul(out, g.constant(weights)));
  if (record) g.backward(loss);
  return loss.value().scalar_value();
}

double check_op(std::vector<std::pair<std::size_t, std::size_t>> shapes, const UnaryBuilder& build,
                std::uint64_t seed = 7, double scale = 1.0) {
  Rng rng(seed);
  ParamStore store;
  for (std::size_t i = 0; i < shapes.size(); ++i)
    store.add_uniform("p" + std::to_string(i), shapes[i].first, shapes[i].second, scale, rng);
  Matrix out_shape;
  {
    Graph g(false);
    std::vector<Var> in;
    for (auto& p : store) in.push_back(g.constant(p.value));
    out_shape = build(g, in).value();
  }
  Matrix weights(out_shape.rows(), out_shape.cols());
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : weights.values()) v = u(rng);
  auto rep = testing::fd_compare(
      {&store}, [&] { probe(store, build, weights, true); }, [&] { return probe(store, build, weights, false); });
  CHECK(rep.grad_norm > 0.0);
  return rep.rel_error;
}

}  // namespace

TEST_CASE("elementwise and matrix ops match finite differences") {
  CHECK(check_op({{3, 4}, {4, 2}}, [](Graph&, auto& v) { return matmul(v[0], v[1]); }) < 1e-7);
  CHECK(check_op({{3, 4}, {3, 4}}, [](Graph&, auto& v) { return add(v[0], v[1]); }) < 1e-7);
  CHECK(check_op({{3, 4}, {3, 4}}, [](Graph&, auto& v) { return sub(v[0], v[1]); }) < 1e-7);
  CHECK(check_op({{3, 4}, {3, 4}}, [](Graph&, auto& v) { return mul(v[0], v[1]); }) < 1e-7);
  CHECK(check_op({{3, 4}, {1, 4}}, [](Graph&, auto& v) { return add_row(v[0], v[1]); }) < 1e-7);
  CHECK(check_op({{3, 4}}, [](Graph&, auto& v) { return scale(v[0], -2.5); }) < 1e-7);
  CHECK(check_op({{3, 4}}, [](Graph&, auto& v) { return add_scalar(v[0], 0.3); }) < 1e-7);
  CHECK(check_op({{3, 4}}, [](Graph&, auto& v) { return sigmoid(v[0]); }, 7, 3.0) < 1e-7);
  CHECK(check_op({{3, 4}}, [](Graph&, auto& v) { return tanh(v[0]); }, 7, 2.0) < 1e-7);
  CHECK(check_op({{3, 4}}, [](Graph&, auto& v) { return exp(v[0]); }) < 1e-7);
}

TEST_CASE("reductions and slicing match finite differences") {
  CHECK(check_op({{3, 4}}, [](Graph&, auto& v) { return sum(v[0]); }) < 1e-7);
  CHECK(check_op({{3, 4}}, [](Graph&, auto& v) { return mean(v[0]); }) < 1e-7);
  CHECK(check_op({{3, 4}}, [](Graph&, auto& v) { return squared_norm(v[0]); }) < 1e-7);
  CHECK(check_op({{5, 4}}, [](Graph&, auto& v) { return slice_rows(v[0], 1, 4); }) < 1e-7);
  CHECK(check_op({{5, 4}}, [](Graph&, auto& v) { return slice_cols(v[0], 1, 3); }) < 1e-7);
  CHECK(check_op({{2, 3}, {4, 3}}, [](Graph&, auto& v) {
          const Var parts[] = {v[0], v[1], v[0]};
          return concat_rows(parts);
        }) < 1e-7);
}

TEST_CASE("fused gru_step matches finite differences") {
  const std::size_t b = 3, h = 4;
  auto build = [](Graph&, auto& v) { return gru_step(v[0], v[1], v[2], v[3]); };
  for (std::uint64_t seed : {1u, 2u, 3u})
    CHECK(check_op({{b, 3 * h}, {b, h}, {h, 2 * h}, {h, h}}, build, seed, 1.5) < 1e-7);
}

TEST_CASE("gru_step reduces to its gate equations") {
  Graph g(false);
  // H = 1: hand-evaluate one step.
  const double xz = 0.2, xr = -0.4, xn = 0.7, h = 0.5, uz = 0.3, ur = -0.6, un = 0.9;
  Var out = gru_step(g.constant(Matrix(1, 3, {xz, xr, xn})), g.constant(Matrix(1, 1, {h})),
                     g.constant(Matrix(1, 2, {uz, ur})), g.constant(Matrix(1, 1, {un})));
  const double z = 1.0 / (1.0 + std::exp(-(xz + h * uz)));
  const double r = 1.0 / (1.0 + std::exp(-(xr + h * ur)));
  const double n = std::tanh(xn + (r * h) * un);
  CHECK(out.value()(0, 0) == doctest::Approx((1.0 - z) * h + z * n).epsilon(1e-14));
}

TEST_CASE("grouped_mmd2 matches finite differences for both inputs") {
  const std::size_t groups = 3, m = 4, k = 2;
  const std::vector<double> s2 = {0.7, 1.3, 2.0};
  auto build = [&](Graph&, auto& v) { return grouped_mmd2(v[0], v[1], groups, s2); };
  for (std::uint64_t seed : {11u, 12u})
    CHECK(check_op({{m * groups, k}, {m * groups, k}}, build, seed) < 1e-7);
}

TEST_CASE("grouped_mmd2 agrees with the direct estimator per group") {
  Rng rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  const std::size_t groups = 4, m = 6, k = 3;
  Matrix x(m * groups, k), y(m * groups, k);
  for (double& v : x.values()) v = n(rng);
  for (double& v : y.values()) v = n(rng) + 0.5;
  const std::vector<double> s2 = {0.5, 1.0, 2.0, 4.0};
  Graph g(false);
  const Matrix out = grouped_mmd2(g.constant(x), g.constant(y), groups, s2).value();
  REQUIRE(out.rows() == groups);
  for (std::size_t gi = 0; gi < groups; ++gi) {
    Matrix xs(m, k), ys(m, k);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t c = 0; c < k; ++c) {
        xs(i, c) = x(i * groups + gi, c);
        ys(i, c) = y(i * groups + gi, c);
      }
    CHECK(out(gi, 0) == doctest::Approx(mmd2_unbiased(xs, ys, RbfKernel(s2[gi]))).epsilon(1e-13));
  }
}

TEST_CASE("graph rejects misuse") {
  Graph g;
  Var a = g.constant(Matrix(2, 2, 1.0));
  CHECK_THROWS_AS(g.backward(a), ShapeError);
  CHECK_THROWS_AS(matmul(a, g.constant(Matrix(3, 1))), ShapeError);
  Graph other;
  CHECK_THROWS_AS(add(a, other.constant(Matrix(2, 2))), StateError);
  Graph frozen(false);
  CHECK_THROWS_AS(frozen.backward(frozen.constant(Matrix(1, 1, 1.0))), StateError);
  const double bad[] = {-1.0};
  CHECK_THROWS_AS(grouped_mmd2(a, a, 1, bad), ParameterError);
  CHECK_THROWS(static_cast<void>(Var{}.value()));
}

TEST_CASE("parameters unreachable from the loss get zero gradient") {
  ParamStore s;
  s.add("used", Matrix(1, 1, 2.0));
  s.add("unused", Matrix(1, 1, 3.0));
  s.at("unused").grad = Matrix(1, 1, 9.0);
  Graph g;
  Var u = g.param(s.at("used"));
  g.param(s.at("unused"));
  g.backward(squared_norm(u));
  CHECK(s.at("used").grad(0, 0) == doctest::Approx(4.0));
  CHECK(s.at("unused").grad(0, 0) == 0.0);
}
