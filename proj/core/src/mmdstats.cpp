#include "klcpd/mmdstats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "klcpd/error.hpp"

namespace klcpd {

PooledGram::PooledGram(const Matrix& x, const Matrix& y, const RbfKernel& kernel) : nx(x.rows()), ny(y.rows()) {
  if (x.cols() != y.cols()) throw ShapeError("PooledGram: " + x.shape_string() + " vs " + y.shape_string());
  const Matrix* rows[2] = {&x, &y};
  const std::size_t n = nx + ny;
  k = Matrix(n, n);
  auto row_of = [&](std::size_t i) { return i < nx ? rows[0]->row(i) : rows[1]->row(i - nx); };
  for (std::size_t i = 0; i < n; ++i) {
    const auto ri = row_of(i);
    k(i, i) = kernel(ri, ri);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = kernel(ri, row_of(j));
      k(i, j) = v;
      k(j, i) = v;
    }
  }
}

PooledGram::PooledGram(const Matrix& sq_dists, std::size_t nx_, const RbfKernel& kernel)
    : k(sq_dists.rows(), sq_dists.cols()), nx(nx_), ny(sq_dists.rows() - std::min(nx_, sq_dists.rows())) {
  if (sq_dists.rows() != sq_dists.cols() || nx_ > sq_dists.rows())
    throw ShapeError("PooledGram: bad distance matrix " + sq_dists.shape_string());
  const double scale = -1.0 / (2.0 * kernel.sigma2());
  const auto src = sq_dists.values();
  auto dst = k.values();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::exp(scale * src[i]);
}

Matrix pooled_sq_dists(const Matrix& x, const Matrix& y) {
  if (x.cols() != y.cols()) throw ShapeError("pooled_sq_dists: " + x.shape_string() + " vs " + y.shape_string());
  const std::size_t nx = x.rows();
  const std::size_t n = nx + y.rows();
  auto row_of = [&](std::size_t i) { return i < nx ? x.row(i) : y.row(i - nx); };
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ri = row_of(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = squared_distance(ri, row_of(j));
      d(i, j) = v;
      d(j, i) = v;
    }
  }
  return d;
}

namespace {

void check_sizes(std::size_t nx, std::size_t ny, std::size_t min_m, const char* who) {
  if (nx != ny) throw ParameterError(std::string(who) + ": unequal sample counts");
  if (nx < min_m)
    throw ParameterError(std::string(who) + ": need at least " + std::to_string(min_m) + " samples per side");
}

}  // namespace

double mmd2_unbiased(const PooledGram& g) {
  check_sizes(g.nx, g.ny, 2, "mmd2_unbiased");
  const std::size_t m = g.nx;
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      sxx += g.k(i, j);
      syy += g.k(m + i, m + j);
    }
    for (std::size_t j = 0; j < m; ++j) sxy += g.k(i, m + j);
  }
  const double md = static_cast<double>(m);
  return 2.0 * (sxx + syy) / (md * (md - 1.0)) - 2.0 * sxy / (md * md);
}

double mmd2_unbiased(const Matrix& x, const Matrix& y, const RbfKernel& k) {
  check_sizes(x.rows(), y.rows(), 2, "mmd2_unbiased");
  return mmd2_unbiased(PooledGram(x, y, k));
}

double mmd2_variance(const PooledGram& g, std::size_t resamples, Rng& rng) {
  check_sizes(g.nx, g.ny, 4, "mmd2_variance");
  if (resamples < 100) throw ParameterError("mmd2_variance: need at least 100 resamples");
  const std::size_t m = g.nx;
  const double md = static_cast<double>(m);
  const double within = 1.0 / (md * (md - 1.0));
  const double cross = 2.0 / (md * md);
  std::uniform_int_distribution<std::size_t> pick(0, m - 1);

  std::vector<double> cx(m), cy(m);
  std::vector<std::size_t> nzx, nzy;
  nzx.reserve(m);
  nzy.reserve(m);
  std::vector<double> stats(resamples);
  for (std::size_t b = 0; b < resamples; ++b) {
    std::fill(cx.begin(), cx.end(), 0.0);
    std::fill(cy.begin(), cy.end(), 0.0);
    for (std::size_t i = 0; i < m; ++i) cx[pick(rng)] += 1.0;
    for (std::size_t i = 0; i < m; ++i) cy[pick(rng)] += 1.0;
    nzx.clear();
    nzy.clear();
    for (std::size_t i = 0; i < m; ++i) {
      if (cx[i] > 0) nzx.push_back(i);
      if (cy[i] > 0) nzy.push_back(i);
    }
    // Ordered-pair sums over the resample: c^T K c - sum_p c_p K_pp.
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t p : nzx) {
      const double* kp = &g.k(p, 0);
      double ax = 0.0, ay = 0.0;
      for (std::size_t q : nzx) ax += cx[q] * kp[q];
      for (std::size_t q : nzy) ay += cy[q] * kp[m + q];
      sxx += cx[p] * (ax - kp[p]);
      sxy += cx[p] * ay;
    }
    for (std::size_t p : nzy) {
      const double* kp = &g.k(m + p, 0);
      double ay = 0.0;
      for (std::size_t q : nzy) ay += cy[q] * kp[m + q];
      syy += cy[p] * (ay - kp[m + p]);
    }
    stats[b] = within * (sxx + syy) - cross * sxy;
  }
  double mean = 0.0;
  for (double s : stats) mean += s;
  mean /= static_cast<double>(resamples);
  double var = 0.0;
  for (double s : stats) var += (s - mean) * (s - mean);
  var /= static_cast<double>(resamples - 1);
  return std::max(var, kVarianceFloor);
}

double mmd2_variance(const Matrix& x, const Matrix& y, const RbfKernel& k, std::size_t resamples, Rng& rng) {
  check_sizes(x.rows(), y.rows(), 4, "mmd2_variance");
  return mmd2_variance(PooledGram(x, y, k), resamples, rng);
}

MmdEstimate mmd2_estimate(const Matrix& x, const Matrix& y, const RbfKernel& k, std::size_t resamples, Rng& rng) {
  const PooledGram g(x, y, k);
  MmdEstimate est;
  est.value = mmd2_unbiased(g);
  est.m = g.nx;
  est.variance = mmd2_variance(g, resamples, rng);
  return est;
}

std::size_t max_ratio_select(const Matrix& x, const Matrix& y, std::span<const RbfKernel> kernels,
                             std::size_t resamples, Rng& rng) {
  if (kernels.empty()) throw ParameterError("max_ratio_select: empty kernel list");
  std::size_t best = 0;
  double best_ratio = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    const MmdEstimate est = mmd2_estimate(x, y, kernels[i], resamples, rng);
    const double ratio = est.value / std::sqrt(std::max(*est.variance, kVarianceFloor));
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = i;
    }
  }
  return best;
}

double power_bound_objective(const Matrix& x_left, const Matrix& x_right, const Matrix& z, const DeepKernel& dk,
                             double lambda) {
  if (lambda < 0.0) throw ParameterError("power_bound_objective: lambda must be >= 0");
  if (x_left.rows() < 2 || x_right.rows() < 2 || z.rows() < 2)
    throw ParameterError("power_bound_objective: window size must be >= 2");
  const Matrix el = dk.encode(x_left);
  const Matrix er = dk.encode(x_right);
  const Matrix ez = dk.encode(z);
  return mmd2_unbiased(er, ez, dk.rbf) - lambda * mmd2_unbiased(el, er, dk.rbf);
}

}  // namespace klcpd
