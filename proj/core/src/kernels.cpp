#include "klcpd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "klcpd/error.hpp"
#include "klcpd/models.hpp"

namespace klcpd {

RbfKernel::RbfKernel(double sigma2) : sigma2_(sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw ParameterError("RbfKernel: sigma2 must be a positive finite number");
}

double RbfKernel::operator()(std::span<const double> x, std::span<const double> y) const {
  return std::exp(-squared_distance(x, y) / (2.0 * sigma2_));
}

double rbf_eval(std::span<const double> x, std::span<const double> y, double sigma2) {
  return RbfKernel(sigma2)(x, y);
}

namespace {

double median_of_pairs(std::vector<const double*> rows, std::size_t dim) {
  const std::size_t n = rows.size();
  if (n < 2) throw ParameterError("median_heuristic: need at least 2 samples");
  std::vector<double> d2;
  d2.reserve(n * (n - 1) / 2);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < dim; ++c) {
        const double t = rows[i][c] - rows[j][c];
        s += t * t;
      }
      d2.push_back(s);
    }
  }
  const std::size_t half = d2.size() / 2;
  std::nth_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(half), d2.end());
  double med = d2[half];
  if (d2.size() % 2 == 0) {
    const double lower = *std::max_element(d2.begin(), d2.begin() + static_cast<std::ptrdiff_t>(half));
    med = 0.5 * (med + lower);
  }
  if (med > 0.0) return med / 2.0;
  double smallest = std::numeric_limits<double>::infinity();
  for (double v : d2)
    if (v > 0.0) smallest = std::min(smallest, v);
  return std::isfinite(smallest) ? smallest / 2.0 : 1.0;
}

}  // namespace

double median_heuristic(const Matrix& samples) {
  std::vector<const double*> rows;
  rows.reserve(samples.rows());
  for (std::size_t i = 0; i < samples.rows(); ++i) rows.push_back(samples.row(i).data());
  return median_of_pairs(std::move(rows), samples.cols());
}

double median_heuristic(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) throw ShapeError("median_heuristic: dimension mismatch");
  std::vector<const double*> rows;
  rows.reserve(a.rows() + b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) rows.push_back(a.row(i).data());
  for (std::size_t i = 0; i < b.rows(); ++i) rows.push_back(b.row(i).data());
  return median_of_pairs(std::move(rows), a.cols());
}

Matrix gram(const Matrix& x, const Matrix& y, const RbfKernel& k) {
  if (x.cols() != y.cols())
    throw ShapeError("gram: " + x.shape_string() + " vs " + y.shape_string());
  Matrix g(x.rows(), y.rows());
  const bool symmetric = &x == &y;
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t j = symmetric ? i : 0; j < y.rows(); ++j) {
      const double v = k(x.row(i), y.row(j));
      g(i, j) = v;
      if (symmetric) g(j, i) = v;
    }
  }
  return g;
}

DeepKernel DeepKernel::identity(std::size_t d, double sigma2) {
  DeepKernel dk;
  dk.kind = EncoderKind::identity;
  dk.rbf = RbfKernel(sigma2);
  dk.d = d;
  dk.d_h = d;
  return dk;
}

DeepKernel DeepKernel::gru(std::size_t d, std::size_t d_h, Rng& rng, double sigma2) {
  DeepKernel dk;
  dk.kind = EncoderKind::gru;
  dk.rbf = RbfKernel(sigma2);
  dk.d = d;
  dk.d_h = d_h;
  dk.encoder = make_encoder(d, d_h, rng);
  dk.decoder = make_decoder(d, d_h, rng);
  return dk;
}

Matrix DeepKernel::encode(const Matrix& window) const {
  if (window.cols() != d)
    throw ShapeError("DeepKernel::encode: expected " + std::to_string(d) + " dims, got " +
                     std::to_string(window.cols()));
  if (kind == EncoderKind::identity) return window;
  return encode_window(window, encoder);
}

Matrix deep_eval(const Matrix& x_window, const Matrix& y_window, const DeepKernel& dk) {
  const Matrix ex = dk.encode(x_window);
  if (&x_window == &y_window) return gram(ex, ex, dk.rbf);
  const Matrix ey = dk.encode(y_window);
  return gram(ex, ey, dk.rbf);
}

}  // namespace klcpd
