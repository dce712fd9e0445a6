#pragma once

#include <span>

#include "klcpd/matrix.hpp"
#include "klcpd/params.hpp"
#include "klcpd/random.hpp"

namespace klcpd {

/// Gaussian RBF k(x, y) = exp(-|x - y|^2 / (2 sigma2)). Bounded by 1 with
/// k(x, x) = 1.
class RbfKernel {
 public:
  explicit RbfKernel(double sigma2);

  [[nodiscard]] double sigma2() const noexcept { return sigma2_; }
  double operator()(std::span<const double> x, std::span<const double> y) const;

 private:
  double sigma2_;
};

double rbf_eval(std::span<const double> x, std::span<const double> y, double sigma2);

/// Half the median squared Euclidean distance over distinct unordered pairs
/// of rows. A zero median falls back to half the smallest positive squared
/// distance, or 1.0 when every row is identical.
double median_heuristic(const Matrix& samples);
/// Median heuristic over the rows of `a` and `b` pooled together.
double median_heuristic(const Matrix& a, const Matrix& b);

/// G(i, j) = k(X_i, Y_j).
Matrix gram(const Matrix& x, const Matrix& y, const RbfKernel& k);

enum class EncoderKind { identity, gru };

/// Compositional kernel k(f_phi(.), f_phi(.)): an RBF on top of a GRU
/// encoder f_phi, with the seq2seq decoder F_psi that keeps f_phi close to
/// injective. With the identity encoder the kernel acts on raw samples.
struct DeepKernel {
  EncoderKind kind = EncoderKind::identity;
  RbfKernel rbf{1.0};
  ParamStore encoder;  // phi
  ParamStore decoder;  // psi
  std::size_t d = 0;
  std::size_t d_h = 0;

  static DeepKernel identity(std::size_t d, double sigma2 = 1.0);
  static DeepKernel gru(std::size_t d, std::size_t d_h, Rng& rng, double sigma2 = 1.0);

  /// Embedding dimension of encode() rows.
  [[nodiscard]] std::size_t embed_dim() const noexcept { return kind == EncoderKind::identity ? d : d_h; }
  /// w x embed_dim; one row per timestep.
  [[nodiscard]] Matrix encode(const Matrix& window) const;
};

/// Gram matrix between the per-timestep encodings of two windows under
/// dk.rbf.
Matrix deep_eval(const Matrix& x_window, const Matrix& y_window, const DeepKernel& dk);

}  // namespace klcpd
