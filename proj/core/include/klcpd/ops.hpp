#pragma once

#include <span>
#include <vector>

#include "klcpd/graph.hpp"

namespace klcpd {

// Differentiable ops over Graph variables. Only what the GRU seq2seq models
// and the MMD objectives need.

Var matmul(Var a, Var b);
Var add(Var a, Var b);
Var sub(Var a, Var b);
/// Element-wise product.
Var mul(Var a, Var b);
/// Adds a 1 x n row to every row of a.
Var add_row(Var a, Var row);
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var sigmoid(Var a);
Var tanh(Var a);
Var exp(Var a);

/// 1x1 reductions.
Var sum(Var a);
Var mean(Var a);
Var squared_norm(Var a);

Var slice_rows(Var a, std::size_t begin, std::size_t end);
Var slice_cols(Var a, std::size_t begin, std::size_t end);
Var concat_rows(std::span<const Var> parts);

/// One fused GRU recurrence step.
///
///   z  = sigmoid(xz + h U_z)
///   r  = sigmoid(xr + h U_r)
///   n  = tanh(xn + (r * h) U_n)
///   h' = (1 - z) * h + z * n
///
/// `xproj` is B x 3H holding [xz | xr | xn] (input projection plus bias),
/// `h` is B x H, `u_zr` is H x 2H holding [U_z | U_r], `u_n` is H x H.
Var gru_step(Var xproj, Var h, Var u_zr, Var u_n);

/// Unbiased squared MMD for G independent groups under per-group RBF
/// bandwidths k(a, b) = exp(-|a - b|^2 / (2 sigma2[g])).
///
/// X and Y are (m * G) x k with sample i of group g stored in row i * G + g
/// (timestep-major layout produced by running a recurrence over a batch).
/// Returns a G x 1 column of estimates.
Var grouped_mmd2(Var x, Var y, std::size_t groups, std::span<const double> sigma2);

}  // namespace klcpd
