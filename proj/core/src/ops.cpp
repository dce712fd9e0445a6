#include "klcpd/ops.hpp"

#include <cmath>
#include <memory>

#include "klcpd/error.hpp"

namespace klcpd {
namespace {

Graph& graph_of(Var a) {
  if (!a.valid()) throw StateError("op on an unbound variable");
  return *a.graph();
}

Graph& graph_of(Var a, Var b) {
  Graph& g = graph_of(a);
  if (b.graph() != &g) throw StateError("op mixes variables from different graphs");
  return g;
}

bool any_grad(Graph& g, std::initializer_list<Var> vs) {
  if (!g.recording()) return false;
  for (Var v : vs)
    if (g.requires_grad(v)) return true;
  return false;
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b))
    throw ShapeError(std::string(op) + ": " + a.shape_string() + " vs " + b.shape_string());
}

double sigmoid_scalar(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

template <typename F>
Matrix map(const Matrix& a, F f) {
  Matrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = f(a[i]);
  return out;
}

}  // namespace

Var matmul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  Matrix out = klcpd::matmul(a.value(), b.value());
  return g.push(std::move(out),
                [a, b](Graph& g, const Matrix& dout) {
                  if (g.requires_grad(a)) matmul_nt_acc(dout, b.value(), g.grad_ref(a));
                  if (g.requires_grad(b)) matmul_tn_acc(a.value(), dout, g.grad_ref(b));
                },
                any_grad(g, {a, b}));
}

Var add(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "add");
  return g.push(a.value() + b.value(),
                [a, b](Graph& g, const Matrix& dout) {
                  if (g.requires_grad(a)) g.grad_ref(a) += dout;
                  if (g.requires_grad(b)) g.grad_ref(b) += dout;
                },
                any_grad(g, {a, b}));
}

Var sub(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  return g.push(a.value() - b.value(),
                [a, b](Graph& g, const Matrix& dout) {
                  if (g.requires_grad(a)) g.grad_ref(a) += dout;
                  if (g.requires_grad(b)) g.grad_ref(b) -= dout;
                },
                any_grad(g, {a, b}));
}

Var mul(Var a, Var b) {
  Graph& g = graph_of(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  const Matrix& av = a.value();
  const Matrix& bv = b.value();
  Matrix out(av.rows(), av.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  return g.push(std::move(out),
                [a, b](Graph& g, const Matrix& dout) {
                  if (g.requires_grad(a)) {
                    Matrix& ga = g.grad_ref(a);
                    const Matrix& bv = b.value();
                    for (std::size_t i = 0; i < dout.size(); ++i) ga[i] += dout[i] * bv[i];
                  }
                  if (g.requires_grad(b)) {
                    Matrix& gb = g.grad_ref(b);
                    const Matrix& av = a.value();
                    for (std::size_t i = 0; i < dout.size(); ++i) gb[i] += dout[i] * av[i];
                  }
                },
                any_grad(g, {a, b}));
}

Var add_row(Var a, Var row) {
  Graph& g = graph_of(a, row);
  const Matrix& av = a.value();
  const Matrix& rv = row.value();
  if (rv.rows() != 1 || rv.cols() != av.cols())
    throw ShapeError("add_row: " + av.shape_string() + " + " + rv.shape_string());
  Matrix out = av;
  for (std::size_t r = 0; r < out.rows(); ++r)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += rv(0, c);
  return g.push(std::move(out),
                [a, row](Graph& g, const Matrix& dout) {
                  if (g.requires_grad(a)) g.grad_ref(a) += dout;
                  if (g.requires_grad(row)) {
                    Matrix& gr = g.grad_ref(row);
                    for (std::size_t r = 0; r < dout.rows(); ++r)
                      for (std::size_t c = 0; c < dout.cols(); ++c) gr(0, c) += dout(r, c);
                  }
                },
                any_grad(g, {a, row}));
}

Var scale(Var a, double s) {
  Graph& g = graph_of(a);
  return g.push(a.value() * s,
                [a, s](Graph& g, const Matrix& dout) { g.grad_ref(a) += dout * s; },
                any_grad(g, {a}));
}

Var add_scalar(Var a, double s) {
  Graph& g = graph_of(a);
  return g.push(map(a.value(), [s](double v) { return v + s; }),
                [a](Graph& g, const Matrix& dout) { g.grad_ref(a) += dout; }, any_grad(g, {a}));
}

Var sigmoid(Var a) {
  Graph& g = graph_of(a);
  Matrix value = map(a.value(), sigmoid_scalar);
  if (!any_grad(g, {a})) return g.push(std::move(value), nullptr, false);
  auto holder = std::make_shared<Matrix>(value);
  return g.push(std::move(value),
                [a, holder](Graph& g, const Matrix& dout) {
                  Matrix& ga = g.grad_ref(a);
                  const Matrix& y = *holder;
                  for (std::size_t i = 0; i < dout.size(); ++i) ga[i] += dout[i] * y[i] * (1.0 - y[i]);
                },
                true);
}

Var tanh(Var a) {
  Graph& g = graph_of(a);
  Matrix value = map(a.value(), [](double v) { return std::tanh(v); });
  if (!any_grad(g, {a})) return g.push(std::move(value), nullptr, false);
  auto holder = std::make_shared<Matrix>(value);
  return g.push(std::move(value),
                [a, holder](Graph& g, const Matrix& dout) {
                  Matrix& ga = g.grad_ref(a);
                  const Matrix& y = *holder;
                  for (std::size_t i = 0; i < dout.size(); ++i) ga[i] += dout[i] * (1.0 - y[i] * y[i]);
                },
                true);
}

Var exp(Var a) {
  Graph& g = graph_of(a);
  Matrix value = map(a.value(), [](double v) { return std::exp(v); });
  if (!any_grad(g, {a})) return g.push(std::move(value), nullptr, false);
  auto holder = std::make_shared<Matrix>(value);
  return g.push(std::move(value),
                [a, holder](Graph& g, const Matrix& dout) {
                  Matrix& ga = g.grad_ref(a);
                  const Matrix& y = *holder;
                  for (std::size_t i = 0; i < dout.size(); ++i) ga[i] += dout[i] * y[i];
                },
                true);
}

Var sum(Var a) {
  Graph& g = graph_of(a);
  double s = 0.0;
  for (double v : a.value().values()) s += v;
  return g.push(Matrix::scalar(s),
                [a](Graph& g, const Matrix& dout) {
                  const double d = dout(0, 0);
                  for (double& v : g.grad_ref(a).values()) v += d;
                },
                any_grad(g, {a}));
}

Var mean(Var a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw ShapeError("mean of an empty matrix");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var squared_norm(Var a) {
  Graph& g = graph_of(a);
  double s = 0.0;
  for (double v : a.value().values()) s += v * v;
  return g.push(Matrix::scalar(s),
                [a](Graph& g, const Matrix& dout) {
                  const double d = 2.0 * dout(0, 0);
                  Matrix& ga = g.grad_ref(a);
                  const Matrix& av = a.value();
                  for (std::size_t i = 0; i < av.size(); ++i) ga[i] += d * av[i];
                },
                any_grad(g, {a}));
}

Var slice_rows(Var a, std::size_t begin, std::size_t end) {
  Graph& g = graph_of(a);
  Matrix out = a.value().slice_rows(begin, end);
  return g.push(std::move(out),
                [a, begin](Graph& g, const Matrix& dout) {
                  Matrix& ga = g.grad_ref(a);
                  const std::size_t cols = dout.cols();
                  for (std::size_t r = 0; r < dout.rows(); ++r)
                    for (std::size_t c = 0; c < cols; ++c) ga(begin + r, c) += dout(r, c);
                },
                any_grad(g, {a}));
}

Var slice_cols(Var a, std::size_t begin, std::size_t end) {
  Graph& g = graph_of(a);
  const Matrix& av = a.value();
  if (begin > end || end > av.cols()) throw ShapeError("slice_cols out of range on " + av.shape_string());
  Matrix out(av.rows(), end - begin);
  for (std::size_t r = 0; r < av.rows(); ++r)
    for (std::size_t c = begin; c < end; ++c) out(r, c - begin) = av(r, c);
  return g.push(std::move(out),
                [a, begin](Graph& g, const Matrix& dout) {
                  Matrix& ga = g.grad_ref(a);
                  for (std::size_t r = 0; r < dout.rows(); ++r)
                    for (std::size_t c = 0; c < dout.cols(); ++c) ga(r, begin + c) += dout(r, c);
                },
                any_grad(g, {a}));
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows of nothing");
  Graph& g = graph_of(parts.front());
  std::vector<Matrix> blocks;
  blocks.reserve(parts.size());
  bool needs = false;
  for (Var p : parts) {
    if (p.graph() != &g) throw StateError("concat_rows mixes graphs");
    blocks.push_back(p.value());
    needs = needs || (g.recording() && g.requires_grad(p));
  }
  Matrix out = vstack(blocks);
  std::vector<Var> inputs(parts.begin(), parts.end());
  return g.push(std::move(out),
                [inputs = std::move(inputs)](Graph& g, const Matrix& dout) {
                  std::size_t offset = 0;
                  for (Var p : inputs) {
                    const std::size_t rows = p.value().rows();
                    if (g.requires_grad(p)) {
                      Matrix& gp = g.grad_ref(p);
                      for (std::size_t r = 0; r < rows; ++r)
                        for (std::size_t c = 0; c < dout.cols(); ++c) gp(r, c) += dout(offset + r, c);
                    }
                    offset += rows;
                  }
                },
                needs);
}

Var gru_step(Var xproj, Var h, Var u_zr, Var u_n) {
  Graph& g = graph_of(xproj, h);
  if (u_zr.graph() != &g || u_n.graph() != &g) throw StateError("gru_step mixes graphs");
  const Matrix& P = xproj.value();
  const Matrix& H = h.value();
  const Matrix& Uzr = u_zr.value();
  const Matrix& Un = u_n.value();
  const std::size_t batch = H.rows();
  const std::size_t hid = H.cols();
  if (P.rows() != batch || P.cols() != 3 * hid || Uzr.rows() != hid || Uzr.cols() != 2 * hid ||
      Un.rows() != hid || Un.cols() != hid) {
    throw ShapeError("gru_step: xproj " + P.shape_string() + ", h " + H.shape_string() + ", U_zr " +
                     Uzr.shape_string() + ", U_n " + Un.shape_string());
  }

  struct Cache {
    Matrix z, r, n, rh;
  };
  auto cache = std::make_shared<Cache>();
  Matrix hu = klcpd::matmul(H, Uzr);
  cache->z = Matrix(batch, hid);
  cache->r = Matrix(batch, hid);
  cache->rh = Matrix(batch, hid);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t j = 0; j < hid; ++j) {
      cache->z(b, j) = sigmoid_scalar(P(b, j) + hu(b, j));
      cache->r(b, j) = sigmoid_scalar(P(b, hid + j) + hu(b, hid + j));
      cache->rh(b, j) = cache->r(b, j) * H(b, j);
    }
  }
  Matrix q = klcpd::matmul(cache->rh, Un);
  cache->n = Matrix(batch, hid);
  Matrix out(batch, hid);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t j = 0; j < hid; ++j) {
      const double n = std::tanh(P(b, 2 * hid + j) + q(b, j));
      cache->n(b, j) = n;
      const double z = cache->z(b, j);
      out(b, j) = (1.0 - z) * H(b, j) + z * n;
    }
  }

  return g.push(
      std::move(out),
      [xproj, h, u_zr, u_n, cache, hid](Graph& g, const Matrix& dout) {
        const Matrix& H = h.value();
        const std::size_t batch = H.rows();
        Matrix da_zr(batch, 2 * hid);  // [da_z | da_r]
        Matrix da_n(batch, hid);
        Matrix dh(batch, hid);
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t j = 0; j < hid; ++j) {
            const double go = dout(b, j);
            const double z = cache->z(b, j);
            const double n = cache->n(b, j);
            da_zr(b, j) = go * (n - H(b, j)) * z * (1.0 - z);
            da_n(b, j) = go * z * (1.0 - n * n);
            dh(b, j) = go * (1.0 - z);
          }
        }
        // Back through q = (r*h) U_n.
        Matrix drh(batch, hid);
        matmul_nt_acc(da_n, u_n.value(), drh);
        if (g.requires_grad(u_n)) matmul_tn_acc(cache->rh, da_n, g.grad_ref(u_n));
        for (std::size_t b = 0; b < batch; ++b) {
          for (std::size_t j = 0; j < hid; ++j) {
            const double r = cache->r(b, j);
            da_zr(b, hid + j) = drh(b, j) * H(b, j) * r * (1.0 - r);
            dh(b, j) += drh(b, j) * r;
          }
        }
        if (g.requires_grad(u_zr)) matmul_tn_acc(H, da_zr, g.grad_ref(u_zr));
        if (g.requires_grad(h)) {
          matmul_nt_acc(da_zr, u_zr.value(), dh);
          g.grad_ref(h) += dh;
        }
        if (g.requires_grad(xproj)) {
          Matrix& gp = g.grad_ref(xproj);
          for (std::size_t b = 0; b < batch; ++b) {
            for (std::size_t j = 0; j < 2 * hid; ++j) gp(b, j) += da_zr(b, j);
            for (std::size_t j = 0; j < hid; ++j) gp(b, 2 * hid + j) += da_n(b, j);
          }
        }
      },
      any_grad(g, {xproj, h, u_zr, u_n}));
}

Var grouped_mmd2(Var x, Var y, std::size_t groups, std::span<const double> sigma2) {
  Graph& g = graph_of(x, y);
  const Matrix& X = x.value();
  const Matrix& Y = y.value();
  if (groups == 0) throw ParameterError("grouped_mmd2: zero groups");
  if (!X.same_shape(Y)) throw ShapeError("grouped_mmd2: " + X.shape_string() + " vs " + Y.shape_string());
  if (X.rows() % groups != 0) throw ShapeError("grouped_mmd2: rows not divisible by group count");
  if (sigma2.size() != groups) throw ShapeError("grouped_mmd2: one bandwidth per group required");
  const std::size_t m = X.rows() / groups;
  if (m < 2) throw ParameterError("grouped_mmd2: need at least 2 samples per group");
  for (double s : sigma2)
    if (!(s > 0.0) || !std::isfinite(s)) throw ParameterError("grouped_mmd2: sigma2 must be positive");

  const double within = 1.0 / (static_cast<double>(m) * static_cast<double>(m - 1));
  const double cross = 2.0 / (static_cast<double>(m) * static_cast<double>(m));
  const std::size_t k = X.cols();
  auto kern = [k](const double* a, const double* b, double inv2s) {
    double d = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double t = a[c] - b[c];
      d += t * t;
    }
    return std::exp(-d * inv2s);
  };

  Matrix out(groups, 1);
  for (std::size_t gi = 0; gi < groups; ++gi) {
    const double inv2s = 1.0 / (2.0 * sigma2[gi]);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const double* xi = &X(i * groups + gi, 0);
      const double* yi = &Y(i * groups + gi, 0);
      for (std::size_t j = i + 1; j < m; ++j) {
        sxx += kern(xi, &X(j * groups + gi, 0), inv2s);
        syy += kern(yi, &Y(j * groups + gi, 0), inv2s);
      }
      for (std::size_t j = 0; j < m; ++j) sxy += kern(xi, &Y(j * groups + gi, 0), inv2s);
    }
    out(gi, 0) = within * 2.0 * (sxx + syy) - cross * sxy;
  }

  std::vector<double> bw(sigma2.begin(), sigma2.end());
  return g.push(
      std::move(out),
      [x, y, groups, m, within, cross, bw = std::move(bw), kern, k](Graph& g, const Matrix& dout) {
        const Matrix& X = x.value();
        const Matrix& Y = y.value();
        const bool gx = g.requires_grad(x);
        const bool gy = g.requires_grad(y);
        Matrix dX(X.rows(), X.cols());
        Matrix dY(Y.rows(), Y.cols());
        for (std::size_t gi = 0; gi < groups; ++gi) {
          const double go = dout(gi, 0);
          if (go == 0.0) continue;
          const double s = bw[gi];
          const double inv2s = 1.0 / (2.0 * s);
          // d k(a,b) / d a = -k (a - b) / s
          const double w_in = go * within * 2.0 / s;  // both orderings of each within-pair
          const double w_x = go * cross / s;
          for (std::size_t i = 0; i < m; ++i) {
            const std::size_t ri = i * groups + gi;
            for (std::size_t j = i + 1; j < m; ++j) {
              const std::size_t rj = j * groups + gi;
              const double kx = kern(&X(ri, 0), &X(rj, 0), inv2s);
              const double ky = kern(&Y(ri, 0), &Y(rj, 0), inv2s);
              for (std::size_t c = 0; c < k; ++c) {
                const double tx = w_in * kx * (X(ri, c) - X(rj, c));
                dX(ri, c) -= tx;
                dX(rj, c) += tx;
                const double ty = w_in * ky * (Y(ri, c) - Y(rj, c));
                dY(ri, c) -= ty;
                dY(rj, c) += ty;
              }
            }
            for (std::size_t j = 0; j < m; ++j) {
              const std::size_t rj = j * groups + gi;
              const double kxy = kern(&X(ri, 0), &Y(rj, 0), inv2s);
              for (std::size_t c = 0; c < k; ++c) {
                // -cross * k(x_i, y_j): derivative w.r.t. x_i is +cross*k*(x_i - y_j)/s
                const double t = w_x * kxy * (X(ri, c) - Y(rj, c));
                dX(ri, c) += t;
                dY(rj, c) -= t;
              }
            }
          }
        }
        if (gx) g.grad_ref(x) += dX;
        if (gy) g.grad_ref(y) += dY;
      },
      any_grad(g, {x, y}));
}

}  // namespace klcpd
