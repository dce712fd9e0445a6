#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "klcpd/graph.hpp"
#include "klcpd/params.hpp"
#include "klcpd/random.hpp"

namespace klcpd {

/// A batch of B windows of length w stored timestep-major: element t is the
/// B x d matrix of the t-th sample of every window.
using SeqBatch = std::vector<Matrix>;

/// Windows (each w x d, equal shapes) to timestep-major layout.
SeqBatch to_timestep_major(std::span<const Matrix> windows);
/// Inverse of to_timestep_major.
std::vector<Matrix> to_windows(const SeqBatch& seq);

/// {0, x_t, ..., x_{t+w-2}}: drops the last row and prepends a zero row.
Matrix shift_right_one(const Matrix& window);

/// Resolves named parameters of one store into graph variables, either as
/// trainable leaves or frozen constants.
class ParamBinder {
 public:
  ParamBinder(Graph& g, ParamStore& store, bool trainable);
  ParamBinder(Graph& g, const ParamStore& store);

  Var operator()(const std::string& name);
  [[nodiscard]] Graph& graph() const noexcept { return *graph_; }

 private:
  Graph* graph_;
  ParamStore* mutable_store_;
  const ParamStore* store_;
  bool trainable_;
  std::map<std::string, Var> cache_;
};

inline constexpr double kInitScale = 0.08;

/// Registers "<prefix>.W" (d_in x 3H), "<prefix>.b" (1 x 3H), "<prefix>.U_zr"
/// (H x 2H) and "<prefix>.U_n" (H x H). Weights uniform in
/// [-init_scale, init_scale], biases zero.
void add_gru_params(ParamStore& store, const std::string& prefix, std::size_t d_in, std::size_t d_h,
                    Rng& rng, double init_scale = kInitScale);
/// Registers "<prefix>.V" (d_in x d_out) and "<prefix>.c" (1 x d_out).
void add_linear_params(ParamStore& store, const std::string& prefix, std::size_t d_in,
                       std::size_t d_out, Rng& rng, double init_scale = kInitScale);

/// One GRU step on graph variables: x is B x d_in, h is B x H.
Var gru_cell(ParamBinder& params, const std::string& prefix, Var x, Var h);
/// Runs the recurrence over a timestep-major input sequence from h0 and
/// returns every hidden state.
std::vector<Var> run_gru(ParamBinder& params, const std::string& prefix, std::span<const Var> inputs, Var h0);
/// Per-timestep affine head.
std::vector<Var> apply_linear(ParamBinder& params, const std::string& prefix, std::span<const Var> inputs);

/// Single-vector GRU cell evaluated outside any graph (1 x d_in, 1 x H).
Matrix gru_cell(const ParamStore& params, const std::string& prefix, const Matrix& x, const Matrix& h);

// -- deep-kernel encoder f_phi and decoder F_psi ---------------------------

/// Encoder store: GRU "gru" with input d and hidden d_h.
ParamStore make_encoder(std::size_t d, std::size_t d_h, Rng& rng);
/// Decoder store: GRU "gru" over encoder states (d_h -> d_h) and head "out"
/// (d_h -> d).
ParamStore make_decoder(std::size_t d, std::size_t d_h, Rng& rng);

/// Hidden states of the encoder over every window of the batch, from a zero
/// initial state.
std::vector<Var> encode_batch(ParamBinder& phi, std::span<const Var> inputs);
/// Data-space reconstruction of an encoded batch.
std::vector<Var> reconstruct_batch(ParamBinder& psi, std::span<const Var> states);

/// H = f_phi(X): one row per timestep (w x d_h).
Matrix encode_window(const Matrix& window, const ParamStore& phi);
/// F_psi(H): w x d.
Matrix reconstruct(const Matrix& encoded, const ParamStore& psi);
/// Mean over windows and timesteps of |x_t - F(f(x))_t|^2.
double reconstruction_loss(std::span<const Matrix> windows, const ParamStore& phi, const ParamStore& psi);

// -- auxiliary generator g_theta --------------------------------------------

enum class NoiseDist { uniform, normal };

/// theta_e: GRU "gru" (d -> d_h). theta_d: GRU "gru" (d -> d_h) plus head
/// "out" (d_h -> d). Noise is d_h-dimensional.
struct GeneratorParams {
  ParamStore theta_e;
  ParamStore theta_d;
  std::size_t d = 0;
  std::size_t d_h = 0;
  NoiseDist noise = NoiseDist::normal;

  static GeneratorParams make(std::size_t d, std::size_t d_h, NoiseDist noise, Rng& rng);
};

/// B x d_h noise matrix, one draw per window pair.
Matrix sample_noise(NoiseDist dist, std::size_t batch, std::size_t d_h, Rng& rng);

/// Binder pair for the two generator stores.
struct GeneratorBinder {
  ParamBinder encoder;
  ParamBinder decoder;
};

/// Z = g_theta_d(shift(X_r), h_{t-1} + omega) with h_{t-1} the last state of
/// g_theta_e over X_l. omega is B x d_h.
std::vector<Var> generate_batch(GeneratorBinder& theta, std::span<const Var> left, std::span<const Var> right,
                                Var omega);

/// Single-pair convenience form of generate_batch.
Matrix generate(const Matrix& left, const Matrix& right, std::span<const double> omega,
                const GeneratorParams& theta);

}  // namespace klcpd
