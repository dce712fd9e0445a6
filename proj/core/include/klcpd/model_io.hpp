#pragma once

#include <map>
#include <string>

#include "klcpd/checkpoint.hpp"
#include "klcpd/evalmod.hpp"
#include "klcpd/trainer.hpp"

namespace klcpd {

/// Trained parameters plus the normalization they were fitted under.
struct SavedModel {
  TrainState state;
  MinMaxTransform transform;
  std::map<std::string, std::string> meta;  // caller-supplied entries
};

/// Tensors: phi.*, psi.* (GRU encoder only), theta_e.*, theta_d.*,
/// norm.lo, norm.hi, noise_std. Metadata keys starting with "model." are
/// reserved; everything in `meta` is stored alongside.
Checkpoint make_model_checkpoint(const TrainState& state, const MinMaxTransform& transform,
                                 const std::map<std::string, std::string>& meta = {});
/// Throws DataError on missing or inconsistent entries.
SavedModel read_model_checkpoint(const Checkpoint& ckpt);

}  // namespace klcpd
