#pragma once

#include <cstdint>
#include <random>

namespace klcpd {

using Rng = std::mt19937_64;

/// One round of the splitmix64 finaliser.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Independent child seed for stream `index` of a master seed. Used for
/// per-trial and per-run generators so parallel or reordered work stays
/// reproducible.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

inline Rng make_rng(std::uint64_t master, std::uint64_t index) { return Rng(derive_seed(master, index)); }

}  // namespace klcpd
