#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "klcpd/matrix.hpp"
#include "klcpd/params.hpp"

namespace klcpd {

/// Named-tensor container persisted by save_checkpoint / load_checkpoint.
///
/// Binary layout (all integers little-endian):
///
///   bytes 0..7   magic "KLCPDCKP"
///   u32          format version (kCheckpointVersion)
///   u32          metadata entry count, then per entry:
///                  u32 key length, key bytes, u32 value length, value bytes
///   u32          tensor count, then per tensor:
///                  u32 name length, name bytes, u64 rows, u64 cols,
///                  rows*cols IEEE-754 float64 values (row-major)
///
/// Values are written as raw bit patterns, so a save/load round trip is
/// bit-exact.
struct Checkpoint {
  std::map<std::string, std::string> meta;
  std::vector<std::pair<std::string, Matrix>> tensors;

  void add(const std::string& name, Matrix value);
  [[nodiscard]] bool has(const std::string& name) const;
  [[nodiscard]] const Matrix& tensor(const std::string& name) const;

  /// Appends every parameter value of `store` under "<prefix>.<name>".
  void add_store(const std::string& prefix, const ParamStore& store);
  /// Overwrites every parameter of `store` from "<prefix>.<name>". Shapes
  /// must match.
  void load_store(const std::string& prefix, ParamStore& store) const;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const Checkpoint& ckpt, std::ostream& os);
Checkpoint read_checkpoint(std::istream& is);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace klcpd
