#include "klcpd/checkpoint.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "klcpd/error.hpp"

namespace klcpd {
namespace {

static_assert(std::endian::native == std::endian::little, "checkpoint IO assumes little-endian hosts");

constexpr std::array<char, 8> kMagic = {'K', 'L', 'C', 'P', 'D', 'C', 'K', 'P'};
constexpr std::uint32_t kMaxString = 1u << 20;

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_string(std::ostream& os, const std::string& s) {
  put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("checkpoint: truncated file");
  return v;
}

std::string get_string(std::istream& is) {
  const auto n = get<std::uint32_t>(is);
  if (n > kMaxString) throw DataError("checkpoint: implausible string length");
  std::string s(n, '\0');
  if (n > 0 && !is.read(s.data(), n)) throw DataError("checkpoint: truncated string");
  return s;
}

}  // namespace

void Checkpoint::add(const std::string& name, Matrix value) {
  if (has(name)) throw ParameterError("checkpoint: duplicate tensor '" + name + "'");
  tensors.emplace_back(name, std::move(value));
}

bool Checkpoint::has(const std::string& name) const {
  return std::any_of(tensors.begin(), tensors.end(), [&](const auto& t) { return t.first == name; });
}

const Matrix& Checkpoint::tensor(const std::string& name) const {
  for (const auto& [n, m] : tensors)
    if (n == name) return m;
  throw DataError("checkpoint: missing tensor '" + name + "'");
}

void Checkpoint::add_store(const std::string& prefix, const ParamStore& store) {
  for (const auto& p : store) add(prefix + "." + p.name, p.value);
}

void Checkpoint::load_store(const std::string& prefix, ParamStore& store) const {
  for (auto& p : store) {
    const Matrix& m = tensor(prefix + "." + p.name);
    if (!m.same_shape(p.value))
      throw ShapeError("checkpoint: shape mismatch for '" + prefix + "." + p.name + "': " +
                      m.shape_string() + " vs " + p.value.shape_string());
    p.value = m;
  }
}

void write_checkpoint(const Checkpoint& ckpt, std::ostream& os) {
  os.write(kMagic.data(), kMagic.size());
  put<std::uint32_t>(os, kCheckpointVersion);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.meta.size()));
  for (const auto& [k, v] : ckpt.meta) {
    put_string(os, k);
    put_string(os, v);
  }
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ckpt.tensors.size()));
  for (const auto& [name, m] : ckpt.tensors) {
    put_string(os, name);
    put<std::uint64_t>(os, m.rows());
    put<std::uint64_t>(os, m.cols());
    os.write(reinterpret_cast<const char*>(m.storage().data()),
             static_cast<std::streamsize>(m.size() * sizeof(double)));
  }
  if (!os) throw DataError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& is) {
  std::array<char, 8> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic)
    throw DataError("checkpoint: bad magic (not a checkpoint file)");
  const auto version = get<std::uint32_t>(is);
  if (version != kCheckpointVersion)
    throw DataError("checkpoint: unsupported format version " + std::to_string(version));
  Checkpoint ckpt;
  const auto n_meta = get<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < n_meta; ++i) {
    std::string k = get_string(is);
    std::string v = get_string(is);
    ckpt.meta.emplace(std::move(k), std::move(v));
  }
  const auto n_tensors = get<std::uint32_t>(is);
  for (std::uint32_t i = 0; i < n_tensors; ++i) {
    std::string name = get_string(is);
    const auto rows = get<std::uint64_t>(is);
    const auto cols = get<std::uint64_t>(is);
    if (rows > (1u << 24) || cols > (1u << 24) || rows * cols > (1u << 26))
      throw DataError("checkpoint: implausible tensor shape for '" + name + "'");
    std::vector<double> data(rows * cols);
    if (!data.empty() &&
        !is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(double))))
      throw DataError("checkpoint: truncated tensor '" + name + "'");
    ckpt.add(name, Matrix(rows, cols, std::move(data)));
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw DataError("checkpoint: cannot open '" + path.string() + "' for writing");
  write_checkpoint(ckpt, os);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("checkpoint: cannot open '" + path.string() + "'");
  return read_checkpoint(is);
}

}  // namespace klcpd
