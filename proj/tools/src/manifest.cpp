#include "manifest.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <iterator>
#include <sstream>

#include "klcpd/error.hpp"

namespace klcpd::cli {

std::string git_blob_sha1_bytes(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + '\0';
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr) throw Error("sha1: cannot allocate digest context");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, header.data(), header.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, md.data(), &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw Error("sha1: digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

std::string git_blob_sha1(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read '" + path.string() + "'");
  const std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return git_blob_sha1_bytes(content);
}

Manifest::Manifest(std::string command, std::string resolved_config)
    : command_(std::move(command)), config_(std::move(resolved_config)) {}

void Manifest::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : extra_)
    if (k == key) {
      v = value;
      return;
    }
  extra_.emplace_back(key, value);
}

void Manifest::add_input(const std::string& name, const std::filesystem::path& path) {
  set("manifest.input." + name, path.string());
  set("manifest.sha1." + name, git_blob_sha1(path));
}

void Manifest::write(const std::filesystem::path& dir) const {
  std::ofstream out(dir / kManifestFile, std::ios::binary);
  if (!out) throw DataError("cannot write manifest in '" + dir.string() + "'");
  out << "# klcpd " << command_ << "\n";
  out << config_;
  if (!config_.empty() && config_.back() != '\n') out << '\n';
  out << "manifest.command=" << command_ << '\n';
  for (const auto& [k, v] : extra_) out << k << '=' << v << '\n';
}

}  // namespace klcpd::cli
