#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace klcpd::cli {

/// SHA-1 over "blob <size>\0<content>", i.e. the id git gives the file.
std::string git_blob_sha1(const std::filesystem::path& path);
std::string git_blob_sha1_bytes(const std::string& content);

/// manifest.txt: the resolved config as key=value lines (loadable again
/// with --config) followed by manifest.* entries, which --config skips.
class Manifest {
 public:
  Manifest(std::string command, std::string resolved_config);

  void set(const std::string& key, const std::string& value);
  /// Records path and content hash of an input file.
  void add_input(const std::string& name, const std::filesystem::path& path);
  void write(const std::filesystem::path& dir) const;

 private:
  std::string command_;
  std::string config_;
  std::vector<std::pair<std::string, std::string>> extra_;
};

inline constexpr const char* kManifestFile = "manifest.txt";

}  // namespace klcpd::cli
