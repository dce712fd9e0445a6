#include "run_config.hpp"

#include <set>
#include <sstream>

#include "klcpd/error.hpp"
#include "klcpd/series_io.hpp"

namespace klcpd::cli {

namespace {

std::string unquote(const std::string& v) {
  if (v.size() >= 2 && v.front() == '"' && v.back() == '"') return v.substr(1, v.size() - 2);
  return v;
}

}  // namespace

void apply_config_file(CLI::App& sub, const std::filesystem::path& path) {
  const KeyValues kv = read_key_values(path);
  std::set<std::string> known;
  for (CLI::Option* opt : sub.get_options()) {
    const std::string name = opt->get_single_name();
    known.insert(name);
    if (name == "config" || name == "help" || opt->count() > 0) continue;
    const auto it = kv.find(name);
    if (it == kv.end()) continue;
    const std::string value = unquote(it->second);
    if (value.empty()) continue;
    opt->add_result(value);
    opt->run_callback();
  }
  for (const auto& [k, v] : kv)
    if (k.rfind("manifest.", 0) != 0 && !known.count(k))
      throw ConfigError("unknown key '" + k + "' in " + path.string());
}

std::string resolved_config(const CLI::App& sub) {
  std::istringstream in(sub.config_to_str(true, false));
  std::string out, line;
  while (std::getline(in, line)) {
    if (line.rfind("config=", 0) == 0) continue;
    out += line;
    out += '\n';
  }
  return out;
}

}  // namespace klcpd::cli
