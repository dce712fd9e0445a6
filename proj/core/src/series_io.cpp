#include "klcpd/series_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "klcpd/error.hpp"

namespace klcpd {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& text, const fs::path& path, std::size_t line) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError(path.string() + ":" + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::size_t parse_index(const std::string& text, const fs::path& path, std::size_t line) {
  const std::string s = trim(text);
  std::size_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw DataError(path.string() + ":" + std::to_string(line) + ": bad index '" + s + "'");
  return v;
}

}  // namespace

void write_series_csv(const fs::path& path, const Matrix& series) {
  std::ofstream out = open_out(path);
  out << "t";
  for (std::size_t c = 0; c < series.cols(); ++c) out << ",x" << c;
  out << "\n";
  for (std::size_t r = 0; r < series.rows(); ++r) {
    out << r;
    for (std::size_t c = 0; c < series.cols(); ++c) out << ',' << format_double(series(r, c));
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + path.string());
}

Matrix read_series_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  const auto header = split(trim(line), ',');
  if (header.size() < 2 || trim(header[0]) != "t") throw DataError(path.string() + ": header must be t,x0,...");
  const std::size_t d = header.size() - 1;
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != d + 1)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(d + 1) +
                      " columns");
    if (parse_index(cells[0], path, lineno) != rows)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": t column out of sequence");
    for (std::size_t c = 1; c <= d; ++c) values.push_back(parse_double(cells[c], path, lineno));
    ++rows;
  }
  if (rows == 0) throw DataError(path.string() + ": no data rows");
  return Matrix(rows, d, std::move(values));
}

fs::path labels_path(const fs::path& series_path) {
  fs::path p = series_path;
  p += ".labels";
  return p;
}

void write_labels(const fs::path& path, const std::vector<std::size_t>& labels) {
  std::ofstream out = open_out(path);
  for (std::size_t l : labels) out << l << "\n";
  if (!out) throw DataError("write failed: " + path.string());
}

std::vector<std::size_t> read_labels(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::vector<std::size_t> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    out.push_back(parse_index(line, path, lineno));
  }
  return out;
}

void write_labeled_series(const fs::path& path, const LabeledSeries& s) {
  write_series_csv(path, s.values);
  write_labels(labels_path(path), s.labels);
}

LabeledSeries read_labeled_series(const fs::path& path) {
  LabeledSeries s;
  s.values = read_series_csv(path);
  const fs::path lp = labels_path(path);
  if (fs::exists(lp)) s.labels = read_labels(lp);
  s.validate();
  return s;
}

void write_scores_csv(const fs::path& path, const ScoreSeries& s) {
  std::ofstream out = open_out(path);
  out << "t,score\n";
  for (std::size_t i = 0; i < s.size(); ++i) out << s.t[i] << ',' << format_double(s.score[i]) << "\n";
  if (!out) throw DataError("write failed: " + path.string());
}

ScoreSeries read_scores_csv(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  if (!std::getline(in, line) || trim(line) != "t,score") throw DataError(path.string() + ": header must be t,score");
  ScoreSeries s;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(trim(line), ',');
    if (cells.size() != 2) throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected t,score");
    s.t.push_back(parse_index(cells[0], path, lineno));
    s.score.push_back(parse_double(cells[1], path, lineno));
  }
  return s;
}

void write_key_values(const fs::path& path, const KeyValues& kv) {
  std::ofstream out = open_out(path);
  for (const auto& [k, v] : kv) out << k << '=' << v << "\n";
  if (!out) throw DataError("write failed: " + path.string());
}

KeyValues parse_key_values(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    kv[trim(s.substr(0, eq))] = trim(s.substr(eq + 1));
  }
  return kv;
}

KeyValues read_key_values(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_key_values(ss.str());
}

}  // namespace klcpd
