#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "klcpd/datagen.hpp"
#include "klcpd/matrix.hpp"
#include "klcpd/pipeline.hpp"

namespace klcpd {

/// Shortest round-trip decimal form of a double.
std::string format_double(double v);

/// CSV with header `t,x0,x1,...` and one row per timestep.
void write_series_csv(const std::filesystem::path& path, const Matrix& series);
Matrix read_series_csv(const std::filesystem::path& path);

/// `<series path>.labels`: one change-point index per line.
std::filesystem::path labels_path(const std::filesystem::path& series_path);
void write_labels(const std::filesystem::path& path, const std::vector<std::size_t>& labels);
std::vector<std::size_t> read_labels(const std::filesystem::path& path);

/// Series CSV plus its labels sidecar.
void write_labeled_series(const std::filesystem::path& path, const LabeledSeries& s);
LabeledSeries read_labeled_series(const std::filesystem::path& path);

/// CSV `t,score`.
void write_scores_csv(const std::filesystem::path& path, const ScoreSeries& s);
ScoreSeries read_scores_csv(const std::filesystem::path& path);

/// Flat `key=value` lines, sorted by key. Blank lines and lines starting
/// with '#' are ignored on read; surrounding whitespace is trimmed.
using KeyValues = std::map<std::string, std::string>;
void write_key_values(const std::filesystem::path& path, const KeyValues& kv);
KeyValues read_key_values(const std::filesystem::path& path);
KeyValues parse_key_values(const std::string& text);

}  // namespace klcpd
