#pragma once

#include <array>
#include <span>
#include <vector>

#include "klcpd/datagen.hpp"
#include "klcpd/matrix.hpp"

namespace klcpd {

/// Per-dimension affine map x -> (x - lo) / (hi - lo). A constant dimension
/// (hi == lo) maps every value to 0.5.
struct MinMaxTransform {
  std::vector<double> lo;
  std::vector<double> hi;

  /// Statistics from the rows of `reference`.
  static MinMaxTransform fit(const Matrix& reference);
  [[nodiscard]] Matrix apply(const Matrix& x) const;
  /// Exact inverse of apply() on non-constant dimensions; constant ones
  /// map back to lo.
  [[nodiscard]] Matrix inverse(const Matrix& y) const;
};

struct NormalizedSeries {
  Matrix values;
  MinMaxTransform transform;
};

/// Normalizes every row with statistics taken from the first `fit_rows`
/// rows (the training split); fit_rows = 0 uses the whole series.
NormalizedSeries normalize(const Matrix& series, std::size_t fit_rows = 0);

struct SplitFractions {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;

  void validate() const;
};

struct ChronoSplit {
  std::array<LabeledSeries, 3> parts;  // train, val, test
  std::array<std::size_t, 3> offsets{};

  [[nodiscard]] const LabeledSeries& train() const noexcept { return parts[0]; }
  [[nodiscard]] const LabeledSeries& val() const noexcept { return parts[1]; }
  [[nodiscard]] const LabeledSeries& test() const noexcept { return parts[2]; }
};

/// Split boundaries [0, b1, b2, T) with b1 = round(train * T) and
/// b2 = b1 + round(val * T).
std::array<std::size_t, 4> split_bounds(std::size_t length, const SplitFractions& f);

/// Contiguous prefix / middle / suffix; labels move to their part with the
/// index shifted to be local.
ChronoSplit chrono_split(const LabeledSeries& series, const SplitFractions& f = {});

enum class ToleranceSide { forward, both };

struct AucConfig {
  std::size_t tolerance = 10;
  ToleranceSide side = ToleranceSide::forward;
};

/// Timestep-level positives: t with label <= t <= label + tolerance
/// (forward) or |t - label| <= tolerance (both). `times` holds the time of
/// each score.
std::vector<bool> positive_mask(std::span<const std::size_t> times, std::span<const std::size_t> labels,
                                const AucConfig& cfg);

/// Mann-Whitney AUC over (positive, negative) score pairs, ties count 1/2.
/// Throws UndefinedAucError if either class is empty.
double roc_auc(std::span<const double> scores, const std::vector<bool>& positive);
double roc_auc(std::span<const double> scores, std::span<const std::size_t> times,
               std::span<const std::size_t> labels, const AucConfig& cfg);

}  // namespace klcpd
