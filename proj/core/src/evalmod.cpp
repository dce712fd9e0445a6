#include "klcpd/evalmod.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "klcpd/error.hpp"

namespace klcpd {

MinMaxTransform MinMaxTransform::fit(const Matrix& reference) {
  if (reference.rows() == 0 || reference.cols() == 0) throw ParameterError("normalize: empty series");
  MinMaxTransform t;
  t.lo.assign(reference.cols(), 0.0);
  t.hi.assign(reference.cols(), 0.0);
  for (std::size_t c = 0; c < reference.cols(); ++c) {
    double lo = reference(0, c), hi = reference(0, c);
    for (std::size_t r = 1; r < reference.rows(); ++r) {
      lo = std::min(lo, reference(r, c));
      hi = std::max(hi, reference(r, c));
    }
    t.lo[c] = lo;
    t.hi[c] = hi;
  }
  return t;
}

Matrix MinMaxTransform::apply(const Matrix& x) const {
  if (x.cols() != lo.size()) throw ShapeError("MinMaxTransform: dimension mismatch");
  Matrix y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r)
    for (std::size_t c = 0; c < x.cols(); ++c)
      y(r, c) = hi[c] > lo[c] ? (x(r, c) - lo[c]) / (hi[c] - lo[c]) : 0.5;
  return y;
}

Matrix MinMaxTransform::inverse(const Matrix& y) const {
  if (y.cols() != lo.size()) throw ShapeError("MinMaxTransform: dimension mismatch");
  Matrix x(y.rows(), y.cols());
  for (std::size_t r = 0; r < y.rows(); ++r)
    for (std::size_t c = 0; c < y.cols(); ++c) x(r, c) = lo[c] + y(r, c) * (hi[c] - lo[c]);
  return x;
}

NormalizedSeries normalize(const Matrix& series, std::size_t fit_rows) {
  if (series.rows() == 0) throw ParameterError("normalize: empty series");
  if (fit_rows > series.rows()) throw ParameterError("normalize: fit_rows exceeds series length");
  NormalizedSeries out;
  out.transform = MinMaxTransform::fit(fit_rows == 0 ? series : series.slice_rows(0, fit_rows));
  out.values = out.transform.apply(series);
  return out;
}

void SplitFractions::validate() const {
  if (train < 0.0 || val < 0.0 || test < 0.0) throw ParameterError("split fractions must be non-negative");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw ParameterError("split fractions must sum to 1");
}

std::array<std::size_t, 4> split_bounds(std::size_t length, const SplitFractions& f) {
  f.validate();
  const double t = static_cast<double>(length);
  const auto b1 = std::min(length, static_cast<std::size_t>(std::llround(f.train * t)));
  const auto b2 = std::min(length, b1 + static_cast<std::size_t>(std::llround(f.val * t)));
  return {0, b1, b2, length};
}

ChronoSplit chrono_split(const LabeledSeries& series, const SplitFractions& f) {
  series.validate();
  const auto b = split_bounds(series.length(), f);
  ChronoSplit out;
  for (std::size_t p = 0; p < 3; ++p) {
    out.offsets[p] = b[p];
    out.parts[p].values = series.values.slice_rows(b[p], b[p + 1]);
    for (std::size_t l : series.labels)
      if (l >= b[p] && l < b[p + 1]) out.parts[p].labels.push_back(l - b[p]);
  }
  return out;
}

std::vector<bool> positive_mask(std::span<const std::size_t> times, std::span<const std::size_t> labels,
                                const AucConfig& cfg) {
  std::vector<bool> pos(times.size(), false);
  for (std::size_t i = 0; i < times.size(); ++i) {
    const std::size_t t = times[i];
    for (std::size_t l : labels) {
      const bool after = t >= l && t - l <= cfg.tolerance;
      const bool before = t < l && l - t <= cfg.tolerance;
      if (after || (cfg.side == ToleranceSide::both && before)) {
        pos[i] = true;
        break;
      }
    }
  }
  return pos;
}

double roc_auc(std::span<const double> scores, const std::vector<bool>& positive) {
  if (scores.size() != positive.size()) throw ShapeError("roc_auc: scores and mask differ in length");
  for (double s : scores)
    if (std::isnan(s)) throw NumericError("roc_auc: NaN score");
  // Midranks over the pooled scores give the tie-aware Mann-Whitney U.
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k)
      if (positive[order[k]]) {
        rank_sum += midrank;
        ++n_pos;
      }
    i = j + 1;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedAucError("roc_auc: need at least one positive and one negative");
  const double np = static_cast<double>(n_pos);
  const double u = rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double roc_auc(std::span<const double> scores, std::span<const std::size_t> times,
               std::span<const std::size_t> labels, const AucConfig& cfg) {
  if (scores.size() != times.size()) throw ShapeError("roc_auc: scores and times differ in length");
  return roc_auc(scores, positive_mask(times, labels, cfg));
}

}  // namespace klcpd
