#pragma once

#include <string>
#include <vector>

#include "klcpd/datagen.hpp"
#include "klcpd/evalmod.hpp"
#include "klcpd/pipeline.hpp"
#include "klcpd/trainer.hpp"

namespace klcpd {

/// Generator name plus parameters: jumping-mean, scaling-variance,
/// gaussian-mixtures, highdim-variance (uses d) or blobs (uses epsilon and
/// length as the sample count; no labels).
struct DatasetSpec {
  std::string name = "jumping-mean";
  std::size_t d = 2;
  std::size_t length = 5000;
  double epsilon = 1.0;
  std::uint64_t seed = 0;
};

const std::vector<std::string>& dataset_names();
/// Throws ConfigError for an unknown name.
LabeledSeries make_dataset(const DatasetSpec& spec);

struct ExperimentConfig {
  TrainConfig train;
  SplitFractions split;
  AucConfig auc;
};

/// AUC over the scores whose time falls in [begin, end). Labels anywhere in
/// the series count.
double auc_in_range(const ScoreSeries& scores, const std::vector<std::size_t>& labels, std::size_t begin,
                    std::size_t end, const AucConfig& cfg);

struct ExperimentResult {
  ScoreSeries scores;  // over the whole normalized series
  std::array<std::size_t, 4> bounds{};  // train / val / test boundaries
  double val_auc = 0.0;
  double test_auc = 0.0;
  TrainLog log;
  TrainState state;
};

/// Normalizes with training-split statistics, fits on the training split,
/// scores the whole series and reports validation and test AUC.
ExperimentResult run_experiment(const LabeledSeries& series, const ExperimentConfig& cfg);

struct GridPoint {
  double lambda = 0.0;
  double beta = 0.0;
  double lr = 0.0;
};

struct GridResult {
  GridPoint best;
  double best_val_auc = 0.0;
  std::vector<std::pair<GridPoint, double>> tried;
};

/// Runs every grid point and keeps the one with the highest validation AUC
/// (first one on ties). Test scores are never consulted.
GridResult select_by_validation(const LabeledSeries& series, const ExperimentConfig& base,
                                const std::vector<GridPoint>& grid);

}  // namespace klcpd
