#include "klcpd/experiment.hpp"

#include "klcpd/error.hpp"

namespace klcpd {

const std::vector<std::string>& dataset_names() {
  static const std::vector<std::string> names = {"jumping-mean", "scaling-variance", "gaussian-mixtures",
                                                 "highdim-variance", "blobs"};
  return names;
}

LabeledSeries make_dataset(const DatasetSpec& spec) {
  if (spec.name == "jumping-mean") {
    SegmentConfig c;
    c.length = spec.length;
    return gen_jumping_mean(spec.seed, c);
  }
  if (spec.name == "scaling-variance") {
    SegmentConfig c;
    c.length = spec.length;
    return gen_scaling_variance(spec.seed, c);
  }
  if (spec.name == "gaussian-mixtures") return gen_gaussian_mixtures(spec.seed, spec.length);
  if (spec.name == "highdim-variance") return gen_highdim_variance(spec.d, spec.seed, spec.length);
  if (spec.name == "blobs") return {gen_blobs(spec.epsilon, spec.length, spec.seed), {}};
  throw ConfigError("unknown dataset '" + spec.name + "'");
}

double auc_in_range(const ScoreSeries& scores, const std::vector<std::size_t>& labels, std::size_t begin,
                    std::size_t end, const AucConfig& cfg) {
  std::vector<std::size_t> t;
  std::vector<double> s;
  for (std::size_t i = 0; i < scores.size(); ++i)
    if (scores.t[i] >= begin && scores.t[i] < end) {
      t.push_back(scores.t[i]);
      s.push_back(scores.score[i]);
    }
  return roc_auc(s, t, labels, cfg);
}

ExperimentResult run_experiment(const LabeledSeries& series, const ExperimentConfig& cfg) {
  series.validate();
  ExperimentResult res;
  res.bounds = split_bounds(series.length(), cfg.split);
  if (res.bounds[1] < 2 * cfg.train.w) throw ParameterError("training split shorter than two windows");
  const NormalizedSeries norm = normalize(series.values, res.bounds[1]);
  TrainResult fitted = fit(norm.values.slice_rows(0, res.bounds[1]), cfg.train);
  res.log = std::move(fitted.log);
  res.state = std::move(fitted.state);
  ScoreConfig sc;
  sc.w = cfg.train.w;
  sc.sigma2 = cfg.train.sigma2;
  res.scores = score(norm.values, cfg.train.mode, &res.state.dk, sc);
  res.val_auc = auc_in_range(res.scores, series.labels, res.bounds[1], res.bounds[2], cfg.auc);
  res.test_auc = auc_in_range(res.scores, series.labels, res.bounds[2], res.bounds[3], cfg.auc);
  return res;
}

GridResult select_by_validation(const LabeledSeries& series, const ExperimentConfig& base,
                                const std::vector<GridPoint>& grid) {
  if (grid.empty()) throw ParameterError("select_by_validation: empty grid");
  GridResult out;
  bool first = true;
  for (const GridPoint& p : grid) {
    ExperimentConfig cfg = base;
    cfg.train.lambda = p.lambda;
    cfg.train.beta = p.beta;
    cfg.train.lr = p.lr;
    const double auc = run_experiment(series, cfg).val_auc;
    out.tried.emplace_back(p, auc);
    if (first || auc > out.best_val_auc) {
      out.best = p;
      out.best_val_auc = auc;
      first = false;
    }
  }
  return out;
}

}  // namespace klcpd
