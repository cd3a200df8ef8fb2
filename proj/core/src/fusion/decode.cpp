#include "ilmlab/fusion/decode.hpp"

#include <cmath>

#include "ilmlab/fusion/metrics.hpp"
#include "ilmlab/util/error.hpp"
#include "ilmlab/util/parallel.hpp"

namespace ilmlab::fusion {

std::vector<double> grid_axis(double min, double max, double step) {
  if (!std::isfinite(min) || !std::isfinite(max) || min < 0.0 || max < min)
    throw ConfigError("grid axis needs 0 <= min <= max");
  if (max > min && !(step > 0.0)) throw ConfigError("grid axis needs a positive step");
  std::vector<double> axis;
  const std::size_t n = max > min ? static_cast<std::size_t>(std::floor((max - min) / step + 1e-9)) + 1 : 1;
  for (std::size_t i = 0; i < n; ++i)
    axis.push_back(std::round((min + static_cast<double>(i) * step) * 1e9) / 1e9);
  return axis;
}

GridSpec GridSpec::single(double lambda1, double lambda2) {
  return {lambda1, lambda1, 0.0, lambda2, lambda2, 0.0};
}

std::vector<double> GridSpec::lambda1_axis(Method method) const {
  if (method == Method::kNone) return {0.0};
  return grid_axis(lambda1_min, lambda1_max, lambda1_step);
}

std::vector<double> GridSpec::lambda2_axis(Method method) const {
  if (method == Method::kNone || method == Method::kShallowFusion) return {0.0};
  return grid_axis(lambda2_min, lambda2_max, lambda2_step);
}

std::vector<std::vector<std::size_t>> best_labels(const std::vector<std::vector<Hypothesis>>& nbests) {
  std::vector<std::vector<std::size_t>> out;
  out.reserve(nbests.size());
  for (const auto& nb : nbests) out.push_back(nb.empty() ? std::vector<std::size_t>{} : nb.front().labels);
  return out;
}

std::vector<std::vector<Hypothesis>> decode_corpus(const data::Corpus& corpus, const FusionModels& models,
                                                   const FusionConfig& config, std::size_t workers) {
  config.validate();
  models.check(config.effective().method);
  std::vector<std::vector<Hypothesis>> out(corpus.size());
  util::parallel_for(corpus.size(), workers, [&](std::size_t i) {
    UtteranceSearch search(models, corpus.utterances[i].features);
    out[i] = beam_search(search, config);
  });
  return out;
}

std::vector<GridResult> grid_search_methods(const data::Corpus& dev, const FusionModels& models,
                                            const std::vector<Method>& methods, const GridSpec& grid,
                                            const FusionConfig& base, std::size_t workers) {
  if (dev.empty()) throw InputError("grid search needs a non-empty dev corpus");
  base.validate();
  struct Plan {
    Method method;
    std::vector<GridPoint> points;
  };
  std::vector<Plan> plans;
  for (Method m : methods) {
    models.check(m);
    Plan plan{m, {}};
    for (double l1 : grid.lambda1_axis(m))
      for (double l2 : grid.lambda2_axis(m)) plan.points.push_back({l1, l2, 0, 0});
    if (plan.points.empty()) throw ConfigError("empty scale grid");
    plans.push_back(std::move(plan));
  }

  // errors[u][k] for the k-th point over all plans, filled per utterance.
  std::size_t total_points = 0;
  for (const auto& p : plans) total_points += p.points.size();
  std::vector<std::vector<std::size_t>> errors(dev.size(), std::vector<std::size_t>(total_points));
  util::parallel_for(dev.size(), workers, [&](std::size_t u) {
    const auto& utt = dev.utterances[u];
    UtteranceSearch search(models, utt.features);
    std::size_t k = 0;
    for (const auto& plan : plans) {
      FusionConfig cfg = base;
      cfg.method = plan.method;
      for (const auto& point : plan.points) {
        cfg.lambda1 = point.lambda1;
        cfg.lambda2 = point.lambda2;
        auto nbest = beam_search(search, cfg);
        errors[u][k++] = edit_distance(utt.labels, nbest.empty() ? std::vector<std::size_t>{} : nbest.front().labels);
      }
    }
  });

  std::size_t words = 0;
  for (const auto& u : dev.utterances) words += u.labels.size();
  if (words == 0) throw InputError("dev corpus has no reference labels");
  std::vector<GridResult> results;
  std::size_t k = 0;
  for (auto& plan : plans) {
    GridResult r;
    r.method = plan.method;
    std::size_t best = 0;
    for (std::size_t i = 0; i < plan.points.size(); ++i, ++k) {
      GridPoint& p = plan.points[i];
      p.words = words;
      for (std::size_t u = 0; u < dev.size(); ++u) p.errors += errors[u][k];
      // Points are lambda1-major ascending, so a strict improvement keeps the
      // lexicographically smallest minimizer.
      if (p.errors < plan.points[best].errors) best = i;
    }
    r.lambda1 = plan.points[best].lambda1;
    r.lambda2 = plan.points[best].lambda2;
    r.wer = plan.points[best].wer();
    r.surface = std::move(plan.points);
    results.push_back(std::move(r));
  }
  return results;
}

GridResult grid_search_scales(const data::Corpus& dev, const FusionModels& models, Method method,
                              const GridSpec& grid, const FusionConfig& base, std::size_t workers) {
  return grid_search_methods(dev, models, {method}, grid, base, workers).front();
}

}  // namespace ilmlab::fusion
