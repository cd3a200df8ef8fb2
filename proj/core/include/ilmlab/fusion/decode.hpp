#pragma once

#include <vector>

#include "ilmlab/data/corpus.hpp"
#include "ilmlab/fusion/search.hpp"

namespace ilmlab::fusion {

/// Scale grid: both axes run from min to max inclusive in steps of `step`.
struct GridSpec {
  double lambda1_min = 0.0;
  double lambda1_max = 0.8;
  double lambda1_step = 0.02;
  double lambda2_min = 0.0;
  double lambda2_max = 0.8;
  double lambda2_step = 0.02;

  static GridSpec single(double lambda1, double lambda2);
  /// Axis values for `method`: none collapses both axes to {0}, SF the
  /// lambda2 axis. Throws ConfigError on an empty or malformed axis.
  std::vector<double> lambda1_axis(Method method) const;
  std::vector<double> lambda2_axis(Method method) const;
};

/// min, min + step, ... up to max (inclusive, 1e-9 slack), each rounded to
/// 9 decimals so that 0.06 prints as 0.06.
std::vector<double> grid_axis(double min, double max, double step);

struct GridPoint {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  std::size_t errors = 0;
  std::size_t words = 0;
  double wer() const { return static_cast<double>(errors) / static_cast<double>(words); }
};

struct GridResult {
  Method method = Method::kNone;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double wer = 0.0;
  /// Every grid point, lambda1-major.
  std::vector<GridPoint> surface;
};

/// Best hypothesis labels of every utterance (empty if none finished).
std::vector<std::vector<std::size_t>> best_labels(const std::vector<std::vector<Hypothesis>>& nbests);

/// Beam-search decoding of every utterance; parallel over utterances.
std::vector<std::vector<Hypothesis>> decode_corpus(const data::Corpus& corpus, const FusionModels& models,
                                                   const FusionConfig& config, std::size_t workers = 1);

/// Decodes the dev corpus at every grid point of every method and returns
/// the argmin-WER scales per method, ties broken towards the smaller
/// (lambda1, lambda2). Model steps are memoized per utterance across all
/// methods and grid points.
std::vector<GridResult> grid_search_methods(const data::Corpus& dev, const FusionModels& models,
                                            const std::vector<Method>& methods, const GridSpec& grid,
                                            const FusionConfig& base, std::size_t workers = 1);

GridResult grid_search_scales(const data::Corpus& dev, const FusionModels& models, Method method,
                              const GridSpec& grid, const FusionConfig& base, std::size_t workers = 1);

}  // namespace ilmlab::fusion
