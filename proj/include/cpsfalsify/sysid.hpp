#pragma once

#include "cpsfalsify/surrogate.hpp"

#include <array>
#include <span>
#include <vector>

namespace cpsf {

struct Sample {
  double t = 0.0; ///< minutes since segment start
  double y = 0.0; ///< temperature, degrees Celsius
};

/// Consecutive samples recorded in one mode, re-based so the first t is 0.
struct TraceSegment {
  Mode mode = Mode::On;
  std::vector<Sample> samples;

  /// Throws unless there are at least 3 samples, t starts at 0 and is
  /// strictly increasing.
  void validate() const;
};

struct FitResult {
  double k1 = 0.0;
  double k2 = 0.0;
  double rmse = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct FitOptions {
  int max_iterations = 200;
  double relative_tolerance = 1e-10;
};

/// Sum of squared residuals of the mode's curve (anchored at t0) against
/// the samples, for parameters {k1, k2}.
double least_squares_objective(Mode mode, std::span<const Sample> samples, double t0,
                               std::array<double, 2> params);

/// Analytic gradient of least_squares_objective with respect to {k1, k2}.
std::array<double, 2> least_squares_gradient(Mode mode, std::span<const Sample> samples,
                                             double t0, std::array<double, 2> params);

/// Levenberg-Marquardt fit of (k1, k2) for one segment, with T0 fixed to the
/// first sample. Throws on invalid or constant segments; hitting the
/// iteration cap returns the best point found with converged = false.
FitResult fit_mode(const TraceSegment &segment, const FitOptions &options = {});

/// Fits both curves of one model. Throws if the segments carry the wrong
/// modes or if a fitted coefficient is not positive.
ModelCoefficients fit_model(const TraceSegment &on_segment, const TraceSegment &off_segment,
                            ModelId model_id, const FitOptions &options = {});

struct RawSample {
  double t = 0.0;
  double y = 0.0;
  Mode mode = Mode::On;
};

struct Segmentation {
  std::vector<TraceSegment> segments;
  std::size_t dropped_samples = 0;
};

/// Splits a raw trace at every mode change. Runs shorter than three samples
/// are dropped and counted.
Segmentation segment_raw_trace(std::span<const RawSample> raw);

struct FittedModel {
  ModelCoefficients coeffs;
  double on_rmse = 0.0;
  double off_rmse = 0.0;
};

struct TraceFit {
  std::vector<FittedModel> models;
  std::size_t dropped_samples = 0;
  std::size_t unpaired_segments = 0;
};

/// Segments a raw trace and fits one model per adjacent pair of opposite
/// mode segments (ON then OFF, or OFF then ON). Ids are assigned 1, 2, ...
/// in trace order. Throws when no pair exists or a fit does not converge.
TraceFit fit_trace(std::span<const RawSample> raw, const FitOptions &options = {});

} // namespace cpsf
