#include "cpsfalsify/sysid.hpp"

#include "cpsfalsify/error.hpp"

#include <algorithm>
#include <cmath>

namespace cpsf {

void TraceSegment::validate() const {
  if (samples.size() < 3) {
    throw Error("insufficient samples: need at least 3, got " + std::to_string(samples.size()));
  }
  if (samples.front().t != 0.0) {
    throw Error("segment must start at t = 0");
  }
  for (std::size_t i = 1; i < samples.size(); ++i) {
    if (!(samples[i].t > samples[i - 1].t)) {
      throw Error("segment times must be strictly increasing (sample " + std::to_string(i) + ")");
    }
  }
}

namespace {

// Model value and partial derivatives for one sample.
struct Point {
  double value;
  double d_k1;
  double d_k2;
};

Point model_point(Mode mode, double t0, double k1, double k2, double t) {
  const double decay = std::exp(-k2 * t);
  const double rise = -std::expm1(-k2 * t);
  if (mode == Mode::On) {
    return {k1 * rise + t0, rise, k1 * t * decay};
  }
  return {t0 - k1 * rise, -rise, -k1 * t * decay};
}

} // namespace

double least_squares_objective(Mode mode, std::span<const Sample> samples, double t0,
                               std::array<double, 2> params) {
  double sum = 0.0;
  for (const auto &s : samples) {
    const double r = model_point(mode, t0, params[0], params[1], s.t).value - s.y;
    sum += r * r;
  }
  return sum;
}

std::array<double, 2> least_squares_gradient(Mode mode, std::span<const Sample> samples,
                                             double t0, std::array<double, 2> params) {
  std::array<double, 2> g{0.0, 0.0};
  for (const auto &s : samples) {
    const Point p = model_point(mode, t0, params[0], params[1], s.t);
    const double r = p.value - s.y;
    g[0] += 2.0 * r * p.d_k1;
    g[1] += 2.0 * r * p.d_k2;
  }
  return g;
}

FitResult fit_mode(const TraceSegment &segment, const FitOptions &options) {
  segment.validate();
  const auto &samples = segment.samples;
  const double t0 = samples.front().y;
  const auto [lo, hi] = std::minmax_element(samples.begin(), samples.end(),
                                            [](const Sample &a, const Sample &b) { return a.y < b.y; });
  if (lo->y == hi->y) {
    throw Error("degenerate segment: constant temperature");
  }

  std::array<double, 2> params{std::max(std::abs(samples.back().y - samples.front().y), 0.1), 0.1};
  double cost = least_squares_objective(segment.mode, samples, t0, params);
  double lambda = 1e-3;

  FitResult result;
  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    result.iterations = iter;

    // Normal equations J^T J and J^T r for the 2x2 system.
    double a11 = 0.0, a12 = 0.0, a22 = 0.0, b1 = 0.0, b2 = 0.0;
    for (const auto &s : samples) {
      const Point p = model_point(segment.mode, t0, params[0], params[1], s.t);
      const double r = p.value - s.y;
      a11 += p.d_k1 * p.d_k1;
      a12 += p.d_k1 * p.d_k2;
      a22 += p.d_k2 * p.d_k2;
      b1 += p.d_k1 * r;
      b2 += p.d_k2 * r;
    }

    bool accepted = false;
    double new_cost = cost;
    while (lambda < 1e16) {
      const double m11 = a11 * (1.0 + lambda);
      const double m22 = a22 * (1.0 + lambda);
      const double det = m11 * m22 - a12 * a12;
      if (det > 0.0 && std::isfinite(det)) {
        const std::array<double, 2> candidate{
            params[0] - (m22 * b1 - a12 * b2) / det,
            params[1] - (m11 * b2 - a12 * b1) / det,
        };
        const double c = least_squares_objective(segment.mode, samples, t0, candidate);
        if (std::isfinite(c) && c <= cost) {
          params = candidate;
          new_cost = c;
          accepted = true;
          lambda = std::max(lambda / 10.0, 1e-12);
          break;
        }
      }
      lambda *= 10.0;
    }

    if (!accepted) {
      // No step reduces the objective: stationary to working precision.
      result.converged = true;
      break;
    }
    const double decrease = cost - new_cost;
    cost = new_cost;
    if (cost == 0.0 || decrease <= options.relative_tolerance * cost) {
      result.converged = true;
      break;
    }
  }

  result.k1 = params[0];
  result.k2 = params[1];
  result.rmse = std::sqrt(cost / static_cast<double>(samples.size()));
  if (!std::isfinite(result.rmse)) {
    result.converged = false;
  }
  return result;
}

ModelCoefficients fit_model(const TraceSegment &on_segment, const TraceSegment &off_segment,
                            ModelId model_id, const FitOptions &options) {
  if (on_segment.mode != Mode::On) {
    throw Error("fit_model: first segment must be an ON segment");
  }
  if (off_segment.mode != Mode::Off) {
    throw Error("fit_model: second segment must be an OFF segment");
  }
  const FitResult on = fit_mode(on_segment, options);
  const FitResult off = fit_mode(off_segment, options);
  ModelCoefficients coeffs{model_id, on.k1, on.k2, off.k1, off.k2, std::nullopt};
  if (!(on.k1 > 0.0 && on.k2 > 0.0 && off.k1 > 0.0 && off.k2 > 0.0)) {
    throw Error("model " + std::to_string(model_id) +
                ": fitted coefficients are not all positive; the exponential structure does not "
                "describe this data");
  }
  coeffs.validate();
  return coeffs;
}

Segmentation segment_raw_trace(std::span<const RawSample> raw) {
  if (raw.empty()) {
    throw Error("empty trace");
  }
  for (std::size_t i = 1; i < raw.size(); ++i) {
    if (!(raw[i].t > raw[i - 1].t)) {
      throw Error("trace time must be strictly increasing (sample " + std::to_string(i) + ")");
    }
  }

  Segmentation out;
  std::size_t begin = 0;
  while (begin < raw.size()) {
    std::size_t end = begin + 1;
    while (end < raw.size() && raw[end].mode == raw[begin].mode) {
      ++end;
    }
    const std::size_t length = end - begin;
    if (length < 3) {
      out.dropped_samples += length;
    } else {
      TraceSegment seg;
      seg.mode = raw[begin].mode;
      seg.samples.reserve(length);
      for (std::size_t i = begin; i < end; ++i) {
        seg.samples.push_back({raw[i].t - raw[begin].t, raw[i].y});
      }
      out.segments.push_back(std::move(seg));
    }
    begin = end;
  }
  return out;
}

TraceFit fit_trace(std::span<const RawSample> raw, const FitOptions &options) {
  const Segmentation seg = segment_raw_trace(raw);
  TraceFit out;
  out.dropped_samples = seg.dropped_samples;

  const auto &segs = seg.segments;
  for (std::size_t i = 0; i < segs.size();) {
    if (i + 1 >= segs.size() || segs[i].mode == segs[i + 1].mode) {
      ++out.unpaired_segments;
      ++i;
      continue;
    }
    const TraceSegment &on = segs[i].mode == Mode::On ? segs[i] : segs[i + 1];
    const TraceSegment &off = segs[i].mode == Mode::On ? segs[i + 1] : segs[i];
    const auto id = static_cast<ModelId>(out.models.size() + 1);

    const FitResult on_fit = fit_mode(on, options);
    const FitResult off_fit = fit_mode(off, options);
    if (!on_fit.converged || !off_fit.converged) {
      throw Error("model " + std::to_string(id) + ": fit did not converge within " +
                  std::to_string(options.max_iterations) + " iterations");
    }
    ModelCoefficients coeffs{id, on_fit.k1, on_fit.k2, off_fit.k1, off_fit.k2, std::nullopt};
    if (!(coeffs.k_on1 > 0.0 && coeffs.k_on2 > 0.0 && coeffs.k_off1 > 0.0 && coeffs.k_off2 > 0.0)) {
      throw Error("model " + std::to_string(id) + ": fitted coefficients are not all positive");
    }
    out.models.push_back({coeffs, on_fit.rmse, off_fit.rmse});
    i += 2;
  }
  if (out.models.empty()) {
    throw Error("no ON/OFF segment pair found in trace");
  }
  return out;
}

} // namespace cpsf
