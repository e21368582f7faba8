#include "cpsfalsify/surrogate.hpp"

#include "cpsfalsify/error.hpp"

#include <algorithm>
#include <cmath>

namespace cpsf {

std::string_view to_string(Mode mode) {
  return mode == Mode::On ? "ON" : "OFF";
}

namespace {

void check_positive(double value, const char *name, ModelId id) {
  if (!std::isfinite(value) || value <= 0.0) {
    throw Error("model " + std::to_string(id) + ": " + name + " must be positive, got " +
                std::to_string(value));
  }
}

void check_time(double t) {
  if (!(t >= 0.0)) {
    throw Error("elapsed time must be non-negative, got " + std::to_string(t));
  }
}

} // namespace

void ModelCoefficients::validate() const {
  if (model_id <= 0) {
    throw Error("model_id must be positive, got " + std::to_string(model_id));
  }
  check_positive(k_on1, "k_on1", model_id);
  check_positive(k_on2, "k_on2", model_id);
  check_positive(k_off1, "k_off1", model_id);
  check_positive(k_off2, "k_off2", model_id);
}

double eval_on(const ModelCoefficients &coeffs, double t0, double t) {
  check_time(t);
  return coeffs.k_on1 * -std::expm1(-coeffs.k_on2 * t) + t0;
}

double eval_off(const ModelCoefficients &coeffs, double t0, double t) {
  check_time(t);
  // k_off1 * exp(-k_off2 t) + t0 - k_off1, regrouped so t = 0 returns t0 exactly.
  return t0 + coeffs.k_off1 * std::expm1(-coeffs.k_off2 * t);
}

double eval_mode(Mode mode, const ModelCoefficients &coeffs, double t0, double t) {
  return mode == Mode::On ? eval_on(coeffs, t0, t) : eval_off(coeffs, t0, t);
}

double max_one_minute_excursion(const ModelCoefficients &coeffs) {
  return std::max(coeffs.k_on1 * -std::expm1(-coeffs.k_on2),
                  coeffs.k_off1 * -std::expm1(-coeffs.k_off2));
}

ModelRegistry::ModelRegistry(std::vector<ModelCoefficients> models) {
  if (models.empty()) {
    throw Error("empty registry");
  }
  for (auto &m : models) {
    m.validate();
    const ModelId id = m.model_id;
    if (!models_.emplace(id, std::move(m)).second) {
      throw Error("duplicate model_id " + std::to_string(id));
    }
  }
  for (const auto &[id, _] : models_) {
    ids_.push_back(id);
  }
}

ModelRegistry ModelRegistry::defaults() {
  return ModelRegistry({
      {1, 6.0, 0.14170703, 4.3, 0.09531917, std::nullopt},
      {2, 7.9, 0.11180434, 5.2, 0.04803319, std::nullopt},
      {3, 7.0, 0.13425024, 3.8, 0.07661568, std::nullopt},
  });
}

const ModelCoefficients &ModelRegistry::lookup(ModelId id) const {
  auto it = models_.find(id);
  if (it == models_.end()) {
    throw Error("unknown model id " + std::to_string(id));
  }
  return it->second;
}

std::vector<ModelCoefficients> ModelRegistry::models() const {
  std::vector<ModelCoefficients> out;
  out.reserve(models_.size());
  for (const auto &[_, m] : models_) {
    out.push_back(m);
  }
  return out;
}

double ModelRegistry::max_k_on1() const {
  double best = 0.0;
  for (const auto &[_, m] : models_) best = std::max(best, m.k_on1);
  return best;
}

double ModelRegistry::max_k_off1() const {
  double best = 0.0;
  for (const auto &[_, m] : models_) best = std::max(best, m.k_off1);
  return best;
}

double ModelRegistry::max_one_minute_excursion() const {
  double best = 0.0;
  for (const auto &[_, m] : models_) best = std::max(best, cpsf::max_one_minute_excursion(m));
  return best;
}

} // namespace cpsf
