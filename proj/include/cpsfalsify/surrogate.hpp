#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cpsf {

enum class Mode { On, Off };

std::string_view to_string(Mode mode);

using ModelId = std::int64_t;

/// Coefficients of one surrogate model: exponential heating (ON) and
/// cooling (OFF) curves. Deltas are in degrees Celsius, rates per minute.
struct ModelCoefficients {
  ModelId model_id = 0;
  double k_on1 = 0.0;
  double k_on2 = 0.0;
  double k_off1 = 0.0;
  double k_off2 = 0.0;
  /// Free-text label of the environmental condition the model stands for.
  /// Carries no semantics.
  std::optional<std::string> condition;

  /// Throws cpsf::Error unless the id is positive and every coefficient is
  /// finite and strictly positive.
  void validate() const;

  friend bool operator==(const ModelCoefficients &, const ModelCoefficients &) = default;
};

/// Heating: k_on1 * (1 - exp(-k_on2 * t)) + t0. Throws on negative t.
double eval_on(const ModelCoefficients &coeffs, double t0, double t);

/// Cooling: k_off1 * exp(-k_off2 * t) + t0 - k_off1. Throws on negative t.
double eval_off(const ModelCoefficients &coeffs, double t0, double t);

/// Dispatches to eval_on / eval_off.
double eval_mode(Mode mode, const ModelCoefficients &coeffs, double t0, double t);

/// Largest temperature change any single minute can produce from a fresh
/// anchor for this model. Both curves are steepest at t = 0.
double max_one_minute_excursion(const ModelCoefficients &coeffs);

/// Non-empty set of surrogate models keyed by unique id.
class ModelRegistry {
public:
  /// Throws on an empty list, a duplicate id, or an invalid row.
  explicit ModelRegistry(std::vector<ModelCoefficients> models);

  /// The three published coefficient sets.
  static ModelRegistry defaults();

  const ModelCoefficients &lookup(ModelId id) const;
  bool contains(ModelId id) const { return models_.contains(id); }
  std::size_t size() const { return models_.size(); }

  /// Ids in ascending order.
  const std::vector<ModelId> &ids() const { return ids_; }

  /// Models in ascending id order.
  std::vector<ModelCoefficients> models() const;

  double max_k_on1() const;
  double max_k_off1() const;
  double max_one_minute_excursion() const;

  friend bool operator==(const ModelRegistry &a, const ModelRegistry &b) {
    return a.models_ == b.models_;
  }

private:
  std::map<ModelId, ModelCoefficients> models_;
  std::vector<ModelId> ids_;
};

} // namespace cpsf
