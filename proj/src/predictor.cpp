#include "hsc/predictor.hpp"

#include "hsc/error.hpp"

namespace hsc {

std::string to_string(PredictionMode mode) {
  return mode == PredictionMode::full ? "full" : "reduced";
}

std::string to_string(LocalSumMode mode) { return mode == LocalSumMode::wide ? "wide" : "narrow"; }

void validate(const PredictorConfig& cfg) {
  if (cfg.p_bands < 0 || cfg.p_bands > kMaxPredictionBands) {
    throw UsageError("prediction bands must be within [0, " +
                     std::to_string(kMaxPredictionBands) + "]");
  }
  if (cfg.bit_depth < 1 || cfg.bit_depth > 16) {
    throw UsageError("predictor bit depth must be within [1, 16]");
  }
  if (cfg.weight_resolution < 4 || cfg.weight_resolution > 16) {
    throw UsageError("weight resolution must be within [4, 16]");
  }
  if (cfg.v_min < 0 || cfg.v_min > cfg.v_max || cfg.v_max > 24) {
    throw UsageError("rate exponents need 0 <= v_min <= v_max <= 24");
  }
}

PredictorState init_weights(const PredictorConfig& cfg) {
  PredictorState state;
  state.weights.assign(static_cast<std::size_t>(cfg.components()), 0);
  if (cfg.p_bands > 0) {
    const std::size_t first = cfg.mode == PredictionMode::full ? 3 : 0;
    state.weights[first] = 7 << (cfg.weight_resolution - 3);
  }
  return state;
}

}  // namespace hsc
