#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hsc {

enum class PredictionMode : std::uint8_t { full, reduced };
enum class LocalSumMode : std::uint8_t { wide, narrow };

std::string to_string(PredictionMode mode);
std::string to_string(LocalSumMode mode);

inline constexpr int kMaxPredictionBands = 15;
inline constexpr int kMaxComponents = kMaxPredictionBands + 3;

struct PredictorConfig {
  PredictionMode mode = PredictionMode::full;
  LocalSumMode local_sum = LocalSumMode::wide;
  int p_bands = 3;
  int bit_depth = 16;
  int weight_resolution = 13;  // fractional bits of the fixed-point weights
  int v_min = 2;
  int v_max = 9;
  // Samples per rate-exponent increment; 0 selects 4 * nx.
  std::uint32_t t_inc = 0;

  [[nodiscard]] std::int32_t s_mid() const noexcept { return std::int32_t{1} << (bit_depth - 1); }
  [[nodiscard]] std::int32_t s_max() const noexcept { return (std::int32_t{1} << bit_depth) - 1; }
  [[nodiscard]] int components() const noexcept {
    return p_bands + (mode == PredictionMode::full ? 3 : 0);
  }
  [[nodiscard]] std::int32_t weight_min() const noexcept { return -(std::int32_t{1} << 16); }
  [[nodiscard]] std::int32_t weight_max() const noexcept { return (std::int32_t{1} << 16) - 1; }

  friend bool operator==(const PredictorConfig&, const PredictorConfig&) = default;
};

// Throws UsageError for out-of-range fields.
void validate(const PredictorConfig& cfg);

struct Position {
  std::size_t x = 0;
  std::size_t y = 0;
  std::size_t z = 0;
  std::size_t nx = 1;
};

// Causal reconstructed samples around (x,y,z). Only positions that exist
// and that the selected local-sum mode reads are populated.
struct Neighborhood {
  enum Slot : std::uint8_t {
    kWest = 1u << 0,       // (x-1, y,   z)
    kNorthWest = 1u << 1,  // (x-1, y-1, z)
    kNorth = 1u << 2,      // (x,   y-1, z)
    kNorthEast = 1u << 3,  // (x+1, y-1, z)
    kWestPrev = 1u << 4,   // (x-1, y,   z-1)
    kPrev = 1u << 5,       // (x,   y,   z-1)
  };

  std::int32_t west = 0;
  std::int32_t north_west = 0;
  std::int32_t north = 0;
  std::int32_t north_east = 0;
  std::int32_t west_prev = 0;
  std::int32_t prev = 0;
  std::uint8_t present = 0;

  [[nodiscard]] bool has(Slot s) const noexcept { return (present & s) != 0; }
};

// Builds the neighbourhood from any sample accessor `sample(x, y, z)`.
// Narrow mode never reads (x-1, y, z) on lines y > 0.
template <typename Sample>
Neighborhood gather_neighborhood(const Sample& sample, const Position& p, LocalSumMode mode) {
  Neighborhood nb;
  const bool narrow = mode == LocalSumMode::narrow;
  if (p.y > 0) {
    nb.north = sample(p.x, p.y - 1, p.z);
    nb.present |= Neighborhood::kNorth;
    if (p.x > 0) {
      nb.north_west = sample(p.x - 1, p.y - 1, p.z);
      nb.present |= Neighborhood::kNorthWest;
      if (!narrow) {
        nb.west = sample(p.x - 1, p.y, p.z);
        nb.present |= Neighborhood::kWest;
      }
    }
    if (p.x + 1 < p.nx) {
      nb.north_east = sample(p.x + 1, p.y - 1, p.z);
      nb.present |= Neighborhood::kNorthEast;
    }
  } else if (p.x > 0) {
    if (narrow) {
      if (p.z > 0) {
        nb.west_prev = sample(p.x - 1, p.y, p.z - 1);
        nb.present |= Neighborhood::kWestPrev;
      }
    } else {
      nb.west = sample(p.x - 1, p.y, p.z);
      nb.present |= Neighborhood::kWest;
    }
  } else if (p.z > 0) {
    nb.prev = sample(p.x, p.y, p.z - 1);
    nb.present |= Neighborhood::kPrev;
  }
  return nb;
}

// Neighbour-oriented local sum. The first sample of a band (x=0, y=0) uses
// 4x the co-located previous-band sample, or 4*s_mid in band 0. A single
// column image (nx=1) uses 4x the north sample on lines y > 0.
inline std::int32_t local_sum(const Neighborhood& nb, const Position& p,
                              const PredictorConfig& cfg) noexcept {
  const bool last_col = p.x + 1 == p.nx;
  if (p.y > 0) {
    if (p.nx == 1) {
      return 4 * nb.north;
    }
    if (p.x == 0) {
      return 2 * (nb.north + nb.north_east);
    }
    if (cfg.local_sum == LocalSumMode::wide) {
      if (last_col) {
        return nb.west + nb.north_west + 2 * nb.north;
      }
      return nb.west + nb.north_west + nb.north + nb.north_east;
    }
    if (last_col) {
      return 2 * (nb.north_west + nb.north);
    }
    return nb.north_west + 2 * nb.north + nb.north_east;
  }
  if (p.x > 0) {
    if (cfg.local_sum == LocalSumMode::wide) {
      return 4 * nb.west;
    }
    return p.z > 0 ? 4 * nb.west_prev : 4 * cfg.s_mid();
  }
  return p.z > 0 ? 4 * nb.prev : 4 * cfg.s_mid();
}

inline std::int32_t central_difference(std::int32_t sample, std::int32_t sigma) noexcept {
  return 4 * sample - sigma;
}

// Directional differences [N, W, NW]; all zero on the first line. When the
// west or north-west neighbour is absent (x = 0, or narrow mode for W) the
// north sample stands in.
inline std::array<std::int32_t, 3> directional_differences(const Neighborhood& nb,
                                                           std::int32_t sigma) noexcept {
  if (!nb.has(Neighborhood::kNorth)) {
    return {0, 0, 0};
  }
  const std::int32_t dn = 4 * nb.north - sigma;
  const std::int32_t dw = nb.has(Neighborhood::kWest) ? 4 * nb.west - sigma : dn;
  const std::int32_t dnw = nb.has(Neighborhood::kNorthWest) ? 4 * nb.north_west - sigma : dn;
  return {dn, dw, dnw};
}

// Difference vector fed to the weights. Full: [dN, dW, dNW, d(z-1) .. d(z-P)];
// Reduced: [d(z-1) .. d(z-P)]; truncated to the bands that exist.
struct DiffVector {
  std::array<std::int32_t, kMaxComponents> values{};
  std::size_t size = 0;

  [[nodiscard]] std::span<const std::int32_t> view() const noexcept {
    return {values.data(), size};
  }
};

// `prev_central(k)` returns the central difference at the same (x,y) in
// band z-1-k.
template <typename PrevCentral>
DiffVector local_differences(const Neighborhood& nb, std::int32_t sigma, const Position& p,
                             const PredictorConfig& cfg, const PrevCentral& prev_central) {
  DiffVector out;
  if (cfg.mode == PredictionMode::full) {
    const auto dirs = directional_differences(nb, sigma);
    out.values[0] = dirs[0];
    out.values[1] = dirs[1];
    out.values[2] = dirs[2];
    out.size = 3;
  }
  const std::size_t available = std::min<std::size_t>(p.z, static_cast<std::size_t>(cfg.p_bands));
  for (std::size_t k = 0; k < available; ++k) {
    out.values[out.size++] = prev_central(k);
  }
  return out;
}

// Fixed-point dot product W . diffs (weights carry `weight_resolution`
// fractional bits); the result keeps those fractional bits.
inline std::int64_t predicted_difference_scaled(std::span<const std::int32_t> weights,
                                                std::span<const std::int32_t> diffs) noexcept {
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    acc += static_cast<std::int64_t>(weights[i]) * diffs[i];
  }
  return acc;
}

// s_hat = clamp(round((d_hat + sigma) / 4)), round half up.
inline std::int32_t predict(std::span<const std::int32_t> weights,
                            std::span<const std::int32_t> diffs, std::int32_t sigma,
                            const PredictorConfig& cfg) noexcept {
  const int shift = cfg.weight_resolution + 2;
  const std::int64_t num = predicted_difference_scaled(weights, diffs) +
                           (static_cast<std::int64_t>(sigma) << cfg.weight_resolution);
  const std::int64_t s = (num + (std::int64_t{1} << (shift - 1))) >> shift;
  return static_cast<std::int32_t>(std::clamp<std::int64_t>(s, 0, cfg.s_max()));
}

// Weight-update step exponent for the t-th sample of a band: the adaptation
// rate 2^-(v_min + floor(t/t_inc)), capped at 2^-v_max, applied to
// differences normalised by 2^bit_depth.
inline int rate_shift(std::uint64_t t, std::uint32_t t_inc, const PredictorConfig& cfg) noexcept {
  const std::uint64_t v = static_cast<std::uint64_t>(cfg.v_min) + t / t_inc;
  return static_cast<int>(std::min<std::uint64_t>(v, static_cast<std::uint64_t>(cfg.v_max))) +
         cfg.bit_depth;
}

// Sign algorithm: W <- clamp(W + sign * diffs * 2^-shift) in fixed point.
inline void update_weights(std::span<std::int32_t> weights, int error_sign,
                           std::span<const std::int32_t> diffs, int shift,
                           const PredictorConfig& cfg) noexcept {
  if (error_sign == 0) {
    return;
  }
  const int omega = cfg.weight_resolution;
  const std::int64_t lo = cfg.weight_min();
  const std::int64_t hi = cfg.weight_max();
  if (shift <= omega) {
    const int up = omega - shift;
    for (std::size_t i = 0; i < diffs.size(); ++i) {
      const std::int64_t inc =
          static_cast<std::int64_t>(error_sign) * diffs[i] * (std::int64_t{1} << up);
      weights[i] = static_cast<std::int32_t>(std::clamp<std::int64_t>(weights[i] + inc, lo, hi));
    }
    return;
  }
  const int down = shift - omega;
  const std::int64_t half = std::int64_t{1} << (down - 1);
  for (std::size_t i = 0; i < diffs.size(); ++i) {
    const std::int64_t inc = (static_cast<std::int64_t>(error_sign) * diffs[i] + half) >> down;
    weights[i] = static_cast<std::int32_t>(std::clamp<std::int64_t>(weights[i] + inc, lo, hi));
  }
}

// Per-band adaptive state.
struct PredictorState {
  std::vector<std::int32_t> weights;

  friend bool operator==(const PredictorState&, const PredictorState&) = default;
};

// First previous-band weight 7/8, everything else 0.
PredictorState init_weights(const PredictorConfig& cfg);

inline int sign_of(std::int64_t v) noexcept { return (v > 0) - (v < 0); }

}  // namespace hsc
