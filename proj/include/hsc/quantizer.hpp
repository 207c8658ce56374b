#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace hsc {

enum class BoundMode : std::uint8_t { lossless, absolute, relative };

std::string to_string(BoundMode mode);

// Non-uniform relative-error codebook over [0, max_value]. Interval i covers
// [lower[i], upper(i)] and reconstructs to representative[i].
class Codebook {
 public:
  Codebook() = default;
  // Throws DataError unless edges start at 0, strictly increase, stay within
  // max_value and each representative lies inside its interval.
  Codebook(std::vector<std::uint32_t> lower, std::vector<std::uint32_t> representative,
           std::uint32_t max_value);

  [[nodiscard]] std::size_t size() const noexcept { return lower_.size(); }
  [[nodiscard]] std::uint32_t max_value() const noexcept { return max_value_; }
  [[nodiscard]] std::uint32_t lower(std::size_t i) const { return lower_.at(i); }
  [[nodiscard]] std::uint32_t upper(std::size_t i) const {
    return i + 1 < lower_.size() ? lower_.at(i + 1) - 1 : max_value_;
  }
  [[nodiscard]] std::uint32_t representative(std::size_t i) const { return representative_.at(i); }
  [[nodiscard]] const std::vector<std::uint32_t>& lower_edges() const noexcept { return lower_; }
  [[nodiscard]] const std::vector<std::uint32_t>& representatives() const noexcept {
    return representative_;
  }

  // Index of the interval containing v; throws std::out_of_range beyond max_value.
  [[nodiscard]] std::size_t index_of(std::uint32_t v) const;

  friend bool operator==(const Codebook&, const Codebook&) = default;

 private:
  std::vector<std::uint32_t> lower_;
  std::vector<std::uint32_t> representative_;
  std::uint32_t max_value_ = 0;
};

// Error-bound objective plus the derived quantizer. Relative specs used for
// prequantization carry a codebook; in-loop relative coding uses `margin`
// as a multiplier on R when sizing the per-pixel step.
struct QuantizerSpec {
  BoundMode mode = BoundMode::lossless;
  std::uint32_t delta = 0;
  double rel = 0.0;
  double margin = 1.0;
  std::shared_ptr<const Codebook> codebook;

  static QuantizerSpec lossless() { return {}; }
  static QuantizerSpec absolute(std::uint32_t delta) {
    return {BoundMode::absolute, delta, 0.0, 1.0, nullptr};
  }
  static QuantizerSpec relative(double r, double margin = 1.0) {
    return {BoundMode::relative, 0, r, margin, nullptr};
  }
  static QuantizerSpec relative_codebook(double r, std::uint32_t max_value);
};

void validate(const QuantizerSpec& spec);

struct Quantized {
  std::int64_t index = 0;
  std::int64_t reconstruction = 0;
};

// Sample quantizer with step 2*delta+1; reconstruction clamped to max_value.
inline Quantized uniform_quantize(std::uint32_t v, std::uint32_t delta,
                                  std::uint32_t max_value) noexcept {
  const std::uint64_t step = 2ull * delta + 1;
  const std::uint64_t index = (2ull * v + step) / (2 * step);
  const std::uint64_t rec = index * step;
  return {static_cast<std::int64_t>(index),
          static_cast<std::int64_t>(rec > max_value ? max_value : rec)};
}

inline std::uint32_t uniform_index_max(std::uint32_t delta, std::uint32_t max_value) noexcept {
  return static_cast<std::uint32_t>(uniform_quantize(max_value, delta, max_value).index);
}

// Residual quantizer for an odd step: index = sign(e) * floor((|e| + (step-1)/2) / step).
inline Quantized inloop_quantize_residual(std::int64_t e, std::uint32_t step) noexcept {
  const std::int64_t q = step;
  const std::int64_t mag = ((e < 0 ? -e : e) + (q - 1) / 2) / q;
  const std::int64_t index = e < 0 ? -mag : mag;
  return {index, index * q};
}

// Per-pixel step 2*floor(margin * R * |s_hat|) + 1.
std::uint32_t relative_step(std::int64_t predicted, double rel, double margin = 1.0) noexcept;

// Margin 1 / (1 + R). The half-step h = floor(m * R * s_hat) then satisfies
// h <= R * s for every s >= s_hat - h, so only predictions overshooting the
// sample by more than h can break the relative bound.
inline double safe_relative_margin(double rel) noexcept { return 1.0 / (1.0 + rel); }

// |v - r| <= R * v, the acceptance test shared by codebook design and checks.
inline bool within_relative(std::uint32_t v, std::uint32_t r, double rel) noexcept {
  const double diff = v > r ? static_cast<double>(v - r) : static_cast<double>(r - v);
  return diff <= rel * static_cast<double>(v);
}

struct RelativeInterval {
  std::uint32_t representative = 0;
  std::uint32_t upper = 0;
};

// The interval opened at `lower`: the largest representative within R of
// it, then the largest value that representative still covers.
RelativeInterval relative_interval(std::uint32_t lower, double rel, std::uint32_t max_value);

// Greedy left-to-right interval extension: for lower edge l the largest
// admissible representative, then the largest upper edge it still covers.
Codebook build_relative_codebook(double rel, std::uint32_t max_value);

// (index, representative); throws std::out_of_range beyond the codebook.
std::pair<std::size_t, std::uint32_t> codebook_quantize(std::uint32_t v, const Codebook& cb);

// Reconstruction bin used for consistent reconstruction.
struct BinSpec {
  double lo = 0.0;
  double hi = 0.0;

  [[nodiscard]] bool contains(double v) const noexcept { return v >= lo && v <= hi; }
  friend bool operator==(const BinSpec&, const BinSpec&) = default;
};

// Absolute: [r - delta, r + delta]; relative with a codebook: the interval
// owning r; relative without one: [r - R r, r + R r]; lossless: [r, r].
// Always intersected with [0, max_value].
BinSpec bin_of(std::uint32_t reconstruction, const QuantizerSpec& spec, std::uint32_t max_value);

// Bits needed for indices 0..max_index (at least 2 so the index cube is a
// valid ImageCube).
int index_bit_depth(std::uint32_t max_index) noexcept;

}  // namespace hsc
