#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hsc/cube.hpp"

namespace hsc {

// Reported for identical cubes so tables stay numeric.
inline constexpr double kSnrSentinel = 999.0;

struct SnrResult {
  double db = 0.0;
  bool degenerate = false;  // all-zero original: 0 dB reported
};

// 10 log10(sum s^2 / sum (s - r)^2). Cubes may differ in storage order;
// differing dims throw DataError.
SnrResult snr(const ImageCube& orig, const ImageCube& rec);

struct MareResult {
  double value = 0.0;
  std::size_t excluded = 0;  // zero-valued originals left out of the mean
};

MareResult mare(const ImageCube& orig, const ImageCube& rec);

struct QualityMetrics {
  double snr_db = 0.0;
  bool snr_degenerate = false;
  double mare = 0.0;
  std::size_t mare_excluded = 0;
  std::uint32_t max_abs_error = 0;
  double max_rel_error = 0.0;  // over non-zero originals
  std::size_t samples = 0;
};

QualityMetrics evaluate(const ImageCube& orig, const ImageCube& rec);

enum class ErrorKind { absolute, relative };

// Equal-width bins over [lo, hi); out-of-range errors land in the edge bins.
// Relative errors of zero-valued originals are counted in `excluded`.
struct Histogram {
  double lo = 0.0;
  double width = 1.0;
  std::vector<std::uint64_t> counts;
  std::uint64_t excluded = 0;

  [[nodiscard]] std::uint64_t total() const;
  [[nodiscard]] double bin_center(std::size_t i) const {
    return lo + (static_cast<double>(i) + 0.5) * width;
  }
};

// Signed error rec - orig (absolute) or (rec - orig) / orig (relative).
Histogram error_histogram(const ImageCube& orig, const ImageCube& rec, ErrorKind kind, double lo,
                          double hi, std::size_t bins);

}  // namespace hsc
