#include "hsc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hsc/error.hpp"
#include "hsc/kernels.hpp"

namespace hsc {

namespace {

kernels::ErrorSums sums(const ImageCube& orig, const ImageCube& rec) {
  if (orig.dims() != rec.dims()) {
    throw DataError("dimension mismatch between original and reconstruction");
  }
  if (orig.order() == rec.order()) {
    return kernels::error_sums(orig.samples(), rec.samples());
  }
  const ImageCube aligned = reorder(rec, orig.order());
  return kernels::error_sums(orig.samples(), aligned.samples());
}

SnrResult snr_from(const kernels::ErrorSums& s) {
  if (s.signal_energy == 0) {
    return {0.0, true};
  }
  if (s.error_energy == 0) {
    return {kSnrSentinel, false};
  }
  return {10.0 * std::log10(static_cast<double>(s.signal_energy) /
                            static_cast<double>(s.error_energy)),
          false};
}

MareResult mare_from(const kernels::ErrorSums& s) {
  const std::size_t included = s.samples - s.zero_samples;
  return {included == 0 ? 0.0 : s.relative_error_sum / static_cast<double>(included),
          s.zero_samples};
}

}  // namespace

SnrResult snr(const ImageCube& orig, const ImageCube& rec) { return snr_from(sums(orig, rec)); }

MareResult mare(const ImageCube& orig, const ImageCube& rec) { return mare_from(sums(orig, rec)); }

QualityMetrics evaluate(const ImageCube& orig, const ImageCube& rec) {
  const kernels::ErrorSums s = sums(orig, rec);
  const SnrResult snr_db = snr_from(s);
  const MareResult m = mare_from(s);
  QualityMetrics q;
  q.snr_db = snr_db.db;
  q.snr_degenerate = snr_db.degenerate;
  q.mare = m.value;
  q.mare_excluded = m.excluded;
  q.max_abs_error = s.max_abs_error;
  q.max_rel_error = s.max_relative_error;
  q.samples = s.samples;
  return q;
}

std::uint64_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0}) + excluded;
}

Histogram error_histogram(const ImageCube& orig, const ImageCube& rec, ErrorKind kind, double lo,
                          double hi, std::size_t bins) {
  if (orig.dims() != rec.dims()) {
    throw DataError("dimension mismatch between original and reconstruction");
  }
  if (bins == 0 || !(hi > lo)) {
    throw UsageError("histogram needs bins > 0 and hi > lo");
  }
  const ImageCube aligned = reorder(rec, orig.order());
  Histogram h;
  h.lo = lo;
  h.width = (hi - lo) / static_cast<double>(bins);
  h.counts.assign(bins, 0);
  const auto o = orig.samples();
  const auto r = aligned.samples();
  for (std::size_t i = 0; i < o.size(); ++i) {
    double err = static_cast<double>(r[i]) - static_cast<double>(o[i]);
    if (kind == ErrorKind::relative) {
      if (o[i] == 0) {
        ++h.excluded;
        continue;
      }
      err /= static_cast<double>(o[i]);
    }
    const double pos = std::floor((err - lo) / h.width);
    const auto b = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(bins - 1)));
    ++h.counts[b];
  }
  return h;
}

}  // namespace hsc
