#include "hsc/quantizer.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include "hsc/error.hpp"

namespace hsc {

std::string to_string(BoundMode mode) {
  switch (mode) {
    case BoundMode::lossless:
      return "lossless";
    case BoundMode::absolute:
      return "abs";
    case BoundMode::relative:
      return "rel";
  }
  return "?";
}

Codebook::Codebook(std::vector<std::uint32_t> lower, std::vector<std::uint32_t> representative,
                   std::uint32_t max_value)
    : lower_(std::move(lower)), representative_(std::move(representative)), max_value_(max_value) {
  if (lower_.empty() || lower_.size() != representative_.size() || lower_.front() != 0) {
    throw DataError("codebook must start at 0 with one representative per interval");
  }
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    if (i > 0 && lower_[i] <= lower_[i - 1]) {
      throw DataError("codebook edges must strictly increase");
    }
    if (lower_[i] > max_value_ || representative_[i] < lower_[i] ||
        representative_[i] > upper(i)) {
      throw DataError("codebook representative outside its interval at index " +
                      std::to_string(i));
    }
  }
}

std::size_t Codebook::index_of(std::uint32_t v) const {
  if (v > max_value_ || lower_.empty()) {
    throw std::out_of_range("value " + std::to_string(v) + " outside codebook range");
  }
  const auto it = std::upper_bound(lower_.begin(), lower_.end(), v);
  return static_cast<std::size_t>(it - lower_.begin()) - 1;
}

QuantizerSpec QuantizerSpec::relative_codebook(double r, std::uint32_t max_value) {
  QuantizerSpec spec = relative(r);
  spec.codebook = std::make_shared<const Codebook>(build_relative_codebook(r, max_value));
  return spec;
}

void validate(const QuantizerSpec& spec) {
  if (spec.mode == BoundMode::relative) {
    if (!(spec.rel > 0.0 && spec.rel < 1.0)) {
      throw UsageError("relative bound R must satisfy 0 < R < 1");
    }
    if (!(spec.margin > 0.0 && spec.margin <= 1.0)) {
      throw UsageError("relative safety margin must be in (0, 1]");
    }
  }
  if (spec.mode == BoundMode::absolute && spec.delta > 32767) {
    throw UsageError("absolute bound delta too large");
  }
}

std::uint32_t relative_step(std::int64_t predicted, double rel, double margin) noexcept {
  const double mag = static_cast<double>(predicted < 0 ? -predicted : predicted);
  return 2u * static_cast<std::uint32_t>(std::floor(margin * rel * mag)) + 1u;
}

RelativeInterval relative_interval(std::uint32_t lower, double rel, std::uint32_t max_value) {
  const std::uint64_t lo = lower;
  auto r = static_cast<std::uint64_t>(std::floor(static_cast<double>(lo) * (1.0 + rel)));
  r = std::min<std::uint64_t>(std::max<std::uint64_t>(r, lo), max_value);
  while (r > lo && !within_relative(lower, static_cast<std::uint32_t>(r), rel)) {
    --r;
  }
  while (r < max_value && within_relative(lower, static_cast<std::uint32_t>(r + 1), rel)) {
    ++r;
  }
  auto u = static_cast<std::uint64_t>(std::floor(static_cast<double>(r) / (1.0 - rel)));
  u = std::min<std::uint64_t>(std::max(u, r), max_value);
  while (u > r &&
         !within_relative(static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(r), rel)) {
    --u;
  }
  while (u < max_value &&
         within_relative(static_cast<std::uint32_t>(u + 1), static_cast<std::uint32_t>(r), rel)) {
    ++u;
  }
  return {static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(u)};
}

Codebook build_relative_codebook(double rel, std::uint32_t max_value) {
  if (!(rel > 0.0 && rel < 1.0)) {
    throw UsageError("relative bound R must satisfy 0 < R < 1");
  }
  std::vector<std::uint32_t> lower;
  std::vector<std::uint32_t> reps;
  std::uint64_t l = 0;
  while (l <= max_value) {
    const auto iv = relative_interval(static_cast<std::uint32_t>(l), rel, max_value);
    lower.push_back(static_cast<std::uint32_t>(l));
    reps.push_back(iv.representative);
    l = std::uint64_t{iv.upper} + 1;
  }
  return Codebook(std::move(lower), std::move(reps), max_value);
}

std::pair<std::size_t, std::uint32_t> codebook_quantize(std::uint32_t v, const Codebook& cb) {
  const std::size_t i = cb.index_of(v);
  return {i, cb.representative(i)};
}

BinSpec bin_of(std::uint32_t reconstruction, const QuantizerSpec& spec, std::uint32_t max_value) {
  const double r = reconstruction;
  const double top = max_value;
  BinSpec bin{r, r};
  switch (spec.mode) {
    case BoundMode::lossless:
      break;
    case BoundMode::absolute:
      bin = {r - spec.delta, r + spec.delta};
      break;
    case BoundMode::relative:
      if (spec.codebook) {
        const std::size_t i = spec.codebook->index_of(reconstruction);
        bin = {static_cast<double>(spec.codebook->lower(i)),
               static_cast<double>(spec.codebook->upper(i))};
      } else {
        bin = {r - spec.rel * r, r + spec.rel * r};
      }
      break;
  }
  bin.lo = std::max(bin.lo, 0.0);
  bin.hi = std::min(bin.hi, top);
  return bin;
}

int index_bit_depth(std::uint32_t max_index) noexcept {
  return std::max(2, static_cast<int>(std::bit_width(max_index)));
}

}  // namespace hsc
