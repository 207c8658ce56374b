#include "hsc/kernels.hpp"

#include <algorithm>
#include <cmath>

#include <omp.h>

namespace hsc::kernels {

namespace {

constexpr std::size_t kBlock = 4096;
// Below this many elements a parallel region costs more than it saves.
constexpr std::size_t kParallelMin = 1 << 14;

inline void sample_context(std::span<const std::uint16_t> bil, const Dims& d, std::size_t x,
                           std::size_t y, std::size_t z, const PredictorConfig& cfg,
                           LineContext& out) {
  const auto sample = [&](std::size_t xx, std::size_t yy, std::size_t zz) {
    return static_cast<std::int32_t>(bil[(yy * d.nz + zz) * d.nx + xx]);
  };
  const Position p{x, y, z, d.nx};
  const Neighborhood nb = gather_neighborhood(sample, p, cfg.local_sum);
  const std::int32_t sigma = local_sum(nb, p, cfg);
  const std::size_t i = z * d.nx + x;
  out.sigma[i] = sigma;
  out.central[i] = central_difference(sample(x, y, z), sigma);
  if (cfg.mode == PredictionMode::full) {
    out.directional[i] = directional_differences(nb, sigma);
  }
}

inline double sgn(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

inline double tv_gradient_at(std::span<const double> f, std::span<const double> data,
                             const Dims& d, double lambda, std::size_t x, std::size_t y,
                             std::size_t z) {
  const std::size_t plane = d.nx * d.ny;
  const std::size_t i = (z * d.ny + y) * d.nx + x;
  const double v = f[i];
  double tv = 0.0;
  if (x + 1 < d.nx) tv -= sgn(f[i + 1] - v);
  if (x > 0) tv += sgn(v - f[i - 1]);
  if (y + 1 < d.ny) tv -= sgn(f[i + d.nx] - v);
  if (y > 0) tv += sgn(v - f[i - d.nx]);
  if (z + 1 < d.nz) tv -= sgn(f[i + plane] - v);
  if (z > 0) tv += sgn(v - f[i - plane]);
  return 2.0 * (v - data[i]) + lambda * tv;
}

inline double tv_row_objective(std::span<const double> f, std::span<const double> data,
                               const Dims& d, double lambda, std::size_t y, std::size_t z) {
  const std::size_t plane = d.nx * d.ny;
  double fidelity = 0.0;
  double tv = 0.0;
  for (std::size_t x = 0; x < d.nx; ++x) {
    const std::size_t i = (z * d.ny + y) * d.nx + x;
    const double e = f[i] - data[i];
    fidelity += e * e;
    if (x + 1 < d.nx) tv += std::abs(f[i + 1] - f[i]);
    if (y + 1 < d.ny) tv += std::abs(f[i + d.nx] - f[i]);
    if (z + 1 < d.nz) tv += std::abs(f[i + plane] - f[i]);
  }
  return fidelity + lambda * tv;
}

inline void accumulate(ErrorSums& s, std::uint16_t o, std::uint16_t r) {
  const std::uint64_t ov = o;
  const auto diff = static_cast<std::uint32_t>(o > r ? o - r : r - o);
  s.signal_energy += ov * ov;
  s.error_energy += static_cast<std::uint64_t>(diff) * diff;
  s.max_abs_error = std::max(s.max_abs_error, diff);
  if (o == 0) {
    ++s.zero_samples;
  } else {
    const double rel = static_cast<double>(diff) / static_cast<double>(o);
    s.relative_error_sum += rel;
    s.max_relative_error = std::max(s.max_relative_error, rel);
  }
  ++s.samples;
}

}  // namespace

int max_threads() { return omp_get_max_threads(); }

void line_contexts(std::span<const std::uint16_t> bil, const Dims& d, std::size_t y,
                   const PredictorConfig& cfg, LineContext& out) {
  out.resize(d.nz, d.nx);
  const auto nz = static_cast<std::ptrdiff_t>(d.nz);
  const bool wide = cfg.local_sum == LocalSumMode::wide;
  const bool full = cfg.mode == PredictionMode::full;
#pragma omp parallel for schedule(static) if (d.nz * d.nx >= kParallelMin)
  for (std::ptrdiff_t zi = 0; zi < nz; ++zi) {
    const auto z = static_cast<std::size_t>(zi);
    if (y == 0 || d.nx < 3) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        sample_context(bil, d, x, y, z, cfg, out);
      }
      continue;
    }
    sample_context(bil, d, 0, y, z, cfg, out);
    // Interior columns have all four causal neighbours; written branch-free
    // so the loop vectorises.
    const std::uint16_t* cur = bil.data() + (y * d.nz + z) * d.nx;
    const std::uint16_t* up = bil.data() + ((y - 1) * d.nz + z) * d.nx;
    std::int32_t* sigma = out.sigma.data() + z * d.nx;
    std::int32_t* central = out.central.data() + z * d.nx;
    for (std::size_t x = 1; x + 1 < d.nx; ++x) {
      const std::int32_t w = cur[x - 1];
      const std::int32_t nw = up[x - 1];
      const std::int32_t n = up[x];
      const std::int32_t ne = up[x + 1];
      const std::int32_t s = wide ? w + nw + n + ne : nw + 2 * n + ne;
      sigma[x] = s;
      central[x] = 4 * static_cast<std::int32_t>(cur[x]) - s;
    }
    if (full) {
      auto* dir = out.directional.data() + z * d.nx;
      for (std::size_t x = 1; x + 1 < d.nx; ++x) {
        const std::int32_t s = sigma[x];
        const std::int32_t dn = 4 * static_cast<std::int32_t>(up[x]) - s;
        dir[x] = {dn, wide ? 4 * static_cast<std::int32_t>(cur[x - 1]) - s : dn,
                  4 * static_cast<std::int32_t>(up[x - 1]) - s};
      }
    }
    sample_context(bil, d, d.nx - 1, y, z, cfg, out);
  }
}

void quantize_uniform(std::span<const std::uint16_t> in, std::span<std::uint16_t> index,
                      std::uint32_t delta, std::uint32_t max_value) {
  const auto n = static_cast<std::ptrdiff_t>(in.size());
  // Division by 2 * step through a 40-bit reciprocal; exact because the
  // numerator stays below 2^40 / (2 * step).
  const std::uint64_t step = 2ull * delta + 1;
  const std::uint64_t recip = ((std::uint64_t{1} << 40) + 2 * step - 1) / (2 * step);
  (void)max_value;
#pragma omp parallel for schedule(static) if (in.size() >= kParallelMin)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const std::uint64_t num = 2ull * in[i] + step;
    index[i] = static_cast<std::uint16_t>((num * recip) >> 40);
  }
}

void dequantize_uniform(std::span<const std::uint16_t> index, std::span<std::uint16_t> out,
                        std::uint32_t delta, std::uint32_t max_value) {
  const auto n = static_cast<std::ptrdiff_t>(index.size());
  const std::uint32_t step = 2 * delta + 1;
#pragma omp parallel for schedule(static) if (index.size() >= kParallelMin)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = static_cast<std::uint16_t>(std::min(index[i] * step, max_value));
  }
}

void quantize_codebook(std::span<const std::uint16_t> in, std::span<std::uint16_t> index,
                       const Codebook& cb) {
  const auto n = static_cast<std::ptrdiff_t>(in.size());
#pragma omp parallel for schedule(static) if (in.size() >= kParallelMin)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    index[i] = static_cast<std::uint16_t>(cb.index_of(in[i]));
  }
}

void dequantize_codebook(std::span<const std::uint16_t> index, std::span<std::uint16_t> out,
                         const Codebook& cb) {
  const auto n = static_cast<std::ptrdiff_t>(index.size());
  const auto& reps = cb.representatives();
#pragma omp parallel for schedule(static) if (index.size() >= kParallelMin)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    out[i] = static_cast<std::uint16_t>(reps[index[i]]);
  }
}

ErrorSums error_sums(std::span<const std::uint16_t> orig, std::span<const std::uint16_t> rec) {
  const std::size_t blocks = (orig.size() + kBlock - 1) / kBlock;
  std::vector<ErrorSums> partial(blocks);
  const auto nb = static_cast<std::ptrdiff_t>(blocks);
#pragma omp parallel for schedule(static) if (orig.size() >= kParallelMin)
  for (std::ptrdiff_t b = 0; b < nb; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    const std::size_t end = std::min(orig.size(), begin + kBlock);
    ErrorSums& s = partial[static_cast<std::size_t>(b)];
    for (std::size_t i = begin; i < end; ++i) {
      accumulate(s, orig[i], rec[i]);
    }
  }
  ErrorSums total;
  for (const ErrorSums& s : partial) {
    total.signal_energy += s.signal_energy;
    total.error_energy += s.error_energy;
    total.max_abs_error = std::max(total.max_abs_error, s.max_abs_error);
    total.relative_error_sum += s.relative_error_sum;
    total.max_relative_error = std::max(total.max_relative_error, s.max_relative_error);
    total.zero_samples += s.zero_samples;
    total.samples += s.samples;
  }
  return total;
}

double tv_objective(std::span<const double> field, std::span<const double> data, const Dims& d,
                    double lambda) {
  const std::size_t rows = d.ny * d.nz;
  std::vector<double> partial(rows);
  const auto nr = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) if (field.size() >= kParallelMin)
  for (std::ptrdiff_t r = 0; r < nr; ++r) {
    const auto row = static_cast<std::size_t>(r);
    partial[row] = tv_row_objective(field, data, d, lambda, row % d.ny, row / d.ny);
  }
  double total = 0.0;
  for (double p : partial) {
    total += p;
  }
  return total;
}

void tv_subgradient(std::span<const double> field, std::span<const double> data, const Dims& d,
                    double lambda, std::span<double> grad) {
  const auto nz = static_cast<std::ptrdiff_t>(d.nz);
#pragma omp parallel for collapse(2) schedule(static) if (field.size() >= kParallelMin)
  for (std::ptrdiff_t z = 0; z < nz; ++z) {
    for (std::ptrdiff_t y = 0; y < static_cast<std::ptrdiff_t>(d.ny); ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        const auto zz = static_cast<std::size_t>(z);
        const auto yy = static_cast<std::size_t>(y);
        grad[(zz * d.ny + yy) * d.nx + x] = tv_gradient_at(field, data, d, lambda, x, yy, zz);
      }
    }
  }
}

void tv_step_project(std::span<const double> base, std::span<const double> grad, double step,
                     std::span<const BinSpec> bins, std::span<double> field) {
  const auto n = static_cast<std::ptrdiff_t>(base.size());
#pragma omp parallel for schedule(static) if (base.size() >= kParallelMin)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    field[i] = std::clamp(base[i] - step * grad[i], bins[i].lo, bins[i].hi);
  }
}

namespace reference {

void line_contexts(std::span<const std::uint16_t> bil, const Dims& d, std::size_t y,
                   const PredictorConfig& cfg, LineContext& out) {
  out.resize(d.nz, d.nx);
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t x = 0; x < d.nx; ++x) {
      sample_context(bil, d, x, y, z, cfg, out);
    }
  }
}

void quantize_uniform(std::span<const std::uint16_t> in, std::span<std::uint16_t> index,
                      std::uint32_t delta, std::uint32_t max_value) {
  for (std::size_t i = 0; i < in.size(); ++i) {
    index[i] = static_cast<std::uint16_t>(uniform_quantize(in[i], delta, max_value).index);
  }
}

void dequantize_uniform(std::span<const std::uint16_t> index, std::span<std::uint16_t> out,
                        std::uint32_t delta, std::uint32_t max_value) {
  const std::uint32_t step = 2 * delta + 1;
  for (std::size_t i = 0; i < index.size(); ++i) {
    out[i] = static_cast<std::uint16_t>(std::min(index[i] * step, max_value));
  }
}

void quantize_codebook(std::span<const std::uint16_t> in, std::span<std::uint16_t> index,
                       const Codebook& cb) {
  for (std::size_t i = 0; i < in.size(); ++i) {
    index[i] = static_cast<std::uint16_t>(codebook_quantize(in[i], cb).first);
  }
}

void dequantize_codebook(std::span<const std::uint16_t> index, std::span<std::uint16_t> out,
                         const Codebook& cb) {
  for (std::size_t i = 0; i < index.size(); ++i) {
    out[i] = static_cast<std::uint16_t>(cb.representative(index[i]));
  }
}

ErrorSums error_sums(std::span<const std::uint16_t> orig, std::span<const std::uint16_t> rec) {
  ErrorSums s;
  for (std::size_t i = 0; i < orig.size(); ++i) {
    accumulate(s, orig[i], rec[i]);
  }
  return s;
}

double tv_objective(std::span<const double> field, std::span<const double> data, const Dims& d,
                    double lambda) {
  double total = 0.0;
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      total += tv_row_objective(field, data, d, lambda, y, z);
    }
  }
  return total;
}

void tv_subgradient(std::span<const double> field, std::span<const double> data, const Dims& d,
                    double lambda, std::span<double> grad) {
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        grad[(z * d.ny + y) * d.nx + x] = tv_gradient_at(field, data, d, lambda, x, y, z);
      }
    }
  }
}

void tv_step_project(std::span<const double> base, std::span<const double> grad, double step,
                     std::span<const BinSpec> bins, std::span<double> field) {
  for (std::size_t i = 0; i < base.size(); ++i) {
    field[i] = std::clamp(base[i] - step * grad[i], bins[i].lo, bins[i].hi);
  }
}

}  // namespace reference

}  // namespace hsc::kernels
