#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP implementation in
// hsc::kernels and a plain serial implementation in hsc::kernels::reference
// with the same signature; tests hold the two to identical results and
// hsc_bench times them against each other.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "hsc/cube.hpp"
#include "hsc/predictor.hpp"
#include "hsc/quantizer.hpp"

namespace hsc::kernels {

// Local sums and differences for every sample of one BIL line, computed from
// original samples only (no reconstruction feedback). Indexed [z * nx + x].
struct LineContext {
  std::vector<std::int32_t> sigma;
  std::vector<std::int32_t> central;
  std::vector<std::array<std::int32_t, 3>> directional;

  void resize(std::size_t nz, std::size_t nx) {
    sigma.resize(nz * nx);
    central.resize(nz * nx);
    directional.resize(nz * nx);
  }
};

// Integer sums are exact; the relative-error sum is reduced over fixed-size
// blocks in a fixed order so results do not depend on the thread count.
struct ErrorSums {
  std::uint64_t signal_energy = 0;  // sum s^2
  std::uint64_t error_energy = 0;   // sum (s - r)^2
  std::uint32_t max_abs_error = 0;
  double relative_error_sum = 0.0;  // sum |s - r| / s over s > 0
  double max_relative_error = 0.0;
  std::size_t zero_samples = 0;
  std::size_t samples = 0;
};

void line_contexts(std::span<const std::uint16_t> bil, const Dims& dims, std::size_t y,
                   const PredictorConfig& cfg, LineContext& out);
void quantize_uniform(std::span<const std::uint16_t> in, std::span<std::uint16_t> index,
                      std::uint32_t delta, std::uint32_t max_value);
void dequantize_uniform(std::span<const std::uint16_t> index, std::span<std::uint16_t> out,
                        std::uint32_t delta, std::uint32_t max_value);
void quantize_codebook(std::span<const std::uint16_t> in, std::span<std::uint16_t> index,
                       const Codebook& cb);
void dequantize_codebook(std::span<const std::uint16_t> index, std::span<std::uint16_t> out,
                         const Codebook& cb);
ErrorSums error_sums(std::span<const std::uint16_t> orig, std::span<const std::uint16_t> rec);

// Anisotropic TV pieces over a BSQ-ordered real field.
double tv_objective(std::span<const double> field, std::span<const double> data, const Dims& dims,
                    double lambda);
void tv_subgradient(std::span<const double> field, std::span<const double> data,
                    const Dims& dims, double lambda, std::span<double> grad);
// field <- clamp(base - step * grad, bin)
void tv_step_project(std::span<const double> base, std::span<const double> grad, double step,
                     std::span<const BinSpec> bins, std::span<double> field);

namespace reference {

void line_contexts(std::span<const std::uint16_t> bil, const Dims& dims, std::size_t y,
                   const PredictorConfig& cfg, LineContext& out);
void quantize_uniform(std::span<const std::uint16_t> in, std::span<std::uint16_t> index,
                      std::uint32_t delta, std::uint32_t max_value);
void dequantize_uniform(std::span<const std::uint16_t> index, std::span<std::uint16_t> out,
                        std::uint32_t delta, std::uint32_t max_value);
void quantize_codebook(std::span<const std::uint16_t> in, std::span<std::uint16_t> index,
                       const Codebook& cb);
void dequantize_codebook(std::span<const std::uint16_t> index, std::span<std::uint16_t> out,
                         const Codebook& cb);
ErrorSums error_sums(std::span<const std::uint16_t> orig, std::span<const std::uint16_t> rec);
double tv_objective(std::span<const double> field, std::span<const double> data, const Dims& dims,
                    double lambda);
void tv_subgradient(std::span<const double> field, std::span<const double> data,
                    const Dims& dims, double lambda, std::span<double> grad);
void tv_step_project(std::span<const double> base, std::span<const double> grad, double step,
                     std::span<const BinSpec> bins, std::span<double> field);

}  // namespace reference

// Threads OpenMP may use (respects omp_set_num_threads / OMP_NUM_THREADS).
int max_threads();

}  // namespace hsc::kernels
