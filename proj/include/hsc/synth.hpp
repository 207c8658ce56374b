#pragma once

#include <cstdint>

#include "hsc/cube.hpp"

namespace hsc {

// Separable scene model: a smoothed spatial random field shared by all bands,
// a smooth per-band gain/offset profile, and AR(1) spectral noise.
struct SynthesisParams {
  Dims dims{64, 64, 16};
  int bit_depth = 16;
  double correlation_length = 4.0;  // pixels; box-blur radius of the spatial field
  double spectral_corr = 0.95;      // AR(1) coefficient of the band noise, in [0, 1)
  double mean_level = 8000.0;       // digital numbers
  double dynamic_range = 6000.0;    // approx. peak-to-peak span, digital numbers
  double noise_fraction = 0.15;     // band-noise std relative to the field std
  std::uint64_t seed = 1;
};

ImageCube synthesize_cube(const SynthesisParams& params);

// Tiles of `block`x`block` pixels with a random level per tile (shared
// partition across bands, per-band level jitter), plus optional Gaussian
// texture of std `noise_std`.
struct PiecewiseParams {
  Dims dims{16, 16, 2};
  int bit_depth = 16;
  std::size_t block = 4;
  double low = 1000.0;
  double high = 3000.0;
  double noise_std = 0.0;
  std::uint64_t seed = 7;
};

ImageCube piecewise_constant_cube(const PiecewiseParams& params);

// Pearson correlation between bands z and z+1 over all pixels.
double adjacent_band_correlation(const ImageCube& cube, std::size_t z);

}  // namespace hsc
