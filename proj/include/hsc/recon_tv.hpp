#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "hsc/cube.hpp"
#include "hsc/quantizer.hpp"

namespace hsc {

// Weighted anisotropic TV denoising of a decoded cube:
//   min_I ||I - I_dec||^2 + lambda * sum(|dx I| + |dy I| + |dz I|)
// subject to every sample staying inside its quantization bin.
struct TVConfig {
  double lambda = 0.5;
  int iterations = 300;
  double step = 0.25;  // initial step; adapted by backtracking
};

void validate(const TVConfig& cfg);

// Bins of every decoded sample, BSQ-indexed ([z][y][x]) whatever the cube's
// storage order.
std::vector<BinSpec> bins_for(const ImageCube& decoded, const QuantizerSpec& spec);

struct TVSolution {
  std::vector<double> field;      // real-valued minimiser, BSQ-indexed
  std::vector<double> objective;  // objective after each accepted iteration (first = start)
};

// Projected subgradient descent with backtracking: a step is accepted only if
// it does not increase the objective, so `objective` is non-increasing.
TVSolution tv_solve(const ImageCube& decoded, std::span<const BinSpec> bins, const TVConfig& cfg);

// tv_solve, then round to integers and re-project into the bins. Output is
// in the decoded cube's storage order.
ImageCube tv_reconstruct(const ImageCube& decoded, std::span<const BinSpec> bins,
                         const TVConfig& cfg);

// Objective value of a BSQ-indexed field against the decoded cube.
double tv_objective(std::span<const double> field, const ImageCube& decoded, double lambda);

// E_clip = clamp(E, lo - decoded, hi - decoded).
inline double clip_correction(double correction, double decoded, const BinSpec& bin) noexcept {
  const double lo = bin.lo - decoded;
  const double hi = bin.hi - decoded;
  return correction < lo ? lo : (correction > hi ? hi : correction);
}

// Elementwise over BSQ-indexed corrections.
std::vector<double> clip_correction(std::span<const double> correction, const ImageCube& decoded,
                                    std::span<const BinSpec> bins);

// Shared clip test vectors: CSV "E,decoded,delta_or_r,mode,expected", one
// header row, absolute and relative (+-R * decoded) cases.
void write_clip_vectors(const std::filesystem::path& path);

}  // namespace hsc
