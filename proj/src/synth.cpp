#include "hsc/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

namespace hsc {

namespace {

// Box-Muller over mt19937_64 so that cubes are identical across standard
// library implementations (std::normal_distribution is not specified exactly).
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : rng_(seed) {}

  double operator()() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  double uniform() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// One pass of a clamped-edge box blur along x and then y.
void box_blur(std::vector<double>& f, std::size_t nx, std::size_t ny, std::size_t radius) {
  if (radius == 0) {
    return;
  }
  std::vector<double> tmp(f.size());
  const auto r = static_cast<std::ptrdiff_t>(radius);
  const double norm = 1.0 / static_cast<double>(2 * radius + 1);
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t x = 0; x < nx; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -r; k <= r; ++k) {
        const auto xx = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(x) + k, 0,
                                                   static_cast<std::ptrdiff_t>(nx) - 1);
        acc += f[y * nx + static_cast<std::size_t>(xx)];
      }
      tmp[y * nx + x] = acc * norm;
    }
  }
  for (std::size_t y = 0; y < ny; ++y) {
    for (std::size_t x = 0; x < nx; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -r; k <= r; ++k) {
        const auto yy = std::clamp<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(y) + k, 0,
                                                   static_cast<std::ptrdiff_t>(ny) - 1);
        acc += tmp[static_cast<std::size_t>(yy) * nx + x];
      }
      f[y * nx + x] = acc * norm;
    }
  }
}

void standardize(std::vector<double>& f) {
  double mean = 0.0;
  for (double v : f) {
    mean += v;
  }
  mean /= static_cast<double>(f.size());
  double var = 0.0;
  for (double v : f) {
    var += (v - mean) * (v - mean);
  }
  var /= static_cast<double>(f.size());
  const double inv = var > 0.0 ? 1.0 / std::sqrt(var) : 0.0;
  for (double& v : f) {
    v = (v - mean) * inv;
  }
}

std::uint16_t to_sample(double v, std::uint32_t max_value) {
  return static_cast<std::uint16_t>(std::clamp(std::lround(v), 0L, static_cast<long>(max_value)));
}

}  // namespace

ImageCube synthesize_cube(const SynthesisParams& p) {
  const Dims d = p.dims;
  if (d.nx == 0 || d.ny == 0 || d.nz == 0) {
    throw std::invalid_argument("synthesis dims must be positive");
  }
  if (p.spectral_corr < 0.0 || p.spectral_corr >= 1.0) {
    throw std::invalid_argument("spectral correlation must be in [0, 1)");
  }
  ImageCube cube(d, p.bit_depth, Order::bsq);
  Gaussian gauss(p.seed);
  const std::size_t plane = d.nx * d.ny;

  std::vector<double> field(plane);
  for (double& v : field) {
    v = gauss();
  }
  const auto radius = static_cast<std::size_t>(std::max(0.0, std::round(p.correlation_length)));
  for (int pass = 0; pass < 3; ++pass) {
    box_blur(field, d.nx, d.ny, radius);
  }
  standardize(field);

  // A second, finer field gives bands a spatially varying spectral shape.
  std::vector<double> detail(plane);
  for (double& v : detail) {
    v = gauss();
  }
  box_blur(detail, d.nx, d.ny, std::max<std::size_t>(1, radius / 2));
  standardize(detail);

  const double scale = p.dynamic_range / 6.0;
  const double innovation = std::sqrt(1.0 - p.spectral_corr * p.spectral_corr);
  const double phase = gauss.uniform() * 2.0 * std::numbers::pi;
  std::vector<double> noise(plane, 0.0);
  for (double& v : noise) {
    v = gauss();
  }
  for (std::size_t z = 0; z < d.nz; ++z) {
    const double t = static_cast<double>(z) / static_cast<double>(std::max<std::size_t>(1, d.nz));
    const double gain = 0.9 + 0.25 * std::sin(2.0 * std::numbers::pi * t + phase);
    const double offset = 0.3 * std::cos(3.0 * std::numbers::pi * t + phase);
    const double tilt = 0.3 * std::sin(std::numbers::pi * t);
    if (z > 0) {
      for (double& v : noise) {
        v = p.spectral_corr * v + innovation * gauss();
      }
    }
    for (std::size_t i = 0; i < plane; ++i) {
      const double v = p.mean_level +
                       scale * (gain * field[i] + tilt * detail[i] + offset +
                                p.noise_fraction * noise[i]);
      cube.samples()[z * plane + i] = to_sample(v, cube.max_value());
    }
  }
  return cube;
}

ImageCube piecewise_constant_cube(const PiecewiseParams& p) {
  const Dims d = p.dims;
  if (d.count() == 0 || p.block == 0) {
    throw std::invalid_argument("piecewise cube needs positive dims and block size");
  }
  ImageCube cube(d, p.bit_depth, Order::bsq);
  Gaussian gauss(p.seed);
  const std::size_t bx = (d.nx + p.block - 1) / p.block;
  const std::size_t by = (d.ny + p.block - 1) / p.block;
  std::vector<double> levels(bx * by);
  for (double& v : levels) {
    v = p.low + gauss.uniform() * (p.high - p.low);
  }
  for (std::size_t z = 0; z < d.nz; ++z) {
    const double jitter = 0.05 * (p.high - p.low) * gauss();
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        const double base = levels[(y / p.block) * bx + x / p.block] + jitter;
        const double tex = p.noise_std > 0.0 ? p.noise_std * gauss() : 0.0;
        cube.set(x, y, z, to_sample(base + tex, cube.max_value()));
      }
    }
  }
  return cube;
}

double adjacent_band_correlation(const ImageCube& cube, std::size_t z) {
  const Dims d = cube.dims();
  if (z + 1 >= d.nz) {
    throw std::out_of_range("adjacent_band_correlation: band out of range");
  }
  const auto n = static_cast<double>(d.nx * d.ny);
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t y = 0; y < d.ny; ++y) {
    for (std::size_t x = 0; x < d.nx; ++x) {
      ma += cube.at(x, y, z);
      mb += cube.at(x, y, z + 1);
    }
  }
  ma /= n;
  mb /= n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t y = 0; y < d.ny; ++y) {
    for (std::size_t x = 0; x < d.nx; ++x) {
      const double a = cube.at(x, y, z) - ma;
      const double b = cube.at(x, y, z + 1) - mb;
      sab += a * b;
      saa += a * a;
      sbb += b * b;
    }
  }
  if (saa == 0.0 || sbb == 0.0) {
    return 0.0;
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace hsc
