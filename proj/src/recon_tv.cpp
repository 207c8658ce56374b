#include "hsc/recon_tv.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hsc/error.hpp"
#include "hsc/kernels.hpp"

namespace hsc {

namespace {

std::vector<double> as_field(const ImageCube& cube) {
  const ImageCube bsq = reorder(cube, Order::bsq);
  return {bsq.samples().begin(), bsq.samples().end()};
}

void check_bins(const ImageCube& decoded, std::span<const BinSpec> bins) {
  if (bins.size() != decoded.size()) {
    throw UsageError("bin field size does not match the decoded cube");
  }
}

}  // namespace

void validate(const TVConfig& cfg) {
  if (!(cfg.lambda >= 0.0) || cfg.iterations < 1 || !(cfg.step > 0.0)) {
    throw UsageError("TV config needs lambda >= 0, iterations >= 1, step > 0");
  }
}

std::vector<BinSpec> bins_for(const ImageCube& decoded, const QuantizerSpec& spec) {
  const ImageCube bsq = reorder(decoded, Order::bsq);
  std::vector<BinSpec> bins(bsq.size());
  const auto s = bsq.samples();
  for (std::size_t i = 0; i < s.size(); ++i) {
    bins[i] = bin_of(s[i], spec, decoded.max_value());
  }
  return bins;
}

double tv_objective(std::span<const double> field, const ImageCube& decoded, double lambda) {
  const auto data = as_field(decoded);
  return kernels::tv_objective(field, data, decoded.dims(), lambda);
}

TVSolution tv_solve(const ImageCube& decoded, std::span<const BinSpec> bins, const TVConfig& cfg) {
  validate(cfg);
  check_bins(decoded, bins);
  const Dims d = decoded.dims();
  const std::vector<double> data = as_field(decoded);
  TVSolution sol;
  sol.field.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    sol.field[i] = std::clamp(data[i], bins[i].lo, bins[i].hi);
  }
  double current = kernels::tv_objective(sol.field, data, d, cfg.lambda);
  sol.objective.push_back(current);

  std::vector<double> grad(data.size());
  std::vector<double> candidate(data.size());
  double step = cfg.step;
  constexpr int kMaxBacktracks = 40;
  for (int it = 0; it < cfg.iterations; ++it) {
    kernels::tv_subgradient(sol.field, data, d, cfg.lambda, grad);
    if (std::all_of(grad.begin(), grad.end(), [](double g) { return g == 0.0; })) {
      break;
    }
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt) {
      kernels::tv_step_project(sol.field, grad, step, bins, candidate);
      const double value = kernels::tv_objective(candidate, data, d, cfg.lambda);
      if (value < current) {
        sol.field.swap(candidate);
        current = value;
        accepted = true;
        step *= 1.5;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      break;
    }
    sol.objective.push_back(current);
  }
  return sol;
}

ImageCube tv_reconstruct(const ImageCube& decoded, std::span<const BinSpec> bins,
                         const TVConfig& cfg) {
  const TVSolution sol = tv_solve(decoded, bins, cfg);
  ImageCube out(decoded.dims(), decoded.bit_depth(), Order::bsq);
  out.set_sensor(decoded.sensor());
  auto s = out.samples();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double lo = std::ceil(bins[i].lo);
    const double hi = std::floor(bins[i].hi);
    s[i] = static_cast<std::uint16_t>(std::clamp(std::round(sol.field[i]), lo, hi));
  }
  return reorder(out, decoded.order());
}

std::vector<double> clip_correction(std::span<const double> correction, const ImageCube& decoded,
                                    std::span<const BinSpec> bins) {
  check_bins(decoded, bins);
  if (correction.size() != decoded.size()) {
    throw UsageError("correction field size does not match the decoded cube");
  }
  const auto data = as_field(decoded);
  std::vector<double> out(correction.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = clip_correction(correction[i], data[i], bins[i]);
  }
  return out;
}

void write_clip_vectors(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  constexpr std::uint32_t kMax = 65535;
  const double corrections[] = {-150.0, -15.5, -5.0, -2.0, -1.25, 0.0, 0.5, 1.0, 2.0, 3.0, 15.0, 150.0};
  char line[256];
  out << "E,decoded,delta_or_r,mode,expected\n";
  for (std::uint32_t delta : {1u, 2u, 10u, 50u}) {
    for (std::uint32_t dec : {0u, 1u, 5u, 1000u, 65534u, 65535u}) {
      const BinSpec bin = bin_of(dec, QuantizerSpec::absolute(delta), kMax);
      for (double e : corrections) {
        std::snprintf(line, sizeof line, "%.17g,%u,%u,abs,%.17g\n", e, dec, delta,
                      clip_correction(e, dec, bin));
        out << line;
      }
    }
  }
  for (double rel : {0.01, 0.005, 0.001, 0.0005}) {
    for (std::uint32_t dec : {0u, 1u, 100u, 1000u, 12345u, 65535u}) {
      const BinSpec bin = bin_of(dec, QuantizerSpec::relative(rel), kMax);
      for (double e : corrections) {
        std::snprintf(line, sizeof line, "%.17g,%u,%.17g,rel,%.17g\n", e, dec, rel,
                      clip_correction(e, dec, bin));
        out << line;
      }
    }
  }
}

}  // namespace hsc
