#include "hsc/codec.hpp"

#include <algorithm>
#include <chrono>

#include "hsc/entropy.hpp"
#include "hsc/error.hpp"
#include "hsc/kernels.hpp"

namespace hsc {

std::string to_string(Pipeline p) {
  switch (p) {
    case Pipeline::lossless:
      return "lossless";
    case Pipeline::inloop:
      return "inloop";
    case Pipeline::prequant:
      return "prequant";
  }
  return "?";
}

Pipeline parse_pipeline(const std::string& text) {
  if (text == "lossless") return Pipeline::lossless;
  if (text == "inloop") return Pipeline::inloop;
  if (text == "prequant") return Pipeline::prequant;
  throw UsageError("unknown pipeline '" + text + "' (expected inloop|prequant|lossless)");
}

void validate(const CodecConfig& cfg) {
  validate(cfg.predictor);
  validate(cfg.quantizer);
  if (cfg.pipeline == Pipeline::lossless && cfg.quantizer.mode != BoundMode::lossless) {
    throw UsageError("the lossless pipeline takes no error bound");
  }
  if (cfg.pipeline != Pipeline::lossless && cfg.quantizer.mode == BoundMode::lossless) {
    throw UsageError(to_string(cfg.pipeline) + " pipeline needs an abs or rel error bound");
  }
}

namespace {

// The first residual of a band is predicted without any spatial context and
// can be far larger than the rest, so it is coded but kept out of the band's
// statistics.
inline void update_context(GolombContext& ctx, std::uint64_t u, std::size_t x, std::size_t y) {
  if (x != 0 || y != 0) {
    ctx.update(u);
  }
}

// State shared by every sequential coding loop: per-band weights and entropy
// contexts, and the central differences of the current line for all bands.
struct CodingState {
  CodingState(const Dims& d, const PredictorConfig& cfg)
      : weights(d.nz, init_weights(cfg)), contexts(d.nz), central(d.nz * d.nx, 0) {}

  std::vector<PredictorState> weights;
  std::vector<GolombContext> contexts;
  std::vector<std::int32_t> central;
};

struct StepResult {
  std::int32_t reconstruction;
  int update_sign;
};

PredictorConfig resolved(PredictorConfig cfg, int bit_depth, const Dims& d) {
  cfg.bit_depth = bit_depth;
  if (cfg.t_inc == 0) {
    cfg.t_inc = static_cast<std::uint32_t>(4 * d.nx);
  }
  return cfg;
}

// Prediction from reconstructed samples in BIL order. `step` codes or decodes
// one sample given its prediction and returns the reconstruction.
template <typename Step>
void reconstruction_loop(const Dims& d, const PredictorConfig& cfg,
                         std::vector<std::uint16_t>& recon, Step&& step) {
  CodingState st(d, cfg);
  const auto sample = [&](std::size_t x, std::size_t y, std::size_t z) {
    return static_cast<std::int32_t>(recon[(y * d.nz + z) * d.nx + x]);
  };
  for (std::size_t y = 0; y < d.ny; ++y) {
    for (std::size_t z = 0; z < d.nz; ++z) {
      auto& w = st.weights[z].weights;
      auto& ctx = st.contexts[z];
      for (std::size_t x = 0; x < d.nx; ++x) {
        const Position p{x, y, z, d.nx};
        const Neighborhood nb = gather_neighborhood(sample, p, cfg.local_sum);
        const std::int32_t sigma = local_sum(nb, p, cfg);
        const DiffVector diffs = local_differences(
            nb, sigma, p, cfg, [&](std::size_t k) { return st.central[(z - 1 - k) * d.nx + x]; });
        const std::int32_t predicted = predict(w, diffs.view(), sigma, cfg);
        const StepResult r = step(x, y, z, predicted, ctx);
        recon[(y * d.nz + z) * d.nx + x] = static_cast<std::uint16_t>(r.reconstruction);
        st.central[z * d.nx + x] = central_difference(r.reconstruction, sigma);
        update_weights(w, r.update_sign, diffs.view(), rate_shift(y * d.nx + x, cfg.t_inc, cfg),
                       cfg);
      }
    }
  }
}

std::uint32_t residual_step(const QuantizerSpec& q, std::int32_t predicted) {
  switch (q.mode) {
    case BoundMode::absolute:
      return 2 * q.delta + 1;
    case BoundMode::relative:
      return relative_step(predicted, q.rel, q.margin);
    case BoundMode::lossless:
      break;
  }
  return 1;
}

// One band of one line on the lossless path, from precomputed contexts.
void code_band_line(const kernels::LineContext& line, const std::uint16_t* row, std::size_t y,
                    std::size_t z, const Dims& d, const PredictorConfig& cfg,
                    std::span<std::int32_t> w, GolombContext& ctx, std::uint64_t* mapped,
                    std::uint8_t* k_of) {
  const bool full = cfg.mode == PredictionMode::full;
  const std::size_t available = std::min(z, static_cast<std::size_t>(cfg.p_bands));
  const std::size_t size = (full ? 3 : 0) + available;
  for (std::size_t x = 0; x < d.nx; ++x) {
    const std::size_t i = z * d.nx + x;
    std::array<std::int32_t, kMaxComponents> diffs;
    std::size_t n = 0;
    if (full) {
      const auto& dir = line.directional[i];
      diffs[0] = dir[0];
      diffs[1] = dir[1];
      diffs[2] = dir[2];
      n = 3;
    }
    for (std::size_t k = 0; k < available; ++k) {
      diffs[n + k] = line.central[(z - 1 - k) * d.nx + x];
    }
    const std::span<const std::int32_t> view(diffs.data(), size);
    const std::int32_t predicted = predict(w, view, line.sigma[i], cfg);
    const std::int64_t e = static_cast<std::int64_t>(row[x]) - predicted;
    const std::uint64_t u = map_residual(e);
    mapped[i] = u;
    k_of[i] = static_cast<std::uint8_t>(adapt_k(ctx));
    update_context(ctx, u, x, y);
    update_weights(w, sign_of(e), view, rate_shift(y * d.nx + x, cfg.t_inc, cfg), cfg);
  }
}

// L bands z0 .. z0+L-1 of one line that all use their full P previous bands,
// interleaved sample by sample. The bands share no state, so the serial
// predict/update chains of different bands overlap in the core. N is the
// component count and `Full` selects full prediction.
template <std::size_t N, bool Full, std::size_t L>
void code_band_group(const kernels::LineContext& line, const std::uint16_t* line_samples,
                     std::size_t y, std::size_t z0, const Dims& d, const PredictorConfig& cfg,
                     PredictorState* weights, GolombContext* contexts, std::uint64_t* mapped,
                     std::uint8_t* k_of) {
  constexpr std::size_t kDirs = Full ? 3 : 0;
  constexpr std::size_t kPrev = N - kDirs;
  std::array<std::array<std::int32_t, N>, L> w;
  std::array<GolombContext, L> ctx;
  for (std::size_t l = 0; l < L; ++l) {
    std::copy_n(weights[z0 + l].weights.begin(), N, w[l].begin());
    ctx[l] = contexts[z0 + l];
  }
  const std::size_t nx = d.nx;
  for (std::size_t x = 0; x < nx; ++x) {
    const int shift = rate_shift(y * nx + x, cfg.t_inc, cfg);
#pragma GCC unroll 4
    for (std::size_t l = 0; l < L; ++l) {
      const std::size_t z = z0 + l;
      const std::size_t i = z * nx + x;
      std::array<std::int32_t, N> diffs;
      if constexpr (Full) {
        const auto& dir = line.directional[i];
        diffs[0] = dir[0];
        diffs[1] = dir[1];
        diffs[2] = dir[2];
      }
      for (std::size_t k = 0; k < kPrev; ++k) {
        diffs[kDirs + k] = line.central[(z - 1 - k) * nx + x];
      }
      const std::int32_t predicted = predict(w[l], diffs, line.sigma[i], cfg);
      const std::int64_t e = static_cast<std::int64_t>(line_samples[i]) - predicted;
      const std::uint64_t u = map_residual(e);
      mapped[i] = u;
      k_of[i] = static_cast<std::uint8_t>(adapt_k(ctx[l]));
      update_context(ctx[l], u, x, y);
      update_weights(w[l], sign_of(e), diffs, shift, cfg);
    }
  }
  for (std::size_t l = 0; l < L; ++l) {
    std::copy_n(w[l].begin(), N, weights[z0 + l].weights.begin());
    contexts[z0 + l] = ctx[l];
  }
}

// Lossless coding of a BIL sample array. Local sums and differences depend on
// original samples only, so each line's contexts come from the data-parallel
// kernel. Weights and entropy contexts are per band, which makes the bands of
// a line independent: groups of bands are predicted concurrently and the
// codewords are then written in BIL order by a single pass.
void encode_lossless_bil(std::span<const std::uint16_t> bil, const Dims& d,
                         const PredictorConfig& cfg, BitWriter& writer) {
  constexpr std::size_t kGroup = 4;
  std::vector<PredictorState> weights(d.nz, init_weights(cfg));
  std::vector<GolombContext> contexts(d.nz);
  kernels::LineContext line;
  const std::size_t per_line = d.nz * d.nx;
  std::vector<std::uint64_t> mapped(per_line);
  std::vector<std::uint8_t> k_of(per_line);
  const auto p_bands = std::min(static_cast<std::size_t>(cfg.p_bands), d.nz);
  const auto components = static_cast<std::size_t>(cfg.components());
  const bool full = cfg.mode == PredictionMode::full;
  const bool specialised = components == 6 || components == 3;

  // Work items: bands still short of P previous bands one at a time, then
  // the rest in groups of kGroup (the tail group may be smaller).
  std::vector<std::pair<std::size_t, std::size_t>> items;
  for (std::size_t z = 0; z < p_bands; ++z) {
    items.emplace_back(z, 1);
  }
  for (std::size_t z = p_bands; z < d.nz; z += kGroup) {
    items.emplace_back(z, std::min(kGroup, d.nz - z));
  }
  const auto n_items = static_cast<std::ptrdiff_t>(items.size());

  for (std::size_t y = 0; y < d.ny; ++y) {
    kernels::line_contexts(bil, d, y, cfg, line);
    const std::uint16_t* line_samples = bil.data() + y * per_line;
#pragma omp parallel for schedule(static) if (per_line >= 16384)
    for (std::ptrdiff_t it = 0; it < n_items; ++it) {
      const auto [z0, count] = items[static_cast<std::size_t>(it)];
      if (z0 < p_bands || !specialised) {
        for (std::size_t z = z0; z < z0 + count; ++z) {
          code_band_line(line, line_samples + z * d.nx, y, z, d, cfg, weights[z].weights,
                         contexts[z], mapped.data(), k_of.data());
        }
        continue;
      }
      const auto run = [&]<std::size_t N, bool Full>() {
        if (count == kGroup) {
          code_band_group<N, Full, kGroup>(line, line_samples, y, z0, d, cfg, weights.data(),
                                           contexts.data(), mapped.data(), k_of.data());
        } else {
          for (std::size_t z = z0; z < z0 + count; ++z) {
            code_band_group<N, Full, 1>(line, line_samples, y, z, d, cfg, weights.data(),
                                        contexts.data(), mapped.data(), k_of.data());
          }
        }
      };
      if (components == 6) {
        full ? run.template operator()<6, true>() : run.template operator()<6, false>();
      } else {
        full ? run.template operator()<3, true>() : run.template operator()<3, false>();
      }
    }
    for (std::size_t i = 0; i < per_line; ++i) {
      gpo2_encode(mapped[i], k_of[i], writer);
    }
  }
}

// Lossless and in-loop decoding share one loop; `step_of` gives the residual
// quantization step (1 when lossless).
std::vector<std::uint16_t> decode_reconstruction(BitReader& reader, const Dims& d,
                                                 const PredictorConfig& cfg,
                                                 const QuantizerSpec& q, bool strict_range) {
  std::vector<std::uint16_t> recon(d.count(), 0);
  const std::int32_t s_max = cfg.s_max();
  reconstruction_loop(d, cfg, recon,
                      [&](std::size_t x, std::size_t y, std::size_t, std::int32_t predicted,
                          GolombContext& ctx) {
                        const std::uint64_t u = gpo2_decode(reader, adapt_k(ctx));
                        update_context(ctx, u, x, y);
                        const std::int64_t index = unmap_residual(u);
                        const std::int64_t value =
                            predicted + index * static_cast<std::int64_t>(residual_step(q, predicted));
                        if (strict_range && (value < 0 || value > s_max)) {
                          throw DataError("decoded sample out of range; corrupt payload");
                        }
                        return StepResult{
                            static_cast<std::int32_t>(std::clamp<std::int64_t>(value, 0, s_max)),
                            sign_of(index)};
                      });
  return recon;
}

void fill_stats(const ImageCube& cube_bil, std::span<const std::uint16_t> recon,
                const QuantizerSpec& q, EncodeStats& stats) {
  const auto s = cube_bil.samples();
  stats = EncodeStats{};
  stats.samples = s.size();
  for (std::size_t i = 0; i < s.size(); ++i) {
    const std::uint32_t diff = s[i] > recon[i] ? s[i] - recon[i] : recon[i] - s[i];
    stats.max_abs_error = std::max(stats.max_abs_error, diff);
    if (q.mode == BoundMode::relative && static_cast<double>(diff) > q.rel * s[i]) {
      ++stats.relative_violations;
    }
  }
}

Bitstream make_bitstream(const ImageCube& cube, const CodecConfig& cfg,
                         const PredictorConfig& coded, BitWriter& writer) {
  Bitstream bs;
  bs.config = cfg;
  bs.config.predictor = coded;
  bs.cube = cube.header();
  bs.payload_bits = writer.bits_written();
  bs.payload = writer.take_bytes();
  return bs;
}

void finish_options(const ImageCube& bil, std::vector<std::uint16_t>&& recon,
                    const QuantizerSpec& q, const EncodeOptions& opts) {
  if (opts.stats != nullptr) {
    fill_stats(bil, recon, q, *opts.stats);
  }
  if (opts.reconstruction_trace != nullptr) {
    *opts.reconstruction_trace = std::move(recon);
  }
}

void require_samples(const ImageCube& cube) {
  if (cube.size() == 0) {
    throw UsageError("cannot encode an empty cube");
  }
}

}  // namespace

Bitstream encode_lossless(const ImageCube& cube, const CodecConfig& cfg, const EncodeOptions& opts) {
  require_samples(cube);
  CodecConfig c = cfg;
  c.pipeline = Pipeline::lossless;
  c.quantizer = QuantizerSpec::lossless();
  validate(c);
  const ImageCube bil = reorder(cube, Order::bil);
  const PredictorConfig pc = resolved(c.predictor, cube.bit_depth(), cube.dims());
  BitWriter writer;
  encode_lossless_bil(bil.samples(), bil.dims(), pc, writer);
  if (opts.stats != nullptr || opts.reconstruction_trace != nullptr) {
    finish_options(bil, std::vector<std::uint16_t>(bil.samples().begin(), bil.samples().end()),
                   c.quantizer, opts);
  }
  return make_bitstream(cube, c, pc, writer);
}

Bitstream encode_inloop(const ImageCube& cube, const CodecConfig& cfg, const EncodeOptions& opts) {
  require_samples(cube);
  CodecConfig c = cfg;
  c.pipeline = Pipeline::inloop;
  c.quantizer.codebook.reset();
  validate(c);
  const ImageCube bil = reorder(cube, Order::bil);
  const Dims d = bil.dims();
  const PredictorConfig pc = resolved(c.predictor, cube.bit_depth(), d);
  const auto orig = bil.samples();
  const QuantizerSpec& q = c.quantizer;
  const std::int32_t s_max = pc.s_max();
  BitWriter writer;
  std::vector<std::uint16_t> recon(d.count(), 0);
  reconstruction_loop(d, pc, recon,
                      [&](std::size_t x, std::size_t y, std::size_t z, std::int32_t predicted,
                          GolombContext& ctx) {
                        const std::int64_t e =
                            static_cast<std::int64_t>(orig[(y * d.nz + z) * d.nx + x]) - predicted;
                        const Quantized r = inloop_quantize_residual(e, residual_step(q, predicted));
                        const std::uint64_t u = map_residual(r.index);
                        gpo2_encode(u, adapt_k(ctx), writer);
                        update_context(ctx, u, x, y);
                        return StepResult{static_cast<std::int32_t>(std::clamp<std::int64_t>(
                                              predicted + r.reconstruction, 0, s_max)),
                                          sign_of(r.index)};
                      });
  finish_options(bil, std::move(recon), q, opts);
  return make_bitstream(cube, c, pc, writer);
}

Bitstream encode_prequant(const ImageCube& cube, const CodecConfig& cfg, const EncodeOptions& opts) {
  require_samples(cube);
  CodecConfig c = cfg;
  c.pipeline = Pipeline::prequant;
  validate(c);
  const ImageCube bil = reorder(cube, Order::bil);
  const Dims d = bil.dims();
  const std::uint32_t max_value = cube.max_value();
  QuantizerSpec& q = c.quantizer;
  if (q.mode == BoundMode::relative && (!q.codebook || q.codebook->max_value() != max_value)) {
    q.codebook = std::make_shared<const Codebook>(build_relative_codebook(q.rel, max_value));
  }
  std::vector<std::uint16_t> index(d.count());
  std::uint32_t max_index = 0;
  if (q.mode == BoundMode::absolute) {
    kernels::quantize_uniform(bil.samples(), index, q.delta, max_value);
    max_index = uniform_index_max(q.delta, max_value);
  } else {
    kernels::quantize_codebook(bil.samples(), index, *q.codebook);
    max_index = static_cast<std::uint32_t>(q.codebook->size() - 1);
  }
  const PredictorConfig pc = resolved(c.predictor, index_bit_depth(max_index), d);
  BitWriter writer;
  encode_lossless_bil(index, d, pc, writer);
  if (opts.stats != nullptr || opts.reconstruction_trace != nullptr) {
    std::vector<std::uint16_t> recon(d.count());
    if (q.mode == BoundMode::absolute) {
      kernels::dequantize_uniform(index, recon, q.delta, max_value);
    } else {
      kernels::dequantize_codebook(index, recon, *q.codebook);
    }
    finish_options(bil, std::move(recon), q, opts);
  }
  return make_bitstream(cube, c, pc, writer);
}

Bitstream encode(const ImageCube& cube, const CodecConfig& cfg, const EncodeOptions& opts) {
  switch (cfg.pipeline) {
    case Pipeline::lossless:
      return encode_lossless(cube, cfg, opts);
    case Pipeline::inloop:
      return encode_inloop(cube, cfg, opts);
    case Pipeline::prequant:
      return encode_prequant(cube, cfg, opts);
  }
  throw UsageError("unknown pipeline");
}

ImageCube decode(const Bitstream& bs) {
  const Dims d = bs.cube.dims;
  const CodecConfig& c = bs.config;
  if (d.count() == 0) {
    throw DataError("bitstream declares an empty cube");
  }
  try {
    validate(c);
  } catch (const UsageError& e) {
    throw DataError(std::string("corrupt header: ") + e.what());
  }
  if (c.predictor.t_inc == 0) {
    throw DataError("corrupt header: zero rate increment");
  }
  // Every sample costs at least one bit.
  if (bs.payload_bits < d.count()) {
    throw TruncatedStream("payload of " + std::to_string(bs.payload_bits) + " bits cannot hold " +
                          std::to_string(d.count()) + " samples");
  }
  BitReader reader(bs.payload, bs.payload_bits);
  std::vector<std::uint16_t> samples;
  int coded_depth = c.predictor.bit_depth;
  if (c.pipeline == Pipeline::prequant) {
    const std::vector<std::uint16_t> index =
        decode_reconstruction(reader, d, c.predictor, QuantizerSpec::lossless(), true);
    samples.resize(d.count());
    const std::uint32_t max_value = (1u << bs.cube.bit_depth) - 1u;
    if (c.quantizer.mode == BoundMode::absolute) {
      if (index_bit_depth(uniform_index_max(c.quantizer.delta, max_value)) != coded_depth) {
        throw DataError("corrupt header: coded depth does not match quantizer");
      }
      kernels::dequantize_uniform(index, samples, c.quantizer.delta, max_value);
    } else {
      if (!c.quantizer.codebook) {
        throw DataError("corrupt header: relative prequantization without codebook");
      }
      const auto limit = c.quantizer.codebook->size();
      if (std::any_of(index.begin(), index.end(), [limit](std::uint16_t i) { return i >= limit; })) {
        throw DataError("decoded codebook index out of range; corrupt payload");
      }
      kernels::dequantize_codebook(index, samples, *c.quantizer.codebook);
    }
  } else {
    if (coded_depth != bs.cube.bit_depth) {
      throw DataError("corrupt header: coded depth differs from cube depth");
    }
    samples = decode_reconstruction(reader, d, c.predictor, c.quantizer,
                                    c.pipeline == Pipeline::lossless);
  }
  if (reader.remaining() != 0) {
    throw DataError("payload has " + std::to_string(reader.remaining()) + " unused bits");
  }
  ImageCube out(d, bs.cube.bit_depth, Order::bil, std::move(samples));
  out.set_sensor(bs.cube.sensor);
  return reorder(out, bs.cube.order);
}

ThroughputReport bench_throughput(const ImageCube& cube, const CodecConfig& cfg, int repetitions) {
  if (repetitions < 3) {
    throw UsageError("throughput benchmark needs at least 3 repetitions");
  }
  using clock = std::chrono::steady_clock;
  std::vector<double> enc;
  std::vector<double> dec;
  ThroughputReport report;
  report.samples = cube.size();
  report.repetitions = repetitions;
  for (int r = 0; r < repetitions; ++r) {
    const auto t0 = clock::now();
    const Bitstream bs = encode(cube, cfg);
    const auto t1 = clock::now();
    const ImageCube out = decode(bs);
    const auto t2 = clock::now();
    enc.push_back(std::chrono::duration<double>(t1 - t0).count());
    dec.push_back(std::chrono::duration<double>(t2 - t1).count());
    report.rate_bpp = bs.rate_bpp();
  }
  const auto median = [](std::vector<double>& v) {
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2), v.end());
    return v[v.size() / 2];
  };
  const double n = static_cast<double>(cube.size());
  report.encode_sps = n / std::max(median(enc), 1e-12);
  report.decode_sps = n / std::max(median(dec), 1e-12);
  return report;
}

}  // namespace hsc
