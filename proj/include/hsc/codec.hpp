#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hsc/cube.hpp"
#include "hsc/predictor.hpp"
#include "hsc/quantizer.hpp"

namespace hsc {

// InLoop: residuals quantized inside the prediction loop (local decoder).
// Prequant: samples quantized up front, then coded losslessly.
enum class Pipeline : std::uint8_t { lossless, inloop, prequant };

std::string to_string(Pipeline p);
Pipeline parse_pipeline(const std::string& text);

struct CodecConfig {
  Pipeline pipeline = Pipeline::lossless;
  PredictorConfig predictor;  // bit_depth is derived from the data at encode time
  QuantizerSpec quantizer;
};

// Throws UsageError on inconsistent combinations (e.g. lossless with a bound).
void validate(const CodecConfig& cfg);

struct Bitstream {
  CodecConfig config;  // predictor.bit_depth is the coded depth, t_inc resolved
  CubeHeader cube;     // original dims, bit depth, storage order, sensor
  std::vector<std::uint8_t> payload;
  std::uint64_t payload_bits = 0;

  [[nodiscard]] double rate_bpp() const {
    return static_cast<double>(payload_bits) / static_cast<double>(cube.dims.count());
  }
};

struct EncodeStats {
  std::uint32_t max_abs_error = 0;
  std::size_t relative_violations = 0;  // samples with |s - s_rec| > R * s
  std::size_t samples = 0;

  [[nodiscard]] double violation_fraction() const {
    return samples == 0 ? 0.0 : static_cast<double>(relative_violations) /
                                    static_cast<double>(samples);
  }
};

struct EncodeOptions {
  // When set, receives the encoder's reconstructed samples in BIL order.
  std::vector<std::uint16_t>* reconstruction_trace = nullptr;
  EncodeStats* stats = nullptr;
};

Bitstream encode(const ImageCube& cube, const CodecConfig& cfg, const EncodeOptions& opts = {});
Bitstream encode_lossless(const ImageCube& cube, const CodecConfig& cfg,
                          const EncodeOptions& opts = {});
Bitstream encode_inloop(const ImageCube& cube, const CodecConfig& cfg,
                        const EncodeOptions& opts = {});
Bitstream encode_prequant(const ImageCube& cube, const CodecConfig& cfg,
                          const EncodeOptions& opts = {});

// Returns the cube in the original storage order. Throws DataError on
// corrupt headers and TruncatedStream on short payloads.
ImageCube decode(const Bitstream& bs);

// ---- .hsc container ----------------------------------------------------
std::vector<std::uint8_t> serialize(const Bitstream& bs);
Bitstream parse_bitstream(std::span<const std::uint8_t> bytes);
void write_hsc(const Bitstream& bs, const std::filesystem::path& path);
Bitstream read_hsc(const std::filesystem::path& path);

// ---- throughput --------------------------------------------------------
struct ThroughputReport {
  double encode_sps = 0.0;  // median samples per second
  double decode_sps = 0.0;
  double rate_bpp = 0.0;
  std::size_t samples = 0;
  int repetitions = 0;
};

ThroughputReport bench_throughput(const ImageCube& cube, const CodecConfig& cfg,
                                  int repetitions = 5);

}  // namespace hsc
