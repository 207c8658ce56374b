#include <bit>
#include <fstream>
#include <iterator>

#include "hsc/codec.hpp"
#include "hsc/entropy.hpp"
#include "hsc/error.hpp"

// .hsc layout, all integers little-endian:
//   "HSC1" u16 version
//   u8 pipeline, u8 bound mode, u8 prediction mode, u8 local sum,
//   u8 P, u8 weight resolution, u8 v_min, u8 v_max, u32 t_inc,
//   u8 cube bit depth, u8 coded bit depth, u8 storage order,
//   u32 nx, u32 ny, u32 nz,
//   u8 escape threshold, u8 rescale log2,
//   u32 delta, f64 R, f64 margin,
//   u32 codebook entries, entries x (u16 lower edge, u16 representative),
//   u16 sensor length, sensor bytes,
//   u64 payload bits, payload bytes (ceil(bits / 8))

namespace hsc {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'H', 'S', 'C', '1'};
constexpr std::uint16_t kVersion = 1;

class ByteWriter {
 public:
  void u8(std::uint64_t v) { out_.push_back(static_cast<std::uint8_t>(v)); }
  void u16(std::uint64_t v) { le(v, 2); }
  void u32(std::uint64_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) {
      out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
  }
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint64_t u8() { return le(1); }
  std::uint64_t u16() { return le(2); }
  std::uint64_t u32() { return le(4); }
  std::uint64_t u64() { return le(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::span<const std::uint8_t> bytes(std::size_t n) {
    need(n);
    auto s = in_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  [[nodiscard]] std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) {
      throw TruncatedStream("container truncated at byte " + std::to_string(pos_));
    }
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(in_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    }
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

template <typename Enum>
Enum checked_enum(std::uint64_t v, std::uint64_t count, const char* what) {
  if (v >= count) {
    throw DataError(std::string("corrupt header: bad ") + what);
  }
  return static_cast<Enum>(v);
}

}  // namespace

std::vector<std::uint8_t> serialize(const Bitstream& bs) {
  const CodecConfig& c = bs.config;
  ByteWriter w;
  w.bytes(kMagic);
  w.u16(kVersion);
  w.u8(static_cast<std::uint8_t>(c.pipeline));
  w.u8(static_cast<std::uint8_t>(c.quantizer.mode));
  w.u8(static_cast<std::uint8_t>(c.predictor.mode));
  w.u8(static_cast<std::uint8_t>(c.predictor.local_sum));
  w.u8(static_cast<std::uint64_t>(c.predictor.p_bands));
  w.u8(static_cast<std::uint64_t>(c.predictor.weight_resolution));
  w.u8(static_cast<std::uint64_t>(c.predictor.v_min));
  w.u8(static_cast<std::uint64_t>(c.predictor.v_max));
  w.u32(c.predictor.t_inc);
  w.u8(static_cast<std::uint64_t>(bs.cube.bit_depth));
  w.u8(static_cast<std::uint64_t>(c.predictor.bit_depth));
  w.u8(static_cast<std::uint8_t>(bs.cube.order));
  w.u32(bs.cube.dims.nx);
  w.u32(bs.cube.dims.ny);
  w.u32(bs.cube.dims.nz);
  w.u8(kEscapeThreshold);
  w.u8(kRescaleLog);
  w.u32(c.quantizer.delta);
  w.f64(c.quantizer.rel);
  w.f64(c.quantizer.margin);
  const bool with_codebook = c.pipeline == Pipeline::prequant && c.quantizer.codebook;
  const std::size_t entries = with_codebook ? c.quantizer.codebook->size() : 0;
  w.u32(entries);
  for (std::size_t i = 0; i < entries; ++i) {
    w.u16(c.quantizer.codebook->lower(i));
    w.u16(c.quantizer.codebook->representative(i));
  }
  const std::string& sensor = bs.cube.sensor;
  w.u16(std::min<std::size_t>(sensor.size(), 0xFFFF));
  w.bytes({reinterpret_cast<const std::uint8_t*>(sensor.data()),
           std::min<std::size_t>(sensor.size(), 0xFFFF)});
  w.u64(bs.payload_bits);
  w.bytes(std::span(bs.payload).first(static_cast<std::size_t>((bs.payload_bits + 7) / 8)));
  return w.take();
}

Bitstream parse_bitstream(std::span<const std::uint8_t> bytes) {
  ByteReader r(bytes);
  const auto magic = r.bytes(4);
  if (!std::equal(magic.begin(), magic.end(), kMagic.begin())) {
    throw DataError("not an HSC1 container (bad magic)");
  }
  if (r.u16() != kVersion) {
    throw DataError("unsupported container version");
  }
  Bitstream bs;
  CodecConfig& c = bs.config;
  c.pipeline = checked_enum<Pipeline>(r.u8(), 3, "pipeline");
  c.quantizer.mode = checked_enum<BoundMode>(r.u8(), 3, "bound mode");
  c.predictor.mode = checked_enum<PredictionMode>(r.u8(), 2, "prediction mode");
  c.predictor.local_sum = checked_enum<LocalSumMode>(r.u8(), 2, "local sum mode");
  c.predictor.p_bands = static_cast<int>(r.u8());
  c.predictor.weight_resolution = static_cast<int>(r.u8());
  c.predictor.v_min = static_cast<int>(r.u8());
  c.predictor.v_max = static_cast<int>(r.u8());
  c.predictor.t_inc = static_cast<std::uint32_t>(r.u32());
  bs.cube.bit_depth = static_cast<int>(r.u8());
  c.predictor.bit_depth = static_cast<int>(r.u8());
  bs.cube.order = checked_enum<Order>(r.u8(), 2, "storage order");
  bs.cube.dims.nx = r.u32();
  bs.cube.dims.ny = r.u32();
  bs.cube.dims.nz = r.u32();
  if (r.u8() != kEscapeThreshold || r.u8() != kRescaleLog) {
    throw DataError("corrupt header: unsupported entropy coder parameters");
  }
  c.quantizer.delta = static_cast<std::uint32_t>(r.u32());
  c.quantizer.rel = r.f64();
  c.quantizer.margin = r.f64();
  if (bs.cube.bit_depth < 2 || bs.cube.bit_depth > 16 || c.predictor.bit_depth < 2 ||
      c.predictor.bit_depth > 16) {
    throw DataError("corrupt header: bit depth out of range");
  }
  if (bs.cube.dims.count() == 0) {
    throw DataError("corrupt header: zero dimension");
  }
  const std::size_t entries = r.u32();
  if (entries > 0) {
    if (entries > 65536) {
      throw DataError("corrupt header: codebook too large");
    }
    std::vector<std::uint32_t> lower(entries);
    std::vector<std::uint32_t> reps(entries);
    for (std::size_t i = 0; i < entries; ++i) {
      lower[i] = static_cast<std::uint32_t>(r.u16());
      reps[i] = static_cast<std::uint32_t>(r.u16());
    }
    c.quantizer.codebook = std::make_shared<const Codebook>(
        std::move(lower), std::move(reps), (1u << bs.cube.bit_depth) - 1u);
  }
  const std::size_t sensor_len = r.u16();
  const auto sensor = r.bytes(sensor_len);
  bs.cube.sensor.assign(sensor.begin(), sensor.end());
  bs.payload_bits = r.u64();
  const std::uint64_t payload_bytes = (bs.payload_bits + 7) / 8;
  if (payload_bytes > r.remaining()) {
    throw TruncatedStream("payload truncated: " + std::to_string(r.remaining()) + " of " +
                          std::to_string(payload_bytes) + " bytes present");
  }
  const auto payload = r.bytes(static_cast<std::size_t>(payload_bytes));
  bs.payload.assign(payload.begin(), payload.end());
  return bs;
}

void write_hsc(const Bitstream& bs, const std::filesystem::path& path) {
  const auto bytes = serialize(bs);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("write failed for " + path.string());
  }
}

Bitstream read_hsc(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open " + path.string());
  }
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return parse_bitstream(bytes);
}

}  // namespace hsc
