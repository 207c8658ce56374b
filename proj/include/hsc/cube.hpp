#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace hsc {

enum class Order { bsq, bil };

std::string to_string(Order order);
Order parse_order(const std::string& text);

struct Dims {
  std::size_t nx = 0;  // columns
  std::size_t ny = 0;  // lines
  std::size_t nz = 0;  // bands

  [[nodiscard]] std::size_t count() const noexcept { return nx * ny * nz; }
  friend bool operator==(const Dims&, const Dims&) = default;
};

// Sidecar metadata for a raw cube file.
struct CubeHeader {
  Dims dims;
  int bit_depth = 16;
  Order order = Order::bsq;
  std::string sensor;
};

// Unsigned integer hyperspectral cube, bit depth 2..16. Sample storage is
// laid out according to `order`: BSQ is [z][y][x], BIL is [y][z][x].
class ImageCube {
 public:
  ImageCube() = default;
  ImageCube(Dims dims, int bit_depth, Order order = Order::bsq);
  // Throws DataError naming the first offending position if a sample
  // exceeds the bit depth or the sample count does not match dims.
  ImageCube(Dims dims, int bit_depth, Order order, std::vector<std::uint16_t> samples);

  [[nodiscard]] const Dims& dims() const noexcept { return dims_; }
  [[nodiscard]] int bit_depth() const noexcept { return bit_depth_; }
  [[nodiscard]] Order order() const noexcept { return order_; }
  [[nodiscard]] std::uint32_t max_value() const noexcept { return (1u << bit_depth_) - 1u; }
  [[nodiscard]] std::size_t size() const noexcept { return samples_.size(); }

  [[nodiscard]] std::size_t index(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return order_ == Order::bsq ? (z * dims_.ny + y) * dims_.nx + x
                                : (y * dims_.nz + z) * dims_.nx + x;
  }
  [[nodiscard]] std::uint16_t at(std::size_t x, std::size_t y, std::size_t z) const noexcept {
    return samples_[index(x, y, z)];
  }
  void set(std::size_t x, std::size_t y, std::size_t z, std::uint16_t v) noexcept {
    samples_[index(x, y, z)] = v;
  }

  [[nodiscard]] std::span<const std::uint16_t> samples() const noexcept { return samples_; }
  [[nodiscard]] std::span<std::uint16_t> samples() noexcept { return samples_; }

  [[nodiscard]] const std::string& sensor() const noexcept { return sensor_; }
  void set_sensor(std::string sensor) { sensor_ = std::move(sensor); }

  [[nodiscard]] CubeHeader header() const { return {dims_, bit_depth_, order_, sensor_}; }

  // Sample-exact comparison in logical (x,y,z) coordinates; storage order and
  // sensor tag are ignored.
  [[nodiscard]] bool same_samples(const ImageCube& other) const;

  friend bool operator==(const ImageCube& a, const ImageCube& b) {
    return a.dims_ == b.dims_ && a.bit_depth_ == b.bit_depth_ && a.order_ == b.order_ &&
           a.samples_ == b.samples_;
  }

 private:
  Dims dims_{};
  int bit_depth_ = 16;
  Order order_ = Order::bsq;
  std::vector<std::uint16_t> samples_;
  std::string sensor_;
};

// Pure permutation between storage orders.
ImageCube reorder(const ImageCube& cube, Order target);

// Bands [z0, z0+width) as a new cube in the same order. Throws
// std::out_of_range when the window does not fit.
ImageCube band_slice(const ImageCube& cube, std::size_t z0, std::size_t width = 8);

// ---- raw/.hdr interchange ----------------------------------------------
//
// The payload is headerless 16-bit little-endian samples in the header's
// declared order; the header is key=value text (NX, NY, NZ, BITDEPTH,
// ORDER, SENSOR).

CubeHeader read_header(const std::filesystem::path& hdr_path);
void write_header(const CubeHeader& header, const std::filesystem::path& hdr_path);

ImageCube load_cube(const std::filesystem::path& raw_path, const CubeHeader& header);
void store_cube(const ImageCube& cube, const std::filesystem::path& raw_path);

// <stem>.hdr next to <stem>.raw
std::filesystem::path header_path_for(const std::filesystem::path& raw_path);
// load_cube with the sidecar header, and store_cube plus header.
ImageCube load_cube(const std::filesystem::path& raw_path);
void store_cube_with_header(const ImageCube& cube, const std::filesystem::path& raw_path);

}  // namespace hsc
