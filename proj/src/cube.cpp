#include "hsc/cube.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>

#include "hsc/error.hpp"

namespace hsc {

namespace {

void check_bit_depth(int bit_depth) {
  if (bit_depth < 2 || bit_depth > 16) {
    throw DataError("bit depth must be within [2, 16], got " + std::to_string(bit_depth));
  }
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string to_string(Order order) { return order == Order::bsq ? "BSQ" : "BIL"; }

Order parse_order(const std::string& text) {
  std::string upper = text;
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  if (upper == "BSQ") {
    return Order::bsq;
  }
  if (upper == "BIL") {
    return Order::bil;
  }
  throw DataError("unknown sample order '" + text + "'");
}

ImageCube::ImageCube(Dims dims, int bit_depth, Order order)
    : dims_(dims), bit_depth_(bit_depth), order_(order), samples_(dims.count(), 0) {
  check_bit_depth(bit_depth);
}

ImageCube::ImageCube(Dims dims, int bit_depth, Order order, std::vector<std::uint16_t> samples)
    : dims_(dims), bit_depth_(bit_depth), order_(order), samples_(std::move(samples)) {
  check_bit_depth(bit_depth);
  if (samples_.size() != dims_.count()) {
    throw DataError("sample count " + std::to_string(samples_.size()) + " does not match " +
                    std::to_string(dims_.nx) + "x" + std::to_string(dims_.ny) + "x" +
                    std::to_string(dims_.nz));
  }
  const auto limit = max_value();
  const auto bad = std::find_if(samples_.begin(), samples_.end(),
                                [limit](std::uint16_t v) { return v > limit; });
  if (bad != samples_.end()) {
    const auto i = static_cast<std::size_t>(bad - samples_.begin());
    const std::size_t x = i % dims_.nx;
    std::size_t y = 0;
    std::size_t z = 0;
    if (order_ == Order::bsq) {
      y = (i / dims_.nx) % dims_.ny;
      z = i / (dims_.nx * dims_.ny);
    } else {
      z = (i / dims_.nx) % dims_.nz;
      y = i / (dims_.nx * dims_.nz);
    }
    std::ostringstream msg;
    msg << "sample " << *bad << " at (x=" << x << ", y=" << y << ", z=" << z << ") exceeds "
        << bit_depth_ << "-bit range";
    throw DataError(msg.str());
  }
}

bool ImageCube::same_samples(const ImageCube& other) const {
  if (dims_ != other.dims_) {
    return false;
  }
  if (order_ == other.order_) {
    return samples_ == other.samples_;
  }
  for (std::size_t z = 0; z < dims_.nz; ++z) {
    for (std::size_t y = 0; y < dims_.ny; ++y) {
      for (std::size_t x = 0; x < dims_.nx; ++x) {
        if (at(x, y, z) != other.at(x, y, z)) {
          return false;
        }
      }
    }
  }
  return true;
}

ImageCube reorder(const ImageCube& cube, Order target) {
  if (cube.order() == target) {
    return cube;
  }
  const Dims d = cube.dims();
  ImageCube out(d, cube.bit_depth(), target);
  out.set_sensor(cube.sensor());
  for (std::size_t z = 0; z < d.nz; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        out.set(x, y, z, cube.at(x, y, z));
      }
    }
  }
  return out;
}

ImageCube band_slice(const ImageCube& cube, std::size_t z0, std::size_t width) {
  const Dims d = cube.dims();
  if (width == 0 || z0 + width > d.nz) {
    throw std::out_of_range("band window [" + std::to_string(z0) + ", " +
                            std::to_string(z0 + width) + ") outside " + std::to_string(d.nz) +
                            " bands");
  }
  ImageCube out({d.nx, d.ny, width}, cube.bit_depth(), cube.order());
  out.set_sensor(cube.sensor());
  for (std::size_t z = 0; z < width; ++z) {
    for (std::size_t y = 0; y < d.ny; ++y) {
      for (std::size_t x = 0; x < d.nx; ++x) {
        out.set(x, y, z, cube.at(x, y, z0 + z));
      }
    }
  }
  return out;
}

CubeHeader read_header(const std::filesystem::path& hdr_path) {
  std::ifstream in(hdr_path);
  if (!in) {
    throw DataError("cannot open header " + hdr_path.string());
  }
  CubeHeader h;
  bool have_nx = false;
  bool have_ny = false;
  bool have_nz = false;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') {
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DataError("malformed header line '" + line + "'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "NX") {
        h.dims.nx = std::stoull(value);
        have_nx = true;
      } else if (key == "NY") {
        h.dims.ny = std::stoull(value);
        have_ny = true;
      } else if (key == "NZ") {
        h.dims.nz = std::stoull(value);
        have_nz = true;
      } else if (key == "BITDEPTH") {
        h.bit_depth = std::stoi(value);
      } else if (key == "ORDER") {
        h.order = parse_order(value);
      } else if (key == "SENSOR") {
        h.sensor = value;
      }
    } catch (const std::logic_error&) {
      throw DataError("bad value for " + key + ": '" + value + "'");
    }
  }
  if (!have_nx || !have_ny || !have_nz || h.dims.count() == 0) {
    throw DataError("header " + hdr_path.string() + " must define positive NX, NY, NZ");
  }
  check_bit_depth(h.bit_depth);
  return h;
}

void write_header(const CubeHeader& header, const std::filesystem::path& hdr_path) {
  std::ofstream out(hdr_path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write header " + hdr_path.string());
  }
  out << "NX=" << header.dims.nx << "\nNY=" << header.dims.ny << "\nNZ=" << header.dims.nz
      << "\nBITDEPTH=" << header.bit_depth << "\nORDER=" << to_string(header.order)
      << "\nSENSOR=" << header.sensor << "\n";
  if (!out) {
    throw std::runtime_error("write failed for " + hdr_path.string());
  }
}

ImageCube load_cube(const std::filesystem::path& raw_path, const CubeHeader& header) {
  std::ifstream in(raw_path, std::ios::binary);
  if (!in) {
    throw DataError("cannot open cube " + raw_path.string());
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::size_t expected = header.dims.count() * 2;
  if (bytes.size() != expected) {
    throw DataError("size mismatch: " + raw_path.string() + " has " +
                    std::to_string(bytes.size()) + " bytes, header implies " +
                    std::to_string(expected));
  }
  std::vector<std::uint16_t> samples(header.dims.count());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
  }
  ImageCube cube(header.dims, header.bit_depth, header.order, std::move(samples));
  cube.set_sensor(header.sensor);
  return cube;
}

void store_cube(const ImageCube& cube, const std::filesystem::path& raw_path) {
  std::vector<char> bytes(cube.size() * 2);
  const auto s = cube.samples();
  for (std::size_t i = 0; i < s.size(); ++i) {
    bytes[2 * i] = static_cast<char>(s[i] & 0xFF);
    bytes[2 * i + 1] = static_cast<char>(s[i] >> 8);
  }
  std::ofstream out(raw_path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot write cube " + raw_path.string());
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) {
    throw std::runtime_error("write failed for " + raw_path.string());
  }
}

std::filesystem::path header_path_for(const std::filesystem::path& raw_path) {
  auto p = raw_path;
  p.replace_extension(".hdr");
  return p;
}

ImageCube load_cube(const std::filesystem::path& raw_path) {
  return load_cube(raw_path, read_header(header_path_for(raw_path)));
}

void store_cube_with_header(const ImageCube& cube, const std::filesystem::path& raw_path) {
  store_cube(cube, raw_path);
  write_header(cube.header(), header_path_for(raw_path));
}

}  // namespace hsc
