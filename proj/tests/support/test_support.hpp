#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "hsc/cube.hpp"

namespace hsc::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  [[nodiscard]] const std::filesystem::path& path() const noexcept { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

// Uniformly random samples (no spatial structure), for permutation and
// round-trip checks.
ImageCube random_cube(Dims dims, int bit_depth, std::uint64_t seed, Order order = Order::bsq);

// Mean squared error computed sample by sample in (x, y, z) coordinates.
double mse(const ImageCube& a, const ImageCube& b);

}  // namespace hsc::test
