#pragma once

#include "vipscene/error.hpp"

#include <Eigen/Core>

#include <cstdint>

namespace vipscene {

/// H×W raster in row-major order, matching the on-disk tensor layout.
template <typename T> using Grid = Eigen::Array<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// 0/255 object mask with a cached foreground area.
class BinaryMask {
public:
  static constexpr std::uint8_t kOn = 255;

  BinaryMask() = default;
  BinaryMask(Eigen::Index height, Eigen::Index width) : pixels_(Grid<std::uint8_t>::Zero(height, width)) {}

  /// Throws ShapeMismatch if any value other than 0/255 appears.
  explicit BinaryMask(Grid<std::uint8_t> pixels) : pixels_(std::move(pixels)) {
    if (((pixels_ != 0) && (pixels_ != kOn)).any())
      throw Error(ErrorCode::ShapeMismatch, "mask values must be 0 or 255");
    area_ = static_cast<Eigen::Index>((pixels_ == kOn).count());
  }

  Eigen::Index height() const { return pixels_.rows(); }
  Eigen::Index width() const { return pixels_.cols(); }
  Eigen::Index area() const { return area_; }
  bool empty() const { return area_ == 0; }

  bool at(Eigen::Index row, Eigen::Index col) const { return pixels_(row, col) == kOn; }
  void set(Eigen::Index row, Eigen::Index col, bool on) {
    const bool was = at(row, col);
    pixels_(row, col) = on ? kOn : 0;
    area_ += Eigen::Index(on) - Eigen::Index(was);
  }

  const Grid<std::uint8_t>& pixels() const { return pixels_; }

  Eigen::Index recount() const { return static_cast<Eigen::Index>((pixels_ == kOn).count()); }

  friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
    return a.pixels_.rows() == b.pixels_.rows() && a.pixels_.cols() == b.pixels_.cols() &&
           (a.pixels_ == b.pixels_).all();
  }

private:
  Grid<std::uint8_t> pixels_;
  Eigen::Index area_ = 0;
};

} // namespace vipscene
