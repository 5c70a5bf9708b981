#pragma once

// VIPT tensor container.
//
//   offset  size  field
//   0       4     magic "VIPT"
//   4       1     version (1)
//   5       1     dtype code: 1 = u8, 2 = u16, 3 = f32
//   6       1     ndim
//   7       4·nd  dims, u32 little-endian
//   ...           payload, row-major, little-endian, product(dims)·sizeof(dtype) bytes

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace vipscene {

enum class Dtype : std::uint8_t { U8 = 1, U16 = 2, F32 = 3 };

std::size_t dtype_size(Dtype dtype);

struct TensorFile {
  Dtype dtype = Dtype::F32;
  std::vector<std::uint32_t> shape;
  std::vector<std::byte> data; ///< raw little-endian payload

  std::size_t element_count() const;

  std::vector<float> as_f32() const;
  std::vector<std::uint8_t> as_u8() const;
  std::vector<std::uint16_t> as_u16() const;

  static TensorFile from_f32(std::vector<std::uint32_t> shape, std::span<const float> values);
  static TensorFile from_u8(std::vector<std::uint32_t> shape, std::span<const std::uint8_t> values);
  static TensorFile from_u16(std::vector<std::uint32_t> shape, std::span<const std::uint16_t> values);

  friend bool operator==(const TensorFile&, const TensorFile&) = default;
};

std::vector<std::byte> encode_tensor(const TensorFile& tensor);
TensorFile decode_tensor(std::span<const std::byte> bytes);

TensorFile read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const TensorFile& tensor);

} // namespace vipscene
