#include "vipscene/tensor.hpp"

#include "vipscene/error.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numeric>

namespace vipscene {

namespace {

constexpr char kMagic[4] = {'V', 'I', 'P', 'T'};
constexpr std::uint8_t kVersion = 1;

// Copies `count` elements of width `width` between native and little-endian order.
void copy_le(std::byte* dst, const std::byte* src, std::size_t count, std::size_t width) {
  std::memcpy(dst, src, count * width);
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < count; ++i) std::reverse(dst + i * width, dst + (i + 1) * width);
  }
}

template <typename T> std::vector<T> unpack(const TensorFile& t, Dtype expected) {
  if (t.dtype != expected) throw Error(ErrorCode::UnsupportedDtype, "tensor dtype does not match request");
  std::vector<T> out(t.element_count());
  copy_le(reinterpret_cast<std::byte*>(out.data()), t.data.data(), out.size(), sizeof(T));
  return out;
}

template <typename T>
TensorFile pack(Dtype dtype, std::vector<std::uint32_t> shape, std::span<const T> values) {
  TensorFile t;
  t.dtype = dtype;
  t.shape = std::move(shape);
  if (t.element_count() != values.size())
    throw Error(ErrorCode::ShapeMismatch, "value count does not match shape");
  t.data.resize(values.size() * sizeof(T));
  copy_le(t.data.data(), reinterpret_cast<const std::byte*>(values.data()), values.size(), sizeof(T));
  return t;
}

} // namespace

std::size_t dtype_size(Dtype dtype) {
  switch (dtype) {
  case Dtype::U8: return 1;
  case Dtype::U16: return 2;
  case Dtype::F32: return 4;
  }
  throw Error(ErrorCode::UnsupportedDtype, "unknown dtype");
}

std::size_t TensorFile::element_count() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         [](std::size_t a, std::uint32_t d) { return a * d; });
}

std::vector<float> TensorFile::as_f32() const { return unpack<float>(*this, Dtype::F32); }
std::vector<std::uint8_t> TensorFile::as_u8() const { return unpack<std::uint8_t>(*this, Dtype::U8); }
std::vector<std::uint16_t> TensorFile::as_u16() const { return unpack<std::uint16_t>(*this, Dtype::U16); }

TensorFile TensorFile::from_f32(std::vector<std::uint32_t> shape, std::span<const float> values) {
  return pack(Dtype::F32, std::move(shape), values);
}
TensorFile TensorFile::from_u8(std::vector<std::uint32_t> shape, std::span<const std::uint8_t> values) {
  return pack(Dtype::U8, std::move(shape), values);
}
TensorFile TensorFile::from_u16(std::vector<std::uint32_t> shape, std::span<const std::uint16_t> values) {
  return pack(Dtype::U16, std::move(shape), values);
}

std::vector<std::byte> encode_tensor(const TensorFile& tensor) {
  if (tensor.shape.size() > 255) throw Error(ErrorCode::ShapeMismatch, "too many dimensions");
  const std::size_t expected = tensor.element_count() * dtype_size(tensor.dtype);
  if (tensor.data.size() != expected) throw Error(ErrorCode::PayloadSizeMismatch, "payload does not match shape");

  std::vector<std::byte> out;
  out.reserve(7 + 4 * tensor.shape.size() + tensor.data.size());
  for (char c : kMagic) out.push_back(static_cast<std::byte>(c));
  out.push_back(static_cast<std::byte>(kVersion));
  out.push_back(static_cast<std::byte>(tensor.dtype));
  out.push_back(static_cast<std::byte>(tensor.shape.size()));
  for (std::uint32_t d : tensor.shape)
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::byte>((d >> (8 * b)) & 0xFFu));
  out.insert(out.end(), tensor.data.begin(), tensor.data.end());
  return out;
}

TensorFile decode_tensor(std::span<const std::byte> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
    throw Error(ErrorCode::BadMagic, "missing VIPT magic");
  if (bytes.size() < 7) throw Error(ErrorCode::TruncatedPayload, "header truncated");
  if (std::to_integer<std::uint8_t>(bytes[4]) != kVersion)
    throw Error(ErrorCode::BadMagic, "unsupported VIPT version");

  TensorFile t;
  const auto code = std::to_integer<std::uint8_t>(bytes[5]);
  if (code < 1 || code > 3) throw Error(ErrorCode::UnsupportedDtype, "dtype code " + std::to_string(code));
  t.dtype = static_cast<Dtype>(code);

  const std::size_t ndim = std::to_integer<std::uint8_t>(bytes[6]);
  std::size_t pos = 7;
  if (bytes.size() < pos + 4 * ndim) throw Error(ErrorCode::TruncatedPayload, "dims truncated");
  t.shape.resize(ndim);
  for (std::size_t i = 0; i < ndim; ++i, pos += 4) {
    std::uint32_t d = 0;
    for (int b = 0; b < 4; ++b) d |= std::uint32_t(std::to_integer<std::uint8_t>(bytes[pos + b])) << (8 * b);
    t.shape[i] = d;
  }

  const std::size_t expected = t.element_count() * dtype_size(t.dtype);
  const std::size_t available = bytes.size() - pos;
  if (available < expected)
    throw Error(ErrorCode::TruncatedPayload,
                "expected " + std::to_string(expected) + " payload bytes, found " + std::to_string(available));
  if (available > expected)
    throw Error(ErrorCode::PayloadSizeMismatch, std::to_string(available - expected) + " trailing bytes");
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return t;
}

TensorFile read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::MissingFile, path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_tensor(std::as_bytes(std::span<const char>(raw)));
}

void write_tensor(const std::filesystem::path& path, const TensorFile& tensor) {
  const auto bytes = encode_tensor(tensor);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::MissingFile, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

} // namespace vipscene
