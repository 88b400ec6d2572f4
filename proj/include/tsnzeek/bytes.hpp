#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsnzeek {

using Bytes = std::vector<std::uint8_t>;

/// Thrown by ByteReader when a read would run past the end of the buffer.
class OutOfBounds : public std::out_of_range {
public:
  using std::out_of_range::out_of_range;
};

/// Big-endian cursor over a read-only byte span. Every read is bounds checked.
class ByteReader {
public:
  explicit ByteReader(std::span<const std::uint8_t> data) noexcept : data_(data) {}

  [[nodiscard]] std::size_t remaining() const noexcept { return data_.size() - pos_; }
  [[nodiscard]] std::size_t position() const noexcept { return pos_; }

  std::uint8_t u8() {
    require(1);
    return data_[pos_++];
  }

  std::uint16_t u16() {
    require(2);
    auto v = static_cast<std::uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }

  std::uint32_t u32() {
    require(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v = (v << 8) | data_[pos_ + i];
    }
    pos_ += 4;
    return v;
  }

  template <std::size_t N>
  std::array<std::uint8_t, N> array() {
    require(N);
    std::array<std::uint8_t, N> out{};
    for (std::size_t i = 0; i < N; ++i) {
      out[i] = data_[pos_ + i];
    }
    pos_ += N;
    return out;
  }

  std::span<const std::uint8_t> rest() noexcept {
    auto out = data_.subspan(pos_);
    pos_ = data_.size();
    return out;
  }

private:
  void require(std::size_t n) const {
    if (remaining() < n) {
      throw OutOfBounds("read of " + std::to_string(n) + " bytes at offset " +
                        std::to_string(pos_) + " exceeds buffer of " +
                        std::to_string(data_.size()));
    }
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

/// Appends big-endian fields to a byte vector.
class ByteWriter {
public:
  explicit ByteWriter(Bytes& out) noexcept : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
      out_.push_back(static_cast<std::uint8_t>(v >> shift));
    }
  }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

private:
  Bytes& out_;
};

}  // namespace tsnzeek
