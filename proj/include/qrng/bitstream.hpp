#pragma once

#include "qrng/raw_block.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace qrng {

/// Packed bit sequence. Bit k lives in byte k / 8 at position k % 8, so the
/// first bit is the least-significant bit of byte 0. Pad bits are zero.
class BitStream {
  public:
    BitStream() = default;
    /// Takes every bit of `bytes`.
    explicit BitStream(std::vector<std::uint8_t> bytes);
    /// Takes the first `bit_count` bits of `bytes`; the rest are cleared.
    BitStream(std::vector<std::uint8_t> bytes, std::size_t bit_count);

    std::size_t size() const { return bit_count_; }
    bool empty() const { return bit_count_ == 0; }
    const std::vector<std::uint8_t>& bytes() const { return bytes_; }

    bool operator[](std::size_t i) const { return (bytes_[i >> 3] >> (i & 7)) & 1u; }
    void set(std::size_t i, bool v);
    void push_back(bool bit);
    /// Appends the low `nbits` (<= 64) bits of `value`, least significant first.
    void append_bits(std::uint64_t value, unsigned nbits);
    void append(const BitStream& other);
    void reserve(std::size_t bits) { bytes_.reserve((bits + 7) / 8); }

    /// 64 bits starting at `offset`; positions past the end read as zero.
    std::uint64_t word_at(std::size_t offset) const;

    BitStream slice(std::size_t offset, std::size_t count) const;

    friend bool operator==(const BitStream&, const BitStream&) = default;

  private:
    std::vector<std::uint8_t> bytes_;
    std::size_t bit_count_ = 0;
};

/// Each code contributes its adc_bits bits, least significant first, in
/// sample order.
BitStream codes_to_bits(const RawCodeBlock& block);

/// Raw packed bytes, no header. Returns the number of bytes written.
std::size_t export_raw(const BitStream& bits, const std::filesystem::path& path);
BitStream import_raw(const std::filesystem::path& path);

}  // namespace qrng
