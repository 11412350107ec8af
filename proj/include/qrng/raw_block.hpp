#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace qrng {

/// A run of ADC codes plus the provenance needed to regenerate it.
struct RawCodeBlock {
    std::vector<std::uint16_t> codes;
    int adc_bits = 12;
    std::uint32_t sample_rate_hz = 0;
    bool led_on = false;
    std::uint64_t rng_seed = 0;
    std::uint64_t config_digest = 0;

    std::size_t size() const { return codes.size(); }
    bool empty() const { return codes.empty(); }

    friend bool operator==(const RawCodeBlock&, const RawCodeBlock&) = default;
};

/// On-disk layout, all little-endian:
///
///   offset  size  field
///        0     8  magic "QRNGRAW1"
///        8     1  adc_bits
///        9     1  led_on (0/1)
///       10     2  reserved, zero
///       12     4  sample_rate_hz (u32)
///       16     8  rng_seed (u64)
///       24     8  config_digest (u64)
///       32   2*N  codes, u16 each, high (16 - adc_bits) bits zero
inline constexpr std::size_t kRawHeaderBytes = 32;
inline constexpr char kRawMagic[8] = {'Q', 'R', 'N', 'G', 'R', 'A', 'W', '1'};

std::vector<std::uint8_t> encode_raw_block(const RawCodeBlock& block);
RawCodeBlock decode_raw_block(const std::vector<std::uint8_t>& bytes);

void write_raw_block(const RawCodeBlock& block, const std::filesystem::path& path);
RawCodeBlock read_raw_block(const std::filesystem::path& path);

}  // namespace qrng
