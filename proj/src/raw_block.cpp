#include "qrng/raw_block.hpp"

#include "qrng/config.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iterator>

namespace qrng {

namespace {

template <class Int>
void put_le(std::uint8_t* p, Int v) {
    for (std::size_t i = 0; i < sizeof(Int); ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

template <class Int>
Int get_le(const std::uint8_t* p) {
    Int v = 0;
    for (std::size_t i = 0; i < sizeof(Int); ++i) v |= static_cast<Int>(p[i]) << (8 * i);
    return v;
}

}  // namespace

std::vector<std::uint8_t> encode_raw_block(const RawCodeBlock& block) {
    if (block.adc_bits < 1 || block.adc_bits > 16) throw UsageError("raw block: adc_bits must lie in [1,16]");
    const std::uint32_t limit = 1u << block.adc_bits;

    std::vector<std::uint8_t> out(kRawHeaderBytes + 2 * block.codes.size(), 0);
    std::memcpy(out.data(), kRawMagic, sizeof kRawMagic);
    out[8] = static_cast<std::uint8_t>(block.adc_bits);
    out[9] = block.led_on ? 1 : 0;
    put_le<std::uint32_t>(out.data() + 12, block.sample_rate_hz);
    put_le<std::uint64_t>(out.data() + 16, block.rng_seed);
    put_le<std::uint64_t>(out.data() + 24, block.config_digest);
    for (std::size_t i = 0; i < block.codes.size(); ++i) {
        const auto code = block.codes[i];
        if (code >= limit) throw UsageError("raw block: code " + std::to_string(code) + " exceeds adc_bits");
        put_le<std::uint16_t>(out.data() + kRawHeaderBytes + 2 * i, code);
    }
    return out;
}

RawCodeBlock decode_raw_block(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < kRawHeaderBytes) throw IoError("raw block: truncated header");
    if (!std::equal(std::begin(kRawMagic), std::end(kRawMagic), bytes.begin()))
        throw IoError("raw block: bad magic (expected QRNGRAW1)");
    if ((bytes.size() - kRawHeaderBytes) % 2 != 0) throw IoError("raw block: odd payload length");

    RawCodeBlock block;
    block.adc_bits = bytes[8];
    if (block.adc_bits < 1 || block.adc_bits > 16) throw IoError("raw block: adc_bits out of range");
    if (bytes[9] > 1) throw IoError("raw block: bad led_on flag");
    block.led_on = bytes[9] == 1;
    block.sample_rate_hz = get_le<std::uint32_t>(bytes.data() + 12);
    block.rng_seed = get_le<std::uint64_t>(bytes.data() + 16);
    block.config_digest = get_le<std::uint64_t>(bytes.data() + 24);

    const std::uint32_t limit = 1u << block.adc_bits;
    const std::size_t count = (bytes.size() - kRawHeaderBytes) / 2;
    block.codes.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto code = get_le<std::uint16_t>(bytes.data() + kRawHeaderBytes + 2 * i);
        if (code >= limit) throw IoError("raw block: code at index " + std::to_string(i) + " exceeds adc_bits");
        block.codes[i] = code;
    }
    return block;
}

void write_raw_block(const RawCodeBlock& block, const std::filesystem::path& path) {
    const auto bytes = encode_raw_block(block);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

RawCodeBlock read_raw_block(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_raw_block(bytes);
}

}  // namespace qrng
