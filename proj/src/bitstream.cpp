#include "qrng/bitstream.hpp"

#include "qrng/config.hpp"

#include <fstream>
#include <iterator>

namespace qrng {

BitStream::BitStream(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)), bit_count_(bytes_.size() * 8) {}

BitStream::BitStream(std::vector<std::uint8_t> bytes, std::size_t bit_count)
    : bytes_(std::move(bytes)), bit_count_(bit_count) {
    if (bit_count_ > bytes_.size() * 8) throw UsageError("BitStream: bit_count exceeds byte buffer");
    bytes_.resize((bit_count_ + 7) / 8);
    if (bit_count_ % 8 != 0) bytes_.back() &= static_cast<std::uint8_t>((1u << (bit_count_ % 8)) - 1u);
}

void BitStream::set(std::size_t i, bool v) {
    const auto mask = static_cast<std::uint8_t>(1u << (i & 7));
    if (v) {
        bytes_[i >> 3] |= mask;
    } else {
        bytes_[i >> 3] &= static_cast<std::uint8_t>(~mask);
    }
}

void BitStream::push_back(bool bit) {
    if (bit_count_ % 8 == 0) bytes_.push_back(0);
    if (bit) bytes_.back() |= static_cast<std::uint8_t>(1u << (bit_count_ % 8));
    ++bit_count_;
}

void BitStream::append_bits(std::uint64_t value, unsigned nbits) {
    if (nbits < 64) value &= (std::uint64_t{1} << nbits) - 1;
    while (nbits > 0) {
        const unsigned used = bit_count_ % 8;
        if (used == 0) bytes_.push_back(0);
        const unsigned take = std::min(nbits, 8u - used);
        bytes_.back() |= static_cast<std::uint8_t>((value & ((1u << take) - 1u)) << used);
        value >>= take;
        nbits -= take;
        bit_count_ += take;
    }
}

void BitStream::append(const BitStream& other) {
    if (bit_count_ % 8 == 0) {
        bytes_.insert(bytes_.end(), other.bytes_.begin(), other.bytes_.end());
        bit_count_ += other.bit_count_;
        return;
    }
    std::size_t done = 0;
    for (; done + 64 <= other.size(); done += 64) append_bits(other.word_at(done), 64);
    if (done < other.size()) append_bits(other.word_at(done), static_cast<unsigned>(other.size() - done));
}

std::uint64_t BitStream::word_at(std::size_t offset) const {
    if (offset >= bit_count_) return 0;
    const std::size_t first = offset >> 3;
    const unsigned shift = offset & 7;
    std::uint64_t lo = 0;
    const std::size_t avail = std::min<std::size_t>(8, bytes_.size() - first);
    for (std::size_t b = 0; b < avail; ++b) lo |= static_cast<std::uint64_t>(bytes_[first + b]) << (8 * b);
    if (shift != 0) {
        lo >>= shift;
        if (first + 8 < bytes_.size()) lo |= static_cast<std::uint64_t>(bytes_[first + 8]) << (64 - shift);
    }
    const std::size_t remaining = bit_count_ - offset;
    if (remaining < 64) lo &= (std::uint64_t{1} << remaining) - 1;
    return lo;
}

BitStream BitStream::slice(std::size_t offset, std::size_t count) const {
    if (offset + count > bit_count_) throw UsageError("BitStream::slice out of range");
    BitStream out;
    out.reserve(count);
    std::size_t done = 0;
    for (; done + 64 <= count; done += 64) out.append_bits(word_at(offset + done), 64);
    if (done < count) out.append_bits(word_at(offset + done), static_cast<unsigned>(count - done));
    return out;
}

BitStream codes_to_bits(const RawCodeBlock& block) {
    BitStream bits;
    const auto width = static_cast<unsigned>(block.adc_bits);
    bits.reserve(block.codes.size() * width);
    for (const auto code : block.codes) bits.append_bits(code, width);
    return bits;
}

std::size_t export_raw(const BitStream& bits, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    const auto& bytes = bits.bytes();
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw IoError("write failed: " + path.string());
    return bytes.size();
}

BitStream import_raw(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return BitStream(std::move(bytes));
}

}  // namespace qrng
