#pragma once

#include "qrng/bitstream.hpp"
#include "qrng/config.hpp"
#include "qrng/raw_block.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace qrng::toeplitz {

/// Defines the m x n binary matrix T[i][j] = bits[i - j + n - 1].
struct ToeplitzSeed {
    BitStream bits;  // n + m - 1 bits
    std::size_t n = 0;
    std::size_t m = 0;

    /// Throws UsageError unless bits.size() == n + m - 1 and 1 <= m <= n.
    static ToeplitzSeed make(BitStream bits, std::size_t n, std::size_t m);

    bool entry(std::size_t row, std::size_t col) const { return bits[row + n - 1 - col]; }
};

using SeedKey = std::array<std::uint8_t, 32>;

/// Expands a 256-bit key to the n + m - 1 seed bits: the concatenation of
/// SHA-256(key || le64(i)) for i = 0, 1, ..., read least-significant bit
/// first within each byte, truncated.
ToeplitzSeed expand_seed(const SeedKey& key, std::size_t n, std::size_t m);

/// Deterministic key for tooling and tests: SHA-256("qrng-toeplitz-key" || le64(seed)).
SeedKey key_from_u64(std::uint64_t seed);

SeedKey read_seed_file(const std::filesystem::path& path);
void write_seed_file(const SeedKey& key, const std::filesystem::path& path);

/// Reference GF(2) matrix-vector product, one output bit at a time.
BitStream extract_block(const ToeplitzSeed& seed, const BitStream& input);

/// Precomputes 64 bit-shifted copies of the seed so each matrix column is a
/// word-aligned window; the product is an XOR of the columns selected by the
/// set input bits.
class ToeplitzHasher {
  public:
    explicit ToeplitzHasher(const ToeplitzSeed& seed);

    std::size_t input_bits() const { return n_; }
    std::size_t output_bits() const { return m_; }

    /// Hashes input bits [offset, offset + n) and appends m bits to `out`.
    void hash(const BitStream& input, std::size_t offset, BitStream& out) const;

  private:
    std::size_t n_;
    std::size_t m_;
    std::size_t out_words_;
    std::size_t stride_;
    std::vector<std::uint64_t> shifted_;  // 64 copies, `stride_` words each
    mutable std::vector<std::uint64_t> acc_;
};

/// Same contract as extract_block.
BitStream extract_fast(const ToeplitzSeed& seed, const BitStream& input);

/// Splits the concatenated code bits into n-bit blocks, hashes each with the
/// same seed and concatenates the outputs. A trailing partial block is dropped.
BitStream stream_extract(std::span<const RawCodeBlock> blocks, const ExtractorConfig& cfg, const ToeplitzSeed& seed);
BitStream stream_extract(const BitStream& input, const ToeplitzSeed& seed);

struct LeftoverHashReport {
    bool pass = false;
    long long max_output_bits = 0;  // floor(n * rate - 2 * security_exponent)
    long long slack_bits = 0;       // max_output_bits - m
};

/// Leftover-hash bound m <= n * rate - 2 * security_exponent, with rate the
/// min-entropy per input bit.
LeftoverHashReport leftover_hash_check(const ExtractorConfig& cfg, double min_entropy_rate);

}  // namespace qrng::toeplitz
