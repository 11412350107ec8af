#include "qrng/toeplitz.hpp"

#include <openssl/sha.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <iterator>

namespace qrng::toeplitz {

ToeplitzSeed ToeplitzSeed::make(BitStream bits, std::size_t n, std::size_t m) {
    if (m < 1 || m > n) throw UsageError("toeplitz seed: require 1 <= m <= n");
    if (bits.size() != n + m - 1) throw UsageError("toeplitz seed: need exactly n + m - 1 bits");
    return ToeplitzSeed{std::move(bits), n, m};
}

ToeplitzSeed expand_seed(const SeedKey& key, std::size_t n, std::size_t m) {
    if (m < 1 || m > n) throw UsageError("toeplitz seed: require 1 <= m <= n");
    const std::size_t need = n + m - 1;
    std::vector<std::uint8_t> bytes;
    bytes.reserve((need + 7) / 8 + SHA256_DIGEST_LENGTH);

    std::array<std::uint8_t, 40> message{};
    std::copy(key.begin(), key.end(), message.begin());
    std::array<std::uint8_t, SHA256_DIGEST_LENGTH> digest{};
    for (std::uint64_t counter = 0; bytes.size() * 8 < need; ++counter) {
        for (int b = 0; b < 8; ++b) message[32 + b] = static_cast<std::uint8_t>(counter >> (8 * b));
        SHA256(message.data(), message.size(), digest.data());
        bytes.insert(bytes.end(), digest.begin(), digest.end());
    }
    return ToeplitzSeed::make(BitStream(std::move(bytes), need), n, m);
}

SeedKey key_from_u64(std::uint64_t seed) {
    static constexpr char kLabel[] = "qrng-toeplitz-key";
    std::vector<std::uint8_t> message(std::begin(kLabel), std::end(kLabel) - 1);
    for (int b = 0; b < 8; ++b) message.push_back(static_cast<std::uint8_t>(seed >> (8 * b)));
    SeedKey key{};
    SHA256(message.data(), message.size(), key.data());
    return key;
}

SeedKey read_seed_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open seed file " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (bytes.size() != 32) throw IoError("seed file must hold exactly 32 bytes: " + path.string());
    SeedKey key{};
    std::copy(bytes.begin(), bytes.end(), key.begin());
    return key;
}

void write_seed_file(const SeedKey& key, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(key.data()), static_cast<std::streamsize>(key.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

BitStream extract_block(const ToeplitzSeed& seed, const BitStream& input) {
    if (input.size() != seed.n) throw UsageError("extract_block: input length must equal seed.n");
    BitStream out;
    out.reserve(seed.m);
    for (std::size_t i = 0; i < seed.m; ++i) {
        bool acc = false;
        for (std::size_t j = 0; j < seed.n; ++j) acc ^= seed.entry(i, j) && input[j];
        out.push_back(acc);
    }
    return out;
}

// Column j of T holds seed bits n-1-j .. n-1-j+m-1, i.e. a window of the
// seed starting at offset n-1-j.
ToeplitzHasher::ToeplitzHasher(const ToeplitzSeed& seed)
    : n_(seed.n), m_(seed.m), out_words_((seed.m + 63) / 64) {
    const std::size_t seed_words = (seed.bits.size() + 63) / 64;
    stride_ = seed_words + 1;
    shifted_.assign(64 * stride_, 0);
    for (std::size_t shift = 0; shift < 64; ++shift) {
        std::uint64_t* copy = shifted_.data() + shift * stride_;
        for (std::size_t w = 0; w < seed_words; ++w) copy[w] = seed.bits.word_at(64 * w + shift);
    }
    acc_.resize(out_words_);
}

void ToeplitzHasher::hash(const BitStream& input, std::size_t offset, BitStream& out) const {
    if (offset + n_ > input.size()) throw UsageError("toeplitz hash: input shorter than one block");
    std::fill(acc_.begin(), acc_.end(), 0);
    for (std::size_t base = 0; base < n_; base += 64) {
        std::uint64_t word = input.word_at(offset + base);
        if (n_ - base < 64) word &= (std::uint64_t{1} << (n_ - base)) - 1;
        while (word != 0) {
            const std::size_t j = base + static_cast<std::size_t>(std::countr_zero(word));
            word &= word - 1;
            const std::size_t start = n_ - 1 - j;
            const std::uint64_t* column = shifted_.data() + (start % 64) * stride_ + start / 64;
            for (std::size_t t = 0; t < out_words_; ++t) acc_[t] ^= column[t];
        }
    }
    std::size_t remaining = m_;
    for (std::size_t t = 0; t < out_words_; ++t) {
        const unsigned take = static_cast<unsigned>(std::min<std::size_t>(64, remaining));
        out.append_bits(acc_[t], take);
        remaining -= take;
    }
}

BitStream extract_fast(const ToeplitzSeed& seed, const BitStream& input) {
    if (input.size() != seed.n) throw UsageError("extract_fast: input length must equal seed.n");
    BitStream out;
    out.reserve(seed.m);
    ToeplitzHasher(seed).hash(input, 0, out);
    return out;
}

BitStream stream_extract(const BitStream& input, const ToeplitzSeed& seed) {
    const ToeplitzHasher hasher(seed);
    const std::size_t blocks = input.size() / seed.n;
    BitStream out;
    out.reserve(blocks * seed.m);
    for (std::size_t b = 0; b < blocks; ++b) hasher.hash(input, b * seed.n, out);
    return out;
}

BitStream stream_extract(std::span<const RawCodeBlock> blocks, const ExtractorConfig& cfg, const ToeplitzSeed& seed) {
    if (seed.n != cfg.n || seed.m != cfg.m) throw UsageError("stream_extract: seed dimensions differ from config");
    BitStream all;
    for (const auto& block : blocks) {
        if (static_cast<std::size_t>(block.adc_bits) != cfg.bits_per_code)
            throw UsageError("stream_extract: block adc_bits differs from extractor bits_per_code");
        all.append(codes_to_bits(block));
    }
    return stream_extract(all, seed);
}

LeftoverHashReport leftover_hash_check(const ExtractorConfig& cfg, double min_entropy_rate) {
    if (!(min_entropy_rate >= 0.0 && min_entropy_rate <= 1.0))
        throw UsageError("leftover_hash_check: rate must lie in [0,1]");
    const double bound = static_cast<double>(cfg.n) * min_entropy_rate - 2.0 * cfg.security_exponent;
    // Rates such as 7/12 are not exact in binary; absorb the rounding so an
    // integral bound does not floor one below itself.
    const double tolerance = 1e-9 * std::max(1.0, std::abs(bound));
    LeftoverHashReport r;
    r.max_output_bits = static_cast<long long>(std::floor(bound + tolerance));
    r.slack_bits = r.max_output_bits - static_cast<long long>(cfg.m);
    r.pass = r.slack_bits >= 0;
    return r;
}

}  // namespace qrng::toeplitz
