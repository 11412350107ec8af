#include "qrng/stats.hpp"

#include "qrng/config.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <numbers>

namespace qrng::stats {

namespace {

// Aligned 64-bit words of a stream, plus one zero word of padding.
std::vector<std::uint64_t> to_words(const BitStream& bits) {
    std::vector<std::uint64_t> words((bits.size() + 63) / 64 + 1, 0);
    for (std::size_t w = 0; w + 1 < words.size(); ++w) words[w] = bits.word_at(64 * w);
    return words;
}

// Word of the stream starting at bit 64*q + r, for r in [0, 64).
inline std::uint64_t shifted_word(const std::vector<std::uint64_t>& words, std::size_t q, unsigned r) {
    if (r == 0) return words[q];
    const std::uint64_t hi = q + 1 < words.size() ? words[q + 1] : 0;
    return (words[q] >> r) | (hi << (64 - r));
}

template <class Combine>
std::uint64_t lagged_popcount(const std::vector<std::uint64_t>& words, std::size_t n, std::size_t lag,
                              Combine combine) {
    const std::size_t span = n - lag;
    const std::size_t q = lag / 64;
    const auto r = static_cast<unsigned>(lag % 64);
    std::uint64_t total = 0;
    std::size_t w = 0;
    for (; 64 * (w + 1) <= span; ++w)
        total += static_cast<std::uint64_t>(std::popcount(combine(words[w], shifted_word(words, w + q, r))));
    if (64 * w < span) {
        const std::uint64_t mask = (std::uint64_t{1} << (span - 64 * w)) - 1;
        total += static_cast<std::uint64_t>(
            std::popcount(combine(words[w], shifted_word(words, w + q, r)) & mask));
    }
    return total;
}

std::size_t count_ones(const BitStream& bits) {
    std::size_t ones = 0;
    for (const auto byte : bits.bytes()) ones += static_cast<std::size_t>(std::popcount(byte));
    return ones;
}

void require_length(const BitStream& bits, std::size_t min_bits, const char* test) {
    if (bits.size() < min_bits)
        throw UsageError(std::string(test) + ": need at least " + std::to_string(min_bits) + " bits");
}

}  // namespace

std::size_t AutocorrResult::exceedances() const {
    std::size_t count = 0;
    for (std::size_t k = 1; k < coefficients.size(); ++k)
        if (std::abs(coefficients[k]) > three_sigma_bound) ++count;
    return count;
}

AutocorrResult autocorrelation(const BitStream& bits, std::size_t max_lag) {
    const std::size_t n = bits.size();
    if (n < max_lag + 1) throw UsageError("autocorrelation: need at least max_lag + 1 bits");
    const auto words = to_words(bits);

    AutocorrResult r;
    r.n_bits = n;
    r.three_sigma_bound = 3.0 / std::sqrt(static_cast<double>(n));
    r.coefficients.resize(max_lag + 1);
    r.coefficients[0] = 1.0;
    for (std::size_t k = 1; k <= max_lag; ++k) {
        const std::uint64_t mismatches =
            lagged_popcount(words, n, k, [](std::uint64_t a, std::uint64_t b) { return a ^ b; });
        const double pairs = static_cast<double>(n - k);
        r.coefficients[k] = (pairs - 2.0 * static_cast<double>(mismatches)) / pairs;
    }
    return r;
}

std::vector<std::uint64_t> raw_autocorrelation(const BitStream& bits, std::size_t max_lag) {
    const std::size_t n = bits.size();
    if (n < max_lag + 1) throw UsageError("raw_autocorrelation: need at least max_lag + 1 bits");
    const auto words = to_words(bits);
    std::vector<std::uint64_t> sums(max_lag + 1);
    for (std::size_t k = 0; k <= max_lag; ++k)
        sums[k] = lagged_popcount(words, n, k, [](std::uint64_t a, std::uint64_t b) { return a & b; });
    return sums;
}

double monobit_test(const BitStream& bits) {
    require_length(bits, 100, "monobit_test");
    const double n = static_cast<double>(bits.size());
    const double s = 2.0 * static_cast<double>(count_ones(bits)) - n;
    return std::erfc(std::abs(s) / std::sqrt(2.0 * n));
}

double runs_test(const BitStream& bits) {
    require_length(bits, 100, "runs_test");
    const std::size_t n = bits.size();
    const double nd = static_cast<double>(n);
    const double pi = static_cast<double>(count_ones(bits)) / nd;
    if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(nd)) return 0.0;

    const auto words = to_words(bits);
    const std::uint64_t transitions =
        lagged_popcount(words, n, 1, [](std::uint64_t a, std::uint64_t b) { return a ^ b; });
    const double runs = 1.0 + static_cast<double>(transitions);
    const double spread = pi * (1.0 - pi);
    return std::erfc(std::abs(runs - 2.0 * nd * spread) / (2.0 * std::sqrt(2.0 * nd) * spread));
}

double chi_square_bytes_statistic(const BitStream& bits) {
    require_length(bits, 256 * 8, "chi_square_bytes");
    const std::size_t full_bytes = bits.size() / 8;
    std::array<std::uint64_t, 256> counts{};
    for (std::size_t i = 0; i < full_bytes; ++i) ++counts[bits.bytes()[i]];
    const double expected = static_cast<double>(full_bytes) / 256.0;
    double stat = 0.0;
    for (const auto c : counts) {
        const double d = static_cast<double>(c) - expected;
        stat += d * d / expected;
    }
    return stat;
}

double chi_square_bytes(const BitStream& bits) {
    const double stat = chi_square_bytes_statistic(bits);
    return boost::math::gamma_q(255.0 / 2.0, stat / 2.0);
}

double block_frequency_test(const BitStream& bits, std::size_t block_len) {
    if (block_len == 0) throw UsageError("block_frequency_test: block_len must be >= 1");
    const std::size_t blocks = bits.size() / block_len;
    if (blocks < 100) throw UsageError("block_frequency_test: need at least 100 blocks");
    double chi2 = 0.0;
    for (std::size_t b = 0; b < blocks; ++b) {
        std::size_t ones = 0;
        const std::size_t begin = b * block_len;
        std::size_t done = 0;
        for (; done + 64 <= block_len; done += 64)
            ones += static_cast<std::size_t>(std::popcount(bits.word_at(begin + done)));
        if (done < block_len) {
            const std::uint64_t mask = (std::uint64_t{1} << (block_len - done)) - 1;
            ones += static_cast<std::size_t>(std::popcount(bits.word_at(begin + done) & mask));
        }
        const double d = static_cast<double>(ones) / static_cast<double>(block_len) - 0.5;
        chi2 += d * d;
    }
    chi2 *= 4.0 * static_cast<double>(block_len);
    return boost::math::gamma_q(static_cast<double>(blocks) / 2.0, chi2 / 2.0);
}

double kolmogorov_survival(double x) {
    if (x <= 0.0) return 1.0;
    if (x < 1.18) {
        // Jacobi-theta form, fast for small x.
        const double pi2 = std::numbers::pi * std::numbers::pi;
        double cdf = 0.0;
        for (int k = 1; k <= 20; ++k) {
            const double odd = 2.0 * k - 1.0;
            cdf += std::exp(-odd * odd * pi2 / (8.0 * x * x));
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-300) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_uniformity(std::vector<double> pvalues) {
    if (pvalues.size() < 5) throw UsageError("ks_uniformity: need at least 5 p-values");
    std::sort(pvalues.begin(), pvalues.end());
    const double n = static_cast<double>(pvalues.size());
    double d = 0.0;
    for (std::size_t i = 0; i < pvalues.size(); ++i) {
        const double x = std::clamp(pvalues[i], 0.0, 1.0);
        const double i_d = static_cast<double>(i);
        d = std::max({d, (i_d + 1.0) / n - x, x - i_d / n});
    }
    return {d, kolmogorov_survival(std::sqrt(n) * d)};
}

KsResult ks_uniformity(const PValueSet& pvalues) {
    std::vector<double> ps;
    ps.reserve(pvalues.size());
    for (const auto& p : pvalues) ps.push_back(p.p);
    return ks_uniformity(std::move(ps));
}

std::vector<std::string> battery_test_names() { return {"monobit", "block_frequency", "runs", "chi_square_bytes"}; }

PValueSet run_battery(const BitStream& bits, std::size_t substreams, std::size_t block_len) {
    if (substreams == 0) throw UsageError("run_battery: substreams must be >= 1");
    const std::size_t len = bits.size() / substreams;
    PValueSet out;
    out.reserve(4 * substreams);
    for (std::size_t s = 0; s < substreams; ++s) {
        const BitStream sub = bits.slice(s * len, len);
        out.push_back({"monobit", s, monobit_test(sub)});
        out.push_back({"block_frequency", s, block_frequency_test(sub, block_len)});
        out.push_back({"runs", s, runs_test(sub)});
        out.push_back({"chi_square_bytes", s, chi_square_bytes(sub)});
    }
    return out;
}

std::vector<double> select(const PValueSet& set, const std::string& test) {
    std::vector<double> ps;
    for (const auto& p : set)
        if (p.test == test) ps.push_back(p.p);
    return ps;
}

}  // namespace qrng::stats
