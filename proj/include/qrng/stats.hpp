#pragma once

#include "qrng/bitstream.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace qrng::stats {

struct AutocorrResult {
    std::vector<double> coefficients;  // rho(k), k = 0..max_lag
    std::size_t n_bits = 0;
    double three_sigma_bound = 0.0;    // 3 / sqrt(n_bits)

    /// Lags in [1, max_lag] with |rho| above the bound.
    std::size_t exceedances() const;
};

/// Normalized bitwise autocorrelation on the +/-1 mapping:
/// rho(k) = (1 / (n - k)) * sum_i s_i s_{i+k}.
AutocorrResult autocorrelation(const BitStream& bits, std::size_t max_lag);

/// Unnormalized correlation sum_i x_i x_{i+k} of the 0/1 sequence with
/// itself for k = 0..max_lag (the zero-padded full correlation evaluated at
/// the non-negative lags).
std::vector<std::uint64_t> raw_autocorrelation(const BitStream& bits, std::size_t max_lag);

double monobit_test(const BitStream& bits);
/// Wald-Wolfowitz style runs test; returns 0 when the monobit prerequisite
/// |pi - 1/2| >= 2 / sqrt(n) fails.
double runs_test(const BitStream& bits);
/// Pearson chi-square of byte frequencies against uniform, 255 d.o.f.
double chi_square_bytes(const BitStream& bits);
double chi_square_bytes_statistic(const BitStream& bits);
double block_frequency_test(const BitStream& bits, std::size_t block_len);

struct PValue {
    std::string test;
    std::size_t substream = 0;
    double p = 0.0;
};
using PValueSet = std::vector<PValue>;

struct KsResult {
    double d = 0.0;
    double p = 0.0;
};

/// One-sample Kolmogorov-Smirnov statistic against Uniform(0,1) with the
/// asymptotic Kolmogorov tail probability at sqrt(n) * D.
KsResult ks_uniformity(std::vector<double> pvalues);
KsResult ks_uniformity(const PValueSet& pvalues);

/// Complementary Kolmogorov distribution, P(K > x).
double kolmogorov_survival(double x);

inline constexpr std::size_t kBlockFrequencyLen = 1000;

/// The native battery on `substreams` equal, disjoint slices of `bits`.
PValueSet run_battery(const BitStream& bits, std::size_t substreams,
                      std::size_t block_len = kBlockFrequencyLen);

/// Names of the battery tests in the order run_battery emits them.
std::vector<std::string> battery_test_names();

/// p-values of one test extracted from a set.
std::vector<double> select(const PValueSet& set, const std::string& test);

}  // namespace qrng::stats
