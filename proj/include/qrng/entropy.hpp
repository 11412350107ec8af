#pragma once

#include "qrng/raw_block.hpp"
#include "qrng/sim_core.hpp"

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace qrng::entropy {

/// The LED-on variance does not exceed the LED-off variance.
class NoQuantumContribution : public std::domain_error {
  public:
    NoQuantumContribution() : std::domain_error("no measurable quantum contribution") {}
};

struct Histogram {
    std::vector<std::uint64_t> bin_counts;
    std::uint64_t total = 0;
};

struct NoiseStats {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    std::size_t count = 0;
};

struct LinearFitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
    double quadratic_coeff = 0.0;   // x^2 coefficient of the separate quadratic fit
    double quadratic_t_stat = 0.0;  // quadratic_coeff / its standard error

    bool super_poissonian() const;
};

/// |t| at or above this flags a significant quadratic (super-Poissonian) term.
inline constexpr double kQuadraticSignificance = 3.0;
inline constexpr double kDefaultClearanceBits = 2.0;

Histogram histogram(const RawCodeBlock& block);

/// Exact integer accumulation of the first two moments, then unbiased variance.
NoiseStats noise_stats(const RawCodeBlock& block);
NoiseStats noise_stats(std::span<const std::uint16_t> codes);

/// 20 log10((on - off) / off), as the device figure of merit is defined.
double qcnr(const NoiseStats& led_on, const NoiseStats& led_off);
/// Same ratio on the conventional power scale, 10 log10.
double qcnr_power_db(const NoiseStats& led_on, const NoiseStats& led_off);

/// Plug-in most-common-value estimate: -log2(max_x count(x) / total).
double min_entropy(const Histogram& hist);

int extraction_ratio(double min_entropy_bits, double clearance_bits = kDefaultClearanceBits);

LinearFitResult linearity_fit(std::span<const double> x, std::span<const double> y);
LinearFitResult linearity_fit(std::span<const sim::SweepPoint> sweep);

}  // namespace qrng::entropy
