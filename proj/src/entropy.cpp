#include "qrng/entropy.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qrng::entropy {

bool LinearFitResult::super_poissonian() const { return std::abs(quadratic_t_stat) >= kQuadraticSignificance; }

Histogram histogram(const RawCodeBlock& block) {
    if (block.empty()) throw UsageError("histogram: empty block");
    Histogram h;
    h.bin_counts.assign(std::size_t{1} << block.adc_bits, 0);
    for (const auto code : block.codes) {
        if (code >= h.bin_counts.size()) throw UsageError("histogram: code exceeds adc_bits");
        ++h.bin_counts[code];
    }
    h.total = block.codes.size();
    return h;
}

NoiseStats noise_stats(std::span<const std::uint16_t> codes) {
    if (codes.size() < 2) throw UsageError("noise_stats: need at least two codes");
    // 16-bit codes: sum of squares fits easily in 128 bits for any realistic n.
    unsigned __int128 sum = 0;
    unsigned __int128 sum_sq = 0;
    for (const std::uint64_t c : codes) {
        sum += c;
        sum_sq += c * c;
    }
    const auto n = static_cast<unsigned __int128>(codes.size());
    // n * sum_sq - sum^2 = n * sum (x - mean)^2 >= 0 exactly.
    const unsigned __int128 scatter_n = n * sum_sq - sum * sum;

    NoiseStats s;
    s.count = codes.size();
    const double nd = static_cast<double>(codes.size());
    s.mean = static_cast<double>(sum) / nd;
    s.variance = static_cast<double>(scatter_n) / (nd * (nd - 1.0));
    return s;
}

NoiseStats noise_stats(const RawCodeBlock& block) { return noise_stats(std::span<const std::uint16_t>(block.codes)); }

namespace {

double excess_ratio(const NoiseStats& on, const NoiseStats& off) {
    if (!(on.variance > 0.0) || !(off.variance > 0.0)) throw UsageError("qcnr: variances must be positive");
    if (on.variance <= off.variance) throw NoQuantumContribution();
    return (on.variance - off.variance) / off.variance;
}

}  // namespace

double qcnr(const NoiseStats& led_on, const NoiseStats& led_off) {
    return 20.0 * std::log10(excess_ratio(led_on, led_off));
}

double qcnr_power_db(const NoiseStats& led_on, const NoiseStats& led_off) {
    return 10.0 * std::log10(excess_ratio(led_on, led_off));
}

double min_entropy(const Histogram& hist) {
    if (hist.total < 1) throw UsageError("min_entropy: empty histogram");
    const auto peak = *std::max_element(hist.bin_counts.begin(), hist.bin_counts.end());
    return -std::log2(static_cast<double>(peak) / static_cast<double>(hist.total));
}

int extraction_ratio(double min_entropy_bits, double clearance_bits) {
    if (!(clearance_bits >= 0.0)) throw UsageError("extraction_ratio: clearance must be >= 0");
    const double usable = std::floor(min_entropy_bits - clearance_bits);
    return usable > 0.0 ? static_cast<int>(usable) : 0;
}

LinearFitResult linearity_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw UsageError("linearity_fit: x and y differ in length");
    if (x.size() < 3) throw UsageError("linearity_fit: need at least three points");
    const std::size_t n = x.size();
    const double nd = static_cast<double>(n);

    const double x_mean = std::accumulate(x.begin(), x.end(), 0.0) / nd;
    const double y_mean = std::accumulate(y.begin(), y.end(), 0.0) / nd;
    double spread = 0.0;
    for (const double xi : x) spread = std::max(spread, std::abs(xi - x_mean));
    if (!(spread > 0.0)) throw UsageError("linearity_fit: all x values are equal");

    LinearFitResult r;

    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - x_mean;
        const double dy = y[i] - y_mean;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    r.slope = sxy / sxx;
    r.intercept = y_mean - r.slope * x_mean;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (r.intercept + r.slope * x[i]);
        rss += e * e;
    }
    r.r_squared = syy > 0.0 ? std::clamp(1.0 - rss / syy, 0.0, 1.0) : 1.0;

    // Quadratic fit on u = (x - mean) / spread, then mapped back to x.
    Eigen::MatrixXd design(n, 3);
    Eigen::VectorXd rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double u = (x[i] - x_mean) / spread;
        const auto row = static_cast<Eigen::Index>(i);
        design(row, 0) = 1.0;
        design(row, 1) = u;
        design(row, 2) = u * u;
        rhs(row) = y[i];
    }
    const Eigen::Vector3d beta = design.colPivHouseholderQr().solve(rhs);
    r.quadratic_coeff = beta(2) / (spread * spread);

    if (n > 3) {
        const double quad_rss = (rhs - design * beta).squaredNorm();
        // Residuals can vanish on exact data; floor them at rounding level so
        // the t statistic stays finite and meaningful.
        double y_scale = 0.0;
        for (const double yi : y) y_scale = std::max(y_scale, std::abs(yi));
        const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * y_scale;
        const double sigma2 = std::max(quad_rss, nd * rounding * rounding) / (nd - 3.0);
        const Eigen::Matrix3d cov = (design.transpose() * design).inverse();
        const double se = std::sqrt(sigma2 * cov(2, 2));
        r.quadratic_t_stat = se > 0.0 ? beta(2) / se : 0.0;
    } else {
        r.quadratic_t_stat = std::numeric_limits<double>::quiet_NaN();
    }
    return r;
}

LinearFitResult linearity_fit(std::span<const sim::SweepPoint> sweep) {
    std::vector<double> x, y;
    x.reserve(sweep.size());
    y.reserve(sweep.size());
    for (const auto& p : sweep) {
        x.push_back(p.drive_current);
        y.push_back(p.variance);
    }
    return linearity_fit(x, y);
}

}  // namespace qrng::entropy
