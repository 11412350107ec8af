#include "qrng/entropy.hpp"
#include "qrng/sim_core.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace qrng;
using namespace qrng::sim;

namespace {

struct Moments {
    double mean;
    double variance;
};

template <class T>
Moments moments(const std::vector<T>& xs) {
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (const auto x : xs) mean += static_cast<double>(x);
    mean /= n;
    double ss = 0.0;
    for (const auto x : xs) ss += (static_cast<double>(x) - mean) * (static_cast<double>(x) - mean);
    return {mean, ss / (n - 1.0)};
}

double fano(const std::vector<std::int64_t>& xs) {
    const auto m = moments(xs);
    return m.variance / m.mean;
}

PhysicsConfig flux_config(double lambda, double depth = 0.0) {
    PhysicsConfig p;
    p.drive_current = 1.0;
    p.flux_coefficient = lambda;
    p.classical_mod_depth = depth;
    p.classical_mod_cutoff = 1.0e3;
    return p;
}

constexpr double kInternalRate = 400.0e3;

AcquisitionConfig quiet_acquisition() {
    AcquisitionConfig a;
    a.electronic_noise_rms = 0.0;
    a.adc_noise_enabled = false;
    return a;
}

}  // namespace

TEST_CASE("generate_photon_counts: zero drive gives zero counts") {
    auto p = flux_config(1000.0);
    p.drive_current = 0.0;
    const auto counts = generate_photon_counts(p, 10'000, kInternalRate, 1);
    CHECK(std::all_of(counts.begin(), counts.end(), [](auto c) { return c == 0; }));
}

TEST_CASE("generate_photon_counts: Poisson Fano factor is one without classical noise") {
    const auto counts = generate_photon_counts(flux_config(1000.0), 1'000'000, kInternalRate, 2);
    CHECK(moments(counts).mean == doctest::Approx(1000.0).epsilon(0.001));
    CHECK(fano(counts) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("generate_photon_counts: common-mode modulation makes the light super-Poissonian") {
    const double lambda = 1000.0;
    const double depth = 0.05;
    // Mixed Poisson: Var = lambda + lambda^2 Var(c), Var(c) = depth^2.
    const double expected_fano = 1.0 + lambda * depth * depth;
    REQUIRE(expected_fano == doctest::Approx(3.5));

    const auto counts = generate_photon_counts(flux_config(lambda, depth), 1'000'000, kInternalRate, 3);
    CHECK(fano(counts) > 1.5);
    CHECK(fano(counts) == doctest::Approx(expected_fano).epsilon(0.15));
}

TEST_CASE("generate_photon_counts: rejects invalid sources") {
    auto p = flux_config(1000.0);
    p.flux_coefficient = 0.0;
    CHECK_THROWS_AS(generate_photon_counts(p, 10, kInternalRate, 1), ConfigError);
    p = flux_config(1000.0);
    p.drive_current = -1.0;
    CHECK_THROWS_AS(generate_photon_counts(p, 10, kInternalRate, 1), ConfigError);
    CHECK_THROWS_AS(generate_photon_counts(flux_config(1.0), 0, kInternalRate, 1), UsageError);
}

TEST_CASE("split_and_detect: unit efficiency conserves photons") {
    auto p = flux_config(500.0);
    p.quantum_efficiency = 1.0;
    const auto counts = generate_photon_counts(p, 50'000, kInternalRate, 4);
    const auto arms = split_and_detect(counts, p, 4);
    for (std::size_t i = 0; i < counts.size(); ++i) REQUIRE(arms.pe1[i] + arms.pe2[i] == counts[i]);
}

TEST_CASE("split_and_detect: thinning a Poisson stream leaves each arm Poisson") {
    auto p = flux_config(2000.0);
    p.quantum_efficiency = 0.8;
    const auto counts = generate_photon_counts(p, 1'000'000, kInternalRate, 5);
    const auto arms = split_and_detect(counts, p, 5);
    CHECK(moments(arms.pe1).mean == doctest::Approx(800.0).epsilon(0.002));
    CHECK(moments(arms.pe2).mean == doctest::Approx(800.0).epsilon(0.002));
    CHECK(fano(arms.pe1) == doctest::Approx(1.0).epsilon(0.01));
    CHECK(fano(arms.pe2) == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("split_and_detect: routing everything to PD1 empties PD2") {
    auto p = flux_config(300.0);
    p.split_ratio = 1.0;
    const auto counts = generate_photon_counts(p, 10'000, kInternalRate, 6);
    const auto arms = split_and_detect(counts, p, 6);
    CHECK(std::all_of(arms.pe2.begin(), arms.pe2.end(), [](auto c) { return c == 0; }));
    CHECK(arms.pe1 == counts);
}

TEST_CASE("split_and_detect: empty input is a usage error") {
    CHECK_THROWS_AS(split_and_detect({}, flux_config(1.0), 1), UsageError);
}

TEST_CASE("balanced_difference: identical arms cancel and lengths must agree") {
    const std::vector<std::int64_t> a{5, 7, 9, 0};
    const auto d = balanced_difference(a, a);
    CHECK(std::all_of(d.begin(), d.end(), [](auto x) { return x == 0; }));
    const std::vector<std::int64_t> b{1, 2, 3};
    CHECK_THROWS_AS(balanced_difference(a, b), UsageError);
    CHECK(balanced_difference(std::vector<std::int64_t>{3, 1}, std::vector<std::int64_t>{1, 4}) ==
          std::vector<std::int64_t>{2, -3});
}

TEST_CASE("balanced_difference: independent shot noise powers add") {
    const double lambda = 2000.0;
    auto p = flux_config(lambda);
    const auto counts = generate_photon_counts(p, 1'000'000, kInternalRate, 7);
    const auto arms = split_and_detect(counts, p, 7);
    const auto diff = balanced_difference(arms.pe1, arms.pe2);
    const double var_diff = moments(diff).variance;
    // Oracle: sum of the per-arm sample variances.
    const double additive = moments(arms.pe1).variance + moments(arms.pe2).variance;
    CHECK(var_diff == doctest::Approx(lambda).epsilon(0.01));
    CHECK(var_diff == doctest::Approx(additive).epsilon(0.01));
}

TEST_CASE("balanced_difference: common-mode intensity noise is rejected") {
    const double lambda = 2000.0;
    auto variance_at = [&](double depth, double epsilon) {
        auto p = flux_config(lambda, depth);
        p.split_imbalance_epsilon = epsilon;
        const auto counts = generate_photon_counts(p, 1'000'000, kInternalRate, 8);
        const auto arms = split_and_detect(counts, p, 8);
        return moments(balanced_difference(arms.pe1, arms.pe2)).variance;
    };
    for (const double eps : {0.0, 0.01}) {
        CAPTURE(eps);
        const double quiet = variance_at(0.0, eps);
        const double modulated = variance_at(0.05, eps);
        CHECK(std::abs(modulated - quiet) / quiet < 0.05);
    }
    // A single detector sees the full super-Poissonian excess, for contrast.
    const auto counts = generate_photon_counts(flux_config(lambda, 0.05), 1'000'000, kInternalRate, 8);
    CHECK(fano(counts) > 2.0);
}

TEST_CASE("analog_chain: silent input sits at the offset") {
    auto acq = quiet_acquisition();
    const std::vector<double> zeros(1000, 0.0);
    const auto v = analog_chain(std::span<const double>(zeros), acq, 1);
    CHECK(std::all_of(v.begin(), v.end(), [&](double x) { return x == acq.offset_volts; }));
}

TEST_CASE("analog_chain: a tone at the photodiode bandwidth is 3 dB down") {
    auto acq = quiet_acquisition();
    acq.offset_volts = 0.0;
    acq.adc_sample_rate = 2.5e6;  // internal rate 10 MHz resolves the 250 kHz tone
    const double fs = internal_sample_rate(acq);

    auto amplitude_at = [&](double f) {
        const std::size_t n = 200'000;
        std::vector<double> tone(n);
        for (std::size_t i = 0; i < n; ++i) tone[i] = 1000.0 * std::sin(2.0 * std::numbers::pi * f * i / fs);
        const auto v = analog_chain(std::span<const double>(tone), acq, 1);
        // Project the settled tail on sin/cos.
        double s = 0.0, c = 0.0;
        const std::size_t start = n / 2;
        for (std::size_t i = start; i < n; ++i) {
            const double ph = 2.0 * std::numbers::pi * f * i / fs;
            s += v[i] * std::sin(ph);
            c += v[i] * std::cos(ph);
        }
        return 2.0 * std::hypot(s, c) / static_cast<double>(n - start);
    };

    const double fc = acq.pd_bandwidth;
    const double passband = amplitude_at(fc / 100.0);
    // Analytic single-pole response 1 / sqrt(1 + (f/fc)^2).
    CHECK(passband / (1000.0 * AnalogChain(acq, 0).volts_per_count()) ==
          doctest::Approx(1.0 / std::sqrt(1.0 + 1e-4)).epsilon(0.01));
    CHECK(amplitude_at(fc) / passband == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(0.02));
}

TEST_CASE("analog_chain: electronic noise is shaped by the filter") {
    for (const double rate : {100.0e3, 2.5e6}) {
        CAPTURE(rate);
        auto acq = quiet_acquisition();
        acq.adc_sample_rate = rate;
        acq.electronic_noise_rms = 0.01;
        const double pole = lowpass_pole(acq.pd_bandwidth, internal_sample_rate(acq));
        // Oracle: noise-equivalent gain from the explicit impulse response,
        // h[k] = (1 - a) a^k, summed until negligible.
        double energy = 0.0;
        for (int k = 0; k < 10'000; ++k) energy += std::pow((1.0 - pole) * std::pow(pole, k), 2);
        const double expected = acq.electronic_noise_rms * std::sqrt(energy);

        const std::vector<double> zeros(1'000'000, 0.0);
        const auto v = analog_chain(std::span<const double>(zeros), acq, 9);
        const std::vector<double> tail(v.begin() + 1000, v.end());
        CHECK(std::sqrt(moments(tail).variance) == doctest::Approx(expected).epsilon(0.03));
    }
}

TEST_CASE("adc_sample: mid-scale, clamping and decimation") {
    auto acq = quiet_acquisition();
    const std::vector<double> mid(4000, acq.full_scale_volts / 2.0);
    const auto block = adc_sample(mid, acq, 1);
    CHECK(block.size() == 1000);
    CHECK(std::all_of(block.codes.begin(), block.codes.end(), [](auto c) { return c == 2048; }));

    const std::vector<double> high{3.3, 3.3, 3.3, 3.3, 9.0, 9.0, 9.0, 9.0, -1.0, -1.0, -1.0, -1.0};
    const auto clamped = adc_sample(high, acq, 1);
    CHECK(clamped.codes == std::vector<std::uint16_t>{4095, 4095, 0});

    const std::vector<double> partial(7, 1.0);
    CHECK(adc_sample(partial, acq, 1).size() == 1);
}

TEST_CASE("adc_sample: calibrated noise yields ENOB 8 on a sine-fit test") {
    AcquisitionConfig acq;
    acq.adc_noise_enabled = true;
    const double codes_per_volt = 4096.0 / acq.full_scale_volts;
    const std::size_t m = 1 << 16;  // ADC-rate samples
    const double cycles = 1021.0;   // coherent, co-prime with m
    const double amplitude_codes = 0.995 * 2048.0;

    std::vector<double> volts(m * kOversampling);
    for (std::size_t i = 0; i < volts.size(); ++i) {
        const double t = static_cast<double>(i) / kOversampling;  // in ADC sample periods
        volts[i] = (2048.0 + amplitude_codes * std::sin(2.0 * std::numbers::pi * cycles * t / m)) / codes_per_volt;
    }
    const auto block = adc_sample(volts, acq, 10);
    REQUIRE(block.size() == m);

    // Three-parameter least-squares sine fit at the known frequency.
    double scc = 0, sss = 0, ssc = 0, sc = 0, ss = 0, n = static_cast<double>(m);
    double yc = 0, ys = 0, y1 = 0;
    for (std::size_t k = 0; k < m; ++k) {
        const double t = static_cast<double>(k) + (kOversampling - 1) / static_cast<double>(kOversampling);
        const double ph = 2.0 * std::numbers::pi * cycles * t / m;
        const double c = std::cos(ph), s = std::sin(ph), y = block.codes[k];
        scc += c * c; sss += s * s; ssc += s * c; sc += c; ss += s;
        yc += y * c; ys += y * s; y1 += y;
    }
    // Solve the 3x3 normal equations by Cramer's rule.
    const double a[3][3] = {{scc, ssc, sc}, {ssc, sss, ss}, {sc, ss, n}};
    const double b[3] = {yc, ys, y1};
    auto det3 = [](const double mtx[3][3]) {
        return mtx[0][0] * (mtx[1][1] * mtx[2][2] - mtx[1][2] * mtx[2][1]) -
               mtx[0][1] * (mtx[1][0] * mtx[2][2] - mtx[1][2] * mtx[2][0]) +
               mtx[0][2] * (mtx[1][0] * mtx[2][1] - mtx[1][1] * mtx[2][0]);
    };
    double coef[3];
    const double d = det3(a);
    for (int col = 0; col < 3; ++col) {
        double mtx[3][3];
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) mtx[r][c] = c == col ? b[r] : a[r][c];
        coef[col] = det3(mtx) / d;
    }
    double resid = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        const double t = static_cast<double>(k) + (kOversampling - 1) / static_cast<double>(kOversampling);
        const double ph = 2.0 * std::numbers::pi * cycles * t / m;
        const double fit = coef[0] * std::cos(ph) + coef[1] * std::sin(ph) + coef[2];
        resid += (block.codes[k] - fit) * (block.codes[k] - fit);
    }
    const double fitted_amp = std::hypot(coef[0], coef[1]);
    const double sinad = 10.0 * std::log10((fitted_amp * fitted_amp / 2.0) / (resid / n));
    const double enob = (sinad - 1.76) / 6.02;
    CHECK(fitted_amp == doctest::Approx(amplitude_codes).epsilon(0.001));
    CHECK(enob == doctest::Approx(8.0).epsilon(0.2 / 8.0));
}

TEST_CASE("simulate_run: silent chain reads mid-scale") {
    auto phys = flux_config(1000.0);
    auto acq = quiet_acquisition();
    const auto block = simulate_run(phys, acq, 5000, false, 1);
    CHECK(block.size() == 5000);
    CHECK_FALSE(block.led_on);
    CHECK(std::all_of(block.codes.begin(), block.codes.end(), [](auto c) { return c == 2048; }));
}

TEST_CASE("simulate_run: calibrated default shows shot noise far above the classical floor") {
    const auto cfg = load_config(default_config_path());
    const auto on = simulate_run(cfg.physics, cfg.acquisition, 200'000, true, 21);
    const auto off = simulate_run(cfg.physics, cfg.acquisition, 200'000, false, 22);
    const double ratio = entropy::noise_stats(on).variance / entropy::noise_stats(off).variance;
    // 32 dB on the 20 log10 scale is a variance excess of 10^(32/20) ~ 39.8.
    CHECK(ratio > 40.0);
    CHECK(on.led_on);
    CHECK(on.config_digest == config_digest(cfg.physics, cfg.acquisition));
    CHECK(on.config_digest == off.config_digest);
}

TEST_CASE("simulate_run: deterministic and equal to composing the stages") {
    const auto cfg = load_config(default_config_path());
    const std::size_t n = 3000;
    const std::uint64_t seed = 0xC0FFEE;
    const auto a = simulate_run(cfg.physics, cfg.acquisition, n, true, seed);
    const auto b = simulate_run(cfg.physics, cfg.acquisition, n, true, seed);
    CHECK(a == b);
    CHECK(a.codes != simulate_run(cfg.physics, cfg.acquisition, n, true, seed + 1).codes);

    const auto counts =
        generate_photon_counts(cfg.physics, n * kOversampling, internal_sample_rate(cfg.acquisition), seed);
    const auto arms = split_and_detect(counts, cfg.physics, seed);
    const auto diff = balanced_difference(arms.pe1, arms.pe2);
    const auto volts = analog_chain(std::span<const std::int64_t>(diff), cfg.acquisition, seed,
                                    cfg.physics.electron_charge);
    const auto composed = adc_sample(volts, cfg.acquisition, seed);
    CHECK(composed.codes == a.codes);
}

TEST_CASE("current_sweep: zero-current step is the LED-off floor and the trend is linear") {
    const auto cfg = load_config(default_config_path());
    const std::size_t steps = 20, per_step = 20'000;
    const std::uint64_t seed = 77;
    const auto sweep = current_sweep(cfg.physics, cfg.acquisition, steps, per_step, seed);
    REQUIRE(sweep.size() == steps);
    CHECK(sweep.front().drive_current == 0.0);
    CHECK(sweep.back().drive_current == doctest::Approx(cfg.physics.drive_current));

    const auto floor_seed = derive_seed(stream_seed(seed, Stream::sweep), 0);
    const auto off = simulate_run(cfg.physics, cfg.acquisition, per_step, false, floor_seed);
    CHECK(sweep.front().variance == entropy::noise_stats(off).variance);

    const auto fit = entropy::linearity_fit(sweep);
    CHECK(fit.r_squared >= 0.995);
    CHECK(std::abs(fit.quadratic_t_stat) < 3.0);
}

TEST_CASE("current_sweep: strong classical noise bends the trend quadratic") {
    auto cfg = load_config(default_config_path());
    cfg.physics.classical_mod_depth = 0.2;
    const auto fit = entropy::linearity_fit(current_sweep(cfg.physics, cfg.acquisition, 20, 20'000, 78));
    // The leaked common-mode term grows as (epsilon * lambda * depth)^2.
    CHECK(fit.quadratic_coeff > 0.0);
    CHECK(fit.quadratic_t_stat > 3.0);
    CHECK_THROWS_AS(current_sweep(cfg.physics, cfg.acquisition, 2, 100, 1), UsageError);
}

TEST_CASE("property: every thinning stage preserves Poisson statistics") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> lam(50.0, 5000.0), ratio(0.2, 0.8), eff(0.3, 1.0);
    const std::size_t n = 200'000;
    const double tol = 3.0 * std::sqrt(2.0 / n);
    for (int trial = 0; trial < 5; ++trial) {
        auto p = flux_config(lam(gen));
        p.split_ratio = ratio(gen);
        p.quantum_efficiency = eff(gen);
        CAPTURE(p.flux_coefficient);
        CAPTURE(p.split_ratio);
        CAPTURE(p.quantum_efficiency);
        const auto counts = generate_photon_counts(p, n, kInternalRate, gen());
        const auto arms = split_and_detect(counts, p, gen());
        CHECK(std::abs(fano(counts) - 1.0) < tol);
        CHECK(std::abs(fano(arms.pe1) - 1.0) < tol);
        CHECK(std::abs(fano(arms.pe2) - 1.0) < tol);
        const double var_diff = moments(balanced_difference(arms.pe1, arms.pe2)).variance;
        const double sum = moments(arms.pe1).variance + moments(arms.pe2).variance;
        CHECK(var_diff == doctest::Approx(sum).epsilon(0.02));
    }
}

TEST_CASE("photocurrent bookkeeping follows i = eta e Phi") {
    PhysicsConfig p;
    p.drive_current = 10.0;
    p.flux_coefficient = 100.0;
    p.quantum_efficiency = 0.5;
    const double rate = 1.0e6;
    CHECK(mean_photocurrent(p, rate) == doctest::Approx(0.5 * kElectronCharge * 1.0e9));
    CHECK(optical_power(p, rate) == doctest::Approx(1.0e9 * p.photon_energy));
}

TEST_CASE("adc noise sigma matches the ENOB budget") {
    AcquisitionConfig acq;
    const double sigma = adc_noise_sigma_codes(acq);
    const double total = sigma * sigma + 1.0 / 12.0;
    const double enob = (10.0 * std::log10(2048.0 * 2048.0 / 2.0 / total) - 1.76) / 6.02;
    CHECK(enob == doctest::Approx(8.0).epsilon(1e-9));
    acq.adc_enob = 12.0;  // near ideal: almost only quantization remains
    CHECK(adc_noise_sigma_codes(acq) < 0.05);
}
