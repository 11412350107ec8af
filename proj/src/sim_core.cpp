#include "qrng/sim_core.hpp"

#include "qrng/entropy.hpp"

#include <boost/random/binomial_distribution.hpp>
#include <boost/random/normal_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace qrng::sim {

namespace {

constexpr std::size_t kChunkCodes = 16384;

using Poisson = boost::random::poisson_distribution<std::int64_t, double>;
using Binomial = boost::random::binomial_distribution<std::int64_t, double>;
using Normal = boost::random::normal_distribution<double>;

std::int64_t draw_binomial(Engine& engine, std::int64_t trials, double p) {
    if (trials <= 0 || p <= 0.0) return 0;
    if (p >= 1.0) return trials;
    return Binomial(trials, p)(engine);
}

}  // namespace

double internal_sample_rate(const AcquisitionConfig& acq) { return acq.adc_sample_rate * kOversampling; }

double lowpass_pole(double cutoff_hz, double sample_rate_hz) {
    return std::exp(-2.0 * std::numbers::pi * cutoff_hz / sample_rate_hz);
}

double lowpass_noise_gain(double pole) { return std::sqrt((1.0 - pole) / (1.0 + pole)); }

double adc_noise_sigma_codes(const AcquisitionConfig& acq) {
    // Full-scale sine of amplitude 2^(bits-1) codes has power 2^(2 bits) / 8.
    const double signal_power = std::ldexp(1.0, 2 * acq.adc_bits) / 8.0;
    const double sinad_db = 6.02 * acq.adc_enob + 1.76;
    const double total_noise = signal_power / std::pow(10.0, sinad_db / 10.0);
    return std::sqrt(std::max(0.0, total_noise - 1.0 / 12.0));
}

double mean_photocurrent(const PhysicsConfig& phys, double sample_rate_hz) {
    const double photon_flux = phys.flux_coefficient * phys.drive_current * sample_rate_hz;
    return phys.quantum_efficiency * phys.electron_charge * photon_flux;
}

double optical_power(const PhysicsConfig& phys, double sample_rate_hz) {
    return phys.flux_coefficient * phys.drive_current * sample_rate_hz * phys.photon_energy;
}

// ---------------------------------------------------------------------------

PhotonSource::PhotonSource(const PhysicsConfig& phys, double sample_rate_hz, std::uint64_t seed)
    : mean_(phys.flux_coefficient * phys.drive_current),
      depth_(phys.classical_mod_depth),
      pole_(lowpass_pole(phys.classical_mod_cutoff, sample_rate_hz)),
      innovation_(phys.classical_mod_depth * std::sqrt(1.0 - pole_ * pole_)),
      engine_(seed) {
    if (!(phys.flux_coefficient > 0.0)) throw ConfigError("photon source: flux_coefficient must be > 0");
    if (!(phys.drive_current >= 0.0)) throw ConfigError("photon source: drive_current must be >= 0");
    if (!(phys.classical_mod_depth >= 0.0)) throw ConfigError("photon source: classical_mod_depth must be >= 0");
    if (!(sample_rate_hz > 0.0)) throw ConfigError("photon source: sample rate must be > 0");
}

void PhotonSource::generate(std::span<std::int64_t> out) {
    Normal gauss;
    for (auto& count : out) {
        double lambda = mean_;
        if (depth_ > 0.0) {
            if (!primed_) {
                modulation_ = depth_ * gauss(engine_);
                primed_ = true;
            } else {
                modulation_ = pole_ * modulation_ + innovation_ * gauss(engine_);
            }
            lambda = mean_ * std::max(0.0, 1.0 + modulation_);
        }
        count = lambda > 0.0 ? Poisson(lambda)(engine_) : 0;
    }
}

// ---------------------------------------------------------------------------

Detector::Detector(const PhysicsConfig& phys, std::uint64_t seed) : engine_(seed) {
    const double route1 = std::clamp(phys.split_ratio * (1.0 + phys.split_imbalance_epsilon), 0.0, 1.0);
    const double eta = phys.quantum_efficiency;
    arm1_ = route1 * eta;
    arm2_ = (1.0 - route1) * eta;
    // Multinomial factorization: PD2 draws from photons not detected at PD1.
    arm2_conditional_ = arm1_ < 1.0 ? std::clamp(arm2_ / (1.0 - arm1_), 0.0, 1.0) : 0.0;
}

void Detector::detect(std::span<const std::int64_t> counts, std::span<std::int64_t> pe1,
                      std::span<std::int64_t> pe2) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const std::int64_t first = draw_binomial(engine_, counts[i], arm1_);
        pe1[i] = first;
        pe2[i] = draw_binomial(engine_, counts[i] - first, arm2_conditional_);
    }
}

// ---------------------------------------------------------------------------

AnalogChain::AnalogChain(const AcquisitionConfig& acq, std::uint64_t seed, double electron_charge)
    : volts_per_count_(electron_charge * internal_sample_rate(acq) * acq.transimpedance_gain * acq.voltage_gain),
      pole_(lowpass_pole(acq.pd_bandwidth, internal_sample_rate(acq))),
      noise_rms_(acq.electronic_noise_rms),
      offset_(acq.offset_volts),
      engine_(seed) {}

void AnalogChain::process(std::span<const double> diff, std::span<double> volts) {
    Normal gauss;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        double drive = diff[i] * volts_per_count_;
        if (noise_rms_ > 0.0) drive += noise_rms_ * gauss(engine_);
        state_ = pole_ * state_ + (1.0 - pole_) * drive;
        volts[i] = state_ + offset_;
    }
}

// ---------------------------------------------------------------------------

Adc::Adc(const AcquisitionConfig& acq, std::uint64_t seed)
    : codes_per_volt_(std::ldexp(1.0, acq.adc_bits) / acq.full_scale_volts),
      noise_sigma_(acq.adc_noise_enabled ? adc_noise_sigma_codes(acq) : 0.0),
      max_code_(std::ldexp(1.0, acq.adc_bits) - 1.0),
      engine_(seed) {}

void Adc::sample(std::span<const double> volts, std::vector<std::uint16_t>& codes) {
    Normal gauss;
    for (const double v : volts) {
        if (phase_++ % kOversampling != kOversampling - 1) continue;
        double x = v * codes_per_volt_;
        if (noise_sigma_ > 0.0) x += noise_sigma_ * gauss(engine_);
        const double code = std::clamp(std::floor(x + 0.5), 0.0, max_code_);
        codes.push_back(static_cast<std::uint16_t>(code));
    }
}

// ---------------------------------------------------------------------------

std::vector<std::int64_t> generate_photon_counts(const PhysicsConfig& phys, std::size_t n, double sample_rate_hz,
                                                 std::uint64_t seed) {
    if (n < 1) throw UsageError("generate_photon_counts: n must be >= 1");
    PhotonSource source(phys, sample_rate_hz, stream_seed(seed, Stream::photons));
    std::vector<std::int64_t> counts(n);
    source.generate(counts);
    return counts;
}

DetectorOutput split_and_detect(std::span<const std::int64_t> counts, const PhysicsConfig& phys,
                                std::uint64_t seed) {
    if (counts.empty()) throw UsageError("split_and_detect: counts must be nonempty");
    Detector detector(phys, stream_seed(seed, Stream::detection));
    DetectorOutput out{std::vector<std::int64_t>(counts.size()), std::vector<std::int64_t>(counts.size())};
    detector.detect(counts, out.pe1, out.pe2);
    return out;
}

std::vector<std::int64_t> balanced_difference(std::span<const std::int64_t> pe1,
                                              std::span<const std::int64_t> pe2) {
    if (pe1.size() != pe2.size()) throw UsageError("balanced_difference: arms differ in length");
    std::vector<std::int64_t> diff(pe1.size());
    std::transform(pe1.begin(), pe1.end(), pe2.begin(), diff.begin(), std::minus<>{});
    return diff;
}

std::vector<double> analog_chain(std::span<const double> diff, const AcquisitionConfig& acq, std::uint64_t seed,
                                 double electron_charge) {
    AnalogChain chain(acq, stream_seed(seed, Stream::analog), electron_charge);
    std::vector<double> volts(diff.size());
    chain.process(diff, volts);
    return volts;
}

std::vector<double> analog_chain(std::span<const std::int64_t> diff, const AcquisitionConfig& acq,
                                 std::uint64_t seed, double electron_charge) {
    const std::vector<double> real(diff.begin(), diff.end());
    return analog_chain(std::span<const double>(real), acq, seed, electron_charge);
}

RawCodeBlock adc_sample(std::span<const double> volts, const AcquisitionConfig& acq, std::uint64_t seed) {
    Adc adc(acq, stream_seed(seed, Stream::adc));
    RawCodeBlock block;
    block.adc_bits = acq.adc_bits;
    block.sample_rate_hz = static_cast<std::uint32_t>(std::llround(acq.adc_sample_rate));
    block.rng_seed = seed;
    block.codes.reserve(volts.size() / kOversampling);
    adc.sample(volts, block.codes);
    return block;
}

RawCodeBlock simulate_run(const PhysicsConfig& phys, const AcquisitionConfig& acq, std::size_t n_codes, bool led_on,
                          std::uint64_t seed) {
    if (n_codes < 1) throw UsageError("simulate_run: n_codes must be >= 1");
    phys.validate();
    acq.validate();

    PhysicsConfig effective = phys;
    if (!led_on) effective.drive_current = 0.0;

    const double rate = internal_sample_rate(acq);
    PhotonSource source(effective, rate, stream_seed(seed, Stream::photons));
    Detector detector(effective, stream_seed(seed, Stream::detection));
    AnalogChain chain(acq, stream_seed(seed, Stream::analog), effective.electron_charge);
    Adc adc(acq, stream_seed(seed, Stream::adc));

    RawCodeBlock block;
    block.adc_bits = acq.adc_bits;
    block.sample_rate_hz = static_cast<std::uint32_t>(std::llround(acq.adc_sample_rate));
    block.led_on = led_on;
    block.rng_seed = seed;
    block.config_digest = config_digest(phys, acq);
    block.codes.reserve(n_codes);

    std::vector<std::int64_t> counts, pe1, pe2;
    std::vector<double> diff, volts;
    for (std::size_t done = 0; done < n_codes;) {
        const std::size_t codes = std::min(kChunkCodes, n_codes - done);
        const std::size_t samples = codes * kOversampling;
        counts.resize(samples);
        pe1.resize(samples);
        pe2.resize(samples);
        diff.resize(samples);
        volts.resize(samples);

        source.generate(counts);
        detector.detect(counts, pe1, pe2);
        for (std::size_t i = 0; i < samples; ++i) diff[i] = static_cast<double>(pe1[i] - pe2[i]);
        chain.process(diff, volts);
        adc.sample(volts, block.codes);
        done += codes;
    }
    return block;
}

std::vector<SweepPoint> current_sweep(const PhysicsConfig& phys, const AcquisitionConfig& acq, std::size_t steps,
                                      std::size_t codes_per_step, std::uint64_t seed) {
    if (steps < 3) throw UsageError("current_sweep: steps must be >= 3");
    if (codes_per_step < 2) throw UsageError("current_sweep: codes_per_step must be >= 2");

    const std::uint64_t base = stream_seed(seed, Stream::sweep);
    std::vector<SweepPoint> points;
    points.reserve(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        PhysicsConfig step = phys;
        step.drive_current = phys.drive_current * static_cast<double>(k) / static_cast<double>(steps - 1);
        const auto block = simulate_run(step, acq, codes_per_step, true, derive_seed(base, k));
        points.push_back({step.drive_current, entropy::noise_stats(block).variance});
    }
    return points;
}

}  // namespace qrng::sim
