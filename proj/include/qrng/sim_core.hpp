#pragma once

#include "qrng/config.hpp"
#include "qrng/raw_block.hpp"
#include "qrng/rng.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace qrng::sim {

/// The analog chain runs at this multiple of the ADC rate; the ADC keeps
/// the last sample of each group.
inline constexpr int kOversampling = 4;

/// Sub-stream identifiers; composing the free functions with one seed
/// reproduces simulate_run exactly.
enum class Stream : std::uint64_t { photons = 1, detection = 2, analog = 3, adc = 4, sweep = 5 };

inline std::uint64_t stream_seed(std::uint64_t seed, Stream s) {
    return derive_seed(seed, static_cast<std::uint64_t>(s));
}

double internal_sample_rate(const AcquisitionConfig& acq);

/// Pole of the impulse-invariant single-pole low-pass, exp(-2 pi fc / fs).
double lowpass_pole(double cutoff_hz, double sample_rate_hz);

/// Standard deviation of white noise after the single-pole filter, per unit
/// input standard deviation: sqrt((1-a)/(1+a)).
double lowpass_noise_gain(double pole);

/// Gaussian ADC noise (codes rms) that brings a full-scale sine to the
/// configured ENOB once quantization noise is included.
double adc_noise_sigma_codes(const AcquisitionConfig& acq);

/// Mean photocurrent (A) of a single detector collecting the whole flux:
/// i = eta * e * Phi.
double mean_photocurrent(const PhysicsConfig& phys, double sample_rate_hz);
/// Optical power (W) of the flux at drive_current: P = Phi * hbar omega.
double optical_power(const PhysicsConfig& phys, double sample_rate_hz);

/// Poisson photon source with band-limited common-mode intensity noise.
/// λ(t) = flux_coefficient * drive_current * max(0, 1 + c(t)), where c is a
/// stationary AR(1) Gaussian process of rms classical_mod_depth and corner
/// classical_mod_cutoff.
class PhotonSource {
  public:
    PhotonSource(const PhysicsConfig& phys, double sample_rate_hz, std::uint64_t seed);
    void generate(std::span<std::int64_t> out);

  private:
    double mean_;
    double depth_;
    double pole_;
    double innovation_;
    double modulation_ = 0.0;
    bool primed_ = false;
    Engine engine_;
};

/// Routes photons to two photodiodes and thins by quantum efficiency.
class Detector {
  public:
    Detector(const PhysicsConfig& phys, std::uint64_t seed);
    void detect(std::span<const std::int64_t> counts, std::span<std::int64_t> pe1, std::span<std::int64_t> pe2);

    double arm1_probability() const { return arm1_; }
    double arm2_probability() const { return arm2_; }

  private:
    double arm1_;             // P(photon -> PD1 and detected)
    double arm2_conditional_; // P(detected at PD2 | not detected at PD1)
    double arm2_;
    Engine engine_;
};

/// Counts -> current -> TIA + voltage gain, with electronic noise, band
/// limited by a single pole at pd_bandwidth, then offset.
class AnalogChain {
  public:
    AnalogChain(const AcquisitionConfig& acq, std::uint64_t seed, double electron_charge = kElectronCharge);
    void process(std::span<const double> diff, std::span<double> volts);

    double volts_per_count() const { return volts_per_count_; }
    double pole() const { return pole_; }

  private:
    double volts_per_count_;
    double pole_;
    double noise_rms_;
    double offset_;
    double state_ = 0.0;
    Engine engine_;
};

/// Decimating ADC: keeps one sample in kOversampling, adds calibrated noise,
/// rounds to the nearest code and clamps to [0, 2^bits - 1].
class Adc {
  public:
    Adc(const AcquisitionConfig& acq, std::uint64_t seed);
    void sample(std::span<const double> volts, std::vector<std::uint16_t>& codes);

  private:
    double codes_per_volt_;
    double noise_sigma_;
    double max_code_;
    std::uint64_t phase_ = 0;
    Engine engine_;
};

struct DetectorOutput {
    std::vector<std::int64_t> pe1;
    std::vector<std::int64_t> pe2;
};

struct SweepPoint {
    double drive_current;  // mA
    double variance;       // codes^2
};

std::vector<std::int64_t> generate_photon_counts(const PhysicsConfig& phys, std::size_t n, double sample_rate_hz,
                                                 std::uint64_t seed);

DetectorOutput split_and_detect(std::span<const std::int64_t> counts, const PhysicsConfig& phys, std::uint64_t seed);

std::vector<std::int64_t> balanced_difference(std::span<const std::int64_t> pe1, std::span<const std::int64_t> pe2);

std::vector<double> analog_chain(std::span<const double> diff, const AcquisitionConfig& acq, std::uint64_t seed,
                                 double electron_charge = kElectronCharge);
std::vector<double> analog_chain(std::span<const std::int64_t> diff, const AcquisitionConfig& acq, std::uint64_t seed,
                                 double electron_charge = kElectronCharge);

RawCodeBlock adc_sample(std::span<const double> volts, const AcquisitionConfig& acq, std::uint64_t seed);

/// Full chain at the ADC rate. led_on = false forces drive_current to zero.
RawCodeBlock simulate_run(const PhysicsConfig& phys, const AcquisitionConfig& acq, std::size_t n_codes, bool led_on,
                          std::uint64_t seed);

/// Steps drive_current linearly from 0 to phys.drive_current and records the
/// output code variance at each step.
std::vector<SweepPoint> current_sweep(const PhysicsConfig& phys, const AcquisitionConfig& acq, std::size_t steps,
                                      std::size_t codes_per_step, std::uint64_t seed);

}  // namespace qrng::sim
