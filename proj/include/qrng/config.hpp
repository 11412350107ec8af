#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace qrng {

/// Raised for invalid configuration values or malformed config files.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Raised when an operation's preconditions on its arguments are violated.
class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline constexpr double kElectronCharge = 1.602176634e-19;  // C
inline constexpr double kPlanckReduced = 1.054571817e-34;   // J s

/// Optical source and balanced-detector parameters.
///
/// The calibration knobs (flux_coefficient, classical_mod_depth) default to
/// neutral values here; the calibrated device lives in config/default.conf.
struct PhysicsConfig {
    double drive_current = 70.0;            // mA
    double flux_coefficient = 1.0;          // photons per internal sample interval per mA
    double split_ratio = 0.5;               // fraction routed to PD1
    double split_imbalance_epsilon = 0.0;   // relative excess routed to PD1
    double quantum_efficiency = 1.0;
    double classical_mod_depth = 0.0;       // rms of relative common-mode intensity modulation
    double classical_mod_cutoff = 1.0e3;    // Hz
    double electron_charge = kElectronCharge;
    double photon_energy = 2.9e-19;         // J, ~ hbar*omega at 685 nm

    void validate() const;
};

/// Analog front end and ADC parameters.
struct AcquisitionConfig {
    double transimpedance_gain = 1.0;       // V/A
    double voltage_gain = 1.0;
    double load_resistance = 50.0;          // ohm
    double pd_bandwidth = 250.0e3;          // Hz
    double offset_volts = 1.65;
    double full_scale_volts = 3.3;
    int adc_bits = 12;
    double adc_enob = 8.0;
    double adc_sample_rate = 100.0e3;       // Sa/s
    double electronic_noise_rms = 0.0;      // V, referred to the ADC input before band limiting
    bool adc_noise_enabled = true;

    /// Throws ConfigError on hard violations; returns human-readable warnings.
    std::vector<std::string> validate() const;
};

/// Block parameters of the Toeplitz conditioner.
struct ExtractorConfig {
    std::size_t n = 4092;                   // input bits per block
    std::size_t m = 1705;                   // output bits per block
    std::size_t bits_per_code = 12;
    int security_exponent = 50;             // statistical distance 2^-security_exponent

    void validate() const;
};

struct Config {
    PhysicsConfig physics;
    AcquisitionConfig acquisition;
    ExtractorConfig extractor;
};

/// Parses flat `section.key = value` text. Unknown keys are errors; keys
/// that are absent keep their struct defaults.
Config parse_config(const std::string& text);
Config load_config(const std::filesystem::path& path);

/// Canonical text form; parse_config(serialize_config(c)) reproduces c exactly.
std::string serialize_config(const Config& cfg);

/// 64-bit digest over the physics and acquisition sections (first eight
/// bytes of SHA-256 of their canonical text, little-endian).
std::uint64_t config_digest(const PhysicsConfig& phys, const AcquisitionConfig& acq);

std::filesystem::path default_config_path();

}  // namespace qrng
