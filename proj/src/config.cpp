#include "qrng/config.hpp"

#include <openssl/sha.h>

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace qrng {

namespace {

// Visits every configurable field with its `section.key` name. Works for
// both const and mutable configs.
template <class Cfg, class F>
void visit_physics(Cfg& p, F&& f) {
    f("physics.drive_current", p.drive_current);
    f("physics.flux_coefficient", p.flux_coefficient);
    f("physics.split_ratio", p.split_ratio);
    f("physics.split_imbalance_epsilon", p.split_imbalance_epsilon);
    f("physics.quantum_efficiency", p.quantum_efficiency);
    f("physics.classical_mod_depth", p.classical_mod_depth);
    f("physics.classical_mod_cutoff", p.classical_mod_cutoff);
    f("physics.electron_charge", p.electron_charge);
    f("physics.photon_energy", p.photon_energy);
}

template <class Cfg, class F>
void visit_acquisition(Cfg& a, F&& f) {
    f("acquisition.transimpedance_gain", a.transimpedance_gain);
    f("acquisition.voltage_gain", a.voltage_gain);
    f("acquisition.load_resistance", a.load_resistance);
    f("acquisition.pd_bandwidth", a.pd_bandwidth);
    f("acquisition.offset_volts", a.offset_volts);
    f("acquisition.full_scale_volts", a.full_scale_volts);
    f("acquisition.adc_bits", a.adc_bits);
    f("acquisition.adc_enob", a.adc_enob);
    f("acquisition.adc_sample_rate", a.adc_sample_rate);
    f("acquisition.electronic_noise_rms", a.electronic_noise_rms);
    f("acquisition.adc_noise_enabled", a.adc_noise_enabled);
}

template <class Cfg, class F>
void visit_extractor(Cfg& e, F&& f) {
    f("extractor.n", e.n);
    f("extractor.m", e.m);
    f("extractor.bits_per_code", e.bits_per_code);
    f("extractor.security_exponent", e.security_exponent);
}

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

std::string format_value(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}
std::string format_value(int v) { return std::to_string(v); }
std::string format_value(std::size_t v) { return std::to_string(v); }
std::string format_value(bool v) { return v ? "true" : "false"; }

void parse_value(const std::string& key, const std::string& text, double& out) {
    // strtod accepts exponents and is locale-stable for the "C" locale used here.
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end == text.c_str() || *end != '\0' || !std::isfinite(v))
        throw ConfigError("config key '" + key + "': not a finite number: '" + text + "'");
    out = v;
}

template <class Int>
void parse_integer(const std::string& key, const std::string& text, Int& out) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw ConfigError("config key '" + key + "': not an integer: '" + text + "'");
    out = v;
}
void parse_value(const std::string& key, const std::string& text, int& out) { parse_integer(key, text, out); }
void parse_value(const std::string& key, const std::string& text, std::size_t& out) {
    parse_integer(key, text, out);
}

void parse_value(const std::string& key, const std::string& text, bool& out) {
    if (text == "true" || text == "1") {
        out = true;
    } else if (text == "false" || text == "0") {
        out = false;
    } else {
        throw ConfigError("config key '" + key + "': not a boolean: '" + text + "'");
    }
}

}  // namespace

void PhysicsConfig::validate() const {
    if (!(drive_current >= 0.0)) throw ConfigError("physics.drive_current must be >= 0");
    if (!(flux_coefficient > 0.0)) throw ConfigError("physics.flux_coefficient must be > 0");
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("physics.split_ratio must lie in (0,1)");
    if (!(quantum_efficiency > 0.0 && quantum_efficiency <= 1.0))
        throw ConfigError("physics.quantum_efficiency must lie in (0,1]");
    if (!(classical_mod_depth >= 0.0)) throw ConfigError("physics.classical_mod_depth must be >= 0");
    if (!(classical_mod_cutoff > 0.0)) throw ConfigError("physics.classical_mod_cutoff must be > 0");
    if (!(electron_charge > 0.0)) throw ConfigError("physics.electron_charge must be > 0");
    if (!(photon_energy > 0.0)) throw ConfigError("physics.photon_energy must be > 0");
}

std::vector<std::string> AcquisitionConfig::validate() const {
    if (!(full_scale_volts > 0.0)) throw ConfigError("acquisition.full_scale_volts must be > 0");
    if (adc_bits < 1 || adc_bits > 16) throw ConfigError("acquisition.adc_bits must lie in [1,16]");
    if (!(adc_enob > 0.0 && adc_enob <= adc_bits))
        throw ConfigError("acquisition.adc_enob must lie in (0, adc_bits]");
    if (!(adc_sample_rate > 0.0)) throw ConfigError("acquisition.adc_sample_rate must be > 0");
    if (!(pd_bandwidth > 0.0)) throw ConfigError("acquisition.pd_bandwidth must be > 0");
    if (!(electronic_noise_rms >= 0.0)) throw ConfigError("acquisition.electronic_noise_rms must be >= 0");
    if (!(load_resistance > 0.0)) throw ConfigError("acquisition.load_resistance must be > 0");

    std::vector<std::string> warnings;
    if (adc_sample_rate > pd_bandwidth) {
        warnings.push_back("acquisition.adc_sample_rate (" + format_value(adc_sample_rate) +
                           " Sa/s) exceeds pd_bandwidth (" + format_value(pd_bandwidth) +
                           " Hz); successive codes will be correlated");
    }
    return warnings;
}

void ExtractorConfig::validate() const {
    if (bits_per_code == 0) throw ConfigError("extractor.bits_per_code must be >= 1");
    if (n == 0 || n % bits_per_code != 0)
        throw ConfigError("extractor.n must be a positive multiple of extractor.bits_per_code");
    if (m < 1 || m > n) throw ConfigError("extractor.m must lie in [1, n]");
    if (security_exponent < 0) throw ConfigError("extractor.security_exponent must be >= 0");
}

Config parse_config(const std::string& text) {
    Config cfg;
    std::map<std::string, std::string> values;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string content = trim(line);
        if (content.empty()) continue;
        const auto eq = content.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(std::string_view(content).substr(0, eq));
        std::string value = trim(std::string_view(content).substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key or value");
        if (!values.emplace(key, value).second)
            throw ConfigError("config key '" + key + "' given twice");
    }

    auto assign = [&](const char* key, auto& field) {
        if (const auto it = values.find(key); it != values.end()) {
            parse_value(key, it->second, field);
            values.erase(it);
        }
    };
    visit_physics(cfg.physics, assign);
    visit_acquisition(cfg.acquisition, assign);
    visit_extractor(cfg.extractor, assign);
    if (!values.empty()) throw ConfigError("unknown config key '" + values.begin()->first + "'");
    return cfg;
}

Config load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const Config& cfg) {
    std::string out;
    auto emit = [&](const char* key, const auto& field) {
        out += key;
        out += " = ";
        out += format_value(field);
        out += '\n';
    };
    visit_physics(cfg.physics, emit);
    visit_acquisition(cfg.acquisition, emit);
    visit_extractor(cfg.extractor, emit);
    return out;
}

std::uint64_t config_digest(const PhysicsConfig& phys, const AcquisitionConfig& acq) {
    std::string canonical;
    auto emit = [&](const char* key, const auto& field) {
        canonical += key;
        canonical += '=';
        canonical += format_value(field);
        canonical += '\n';
    };
    visit_physics(phys, emit);
    visit_acquisition(acq, emit);

    std::array<unsigned char, SHA256_DIGEST_LENGTH> md{};
    SHA256(reinterpret_cast<const unsigned char*>(canonical.data()), canonical.size(), md.data());
    std::uint64_t digest = 0;
    for (int i = 7; i >= 0; --i) digest = (digest << 8) | md[static_cast<std::size_t>(i)];
    return digest;
}

std::filesystem::path default_config_path() {
    if (const char* env = std::getenv("QRNG_CONFIG"); env != nullptr && *env != '\0') return env;
    return QRNG_DEFAULT_CONFIG;
}

}  // namespace qrng
